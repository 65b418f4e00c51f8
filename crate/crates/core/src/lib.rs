//! Simulation of quantum-battery charging on the one-dimensional ANNNI spin
//! chain via double quantum quenches.
//!
//! The crate builds the chain Hamiltonian as a sparse matrix, prepares ground
//! states with restarted Lanczos, evolves states with Krylov matrix
//! exponentials, and sweeps the charging-power figure of merit over coupling
//! grids, including a fidelity-susceptibility locator for the finite-size
//! Ising pseudo-critical point.

pub mod charging;
pub mod config;
pub mod eigen;
pub mod error;
pub mod operator;
pub mod output;
pub mod propagate;
pub mod sweep;

pub use charging::{p_max_of, run_charging, ChargingTrace, QuenchSpec};
pub use config::{GridSpec, RunConfig};
pub use eigen::{dense_spectrum, ground_state, GroundStateResult, SolverOptions};
pub use error::{Error, Result};
pub use operator::{
    apply, build_hamiltonian, expectation, ChainParams, SparseHamiltonian, StateVector,
};
pub use propagate::{dense_expm_apply, evolve, PropagatorOptions};
pub use sweep::{
    locate_critical_point, peak_prominence, run_sweep, Axis, CriticalPointEstimate, ProtocolKind,
    SweepOptions, SweepProtocol, SweepResult,
};

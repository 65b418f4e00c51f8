//! Run configuration: built-in default parameters, flat key-value config files,
//! and the CLI-flag > config-file > default precedence rule.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::charging::{uniform_tau_grid, QuenchSpec};
use crate::eigen::SolverOptions;
use crate::error::{Error, Result};
use crate::operator::{ChainParams, DEFAULT_MAX_L};
use crate::propagate::PropagatorOptions;
use crate::sweep::{ProtocolKind, SweepOptions, SweepProtocol};

/// Uniform grid written as `start:stop:n` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "grid must be start:stop:n, got `{s}`"
            )));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad grid start `{}`", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| Error::Config(format!("bad grid stop `{}`", parts[1])))?;
        let n: usize = parts[2]
            .parse()
            .map_err(|_| Error::Config(format!("bad grid point count `{}`", parts[2])))?;
        if n < 2 || stop <= start {
            return Err(Error::Config(format!(
                "grid `{s}` needs stop > start and at least 2 points"
            )));
        }
        Ok(GridSpec { start, stop, n })
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.n)
    }
}

/// Fully resolved run configuration. Every field has a value after parsing and
/// the whole struct round-trips losslessly through the JSON manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub protocol: ProtocolKind,
    pub l: u32,
    pub j1: f64,
    pub h: f64,
    pub kappa: f64,
    pub dkappa: f64,
    pub dh: f64,
    pub kappa_grid: GridSpec,
    pub h_grid: GridSpec,
    pub tau_max: f64,
    pub tau_points: usize,
    pub workers: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub emit_svg: bool,
    pub max_l: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            protocol: ProtocolKind::KappaQuench,
            l: 16,
            j1: 1.0,
            h: 0.4,
            kappa: 0.0,
            dkappa: 0.1,
            dh: 0.1,
            kappa_grid: GridSpec {
                start: 0.0,
                stop: 1.0,
                n: 41,
            },
            h_grid: GridSpec {
                start: 0.2,
                stop: 2.0,
                n: 37,
            },
            tau_max: 20.0,
            tau_points: 101,
            workers: 0,
            seed: crate::eigen::DEFAULT_SEED,
            out: PathBuf::from("."),
            emit_svg: false,
            max_l: max_l_from_env(),
        }
    }
}

/// Dimension cap, overridable through the `QB_MAX_L` environment variable.
pub fn max_l_from_env() -> u32 {
    match std::env::var("QB_MAX_L") {
        Ok(v) => v.parse().unwrap_or(DEFAULT_MAX_L),
        Err(_) => DEFAULT_MAX_L,
    }
}

pub fn parse_protocol(s: &str) -> Result<ProtocolKind> {
    match s {
        "kappa-quench" => Ok(ProtocolKind::KappaQuench),
        "field-quench-tfi" => Ok(ProtocolKind::FieldQuenchTfi),
        "hybrid" => Ok(ProtocolKind::HybridTfiAnnni),
        "custom" => Ok(ProtocolKind::Custom),
        other => Err(Error::Config(format!(
            "unknown protocol `{other}` (expected kappa-quench, field-quench-tfi, hybrid or custom)"
        ))),
    }
}

pub fn protocol_name(kind: ProtocolKind) -> &'static str {
    match kind {
        ProtocolKind::KappaQuench => "kappa-quench",
        ProtocolKind::FieldQuenchTfi => "field-quench-tfi",
        ProtocolKind::HybridTfiAnnni => "hybrid",
        ProtocolKind::Custom => "custom",
    }
}

impl RunConfig {
    /// Apply a flat `key = value` config file. Keys are identical to the long
    /// flag names; unknown keys are errors.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                ))
            })?;
            self.set_key(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value `{value}` for key `{key}`")))
        }
        match key {
            "L" => self.l = num(key, value)?,
            "h" => self.h = num(key, value)?,
            "kappa" => self.kappa = num(key, value)?,
            "dkappa" => self.dkappa = num(key, value)?,
            "dh" => self.dh = num(key, value)?,
            "protocol" => self.protocol = parse_protocol(value)?,
            "kappa-grid" => self.kappa_grid = GridSpec::parse(value)?,
            "h-grid" => self.h_grid = GridSpec::parse(value)?,
            "tau-max" => self.tau_max = num(key, value)?,
            "tau-points" => self.tau_points = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "emit-svg" => self.emit_svg = num(key, value)?,
            "boundary" => match value {
                "open" => {}
                "closed" => {
                    return Err(Error::Config(
                        "boundary `closed` is reserved and not supported".into(),
                    ))
                }
                other => return Err(Error::Config(format!("unknown boundary `{other}`"))),
            },
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Constraint checks shared by every subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(Error::Config("L must be >= 1".into()));
        }
        if self.l > self.max_l {
            return Err(Error::Config(format!(
                "L = {} exceeds the maximum {} (override with QB_MAX_L)",
                self.l, self.max_l
            )));
        }
        let kappa_active =
            self.uses_kappa() && (self.kappa != 0.0 || self.kappa + self.dkappa != 0.0);
        if self.l < 3 && kappa_active {
            return Err(Error::Config(format!(
                "the next-nearest-neighbor coupling is undefined at L = {}; kappa requires L >= 3",
                self.l
            )));
        }
        if self.tau_points < 2 || self.tau_max <= 0.0 {
            return Err(Error::Config(
                "tau grid needs tau-max > 0 and >= 2 points".into(),
            ));
        }
        Ok(())
    }

    fn uses_kappa(&self) -> bool {
        !matches!(self.protocol, ProtocolKind::FieldQuenchTfi)
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        uniform_tau_grid(self.tau_max, self.tau_points)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            seed: self.seed,
            ..SolverOptions::default()
        }
    }

    pub fn propagator_options(&self) -> PropagatorOptions {
        PropagatorOptions::default()
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            solver: self.solver_options(),
            propagator: self.propagator_options(),
            workers: self.workers,
        }
    }

    /// Resolve the sweep protocol this config describes.
    pub fn sweep_protocol(&self) -> Result<SweepProtocol> {
        let grid = match self.protocol.axis() {
            crate::sweep::Axis::Kappa => self.kappa_grid.points(),
            crate::sweep::Axis::H => self.h_grid.points(),
        };
        let mut proto = SweepProtocol::new(self.protocol, self.l, self.h, grid)?;
        proto.kappa = self.kappa;
        proto.delta_kappa = self.dkappa;
        proto.delta_h = self.dh;
        proto.tau_grid = self.tau_grid();
        Ok(proto)
    }

    /// Resolve the single charging instance for the `charge` subcommand: the
    /// configured protocol evaluated at (h, kappa).
    pub fn quench_spec(&self) -> Result<QuenchSpec> {
        let (p0, p1) = self.charge_params()?;
        QuenchSpec::new(p0, p1, self.tau_grid())
    }

    fn charge_params(&self) -> Result<(ChainParams, ChainParams)> {
        let l = self.l;
        match self.protocol {
            ProtocolKind::KappaQuench => Ok((
                ChainParams::with_kappa(l, self.kappa, self.h)?,
                ChainParams::with_kappa(l, self.kappa + self.dkappa, self.h)?,
            )),
            ProtocolKind::FieldQuenchTfi => Ok((
                ChainParams::with_kappa(l, 0.0, self.h)?,
                ChainParams::with_kappa(l, 0.0, self.h + self.dh)?,
            )),
            ProtocolKind::HybridTfiAnnni => Ok((
                ChainParams::with_kappa(l, 0.0, self.h)?,
                ChainParams::with_kappa(l, self.dkappa, self.h)?,
            )),
            ProtocolKind::Custom => Ok((
                ChainParams::with_kappa(l, self.kappa, self.h)?,
                ChainParams::with_kappa(l, self.kappa + self.dkappa, self.h + self.dh)?,
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_defaults() {
        let c = RunConfig::default();
        assert_eq!(c.l, 16);
        assert_eq!(c.h, 0.4);
        assert_eq!(c.dkappa, 0.1);
        assert_eq!(c.tau_max, 20.0);
        assert_eq!(c.tau_points, 101);
        assert_eq!(c.protocol, ProtocolKind::KappaQuench);
        let grid = c.tau_grid();
        assert_eq!(grid.len(), 101);
        assert_eq!(grid[0], 0.0);
        assert_eq!(*grid.last().unwrap(), 20.0);
    }

    #[test]
    fn file_overrides_defaults() {
        let mut c = RunConfig::default();
        c.apply_file("# comment\nL = 12\nh = 0.2\nkappa-grid = 0:0.5:11\n")
            .unwrap();
        assert_eq!(c.l, 12);
        assert_eq!(c.h, 0.2);
        assert_eq!(c.kappa_grid.n, 11);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_errors() {
        let mut c = RunConfig::default();
        assert!(c.apply_file("frobnicate = 3\n").is_err());
        assert!(c.apply_file("L = twelve\n").is_err());
        assert!(c.apply_file("boundary = closed\n").is_err());
        assert!(c.apply_file("boundary = open\n").is_ok());
    }

    #[test]
    fn l2_with_kappa_is_rejected() {
        let c = RunConfig {
            l: 2,
            kappa: 0.3,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn grid_spec_parsing() {
        let g = GridSpec::parse("0:1:41").unwrap();
        assert_eq!(g.points().len(), 41);
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.points()[40], 1.0);
        assert!(GridSpec::parse("1:0:5").is_err());
        assert!(GridSpec::parse("0:1").is_err());
        assert!(GridSpec::parse("a:b:c").is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let c = RunConfig::default();
        let json = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(c, back);
    }
}

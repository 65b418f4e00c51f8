//! Result serialization: CSV curves, deterministic SVG figures and JSON run
//! manifests with file checksums.
//!
//! Every emitter produces byte-identical output for identical input. Floats
//! are printed with Rust's shortest round-trip formatting, so parsing a CSV
//! and re-serializing it reproduces the original bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::charging::{ChargingTrace, TraceSample};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::sweep::SweepResult;

pub const TRACE_CSV_HEADER: &str = "tau,W_per_spin,P_per_spin,W_total,P_total";
pub const SWEEP_CSV_HEADER: &str = "axis,p_max_per_spin,tau_star,W_at_tau_star_per_spin,status";

/// Charging trace as CSV text.
pub fn trace_csv_string(trace: &ChargingTrace) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for s in &trace.samples {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.tau, s.w_per_spin, s.p_per_spin, s.w_total, s.p_total
        ));
    }
    out
}

pub fn emit_trace_csv(trace: &ChargingTrace, path: &Path) -> Result<()> {
    write_text(path, &trace_csv_string(trace))
}

/// Parse a trace CSV back into samples (header checked).
pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceSample>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_CSV_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "bad trace CSV header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Config(format!(
                "trace CSV row {}: expected 5 fields",
                i + 2
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Config(format!("trace CSV row {}: bad float `{s}`", i + 2)))
        };
        samples.push(TraceSample {
            tau: parse(fields[0])?,
            w_per_spin: parse(fields[1])?,
            p_per_spin: parse(fields[2])?,
            w_total: parse(fields[3])?,
            p_total: parse(fields[4])?,
        });
    }
    Ok(samples)
}

/// Sweep result as CSV text.
pub fn sweep_csv_string(result: &SweepResult) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.axis_value, p.p_max_per_spin, p.tau_star, p.w_at_tau_star_per_spin, p.status
        ));
    }
    out
}

pub fn emit_sweep_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_text(path, &sweep_csv_string(result))
}

/// One plotted curve.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct FigureOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Vertical shaded band between two axis positions, e.g. the two
    /// critical-point estimates of a sweep.
    pub shaded_band: Option<(f64, f64)>,
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
];

/// Render one or more curves as a self-contained SVG string.
pub fn figure_svg(series: &[Series], opts: &FigureOptions) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Config("figure needs at least one series".into()));
    }
    for s in series {
        if s.points.len() < 2 {
            return Err(Error::Config(format!(
                "series `{}` needs at least 2 points",
                s.label
            )));
        }
    }

    let all = series.iter().flat_map(|s| s.points.iter());
    let mut x_min = f64::MAX;
    let mut x_max = f64::MIN;
    let mut y_min = f64::MAX;
    let mut y_max = f64::MIN;
    for &(x, y) in all {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    // Degenerate ranges get +/-5% padding around the value.
    if x_max <= x_min {
        let pad = pad_for(x_min);
        x_min -= pad;
        x_max += pad;
    }
    if y_max <= y_min {
        let pad = pad_for(y_min);
        y_min -= pad;
        y_max += pad;
    } else {
        let pad = 0.05 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;
    }

    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| MARGIN_T + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");

    if let Some((a, b)) = opts.shaded_band {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let lo = lo.clamp(x_min, x_max);
        let hi = hi.clamp(x_min, x_max);
        if hi > lo {
            svg.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"#ffb347\" fill-opacity=\"0.35\"/>\n",
                sx(lo),
                MARGIN_T,
                sx(hi) - sx(lo),
                plot_h
            ));
        }
    }

    // Frame.
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
    ));

    // Ticks and labels.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x_min + f * (x_max - x_min);
        let yv = y_min + f * (y_max - y_min);
        let xp = sx(xv);
        let yp = sy(yv);
        svg.push_str(&format!(
            "<line x1=\"{xp:.2}\" y1=\"{:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"#333333\"/>\n",
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{xp:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\" \
             font-family=\"sans-serif\">{}</text>\n",
            MARGIN_T + plot_h + 18.0,
            tick_label(xv)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{MARGIN_L}\" y2=\"{yp:.2}\" stroke=\"#333333\"/>\n",
            MARGIN_L - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\" \
             font-family=\"sans-serif\">{}</text>\n",
            MARGIN_L - 8.0,
            yp + 4.0,
            tick_label(yv)
        ));
    }

    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         font-family=\"sans-serif\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        SVG_H - 12.0,
        escape(&opts.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" transform=\"rotate(-90 16 {:.2})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(&opts.y_label)
    ));
    if !opts.title.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\" \
             font-family=\"sans-serif\">{}</text>\n",
            MARGIN_L + plot_w / 2.0,
            escape(&opts.title)
        ));
    }

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
        // Legend entry.
        let ly = MARGIN_T + 14.0 + 16.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" \
             stroke-width=\"1.5\"/>\n",
            MARGIN_L + plot_w - 120.0,
            MARGIN_L + plot_w - 96.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" font-family=\"sans-serif\">{}</text>\n",
            MARGIN_L + plot_w - 90.0,
            ly + 4.0,
            escape(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_figure_svg(series: &[Series], opts: &FigureOptions, path: &Path) -> Result<()> {
    write_text(path, &figure_svg(series, opts)?)
}

fn pad_for(v: f64) -> f64 {
    if v == 0.0 {
        1.0
    } else {
        0.05 * v.abs()
    }
}

fn tick_label(v: f64) -> String {
    // Round away formatting noise from the 1/4 grid arithmetic.
    let r = (v * 1e6).round() / 1e6;
    format!("{r}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Record of one tool invocation: resolved config, timestamps, per-point
/// status and checksums of every emitted file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub per_point_status: Vec<String>,
    /// file name -> sha256 hex digest
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn start(config: RunConfig) -> Self {
        RunManifest {
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
            per_point_status: Vec::new(),
            checksums: BTreeMap::new(),
        }
    }

    /// Checksum an emitted file and remember it under its file name.
    pub fn record_file(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let digest = Sha256::digest(&bytes);
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.checksums.insert(name, hex(&digest));
        Ok(())
    }

    pub fn finish(&mut self) {
        self.finished_unix_ms = now_ms();
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
        write_text(path, &(json + "\n"))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad manifest: {e}")))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::Io {
                path: parent.to_path_buf(),
                source: e,
            })?;
        }
    }
    fs::write(path, content).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

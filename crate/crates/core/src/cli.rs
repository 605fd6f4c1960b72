//! Command-line front end: typed flags, TOML configs, one collector for outputs.
//!
//! Every run is described by an [`ExperimentConfig`]; writing it with
//! `--save-config` and replaying it with `--config` reproduces the outputs
//! byte for byte.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::carleman::aniso::{carleman_exponent, ProbeConfig};
use crate::carleman::divergence::{admissibility_divergence, log_divergence};
use crate::carleman::scaling_necessity_check;
use crate::eigen::{
    eigen_region_report, potential_exponent, potential_norm, smallness_threshold, EigenFlag, PotentialField, ReportOptions,
};
use crate::error::{Error, Result};
use crate::field::{encode_lamf, resolvent_solve, solve_residual, Domain, PeriodicGrid, VectorField};
use crate::fit::{loglog_fit, parse_scale_list};
use crate::geometry::{
    bound_profile, canonical_points, classify, parse_rational, region_polyline, render, zregion_boundary, ExponentPair, RegionTag,
};
use crate::sharpness::derivative::derivative_bound_check;
use crate::sharpness::focusing::{default_deltas, focusing_exponent, FocusingConfig};
use crate::sharpness::knapp::{knapp_exponent, KnappConfig, KnappObservation};
use crate::sharpness::stationary::stationary_check;
use crate::symbols::{
    carleman_symbol, conjugated_inverse, helmholtz_factors, imag_symbol, lame_matrix, leray_projector, reduced_symbols, resolvent_symbol,
    riesz_symbol, ImagVariant, LameParameters, SymbolMatrix,
};

#[derive(Parser, Debug)]
#[command(
    name = "lame",
    version,
    about = "Resolvent multipliers of the Lame operator: exponent regions, sharpness and Carleman experiments, eigenvalue reports"
)]
pub struct Cli {
    /// Seed of the single random generator used by a run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file holding a full experiment config; flags given here override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Writes the effective config as TOML before running.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
    /// Prints the full result as JSON on stdout.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Prints the result table as CSV on stdout.
    #[arg(long, global = true)]
    pub csv: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Exponent square: region membership, region polygons, and the spectral region Z(ell).
    Regions {
        #[command(subcommand)]
        action: RegionsCmd,
    },
    /// Point evaluation of the Lame, resolvent, Leray, Riesz, imaginary-part and Carleman symbols.
    Symbol {
        #[command(subcommand)]
        action: SymbolCmd,
    },
    /// Spectral solve of (L - z) u = f on a periodic box; writes a LAMF field.
    Solve(SolveArgs),
    /// Lower-bound sweeps: Knapp slabs, focusing near the sphere, stationary phase, symbol derivatives.
    Sharpness {
        #[command(subcommand)]
        action: SharpnessCmd,
    },
    /// Failure of the Carleman estimate: anisotropic probe, logarithmic divergences, scaling.
    Carleman {
        #[command(subcommand)]
        action: CarlemanCmd,
    },
    /// Eigenvalues of -L + V on a grid, flagged against Z(ell) under the smallness hypothesis.
    Eigen {
        #[command(subcommand)]
        action: EigenCmd,
    },
    /// Plot-ready CSV bundles: region polygons, Z(ell) boundaries, log-log series.
    Figures(FiguresArgs),
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionsCmd {
    /// Region tag of (x, y) = (1/p, 1/q) with the exponent gamma.
    Classify {
        #[arg(long)]
        dim: usize,
        /// 1/p as num/den.
        #[arg(long)]
        x: String,
        /// 1/q as num/den.
        #[arg(long)]
        y: String,
    },
    /// Vertices of a region polygon as exact rationals.
    Polyline {
        #[arg(long)]
        dim: usize,
        /// R1, R2tilde, R3tilde, R3tildePrime, OnSegmentBBprime, ...
        #[arg(long)]
        tag: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled boundary of {z off [0, inf) : kappa(z) <= ell}.
    Zboundary {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        ell: f64,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The named points of the exponent square.
    Points {
        #[arg(long)]
        dim: usize,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolCmd {
    /// Evaluates one symbol at one frequency.
    Eval(SymbolArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Lame,
    Resolvent,
    Helmholtz,
    Leray,
    Riesz,
    Imag,
    Carleman,
    Conjugated,
    Reduced,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    Raw,
    Normalized,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolArgs {
    #[arg(long, value_enum)]
    pub kind: SymbolKind,
    /// Frequency as comma-separated floats (xi' for `reduced`).
    #[arg(long)]
    pub xi: String,
    /// Spectral parameter such as -1+0.5i.
    #[arg(long, allow_hyphen_values = true, default_value = "-1")]
    pub z: String,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    /// Width for `imag` and `reduced`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Radial variable for `reduced`.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Component index for `riesz` (from 1).
    #[arg(long)]
    pub j: Option<usize>,
    /// Unit direction for `conjugated`, comma-separated.
    #[arg(long)]
    pub v: Option<String>,
    #[arg(long, value_enum, default_value_t = VariantArg::Raw)]
    pub variant: VariantArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// `e_1 exp(-|x|^2 / 2)`.
    Gaussian,
    /// Seeded uniform samples in every component.
    Random,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Half side length L of the box [-L, L)^d.
    #[arg(long = "box", default_value_t = 32.0)]
    #[serde(rename = "box")]
    pub half_length: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "-1+0.5i")]
    pub z: String,
    #[arg(long, value_enum, default_value_t = Source::Gaussian)]
    pub source: Source,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationArg {
    ADelta,
    Full,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpnessCmd {
    /// Knapp slab against the imaginary-part symbol: restricted ratio slope in delta.
    Knapp {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value = "2^-4..2^-10")]
        delta: String,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ObservationArg::ADelta)]
        observation: ObservationArg,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Focusing near the unit sphere: slope of the main term on B_delta and the background bound.
    Focusing {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 2.0)]
        rho: f64,
        #[arg(long, default_value_t = 100.0)]
        nu: f64,
        #[arg(long, default_value = "2^-24..2^-30")]
        delta: String,
        #[arg(long)]
        eps_circ: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quadrature against the leading stationary-phase term along the x_1 axis.
    Stationary {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value = "2^4..2^10")]
        x1: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical constants for the derivatives of a_delta and for sup |b_delta| / delta.
    Derivatives {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value = "2^-4..2^-10")]
        delta: String,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarlemanCmd {
    /// Anisotropic test field against the Carleman multiplier: ratio slope in delta.
    Probe {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value = "2^-4..2^-10")]
        delta: String,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re u_2(0) (or Re T_z h_eps(0) with --z) against ln(1/eps).
    Diverge {
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, default_value = "2^-3..2^-9")]
        eps: String,
        /// Unit-modulus spectral parameter; selects the admissibility series.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dilation exponent of the Carleman inverse between L^p and L^q.
    Scaling {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value = "1,0.8,0.64,0.5")]
        scales: String,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenCmd {
    /// Eigenvalue report under the smallness hypothesis |V| <= t / (C ell d^{1-1/p+1/q}).
    Report(EigenArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Half side length of the periodic box.
    #[arg(long = "box", default_value_t = PI)]
    #[serde(rename = "box")]
    pub half_length: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: String,
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    /// The resolvent-bound constant C; it is never inferred.
    #[arg(long)]
    pub c: f64,
    /// LAMF file with d^2 components.
    #[arg(long, conflicts_with = "random")]
    pub potential: Option<PathBuf>,
    /// Seeded random V scaled to this fraction of the smallness threshold.
    #[arg(long)]
    pub random: Option<f64>,
    /// With --random: draw a pointwise hermitian V.
    #[arg(long)]
    pub hermitian: bool,
    /// Keep the k eigenvalues nearest this point; required above the dense cap.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = crate::eigen::DENSE_CAP)]
    pub dense_cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    RegionsD3,
    RegionsD4,
    Zregion,
    Loglog,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiguresArgs {
    #[arg(long, value_enum)]
    pub kind: FigureKind,
    /// Dimension for `zregion`.
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value = "4/5")]
    pub x: String,
    #[arg(long, default_value = "1/5")]
    pub y: String,
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Sweep CSV for `loglog`; its first two columns are the scale and the value.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory receiving the bundle.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Summary,
    Json,
    Csv,
}

/// A complete, serializable description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    #[serde(default)]
    pub format: OutputFormat,
    pub command: Command,
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Format(format!("config: {e}")))
    }
}

/// What a run produced; [`emit`] is the only place that touches stdout and disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub summary: String,
    pub json: serde_json::Value,
    pub csv: Option<String>,
    pub files: Vec<(PathBuf, Vec<u8>)>,
}

impl RunOutput {
    fn new(summary: String, json: serde_json::Value, csv: Option<String>) -> Self {
        Self { summary, json, csv, files: Vec::new() }
    }

    fn with_file(mut self, path: Option<&PathBuf>, bytes: impl FnOnce() -> Vec<u8>) -> Self {
        if let Some(p) = path {
            self.files.push((p.clone(), bytes()));
        }
        self
    }

    fn csv_file(self, path: Option<&PathBuf>) -> Self {
        let body = self.csv.clone().unwrap_or_default().into_bytes();
        self.with_file(path, || body)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (and `i`, `-i`).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Domain(format!("cannot parse '{s}' as a complex number; use forms like -1+0.5i"));
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|r| Complex64::new(r, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |u: &str| -> Result<f64> {
        match u {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => u.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(body[..k].parse::<f64>().map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

/// Exponent `p` from an exact rational flag, or `inf`.
pub fn parse_exponent(s: &str) -> Result<f64> {
    let t = s.trim();
    if matches!(t, "inf" | "infinity" | "Inf") {
        return Ok(f64::INFINITY);
    }
    let r = parse_rational(t)?;
    let v = r.to_f64().ok_or_else(|| Error::Domain(format!("exponent '{s}' is not representable")))?;
    if !(v >= 1.0) {
        return Err(Error::Domain(format!("exponent must be at least 1, got {s}")));
    }
    Ok(v)
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| Error::Domain(format!("cannot parse '{t}' in '{s}' as a float")))).collect()
}

fn parse_pair(x: &str, y: &str) -> Result<ExponentPair> {
    ExponentPair::new(parse_rational(x)?, parse_rational(y)?)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {dim}")));
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Format(e.to_string()))
}

fn matrix_rows(m: &SymbolMatrix) -> serde_json::Value {
    json!(m.to_rows())
}

/// Executes a config without touching stdout or disk.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    match &config.command {
        Command::Regions { action } => run_regions(action),
        Command::Symbol { action: SymbolCmd::Eval(a) } => run_symbol(a),
        Command::Solve(a) => run_solve(a, config.seed),
        Command::Sharpness { action } => run_sharpness(action),
        Command::Carleman { action } => run_carleman(action),
        Command::Eigen { action: EigenCmd::Report(a) } => run_eigen(a, config.seed),
        Command::Figures(a) => run_figures(a),
    }
}

fn run_regions(cmd: &RegionsCmd) -> Result<RunOutput> {
    match cmd {
        RegionsCmd::Classify { dim, x, y } => {
            check_dim(*dim)?;
            let p = parse_pair(x, y)?;
            let tag = classify(*dim, &p)?;
            let prof = bound_profile(*dim, &p);
            let j = json!({
                "dim": dim, "x": render(p.x()), "y": render(p.y()), "tag": tag.name(),
                "has_bound": tag.has_bound(), "gamma": render(prof.gamma),
                "kappa_exponent": render(prof.kappa_exponent),
            });
            let csv = format!("x,y,tag,gamma\n{},{},{},{}\n", render(p.x()), render(p.y()), tag.name(), render(prof.gamma));
            Ok(RunOutput::new(format!("tag={} gamma={}", tag.name(), render(prof.gamma)), j, Some(csv)))
        }
        RegionsCmd::Polyline { dim, tag, out } => {
            check_dim(*dim)?;
            let tag: RegionTag = tag.parse()?;
            let pl = region_polyline(*dim, tag)?;
            let mut csv = String::from("x,y\n");
            for v in &pl.vertices {
                csv.push_str(&format!("{},{}\n", render(v.x()), render(v.y())));
            }
            let summary = format!("{}: {} vertices", tag.name(), pl.vertices.len());
            Ok(RunOutput::new(summary, to_json(&pl)?, Some(csv)).csv_file(out.as_ref()))
        }
        RegionsCmd::Zboundary { dim, x, y, ell, samples, out } => {
            check_dim(*dim)?;
            let p = parse_pair(x, y)?;
            let b = zregion_boundary(*dim, &p, *ell, *samples)?;
            let mut csv = String::from("re,im\n");
            for z in b.points() {
                csv.push_str(&format!("{:.17e},{:.17e}\n", z.re, z.im));
            }
            let pts: Vec<[f64; 2]> = b.points().iter().map(|z| [z.re, z.im]).collect();
            let summary = format!("Z boundary: {} samples", pts.len());
            Ok(RunOutput::new(summary, json!({ "points": pts }), Some(csv)).csv_file(out.as_ref()))
        }
        RegionsCmd::Points { dim } => {
            check_dim(*dim)?;
            let cp = canonical_points(*dim)?;
            let mut csv = String::from("name,x,y\n");
            let mut map = serde_json::Map::new();
            for (name, p) in cp.as_map() {
                csv.push_str(&format!("{name},{},{}\n", render(p.x()), render(p.y())));
                map.insert(name.to_string(), json!([render(p.x()), render(p.y())]));
            }
            Ok(RunOutput::new(format!("{} named points", map.len()), serde_json::Value::Object(map), Some(csv)))
        }
    }
}

fn run_symbol(a: &SymbolArgs) -> Result<RunOutput> {
    let params = LameParameters::new(a.mu, a.lambda)?;
    let xi = parse_floats(&a.xi)?;
    let z = parse_complex(&a.z)?;
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Domain(format!("--{name} is required for this kind")));
    let variant = match a.variant {
        VariantArg::Raw => ImagVariant::Raw,
        VariantArg::Normalized => ImagVariant::Normalized,
    };
    let (labels, m): (Option<Vec<&str>>, SymbolMatrix) = match a.kind {
        SymbolKind::Lame => (None, lame_matrix(&xi, z, &params)),
        SymbolKind::Resolvent => (None, resolvent_symbol(&xi, z, &params)?),
        SymbolKind::Helmholtz => {
            let (s, p) = helmholtz_factors(&xi, z, &params)?;
            (Some(vec!["shear", "pressure"]), SymbolMatrix::from_fn(2, |j, k| if j == k { [s, p][j] } else { Complex64::new(0.0, 0.0) }))
        }
        SymbolKind::Leray => (None, leray_projector(&xi)?),
        SymbolKind::Riesz => {
            let j = a.j.ok_or_else(|| Error::Domain("--j is required for riesz".into()))?;
            if j == 0 || j > xi.len() {
                return Err(Error::Domain(format!("--j must lie in 1..={}", xi.len())));
            }
            (None, SymbolMatrix::scalar(1, riesz_symbol(j - 1, &xi)?))
        }
        SymbolKind::Imag => {
            let r = imag_symbol(&xi, need(a.delta, "delta")?, params.rho(), variant)?;
            let c = |v: f64| Complex64::new(v, 0.0);
            (
                Some(vec!["total", "big", "small"]),
                SymbolMatrix::from_fn(3, |j, k| if j == k { c([r.total, r.big, r.small][j]) } else { c(0.0) }),
            )
        }
        SymbolKind::Carleman => (None, SymbolMatrix::scalar(1, carleman_symbol(&xi)?)),
        SymbolKind::Conjugated => {
            let v = parse_floats(a.v.as_deref().ok_or_else(|| Error::Domain("--v is required for conjugated".into()))?)?;
            (None, conjugated_inverse(&xi, &v, &params)?)
        }
        SymbolKind::Reduced => {
            let (av, bv) = reduced_symbols(need(a.tau, "tau")?, &xi, need(a.delta, "delta")?, params.rho())?;
            let c = |v: f64| Complex64::new(v, 0.0);
            (Some(vec!["a", "b"]), SymbolMatrix::from_fn(2, |j, k| if j == k { c([av, bv][j]) } else { c(0.0) }))
        }
    };
    // Labeled outputs are diagonal holders; report only their diagonals.
    let (entries, csv) = match &labels {
        Some(l) => {
            let diag: Vec<[f64; 2]> = (0..l.len()).map(|i| [m.get(i, i).re, m.get(i, i).im]).collect();
            let mut csv = String::from("name,re,im\n");
            for (n, v) in l.iter().zip(&diag) {
                csv.push_str(&format!("{n},{:.17e},{:.17e}\n", v[0], v[1]));
            }
            (json!([diag]), csv)
        }
        None => {
            let mut csv = String::from("row,col,re,im\n");
            for j in 0..m.dim() {
                for k in 0..m.dim() {
                    let v = m.get(j, k);
                    csv.push_str(&format!("{j},{k},{:.17e},{:.17e}\n", v.re, v.im));
                }
            }
            (matrix_rows(&m), csv)
        }
    };
    let kind = to_json(&a.kind)?;
    let summary = format!("{} symbol, max |entry| = {:.6e}", kind.as_str().unwrap_or("?"), m.max_abs());
    Ok(RunOutput::new(summary, json!({ "kind": kind, "labels": labels, "entries": entries }), Some(csv)))
}

fn run_solve(a: &SolveArgs, seed: u64) -> Result<RunOutput> {
    check_dim(a.dim)?;
    let params = LameParameters::new(a.mu, a.lambda)?;
    let z = parse_complex(&a.z)?;
    let grid = PeriodicGrid::cubic(a.dim, a.n, a.half_length)?;
    let d = a.dim;
    let f = match a.source {
        Source::Gaussian => VectorField::single(grid.clone(), Domain::Space, d, 0, |x| {
            Complex64::new((-0.5 * x.iter().map(|t| t * t).sum::<f64>()).exp(), 0.0)
        })?,
        Source::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let comps = (0..d)
                .map(|_| (0..grid.len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
                .collect();
            VectorField::new(grid.clone(), Domain::Space, comps)?
        }
    };
    let u = resolvent_solve(&f, z, &params)?;
    let residual = solve_residual(&u, &f, z, &params)?;
    let (l2, linf) = (u.lp_norm(2.0)?, u.max_abs());
    let j = json!({ "dim": d, "n": a.n, "box": a.half_length, "z": [z.re, z.im], "residual": residual, "norm_l2": l2, "norm_inf": linf });
    let csv = format!("residual,norm_l2,norm_inf\n{residual:.17e},{l2:.17e},{linf:.17e}\n");
    let mut out = RunOutput::new(format!("solve: residual={residual:.3e} |u|_2={l2:.6e}"), j, Some(csv));
    if let Some(p) = &a.out {
        out.files.push((p.clone(), encode_lamf(&grid, u.components())?));
    }
    Ok(out)
}

fn run_sharpness(cmd: &SharpnessCmd) -> Result<RunOutput> {
    match cmd {
        SharpnessCmd::Knapp { dim, p, q, delta, n, observation, mu, lambda, out } => {
            check_dim(*dim)?;
            let mut cfg = KnappConfig::new(*dim, parse_exponent(p)?, parse_exponent(q)?)?;
            cfg.params = LameParameters::new(*mu, *lambda)?;
            cfg.n = *n;
            cfg.observation = match observation {
                ObservationArg::ADelta => KnappObservation::ADelta,
                ObservationArg::Full => KnappObservation::Full,
            };
            let s = knapp_exponent(&cfg, &parse_scale_list(delta)?)?;
            let summary = format!("slope={:.4} expected={:.4} r2={:.5}", s.fit.slope, s.expected_slope, s.fit.r_squared);
            Ok(RunOutput::new(summary, to_json(&s)?, Some(s.to_csv())).csv_file(out.as_ref()))
        }
        SharpnessCmd::Focusing { dim, q, rho, nu, delta, eps_circ, out } => {
            check_dim(*dim)?;
            let mut cfg = FocusingConfig::new(*dim, parse_exponent(q)?, *rho)?;
            cfg.nu = *nu;
            if let Some(e) = eps_circ {
                cfg.eps_circ = *e;
            }
            let deltas = if delta.is_empty() { default_deltas() } else { parse_scale_list(delta)? };
            let s = focusing_exponent(&cfg, &deltas)?;
            let bg = s.fit_background.map(|f| format!("{:.4}", f.slope)).unwrap_or_else(|| "n/a".into());
            let summary = format!("slope={:.4} expected={:.4} background_slope={bg}", s.fit_main.slope, s.expected_slope);
            Ok(RunOutput::new(summary, to_json(&s)?, Some(s.to_csv())).csv_file(out.as_ref()))
        }
        SharpnessCmd::Stationary { dim, tau, delta, x1, out } => {
            check_dim(*dim)?;
            let mut list = parse_scale_list(x1)?;
            list.sort_by(f64::total_cmp);
            let c = stationary_check(*dim, *tau, *delta, &list)?;
            let mut csv = String::from("x1,rel_error\n");
            for (x, e) in c.x1.iter().zip(&c.rel_error) {
                csv.push_str(&format!("{x:.17e},{e:.17e}\n"));
            }
            let summary = format!("error slope={:.4} (target <= -0.9)", c.fit.slope);
            Ok(RunOutput::new(summary, to_json(&c)?, Some(csv)).csv_file(out.as_ref()))
        }
        SharpnessCmd::Derivatives { dim, delta, mu, lambda, out } => {
            check_dim(*dim)?;
            let params = LameParameters::new(*mu, *lambda)?;
            let t = derivative_bound_check(&parse_scale_list(delta)?, &params, *dim)?;
            let spread = t.spreads().into_iter().fold(0.0, f64::max);
            let summary = format!("max spread={spread:.3} uniform={}", t.is_uniform(10.0));
            Ok(RunOutput::new(summary, to_json(&t)?, Some(t.to_csv())).csv_file(out.as_ref()))
        }
    }
}

fn run_carleman(cmd: &CarlemanCmd) -> Result<RunOutput> {
    match cmd {
        CarlemanCmd::Probe { dim, p, q, delta, n, out } => {
            check_dim(*dim)?;
            let mut cfg = ProbeConfig::new(*dim, parse_exponent(p)?, parse_exponent(q)?);
            cfg.n = *n;
            let r = carleman_exponent(&cfg, &parse_scale_list(delta)?)?;
            let summary =
                format!("slope={:.4} expected={:.4} estimate_impossible={}", r.sweep.fit.slope, r.sweep.expected_slope, r.impossible);
            Ok(RunOutput::new(summary, to_json(&r)?, Some(r.to_csv())).csv_file(out.as_ref()))
        }
        CarlemanCmd::Diverge { mu, lambda, eps, z, out } => {
            let params = LameParameters::new(*mu, *lambda)?;
            let eps = parse_scale_list(eps)?;
            let (t, name) = match z {
                None => (log_divergence(&params, &eps)?, "re_u2_0"),
                Some(s) => (admissibility_divergence(parse_complex(s)?, params.rho(), &eps)?, "re_tz_h_eps_0"),
            };
            let summary = format!("slope={:.4} r2={:.5} monotone={}", t.fit.slope, t.fit.r_squared, t.is_monotone());
            Ok(RunOutput::new(summary, to_json(&t)?, Some(t.to_csv(name))).csv_file(out.as_ref()))
        }
        CarlemanCmd::Scaling { dim, p, q, scales } => {
            check_dim(*dim)?;
            let v = scaling_necessity_check(*dim, parse_exponent(p)?, parse_exponent(q)?, &parse_scale_list(scales)?)?;
            let mut csv = String::from("scale,ratio\n");
            for (s, r) in v.scales.iter().zip(&v.ratios) {
                csv.push_str(&format!("{s:.17e},{r:.17e}\n"));
            }
            let summary = format!("exponent={:.4} predicted={:.4} bounded={}", v.fit.slope, v.predicted, v.bounded);
            Ok(RunOutput::new(summary, to_json(&v)?, Some(csv)))
        }
    }
}

fn run_eigen(a: &EigenArgs, seed: u64) -> Result<RunOutput> {
    check_dim(a.dim)?;
    let params = LameParameters::new(a.mu, a.lambda)?;
    let (p, q) = (parse_exponent(&a.p)?, parse_exponent(&a.q)?);
    let s = potential_exponent(p, q)?;
    let threshold = smallness_threshold(a.dim, p, q, a.ell, a.c, a.t)?;
    let (grid, v) = match (&a.potential, a.random) {
        (Some(path), _) => {
            let v = PotentialField::read(path)?;
            if v.dim() != a.dim {
                return Err(Error::Domain(format!("potential file has dimension {}, expected {}", v.dim(), a.dim)));
            }
            (v.grid().clone(), v)
        }
        (None, Some(frac)) => {
            let grid = PeriodicGrid::cubic(a.dim, a.n, a.half_length)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw = PotentialField::random(&grid, 1.0, a.hermitian, &mut rng)?;
            let scale = frac * threshold / potential_norm(&raw, s)?;
            (grid, raw.scale(Complex64::new(scale, 0.0)))
        }
        (None, None) => {
            let grid = PeriodicGrid::cubic(a.dim, a.n, a.half_length)?;
            let v = PotentialField::scalar(grid.clone(), Complex64::new(0.0, 0.0))?;
            (grid, v)
        }
    };
    let window = a.window.as_deref().map(parse_complex).transpose()?.map(|c| (c, a.k));
    let opts = ReportOptions { dense_cap: a.dense_cap, window, ..ReportOptions::default() };
    let r = eigen_region_report(&grid, &params, &v, p, q, a.ell, a.t, a.c, &opts)?;
    let summary = format!(
        "{} eigenvalues: on_ray={} in_Z={} outside_Z={} unconverged={}; {}",
        r.eigenvalues.len(),
        r.count(EigenFlag::OnRay),
        r.count(EigenFlag::InZ),
        r.count(EigenFlag::OutsideZ),
        r.unconverged(),
        r.stamp
    );
    let j = to_json(&r)?;
    let body = serde_json::to_vec_pretty(&j).map_err(|e| Error::Format(e.to_string()))?;
    Ok(RunOutput::new(summary, j, Some(r.to_csv())).with_file(a.out.as_ref(), || body))
}

fn regions_bundle(dim: usize) -> Result<(String, String)> {
    let mut poly = String::from("region,index,x,y,vertex_included,edge_open\n");
    for tag in [RegionTag::R1, RegionTag::R2tilde, RegionTag::R3tilde, RegionTag::R3tildePrime] {
        let pl = region_polyline(dim, tag)?;
        for (i, v) in pl.vertices.iter().enumerate() {
            poly.push_str(&format!(
                "{},{i},{},{},{},{}\n",
                tag.name(),
                render(v.x()),
                render(v.y()),
                pl.vertex_included[i],
                pl.edge_open[i]
            ));
        }
    }
    let mut pts = String::from("name,x,y\n");
    for (name, p) in canonical_points(dim)?.as_map() {
        pts.push_str(&format!("{name},{},{}\n", render(p.x()), render(p.y())));
    }
    Ok((poly, pts))
}

fn read_series(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let mut next = || -> Result<f64> {
            it.next()
                .and_then(|t| t.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Format(format!("{}: line {} needs two numeric columns", path.display(), i + 1)))
        };
        xs.push(next()?);
        ys.push(next()?);
    }
    Ok((xs, ys))
}

fn run_figures(a: &FiguresArgs) -> Result<RunOutput> {
    let dir = a.out_dir.clone();
    let file = |name: &str| dir.as_ref().map(|d| d.join(name));
    match a.kind {
        FigureKind::RegionsD3 | FigureKind::RegionsD4 => {
            let dim = if a.kind == FigureKind::RegionsD3 { 3 } else { 4 };
            let (poly, pts) = regions_bundle(dim)?;
            let rows = poly.lines().count() - 1;
            let pb = poly.clone().into_bytes();
            let out = RunOutput::new(format!("regions d={dim}: {rows} polygon vertices"), json!({ "dim": dim }), Some(poly))
                .with_file(file(&format!("regions_d{dim}.csv")).as_ref(), || pb)
                .with_file(file(&format!("points_d{dim}.csv")).as_ref(), || pts.into_bytes());
            Ok(out)
        }
        FigureKind::Zregion => {
            check_dim(a.dim)?;
            let p = parse_pair(&a.x, &a.y)?;
            let b = zregion_boundary(a.dim, &p, a.ell, a.samples)?;
            let mut csv = String::from("re,im\n");
            for z in b.points() {
                csv.push_str(&format!("{:.17e},{:.17e}\n", z.re, z.im));
            }
            let body = csv.clone().into_bytes();
            Ok(RunOutput::new(format!("Z boundary: {} samples", b.points().len()), json!({ "samples": b.points().len() }), Some(csv))
                .with_file(file("zregion.csv").as_ref(), || body))
        }
        FigureKind::Loglog => {
            let input = a.input.as_ref().ok_or_else(|| Error::Domain("--input is required for loglog".into()))?;
            let (xs, ys) = read_series(input)?;
            let fit = loglog_fit(&xs, &ys)?;
            let mut csv = String::from("log2_scale,log2_value,log2_fit\n");
            for (x, y) in xs.iter().zip(&ys) {
                let lx = x.log2();
                csv.push_str(&format!("{lx:.17e},{:.17e},{:.17e}\n", y.log2(), fit.intercept + fit.slope * lx));
            }
            let body = csv.clone().into_bytes();
            Ok(RunOutput::new(format!("loglog: slope={:.4}", fit.slope), to_json(&fit)?, Some(csv))
                .with_file(file("loglog.csv").as_ref(), || body))
        }
    }
}

/// Writes the files of a run and prints it in the requested format.
pub fn emit(out: &RunOutput, format: OutputFormat) -> Result<()> {
    for (path, bytes) in &out.files {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, bytes)?;
    }
    match format {
        OutputFormat::Summary => println!("{}", out.summary),
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&out.json).map_err(|e| Error::Format(e.to_string()))?);
            eprintln!("{}", out.summary);
        }
        OutputFormat::Csv => {
            print!("{}", out.csv.as_deref().unwrap_or(""));
            eprintln!("{}", out.summary);
        }
    }
    Ok(())
}

/// Builds the effective config from flags and an optional config file.
pub fn resolve_config(cli: Cli) -> Result<ExperimentConfig> {
    let base = match &cli.config {
        Some(path) => Some(ExperimentConfig::from_toml(
            &std::fs::read_to_string(path).map_err(|e| Error::Format(format!("cannot read config {}: {e}", path.display())))?,
        )?),
        None => None,
    };
    let command = match (cli.command, &base) {
        (Some(c), _) => c,
        (None, Some(b)) => b.command.clone(),
        (None, None) => return Err(Error::Domain("no subcommand given (see --help)".into())),
    };
    let format = if cli.json {
        OutputFormat::Json
    } else if cli.csv {
        OutputFormat::Csv
    } else {
        base.as_ref().map(|b| b.format).unwrap_or_default()
    };
    Ok(ExperimentConfig {
        seed: cli.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
        threads: cli.threads.or(base.as_ref().and_then(|b| b.threads)),
        format,
        command,
    })
}

/// Entry point of the `lame` binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let save = cli.save_config.clone();
    let fail = |e: Error| {
        eprintln!("error: {e}");
        e.exit_code()
    };
    let config = match resolve_config(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(path) = save {
        if let Err(e) = config.to_toml().and_then(|s| std::fs::write(&path, s).map_err(Error::from)) {
            return fail(e);
        }
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return 2;
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| run(&config)).and_then(|out| emit(&out, config.format)) {
        Ok(()) => 0,
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> ExperimentConfig {
        let mut v = vec!["lame"];
        v.extend_from_slice(args);
        resolve_config(Cli::try_parse_from(v).unwrap()).unwrap()
    }

    #[test]
    fn complex_forms() {
        let c = |re, im| Complex64::new(re, im);
        for (s, z) in [
            ("-1+0i", c(-1.0, 0.0)),
            ("-1+0.5i", c(-1.0, 0.5)),
            ("2", c(2.0, 0.0)),
            ("i", c(0.0, 1.0)),
            ("-i", c(0.0, -1.0)),
            ("3.5i", c(0.0, 3.5)),
            ("1e-3-2e-1i", c(1e-3, -0.2)),
            (" 0.5 - i ", c(0.5, -1.0)),
        ] {
            assert_eq!(parse_complex(s).unwrap(), z, "{s}");
        }
        assert!(parse_complex("1+2j").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn exponents_are_exact() {
        assert_eq!(parse_exponent("6/5").unwrap(), 1.2);
        assert_eq!(parse_exponent("inf").unwrap(), f64::INFINITY);
        assert!(parse_exponent("1/2").is_err());
    }

    #[test]
    fn polyline_r1_has_four_vertices() {
        let out = run(&cfg(&["regions", "polyline", "--dim", "3", "--tag", "R1"])).unwrap();
        assert_eq!(out.csv.unwrap().lines().count(), 5);
    }

    #[test]
    fn invalid_rational_is_a_validation_error() {
        let e = run(&cfg(&["regions", "classify", "--dim", "3", "--x", "5/3", "--y", "1/5"])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(main_with_args(["lame", "regions", "classify", "--dim", "3", "--x", "5/3", "--y", "1/5"]), 2);
        assert_eq!(main_with_args(["lame", "regions", "classify", "--dim", "3"]), 2);
    }

    #[test]
    fn symbol_eval_json_rows() {
        let out = run(&cfg(&["symbol", "eval", "--kind", "resolvent", "--xi", "1,0,0", "--z", "-1+0i"])).unwrap();
        let rows = out.json["entries"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        // (L_{-1}(e_1))^{-1} = diag(1/(rho + 1), 1/2, 1/2) with rho + 1 = 5.
        assert!((rows[0][0][0].as_f64().unwrap() - 0.2).abs() < 1e-15);
        assert!((rows[1][1][0].as_f64().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_failure_exit_code() {
        // z = mu |xi|^2 is a pole of the symbol at this frequency.
        assert_eq!(main_with_args(["lame", "symbol", "eval", "--kind", "resolvent", "--xi", "1,0", "--z", "1"]), 3);
    }

    #[test]
    fn config_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let save = dir.path().join("run.toml");
        let out1 = dir.path().join("a.json");
        let out2 = dir.path().join("b.json");
        let args = |out: &Path, extra: &[&str]| {
            let mut v: Vec<String> = ["lame", "--seed", "17"].iter().map(|s| s.to_string()).collect();
            v.extend(extra.iter().map(|s| s.to_string()));
            v.extend(
                ["eigen", "report", "--n", "8", "--p", "6/5", "--q", "3", "--c", "1", "--random", "0.5", "--out"]
                    .iter()
                    .map(|s| s.to_string()),
            );
            v.push(out.display().to_string());
            v
        };
        let mut first = args(&out1, &[]);
        first.insert(1, save.display().to_string());
        first.insert(1, "--save-config".into());
        assert_eq!(main_with_args(first), 0);
        let mut replay = ExperimentConfig::from_toml(&std::fs::read_to_string(&save).unwrap()).unwrap();
        if let Command::Eigen { action: EigenCmd::Report(a) } = &mut replay.command {
            a.out = Some(out2.clone());
        }
        std::fs::write(&save, replay.to_toml().unwrap()).unwrap();
        assert_eq!(main_with_args(["lame", "--config", save.to_str().unwrap()]), 0);
        assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
    }
}

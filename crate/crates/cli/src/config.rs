//! Run configuration: an optional TOML file merged with command-line flags,
//! flags taking precedence.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};

use kicked_holonomy::adiabatic::Ramp;
use kicked_holonomy::model::Band;
use kicked_holonomy::ModelParams;
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_POINTS: usize = 1001;
pub const DEFAULT_GRID: usize = 128;
pub const DEFAULT_KICKS: usize = 10_000;
pub const DEFAULT_KICKS_LIST: [usize; 3] = [100, 1_000, 10_000];

/// Keys accepted in a config file. Every key is optional; unknown keys are
/// rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mu: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub out: Option<PathBuf>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub points: Option<usize>,
    pub loops: Option<u32>,
    pub grid: Option<usize>,
    pub kicks: Option<usize>,
    pub kicks_list: Option<Vec<usize>>,
    pub ramp: Option<Ramp>,
    pub band: Option<Band>,
    pub allow_degenerate: Option<bool>,
    pub report: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Values from `self`, overridden by every key set in `flags`.
    pub fn overridden_by(self, flags: FileConfig) -> FileConfig {
        FileConfig {
            mu: flags.mu.or(self.mu),
            theta: flags.theta.or(self.theta),
            phi: flags.phi.or(self.phi),
            out: flags.out.or(self.out),
            samples: flags.samples.or(self.samples),
            tol: flags.tol.or(self.tol),
            points: flags.points.or(self.points),
            loops: flags.loops.or(self.loops),
            grid: flags.grid.or(self.grid),
            kicks: flags.kicks.or(self.kicks),
            kicks_list: flags.kicks_list.or(self.kicks_list),
            ramp: flags.ramp.or(self.ramp),
            band: flags.band.or(self.band),
            allow_degenerate: flags.allow_degenerate.or(self.allow_degenerate),
            report: flags.report.or(self.report),
        }
    }
}

/// Fully resolved and validated settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub out: Option<PathBuf>,
    pub samples: usize,
    pub tol: f64,
    pub points: usize,
    pub loops: Option<u32>,
    pub grid: usize,
    pub kicks: usize,
    pub kicks_list: Vec<usize>,
    pub ramp: Ramp,
    pub band: Band,
    pub allow_degenerate: bool,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(c: FileConfig) -> Result<Self, CliError> {
        let mu = c.mu.unwrap_or(FRAC_PI_2);
        let theta = c.theta.unwrap_or(FRAC_PI_2);
        let phi = c.phi.unwrap_or(0.0);
        if !(0.0..=PI).contains(&theta) {
            return Err(CliError::Config(format!("theta = {theta} must lie in [0, pi]")));
        }
        if !phi.is_finite() || !(-2.0 * PI..=2.0 * PI).contains(&phi) {
            return Err(CliError::Config(format!("phi = {phi} must lie in [-2 pi, 2 pi]")));
        }
        let params = ModelParams::new(mu, theta, phi).map_err(|e| CliError::Config(e.to_string()))?;
        let tol = c.tol.unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Config(format!("tol = {tol} must be positive")));
        }
        let samples = c.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < 4 {
            return Err(CliError::Config(format!("samples = {samples} must be at least 4")));
        }
        let points = c.points.unwrap_or(DEFAULT_POINTS);
        if points < 2 {
            return Err(CliError::Config(format!("points = {points} must be at least 2")));
        }
        let kicks = c.kicks.unwrap_or(DEFAULT_KICKS);
        if kicks == 0 {
            return Err(CliError::Config("kicks must be positive".into()));
        }
        let kicks_list = c.kicks_list.unwrap_or_else(|| DEFAULT_KICKS_LIST.to_vec());
        if kicks_list.is_empty() || kicks_list.contains(&0) || kicks_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config("kicks-list must be positive and strictly ascending".into()));
        }
        Ok(RunConfig {
            params,
            out: c.out,
            samples,
            tol,
            points,
            loops: c.loops,
            grid: c.grid.unwrap_or(DEFAULT_GRID),
            kicks,
            kicks_list,
            ramp: c.ramp.unwrap_or_default(),
            band: c.band.unwrap_or(Band::Plus),
            allow_degenerate: c.allow_degenerate.unwrap_or(false),
            report: c.report,
        })
    }
}

//! Run configuration: defaults, then the `--config` file, then CLI flags.
//!
//! The file is TOML with one section per subsystem. Every key is optional:
//!
//! ```toml
//! [model]
//! b = 0.8
//! mu = 1.0
//! n0 = 15
//! t = 0.1
//!
//! [grid]
//! b = [0.8, 1.2, 1.5, 1.6, 1.7, 1.8, 1.9]
//! t = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0]
//!
//! [inversion]
//! tail_tol = 1e-10
//!
//! [ode]
//! courant = 0.05
//! max_dt = 1e-3
//!
//! [simulation]
//! replications = 100000
//! seed = 20240501
//!
//! [output]
//! path = "table.csv"
//! format = "csv"          # csv | markdown | json-lines
//! threshold = 0.03
//! ```

use std::path::{Path, PathBuf};

use birthflow_core::metrics::DEFAULT_THRESHOLD;
use birthflow_core::ode::{OdeConfig, DEFAULT_COURANT, DEFAULT_MAX_DT};
use birthflow_core::{ModelParams, SimConfig, DEFAULT_TAIL_TOL};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_B_GRID: [f64; 7] = [0.8, 1.2, 1.5, 1.6, 1.7, 1.8, 1.9];
pub const DEFAULT_T_GRID: [f64; 6] = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const DEFAULT_SEED: u64 = 20_240_501;
pub const DEFAULT_REPLICATIONS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Table,
    Pmf,
    Mean,
    Simulate,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Markdown,
    JsonLines,
}

/// Which characteristic function the validation fault hook scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PerturbTarget {
    Autonomous,
    Poisson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub params: ModelParams,
    pub t: f64,
    pub b_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub tail_tol: f64,
    pub courant: f64,
    pub max_dt: f64,
    pub sim: SimConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threshold: f64,
    pub perturb: Option<PerturbTarget>,
}

impl RunConfig {
    pub fn defaults(mode: Mode) -> Self {
        Self {
            mode,
            params: ModelParams {
                b: 0.8,
                mu: 1.0,
                n0: 15,
            },
            t: 0.1,
            b_grid: DEFAULT_B_GRID.to_vec(),
            t_grid: DEFAULT_T_GRID.to_vec(),
            tail_tol: DEFAULT_TAIL_TOL,
            courant: DEFAULT_COURANT,
            max_dt: DEFAULT_MAX_DT,
            sim: SimConfig::new(DEFAULT_REPLICATIONS, DEFAULT_SEED),
            out: None,
            format: match mode {
                Mode::Validate => Format::JsonLines,
                _ => Format::Markdown,
            },
            threshold: DEFAULT_THRESHOLD,
            perturb: None,
        }
    }

    pub fn ode_config(&self, params: &ModelParams, k_trunc: usize) -> OdeConfig {
        let mut config = OdeConfig::with_courant(params, k_trunc, self.tail_tol, self.courant);
        config.dt = config.dt.min(self.max_dt);
        config
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(CliError::Config(format!("t must be >= 0, got {}", self.t)));
        }
        if self.mode == Mode::Table && (self.b_grid.is_empty() || self.t_grid.is_empty()) {
            return Err(CliError::Config("table mode needs non-empty b and t grids".into()));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(CliError::Config("tail_tol must lie in (0, 1)".into()));
        }
        if !(self.courant > 0.0 && self.max_dt > 0.0) {
            return Err(CliError::Config("ode courant and max_dt must be positive".into()));
        }
        if self.sim.replications == 0 {
            return Err(CliError::Config("replications must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(CliError::Config("threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Applies a parsed config file on top of the current values.
    pub fn apply_file(&mut self, file: &FileConfig) {
        if let Some(m) = &file.model {
            set(&mut self.params.b, m.b);
            set(&mut self.params.mu, m.mu);
            set(&mut self.params.n0, m.n0);
            set(&mut self.t, m.t);
        }
        if let Some(g) = &file.grid {
            set(&mut self.b_grid, g.b.clone());
            set(&mut self.t_grid, g.t.clone());
        }
        if let Some(i) = &file.inversion {
            set(&mut self.tail_tol, i.tail_tol);
        }
        if let Some(o) = &file.ode {
            set(&mut self.courant, o.courant);
            set(&mut self.max_dt, o.max_dt);
        }
        if let Some(s) = &file.simulation {
            set(&mut self.sim.replications, s.replications);
            set(&mut self.sim.seed, s.seed);
        }
        if let Some(o) = &file.output {
            if o.path.is_some() {
                self.out = o.path.clone();
            }
            set(&mut self.format, o.format);
            set(&mut self.threshold, o.threshold);
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelSection>,
    pub grid: Option<GridSection>,
    pub inversion: Option<InversionSection>,
    pub ode: Option<OdeSection>,
    pub simulation: Option<SimulationSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub b: Option<f64>,
    pub mu: Option<f64>,
    pub n0: Option<u32>,
    pub t: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub b: Option<Vec<f64>>,
    pub t: Option<Vec<f64>>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionSection {
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSection {
    pub courant: Option<f64>,
    pub max_dt: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub replications: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
    pub threshold: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

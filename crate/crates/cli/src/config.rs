//! Run configuration: JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use gts_core::data::{ColumnSpec, VolWindow};
use gts_core::mle::FitOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_GRID_M: usize = 8196;
pub const DEFAULT_SYNTH_N: usize = 4000;

pub const DEFAULT_UPPER: [f64; 11] = [0.90, 0.91, 0.92, 0.93, 0.94, 0.95, 0.96, 0.97, 0.98, 0.99, 0.995];
pub const DEFAULT_LOWER: [f64; 11] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Levels {
    /// Tail probabilities for the lower tail.
    pub lower: Vec<f64>,
    /// Confidence levels for the upper tail.
    pub upper: Vec<f64>,
}

impl Default for Levels {
    fn default() -> Self {
        Self {
            lower: DEFAULT_LOWER.to_vec(),
            upper: DEFAULT_UPPER.to_vec(),
        }
    }
}

impl Levels {
    /// Levels below 0.5 go to the lower tail, the rest to the upper tail.
    pub fn parse_list(s: &str) -> Result<Self, CliError> {
        let mut levels = Levels {
            lower: Vec::new(),
            upper: Vec::new(),
        };
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let v: f64 = item
                .parse()
                .map_err(|_| CliError::input(format!("level `{item}` is not a number")))?;
            if v < 0.5 {
                levels.lower.push(v);
            } else {
                levels.upper.push(v);
            }
        }
        Ok(levels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub columns: ColumnSpec,
    pub grid_m: usize,
    pub fit: FitOptions,
    pub levels: Levels,
    pub interval: [f64; 2],
    pub out: PathBuf,
    pub seed: u64,
    pub samples: usize,
    pub window: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            params: None,
            columns: ColumnSpec::default(),
            grid_m: DEFAULT_GRID_M,
            fit: FitOptions {
                grid_m: DEFAULT_GRID_M,
                ..FitOptions::default()
            },
            levels: Levels::default(),
            interval: [-1.06, 1.23],
            out: PathBuf::from("out"),
            seed: 0,
            samples: DEFAULT_SYNTH_N,
            window: None,
        }
    }
}

/// Command-line values that override the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub grid_m: Option<usize>,
    pub levels: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub window: Option<String>,
    pub samples: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::input(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::input(format!("invalid config {}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        let Overrides {
            input,
            params,
            grid_m,
            levels,
            out,
            seed,
            window,
            samples,
        } = overrides;
        if input.is_some() {
            cfg.input = input;
        }
        if params.is_some() {
            cfg.params = params;
        }
        if let Some(m) = grid_m {
            cfg.grid_m = m;
        }
        if let Some(l) = levels {
            cfg.levels = Levels::parse_list(&l)?;
        }
        if let Some(o) = out {
            cfg.out = o;
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if window.is_some() {
            cfg.window = window;
        }
        if let Some(n) = samples {
            cfg.samples = n;
        }
        cfg.normalize()?;
        Ok(cfg)
    }

    /// Validates levels and options and rounds `grid_m` up to a multiple of 12.
    pub fn normalize(&mut self) -> Result<(), CliError> {
        if self.grid_m < 12 {
            return Err(CliError::input(format!(
                "grid_m must be at least 12, got {}",
                self.grid_m
            )));
        }
        self.grid_m = self.grid_m.div_ceil(12) * 12;
        self.fit.grid_m = self.grid_m;
        self.fit.validate().map_err(CliError::input)?;
        for &l in self.levels.lower.iter().chain(&self.levels.upper) {
            if !(l > 0.0 && l < 1.0) {
                return Err(CliError::input(format!("risk level {l} is outside (0, 1)")));
            }
        }
        if !(self.interval[0] < self.interval[1]) {
            return Err(CliError::input(format!(
                "interval [{}, {}] is empty",
                self.interval[0], self.interval[1]
            )));
        }
        if self.samples == 0 {
            return Err(CliError::input("samples must be positive"));
        }
        if let Some(w) = &self.window {
            w.parse::<VolWindow>().map_err(CliError::input)?;
        }
        Ok(())
    }

    pub fn require_input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::input("an input price file is required (--input)"))
    }

    pub fn require_params(&self) -> Result<&Path, CliError> {
        self.params
            .as_deref()
            .ok_or_else(|| CliError::input("a parameter file is required (--params)"))
    }
}

//! Scenario configuration.
//!
//! A config file is TOML with one optional table per scenario plus a `[run]`
//! table for global settings. Every key has a default, and unknown keys are
//! rejected. Command-line flags override file values.
//!
//! ```toml
//! [run]
//! out = "results"
//! format = "csv+svg"
//! workers = 4
//!
//! [growth]
//! principals = [1.0, 1e3]
//! orders = [0.99, 1.0, 1.01]
//! rate = 0.05
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
pub enum Format {
    #[default]
    #[serde(rename = "csv")]
    #[value(name = "csv")]
    Csv,
    #[serde(rename = "csv+svg")]
    #[value(name = "csv+svg")]
    CsvSvg,
}

impl Format {
    pub fn svg(self) -> bool {
        self == Format::CsvSvg
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunConfig,
    pub growth: GrowthConfig,
    pub doubling: DoublingConfig,
    pub compete: CompeteConfig,
    pub inequality: InequalityConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
}

fn default_principals() -> Vec<f64> {
    vec![1.0, 1e3, 1e6, 1e9]
}

/// 0.95, 0.96, ..., 1.05
fn default_orders() -> Vec<f64> {
    (95..=105).map(|k| k as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthConfig {
    pub principals: Vec<f64>,
    pub orders: Vec<f64>,
    pub rate: f64,
    pub horizon: f64,
    pub samples: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            principals: default_principals(),
            orders: default_orders(),
            rate: 0.05,
            horizon: 100.0,
            samples: 201,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DoublingConfig {
    pub principals: Vec<f64>,
    pub orders: Vec<f64>,
    pub rates: Vec<f64>,
    /// Doubling time used for the required-rate table.
    pub target: f64,
}

impl Default for DoublingConfig {
    fn default() -> Self {
        DoublingConfig {
            principals: default_principals(),
            orders: default_orders(),
            rates: (10..=200).step_by(5).map(|k| k as f64 / 1000.0).collect(),
            target: 10.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CompeteConfig {
    pub order: f64,
    pub labels: Vec<String>,
    pub efficiencies: Vec<f64>,
    pub initials: Vec<f64>,
    pub t_end: f64,
    pub tol: f64,
}

impl Default for CompeteConfig {
    fn default() -> Self {
        CompeteConfig {
            order: 0.5,
            labels: vec!["A".into(), "B".into()],
            efficiencies: vec![1.0, 10.0],
            initials: vec![1.0, 1.0],
            t_end: 100.0,
            tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct InequalityConfig {
    /// CSV with a single `balance` column. Without it the population
    /// {1, 1e3, 1e6, 1e9} is used.
    pub balances: Option<PathBuf>,
    pub rate: f64,
    pub orders: Vec<f64>,
    pub times: Vec<f64>,
    pub lorenz_times: Vec<f64>,
}

impl Default for InequalityConfig {
    fn default() -> Self {
        InequalityConfig {
            balances: None,
            rate: 0.05,
            orders: vec![0.95, 1.0, 1.05],
            times: (0..=10).map(|k| 5.0 * k as f64).collect(),
            lorenz_times: vec![0.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub principals: Vec<f64>,
    pub orders: Vec<f64>,
    pub rates: Vec<f64>,
    pub horizon: f64,
    pub rel_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            principals: vec![1.0, 1e9],
            orders: vec![0.0, 0.5, 0.9, 1.0, 1.1],
            rates: vec![0.01, 0.05, 0.1],
            horizon: 100.0,
            rel_tol: 1e-9,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Config::parse(&text).map_err(|e| match e {
            CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

//! Scenario runner for the `growth-order` library.
//!
//! The `mgo` binary wraps [`run`]; tests drive the same entry point.

pub mod config;
pub mod error;
pub mod format;
pub mod scenarios;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, Format};
use crate::error::{CliError, Result};
use crate::scenarios::Output;

pub const DEFAULT_OUT: &str = "results";

#[derive(Debug, Parser)]
#[command(name = "mgo", version, about = "Growth-order scenarios as CSV and SVG")]
pub struct Cli {
    /// TOML config file; flags take precedence over its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory [default: results]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for batch work [default: all cores]
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Output format [default: csv]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective principals c^p for principals 1e3..1e12 and p = 1.1, 1.0, 0.9
    Table1,
    /// Balance curves c(t) per principal and order
    Growth(GrowthArgs),
    /// Doubling time against interest rate
    Doubling(DoublingArgs),
    /// Flow-reactor competition between replicators
    Compete(CompeteArgs),
    /// Gini index and Lorenz curves of an evolving account population
    Inequality(InequalityArgs),
    /// Closed form and integrator over a parameter grid
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Default)]
pub struct GrowthArgs {
    #[arg(long, value_delimiter = ',')]
    pub principals: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<f64>>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct DoublingArgs {
    #[arg(long, value_delimiter = ',')]
    pub principals: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub rates: Option<Vec<f64>>,
    /// Doubling time for the required-rate table
    #[arg(long)]
    pub target: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct CompeteArgs {
    #[arg(long)]
    pub order: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub efficiencies: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub initials: Option<Vec<f64>>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct InequalityArgs {
    /// CSV file with a single `balance` column
    #[arg(long)]
    pub balances: Option<PathBuf>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub lorenz_times: Option<Vec<f64>>,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    pub principals: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub rates: Option<Vec<f64>>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

/// Merges flags into the config.
fn apply(cli: Cli, mut cfg: Config) -> (Command, Config) {
    set(&mut cfg.run.out, cli.out.map(Some));
    set(&mut cfg.run.format, cli.format.map(Some));
    set(&mut cfg.run.workers, cli.workers.map(Some));
    match &cli.command {
        Command::Table1 => {}
        Command::Growth(a) => {
            let g = &mut cfg.growth;
            set(&mut g.principals, a.principals.clone());
            set(&mut g.orders, a.orders.clone());
            set(&mut g.rate, a.rate);
            set(&mut g.horizon, a.horizon);
            set(&mut g.samples, a.samples);
        }
        Command::Doubling(a) => {
            let d = &mut cfg.doubling;
            set(&mut d.principals, a.principals.clone());
            set(&mut d.orders, a.orders.clone());
            set(&mut d.rates, a.rates.clone());
            set(&mut d.target, a.target);
        }
        Command::Compete(a) => {
            let c = &mut cfg.compete;
            set(&mut c.order, a.order);
            set(&mut c.labels, a.labels.clone());
            set(&mut c.efficiencies, a.efficiencies.clone());
            set(&mut c.initials, a.initials.clone());
            set(&mut c.t_end, a.t_end);
            set(&mut c.tol, a.tol);
        }
        Command::Inequality(a) => {
            let q = &mut cfg.inequality;
            set(&mut q.balances, a.balances.clone().map(Some));
            set(&mut q.rate, a.rate);
            set(&mut q.orders, a.orders.clone());
            set(&mut q.times, a.times.clone());
            set(&mut q.lorenz_times, a.lorenz_times.clone());
        }
        Command::Sweep(a) => {
            let s = &mut cfg.sweep;
            set(&mut s.principals, a.principals.clone());
            set(&mut s.orders, a.orders.clone());
            set(&mut s.rates, a.rates.clone());
            set(&mut s.horizon, a.horizon);
            set(&mut s.rel_tol, a.rel_tol);
        }
    }
    (cli.command, cfg)
}

/// Runs one subcommand and returns the files it wrote.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let file_cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let (command, cfg) = apply(cli, file_cfg);
    if cfg.run.workers == Some(0) {
        return Err(CliError::Validation("workers must be at least 1".into()));
    }
    let out = Output::new(
        cfg.run.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        cfg.run.format.unwrap_or_default(),
    );
    growth_order::exec::with_workers(cfg.run.workers, || match command {
        Command::Table1 => scenarios::run_table1(&out),
        Command::Growth(_) => scenarios::run_growth_curves(&cfg.growth, &out),
        Command::Doubling(_) => scenarios::run_doubling_curves(&cfg.doubling, &out),
        Command::Compete(_) => scenarios::run_competition(&cfg.compete, &out),
        Command::Inequality(_) => scenarios::run_inequality(&cfg.inequality, &out),
        Command::Sweep(_) => scenarios::run_sweep(&cfg.sweep, &out),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("mgo").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config() {
        let cfg = Config::parse("[growth]\nrate = 0.1\nhorizon = 20.0\n[run]\nworkers = 3\n").unwrap();
        let (_, merged) = apply(
            parse(&["growth", "--rate", "0.02", "--orders", "1,1.01", "--workers", "2"]),
            cfg,
        );
        assert_eq!(merged.growth.rate, 0.02);
        assert_eq!(merged.growth.horizon, 20.0);
        assert_eq!(merged.growth.orders, vec![1.0, 1.01]);
        assert_eq!(merged.run.workers, Some(2));
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = parse(&["table1", "--out", "x", "--format", "csv+svg"]);
        assert_eq!(cli.out, Some(PathBuf::from("x")));
        assert_eq!(cli.format, Some(Format::CsvSvg));
    }

    #[test]
    fn zero_workers_rejected() {
        let err = run(parse(&["table1", "--workers", "0"])).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}

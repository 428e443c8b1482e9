//! Scenario runners. Each one computes its results in memory, then writes
//! every output file exactly once.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use growth_order::competition::{self, CheckStatus, CompetitionSystem, Outcome, Replicator};
use growth_order::exec::{self, Execution};
use growth_order::inequality::{self, AccountPopulation};
use growth_order::integrate::IntegratorConfig;
use growth_order::kinetics::{self, GrowthSpec, GrowthValue};
use growth_order::sweep::{self, SweepGrid};

use crate::config::{
    CompeteConfig, DoublingConfig, Format, GrowthConfig, InequalityConfig, SweepConfig,
};
use crate::error::{CliError, Result};
use crate::format::{display_2dp, file_label, label, sig17};
use crate::svg::{LineChart, Series};

/// Principals of the effective-principal table: 10^3 through 10^12.
pub const TABLE1_PRINCIPALS: [f64; 10] = [1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11, 1e12];
pub const TABLE1_ORDERS: [f64; 3] = [1.1, 1.0, 0.9];

/// Destination directory and output format for a run.
#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
    format: Format,
}

impl Output {
    pub fn new(dir: impl Into<PathBuf>, format: Format) -> Output {
        Output {
            dir: dir.into(),
            format,
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    fn write_table(&self, name: &str, table: &Table) -> Result<PathBuf> {
        self.write(name, &table.render()?)
    }

    fn write_chart(&self, name: &str, chart: &LineChart) -> Result<Option<PathBuf>> {
        if !self.format.svg() {
            return Ok(None);
        }
        self.write(name, chart.render().as_bytes()).map(Some)
    }
}

/// A CSV file: `#` comment lines, a header row, then data rows.
#[derive(Debug, Default)]
struct Table {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<String>) -> Table {
        Table {
            header,
            ..Table::default()
        }
    }

    fn render(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        for c in &self.comments {
            buf.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(buf);
        let failed = |e: csv::Error| CliError::Validation(format!("csv encoding: {e}"));
        w.write_record(&self.header).map_err(failed)?;
        for row in &self.rows {
            w.write_record(row).map_err(failed)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Validation(format!("csv encoding: {}", e.error())))
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn non_empty(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(invalid(format!("{name}: at least one value required")));
    }
    Ok(())
}

fn distinct(name: &str, values: &[f64]) -> Result<()> {
    let mut seen = HashSet::new();
    for v in values {
        if !seen.insert(v.to_bits()) {
            return Err(invalid(format!("{name}: duplicate value {v}")));
        }
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map(sig17).unwrap_or_default()
}

/// Effective principals `c^p` for the fixed table grid, as a raw CSV and a
/// 2-decimal display CSV.
pub fn run_table1(out: &Output) -> Result<Vec<PathBuf>> {
    let header: Vec<String> = std::iter::once("principal".to_string())
        .chain(TABLE1_ORDERS.iter().map(|p| format!("p_{}", label_order(*p))))
        .collect();
    let mut raw = Table::new(header.clone());
    let mut display = Table::new(header);
    display.comments.push("values rounded to 15 significant digits, then to 2 decimals".into());
    for c in TABLE1_PRINCIPALS {
        let values = TABLE1_ORDERS
            .iter()
            .map(|&p| kinetics::effective_principal(c, p))
            .collect::<growth_order::Result<Vec<f64>>>()?;
        raw.rows.push(
            std::iter::once(sig17(c))
                .chain(values.iter().map(|&v| sig17(v)))
                .collect(),
        );
        display.rows.push(
            std::iter::once(display_2dp(c))
                .chain(values.iter().map(|&v| display_2dp(v)))
                .collect(),
        );
    }
    Ok(vec![
        out.write_table("table1.csv", &raw)?,
        out.write_table("table1_display.csv", &display)?,
    ])
}

/// Order labels keep one decimal for whole numbers so that `1.0` reads as an
/// order rather than an index.
fn label_order(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{p:.1}")
    } else {
        label(p)
    }
}

/// Sample times `horizon * k / (samples - 1)`.
pub fn sample_times(horizon: f64, samples: usize) -> Vec<f64> {
    let last = (samples - 1) as f64;
    (0..samples).map(|k| horizon * k as f64 / last).collect()
}

struct GrowthFile {
    principal: f64,
    table: Table,
    chart: LineChart,
}

/// Balance curves `c(t)` per principal, one column per order. Curves with a
/// blow-up inside the horizon stop at `0.99 t*`; later cells stay empty and
/// the cut is noted in a comment line.
pub fn run_growth_curves(cfg: &GrowthConfig, out: &Output) -> Result<Vec<PathBuf>> {
    non_empty("principals", &cfg.principals)?;
    non_empty("orders", &cfg.orders)?;
    distinct("principals", &cfg.principals)?;
    distinct("orders", &cfg.orders)?;
    positive("horizon", cfg.horizon)?;
    if cfg.samples < 2 {
        return Err(invalid(format!("samples must be at least 2, got {}", cfg.samples)));
    }
    let times = sample_times(cfg.horizon, cfg.samples);
    let specs = cfg
        .principals
        .iter()
        .map(|&c| {
            cfg.orders
                .iter()
                .map(|&p| GrowthSpec::new(c, cfg.rate, p))
                .collect::<growth_order::Result<Vec<_>>>()
        })
        .collect::<growth_order::Result<Vec<_>>>()?;

    let files = exec::map(Execution::Parallel, &specs, |row| growth_file(cfg, &times, row));
    let mut written = Vec::new();
    for f in files {
        let name = format!("growth_c0_{}", file_label(f.principal));
        written.push(out.write_table(&format!("{name}.csv"), &f.table)?);
        written.extend(out.write_chart(&format!("{name}.svg"), &f.chart)?);
    }
    Ok(written)
}

fn growth_file(cfg: &GrowthConfig, times: &[f64], specs: &[GrowthSpec]) -> GrowthFile {
    let principal = specs[0].principal();
    let mut table = Table::new(
        std::iter::once("t".to_string())
            .chain(specs.iter().map(|s| format!("p_{}", label(s.order()))))
            .collect(),
    );
    table.comments.push(format!(
        "principal={} rate={} horizon={} samples={}",
        sig17(principal),
        sig17(cfg.rate),
        sig17(cfg.horizon),
        cfg.samples
    ));
    let cutoffs: Vec<Option<f64>> = specs
        .iter()
        .map(|s| kinetics::blowup_time(s).filter(|&t| 0.99 * t < cfg.horizon))
        .collect();
    for (s, cut) in specs.iter().zip(&cutoffs) {
        if let Some(t_star) = cut {
            table.comments.push(format!(
                "truncated p_{} at 0.99*t* = {} (t* = {})",
                label(s.order()),
                sig17(0.99 * t_star),
                sig17(*t_star)
            ));
        }
    }

    let mut series: Vec<Series> = specs
        .iter()
        .map(|s| Series {
            name: format!("p = {}", label(s.order())),
            points: Vec::new(),
        })
        .collect();
    for &t in times {
        let mut row = vec![sig17(t)];
        for ((s, cut), line) in specs.iter().zip(&cutoffs).zip(series.iter_mut()) {
            let value = match cut {
                Some(t_star) if t > 0.99 * t_star => None,
                _ => kinetics::principal_at(s, t).finite(),
            };
            if let Some(v) = value {
                line.points.push((t, v));
            }
            row.push(cell(value));
        }
        table.rows.push(row);
    }
    GrowthFile {
        principal,
        table,
        chart: LineChart {
            title: format!(
                "Balance, principal {}, rate {}",
                label(principal),
                label(cfg.rate)
            ),
            x_label: "t (years)".into(),
            y_label: "balance".into(),
            log_y: true,
            series,
        },
    }
}

/// Doubling time against rate per principal, one column per order, plus
/// `ln 2 / rate` for comparison with the exponential case. Also writes the
/// rate each (principal, order) needs to double within `cfg.target` years.
pub fn run_doubling_curves(cfg: &DoublingConfig, out: &Output) -> Result<Vec<PathBuf>> {
    non_empty("principals", &cfg.principals)?;
    non_empty("orders", &cfg.orders)?;
    non_empty("rates", &cfg.rates)?;
    distinct("principals", &cfg.principals)?;
    distinct("orders", &cfg.orders)?;
    for &r in &cfg.rates {
        positive("rate", r)?;
    }
    positive("target", cfg.target)?;

    let mut written = Vec::new();
    for &c in &cfg.principals {
        let mut table = Table::new(
            std::iter::once("rate".to_string())
                .chain(cfg.orders.iter().map(|p| format!("t2_p_{}", label(*p))))
                .chain(std::iter::once("ln2_over_rate".to_string()))
                .collect(),
        );
        table.comments.push(format!("principal={}", sig17(c)));
        let mut series: Vec<Series> = cfg
            .orders
            .iter()
            .map(|p| Series {
                name: format!("p = {}", label(*p)),
                points: Vec::new(),
            })
            .collect();
        for &i in &cfg.rates {
            let mut row = vec![sig17(i)];
            for (&p, line) in cfg.orders.iter().zip(series.iter_mut()) {
                let t2 = kinetics::doubling_time(&GrowthSpec::new(c, i, p)?)?;
                line.points.push((i, t2));
                row.push(sig17(t2));
            }
            row.push(sig17(std::f64::consts::LN_2 / i));
            table.rows.push(row);
        }
        let name = format!("doubling_c0_{}", file_label(c));
        written.push(out.write_table(&format!("{name}.csv"), &table)?);
        let chart = LineChart {
            title: format!("Doubling time, principal {}", label(c)),
            x_label: "rate".into(),
            y_label: "doubling time (years)".into(),
            log_y: true,
            series,
        };
        written.extend(out.write_chart(&format!("{name}.svg"), &chart)?);
    }

    let mut required = Table::new(
        ["principal", "order", "target_doubling", "required_rate"]
            .map(String::from)
            .to_vec(),
    );
    for &c in &cfg.principals {
        for &p in &cfg.orders {
            let rate = kinetics::required_rate(p, c, cfg.target)?;
            required
                .rows
                .push(vec![sig17(c), sig17(p), sig17(cfg.target), sig17(rate)]);
        }
    }
    written.push(out.write_table("doubling_required_rates.csv", &required)?);
    Ok(written)
}

pub fn competition_system(cfg: &CompeteConfig) -> Result<CompetitionSystem> {
    let n = cfg.labels.len();
    if cfg.efficiencies.len() != n || cfg.initials.len() != n {
        return Err(invalid(format!(
            "labels, efficiencies and initials must have equal length (got {}, {}, {})",
            n,
            cfg.efficiencies.len(),
            cfg.initials.len()
        )));
    }
    let replicators = cfg
        .labels
        .iter()
        .zip(&cfg.efficiencies)
        .zip(&cfg.initials)
        .map(|((l, &e), &c)| Replicator::new(l.clone(), e, c))
        .collect::<growth_order::Result<Vec<_>>>()?;
    Ok(CompetitionSystem::new(replicators, cfg.order)?)
}

/// Fraction trajectories of a flow-reactor competition and the check of the
/// terminal state against the predicted outcome. Fails with a numerical
/// error, after writing both files, when the prediction is not confirmed.
pub fn run_competition(cfg: &CompeteConfig, out: &Output) -> Result<Vec<PathBuf>> {
    let system = competition_system(cfg)?;
    positive("t_end", cfg.t_end)?;
    positive("tol", cfg.tol)?;
    let integrator = IntegratorConfig::default();
    let trajectory = competition::simulate_competition(&system, cfg.t_end, &integrator)?;
    let report = competition::verify_prediction(&system, cfg.t_end, cfg.tol, &integrator)?;

    let mut traj = Table::new(
        std::iter::once("t".to_string())
            .chain(trajectory.labels.iter().map(|l| format!("frac_{l}")))
            .collect(),
    );
    traj.comments.push(format!("order={}", sig17(system.order())));
    let mut series: Vec<Series> = trajectory
        .labels
        .iter()
        .map(|l| Series {
            name: l.clone(),
            points: Vec::with_capacity(trajectory.len()),
        })
        .collect();
    for (k, &t) in trajectory.times.iter().enumerate() {
        let fr = trajectory.fractions(k);
        for (line, &f) in series.iter_mut().zip(fr) {
            line.points.push((t, f));
        }
        traj.rows.push(
            std::iter::once(sig17(t))
                .chain(fr.iter().map(|&f| sig17(f)))
                .collect(),
        );
    }

    let mut rep = Table::new(
        [
            "label",
            "efficiency",
            "initial",
            "predicted",
            "simulated",
            "extinct",
            "status",
        ]
        .map(String::from)
        .to_vec(),
    );
    rep.comments.extend([
        format!("order={}", sig17(system.order())),
        format!("outcome={}", describe(&report.outcome)),
        format!("t_end={} tol={}", sig17(cfg.t_end), sig17(report.tol)),
        format!("drift={} converged={}", sig17(report.drift), report.converged),
        format!("max_total_drift={}", sig17(trajectory.max_total_drift)),
        format!("passed={}", report.passed()),
    ]);
    for (check, r) in report.checks.iter().zip(system.replicators()) {
        rep.rows.push(vec![
            check.label.clone(),
            sig17(r.efficiency),
            sig17(r.initial),
            sig17(check.predicted),
            sig17(check.simulated),
            check.extinct.to_string(),
            match check.status {
                CheckStatus::Pass => "pass".into(),
                CheckStatus::Fail => "fail".into(),
            },
        ]);
    }

    let mut written = vec![
        out.write_table("compete_trajectory.csv", &traj)?,
        out.write_table("compete_report.csv", &rep)?,
    ];
    let chart = LineChart {
        title: format!("Replicator fractions, order {}", label(system.order())),
        x_label: "t".into(),
        y_label: "fraction".into(),
        log_y: false,
        series,
    };
    written.extend(out.write_chart("compete_trajectory.svg", &chart)?);

    if !report.passed() {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.label.as_str())
            .collect();
        return Err(CliError::Numerical(format!(
            "prediction not confirmed at t = {}: converged = {}, drift = {:e}, failing = [{}]",
            cfg.t_end,
            report.converged,
            report.drift,
            failed.join(", ")
        )));
    }
    Ok(written)
}

fn describe(outcome: &Outcome) -> String {
    match outcome {
        Outcome::CoexistenceRatios(r) => {
            let parts: Vec<String> = r.iter().map(|(l, f)| format!("{l}:{}", sig17(*f))).collect();
            format!("{} {}", outcome.kind(), parts.join(" "))
        }
        Outcome::SoleWinner(l) | Outcome::InitialConditionWinner(l) => {
            format!("{} {l}", outcome.kind())
        }
        Outcome::Tie(ls) => format!("{} {}", outcome.kind(), ls.join(" ")),
    }
}

/// Reads a CSV with a single `balance` column. `#` lines are skipped.
pub fn read_balances(path: &Path) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let where_ = |line: u64| format!("{}:{line}", path.display());
    let headers = reader
        .headers()
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?
        .clone();
    if headers.len() != 1 || &headers[0] != "balance" {
        return Err(invalid(format!(
            "{}: expected a single `balance` column, found {:?}",
            where_(1),
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut balances = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            invalid(format!("{}: {e}", where_(line)))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let text = &record[0];
        let value: f64 = text
            .parse()
            .map_err(|_| invalid(format!("{}: not a number: {text:?}", where_(line))))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(invalid(format!(
                "{}: balance must be positive and finite, got {text}",
                where_(line)
            )));
        }
        balances.push(value);
    }
    if balances.is_empty() {
        return Err(invalid(format!("{}: no balances", path.display())));
    }
    Ok(balances)
}

pub const DEFAULT_BALANCES: [f64; 4] = [1.0, 1e3, 1e6, 1e9];

/// Gini index over time per order, plus Lorenz curves at selected times.
pub fn run_inequality(cfg: &InequalityConfig, out: &Output) -> Result<Vec<PathBuf>> {
    non_empty("orders", &cfg.orders)?;
    non_empty("times", &cfg.times)?;
    distinct("orders", &cfg.orders)?;
    distinct("lorenz_times", &cfg.lorenz_times)?;
    let balances = match &cfg.balances {
        Some(path) => read_balances(path)?,
        None => DEFAULT_BALANCES.to_vec(),
    };
    let pops = cfg
        .orders
        .iter()
        .map(|&p| AccountPopulation::new(balances.clone(), cfg.rate, p))
        .collect::<growth_order::Result<Vec<_>>>()?;
    let trajectories = inequality::gini_trajectories(&pops, &cfg.times, Execution::Parallel)?;

    let mut gini = Table::new(
        std::iter::once("t".to_string())
            .chain(cfg.orders.iter().map(|p| format!("gini_p_{}", label(*p))))
            .collect(),
    );
    gini.comments.push(format!(
        "accounts={} rate={}",
        balances.len(),
        sig17(cfg.rate)
    ));
    for (k, &t) in cfg.times.iter().enumerate() {
        gini.rows.push(
            std::iter::once(sig17(t))
                .chain(trajectories.iter().map(|tr| sig17(tr[k].1)))
                .collect(),
        );
    }
    let mut written = vec![out.write_table("inequality_gini.csv", &gini)?];
    let chart = LineChart {
        title: format!("Gini index, rate {}", label(cfg.rate)),
        x_label: "t (years)".into(),
        y_label: "Gini".into(),
        log_y: false,
        series: cfg
            .orders
            .iter()
            .zip(&trajectories)
            .map(|(p, tr)| Series {
                name: format!("p = {}", label(*p)),
                points: tr.clone(),
            })
            .collect(),
    };
    written.extend(out.write_chart("inequality_gini.svg", &chart)?);

    for &t in &cfg.lorenz_times {
        let curves = exec::try_map(Execution::Parallel, &pops, |pop| {
            inequality::evolve_population(pop, t).map(|p| inequality::lorenz_curve(&p))
        })?;
        let mut table = Table::new(
            std::iter::once("population_share".to_string())
                .chain(cfg.orders.iter().map(|p| format!("wealth_p_{}", label(*p))))
                .collect(),
        );
        table.comments.push(format!("t={}", sig17(t)));
        for k in 0..curves[0].points.len() {
            table.rows.push(
                std::iter::once(sig17(curves[0].points[k].0))
                    .chain(curves.iter().map(|c| sig17(c.points[k].1)))
                    .collect(),
            );
        }
        written.push(out.write_table(&format!("lorenz_t_{}.csv", label(t)), &table)?);
    }
    Ok(written)
}

pub fn sweep_grid(cfg: &SweepConfig) -> Result<SweepGrid> {
    non_empty("principals", &cfg.principals)?;
    non_empty("orders", &cfg.orders)?;
    non_empty("rates", &cfg.rates)?;
    positive("horizon", cfg.horizon)?;
    Ok(SweepGrid {
        principals: cfg.principals.clone(),
        orders: cfg.orders.clone(),
        rates: cfg.rates.clone(),
        horizon: cfg.horizon,
    })
}

/// Closed form and integrator over every (principal, order, rate) point.
/// A factor that diverges inside the horizon is written as `diverged`.
pub fn run_sweep(cfg: &SweepConfig, out: &Output) -> Result<Vec<PathBuf>> {
    let grid = sweep_grid(cfg)?;
    let integrator = IntegratorConfig::default().with_rel_tol(cfg.rel_tol);
    integrator.validate()?;
    let rows = sweep::run_sweep(&grid, &integrator, Execution::Parallel)?;
    let mut table = Table::new(
        [
            "principal",
            "order",
            "rate",
            "regime",
            "factor",
            "doubling_time",
            "blowup_time",
            "oracle_horizon",
            "oracle_error",
        ]
        .map(String::from)
        .to_vec(),
    );
    table.comments.push(format!(
        "horizon={} rel_tol={}",
        sig17(cfg.horizon),
        sig17(cfg.rel_tol)
    ));
    for r in rows {
        table.rows.push(vec![
            sig17(r.principal),
            sig17(r.order),
            sig17(r.rate),
            r.regime.name().to_string(),
            match r.factor {
                GrowthValue::Finite(v) => sig17(v),
                GrowthValue::Diverged => "diverged".into(),
            },
            cell(r.doubling_time),
            cell(r.blowup_time),
            sig17(r.oracle_horizon),
            sig17(r.oracle_error),
        ]);
    }
    Ok(vec![out.write_table("sweep.csv", &table)?])
}

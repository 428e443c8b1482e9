use std::path::Path;
use std::process::Command;

use growth_order::integrate::IntegratorConfig;
use growth_order::kinetics::{self, GrowthSpec};
use growth_order::sweep;
use growth_order_cli::config::{
    CompeteConfig, DoublingConfig, Format, GrowthConfig, InequalityConfig, SweepConfig,
};
use growth_order_cli::error::CliError;
use growth_order_cli::format::sig17;
use growth_order_cli::scenarios::{self, Output};

struct Csv {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read(path: &Path) -> Csv {
    let text = std::fs::read_to_string(path).unwrap();
    let comments = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .map(String::from)
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    Csv {
        comments,
        header,
        rows,
    }
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn column(csv: &Csv, name: &str) -> Vec<String> {
    let k = csv.header.iter().position(|h| h == name).unwrap();
    csv.rows.iter().map(|r| r[k].clone()).collect()
}

fn out(dir: &tempfile::TempDir) -> Output {
    Output::new(dir.path(), Format::Csv)
}

#[test]
fn table1_raw_values_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    scenarios::run_table1(&out(&dir)).unwrap();
    let t = read(&dir.path().join("table1.csv"));
    assert_eq!(t.header, ["principal", "p_1.1", "p_1.0", "p_0.9"]);
    assert_eq!(t.rows.len(), 10);
    for row in &t.rows {
        let c = num(&row[0]);
        for (cell, p) in row[1..].iter().zip([1.1, 1.0, 0.9]) {
            assert_eq!(num(cell), kinetics::effective_principal(c, p).unwrap());
        }
        assert_eq!(row[2], row[0]);
    }
    let display = read(&dir.path().join("table1_display.csv"));
    assert_eq!(display.rows[5][1], "630957344.48");
    assert_eq!(display.rows[7][1], "100000000000.00");
}

#[test]
fn growth_curves_round_trip_and_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = GrowthConfig::default();
    let files = scenarios::run_growth_curves(&cfg, &out(&dir)).unwrap();
    assert_eq!(files.len(), 4);
    for c0 in [1.0, 1e3, 1e6, 1e9] {
        let name = format!("growth_c0_{c0:e}.csv");
        let t = read(&dir.path().join(&name));
        assert_eq!(t.header.len(), 12);
        assert_eq!(t.rows.len(), 201);
        for row in &t.rows {
            let time = num(&row[0]);
            for (cell, p) in row[1..].iter().zip(&cfg.orders) {
                let v = kinetics::principal_at(&GrowthSpec::new(c0, 0.05, *p).unwrap(), time);
                assert_eq!(num(cell), v.finite().unwrap(), "{name} t={time} p={p}");
            }
        }
        let first = column(&t, "p_1");
        let factor = num(first.last().unwrap()) / num(&first[0]);
        assert!((factor - 148.41).abs() < 0.005, "{factor}");
    }
}

#[test]
fn growth_truncates_before_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = GrowthConfig {
        principals: vec![1.0],
        orders: vec![1.0, 2.0],
        rate: 0.05,
        horizon: 40.0,
        samples: 41,
    };
    scenarios::run_growth_curves(&cfg, &out(&dir)).unwrap();
    let t = read(&dir.path().join("growth_c0_1e0.csv"));
    // t* = 20 for c0 = 1, i = 0.05, p = 2
    assert!(t.comments.iter().any(|c| c.starts_with("truncated p_2 at 0.99*t* = 19.8")));
    let p2 = column(&t, "p_2");
    for (row, cell) in t.rows.iter().zip(&p2) {
        let time = num(&row[0]);
        assert_eq!(cell.is_empty(), time > 19.8, "t={time}");
    }
    assert!(column(&t, "p_1").iter().all(|c| !c.is_empty()));
}

#[test]
fn zero_rate_gives_flat_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = GrowthConfig {
        principals: vec![1e3],
        orders: vec![1.0],
        rate: 0.0,
        ..GrowthConfig::default()
    };
    scenarios::run_growth_curves(&cfg, &out(&dir)).unwrap();
    let t = read(&dir.path().join("growth_c0_1e3.csv"));
    assert!(column(&t, "p_1").iter().all(|c| c == "1000"));
}

#[test]
fn doubling_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = DoublingConfig::default();
    scenarios::run_doubling_curves(&cfg, &out(&dir)).unwrap();
    let t = read(&dir.path().join("doubling_c0_1e9.csv"));
    let rates: Vec<f64> = column(&t, "rate").iter().map(|s| num(s)).collect();
    assert_eq!(rates[0], 0.01);
    let p1 = column(&t, "t2_p_1");
    assert_eq!(p1, column(&t, "ln2_over_rate"));
    assert!((num(&p1[0]) - 69.3).abs() < 0.05);
    for (k, p) in cfg.orders.iter().enumerate() {
        let col: Vec<f64> = t.rows.iter().map(|r| num(&r[k + 1])).collect();
        assert!(col.windows(2).all(|w| w[1] < w[0]), "p={p} not decreasing");
        for (&i, &t2) in rates.iter().zip(&col) {
            let spec = GrowthSpec::new(1e9, i, *p).unwrap();
            assert_eq!(t2, kinetics::doubling_time(&spec).unwrap());
        }
    }
    let req = read(&dir.path().join("doubling_required_rates.csv"));
    let row = req
        .rows
        .iter()
        .find(|r| num(&r[0]) == 1e9 && num(&r[1]) == 0.95)
        .unwrap();
    assert!((num(&row[3]) - 0.199).abs() < 0.001);
}

#[test]
fn doubling_rejects_non_positive_rates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = DoublingConfig {
        rates: vec![0.05, 0.0],
        ..DoublingConfig::default()
    };
    let err = scenarios::run_doubling_curves(&cfg, &out(&dir)).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn competition_report() {
    let dir = tempfile::tempdir().unwrap();
    scenarios::run_competition(&CompeteConfig::default(), &out(&dir)).unwrap();
    let traj = read(&dir.path().join("compete_trajectory.csv"));
    assert_eq!(traj.header, ["t", "frac_A", "frac_B"]);
    let last = traj.rows.last().unwrap();
    let ratio = num(&last[1]) / num(&last[2]);
    assert!((ratio / 0.01 - 1.0).abs() < 0.01);
    let report = read(&dir.path().join("compete_report.csv"));
    assert!(report.comments.iter().any(|c| c.starts_with("outcome=coexistence")));
    assert!(report.comments.iter().any(|c| c == "passed=true"));
    assert!(report.rows.iter().all(|r| r[6] == "pass"));
}

#[test]
fn competition_equal_efficiency_holds_shares() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CompeteConfig {
        order: 1.0,
        efficiencies: vec![1.0, 1.0],
        ..CompeteConfig::default()
    };
    scenarios::run_competition(&cfg, &out(&dir)).unwrap();
    let traj = read(&dir.path().join("compete_trajectory.csv"));
    for row in &traj.rows {
        assert!((num(&row[1]) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn competition_most_common_wins_at_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CompeteConfig {
        order: 2.0,
        efficiencies: vec![1.0, 1.0],
        initials: vec![1.0, 3.0],
        ..CompeteConfig::default()
    };
    scenarios::run_competition(&cfg, &out(&dir)).unwrap();
    let report = read(&dir.path().join("compete_report.csv"));
    assert!(report
        .comments
        .iter()
        .any(|c| c == "outcome=initial-condition-winner B"));
}

#[test]
fn unconverged_competition_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CompeteConfig {
        t_end: 0.5,
        ..CompeteConfig::default()
    };
    let err = scenarios::run_competition(&cfg, &out(&dir)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("drift"));
    // Results are still written for inspection.
    assert!(dir.path().join("compete_report.csv").exists());
}

#[test]
fn competition_length_mismatch_is_validation() {
    let cfg = CompeteConfig {
        initials: vec![1.0],
        ..CompeteConfig::default()
    };
    assert!(matches!(
        scenarios::competition_system(&cfg),
        Err(CliError::Validation(_))
    ));
}

fn write_balances(dir: &tempfile::TempDir, text: &str) -> std::path::PathBuf {
    let path = dir.path().join("balances.csv");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn inequality_trends() {
    let dir = tempfile::tempdir().unwrap();
    let balances = write_balances(&dir, "balance\n1\n1000\n1e6\n1000000000\n");
    let cfg = InequalityConfig {
        balances: Some(balances),
        ..InequalityConfig::default()
    };
    scenarios::run_inequality(&cfg, &out(&dir)).unwrap();
    let g = read(&dir.path().join("inequality_gini.csv"));
    let col = |name: &str| -> Vec<f64> { column(&g, name).iter().map(|s| num(s)).collect() };
    let flat = col("gini_p_1");
    assert!(flat.iter().all(|v| (v - flat[0]).abs() < 1e-12));
    assert!(col("gini_p_0.95").windows(2).all(|w| w[1] < w[0]));
    assert!(col("gini_p_1.05").windows(2).all(|w| w[1] > w[0]));

    let lorenz = read(&dir.path().join("lorenz_t_50.csv"));
    assert_eq!(lorenz.rows.len(), 5);
    assert_eq!(lorenz.rows[0][1], "0");
    assert_eq!(lorenz.rows[4][1], "1");
}

#[test]
fn balances_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_balances(&dir, "balance\n10\n20\nabc\n");
    let msg = scenarios::read_balances(&path).unwrap_err().to_string();
    assert!(msg.contains(":4:"), "{msg}");

    let path = write_balances(&dir, "balance\n10\n-3\n");
    let msg = scenarios::read_balances(&path).unwrap_err().to_string();
    assert!(msg.contains(":3:"), "{msg}");

    let path = write_balances(&dir, "");
    assert_eq!(scenarios::read_balances(&path).unwrap_err().exit_code(), 1);

    let path = write_balances(&dir, "balance\n");
    assert!(scenarios::read_balances(&path).unwrap_err().to_string().contains("no balances"));

    let path = write_balances(&dir, "amount\n1\n");
    assert!(scenarios::read_balances(&path).is_err());

    let missing = dir.path().join("missing.csv");
    assert_eq!(scenarios::read_balances(&missing).unwrap_err().exit_code(), 3);
}

#[test]
fn sweep_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SweepConfig {
        principals: vec![1.0, 1e3],
        orders: vec![0.5, 1.0, 1.5],
        rates: vec![0.05],
        horizon: 100.0,
        rel_tol: 1e-9,
    };
    scenarios::run_sweep(&cfg, &out(&dir)).unwrap();
    let t = read(&dir.path().join("sweep.csv"));
    assert_eq!(t.rows.len(), 6);
    let config = IntegratorConfig::default();
    for row in &t.rows {
        let (c, p, i) = (num(&row[0]), num(&row[1]), num(&row[2]));
        let r = sweep::evaluate_point(c, p, i, 100.0, &config).unwrap();
        assert_eq!(row[3], r.regime.name());
        match r.factor.finite() {
            Some(f) => assert_eq!(num(&row[4]), f),
            None => assert_eq!(row[4], "diverged"),
        }
        assert_eq!(row[6].is_empty(), r.blowup_time.is_none());
        assert_eq!(num(&row[8]), r.oracle_error);
    }
    // c0 = 1, p = 1.5, i = 0.05 blows up at t* = 40
    let diverged = t.rows.iter().find(|r| r[0] == "1" && r[1] == "1.5").unwrap();
    assert_eq!(diverged[4], "diverged");
    assert_eq!(diverged[6], sig17(40.0));
}

// Binary-level behavior.

fn mgo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mgo")).args(args).output().unwrap()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn output_is_identical_across_runs_and_worker_counts() {
    let root = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for workers in ["1", "3", "1"] {
        let dir = root.path().join(format!("w{workers}_{}", snapshots.len()));
        let d = dir.to_str().unwrap();
        for sub in ["table1", "growth", "doubling", "compete", "inequality", "sweep"] {
            let o = mgo(&[sub, "--out", d, "--workers", workers, "--format", "csv+svg"]);
            assert!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        }
        snapshots.push(dir_bytes(&dir));
    }
    assert!(snapshots[0].len() > 20);
    assert_eq!(snapshots[0], snapshots[1]);
    assert_eq!(snapshots[0], snapshots[2]);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out_cfg = dir.path().join("from_config");
    std::fs::write(
        &cfg,
        format!(
            "[run]\nout = {:?}\n[growth]\nprincipals = [5.0]\norders = [1.0]\nsamples = 3\nhorizon = 10.0\n",
            out_cfg.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = mgo(&["growth", "--config", cfg.to_str().unwrap(), "--samples", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(&out_cfg.join("growth_c0_5e0.csv"));
    assert_eq!(column(&t, "t"), ["0", "2.5", "5", "7.5", "10"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(mgo(&["--help"]).status.code(), Some(0));
    assert_eq!(mgo(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mgo(&["growth", "--samples", "x"]).status.code(), Some(1));
    assert_eq!(mgo(&["growth", "--out", d, "--samples", "1"]).status.code(), Some(1));
    assert_eq!(mgo(&["compete", "--out", d, "--t-end", "0.5"]).status.code(), Some(2));

    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "[growth]\nspeed = 1\n").unwrap();
    assert_eq!(
        mgo(&["growth", "--out", d, "--config", bad_cfg.to_str().unwrap()]).status.code(),
        Some(1)
    );
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        mgo(&["table1", "--config", missing.to_str().unwrap()]).status.code(),
        Some(3)
    );

    // The output path is a regular file, so the directory cannot be created.
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = mgo(&["table1", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("file"));

    let o = mgo(&["table1", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("table1.csv"));
}

use std::fs;
use std::process::{Command, Output};

use hearability_cli::output::{COLUMNS, COMPLIANCE_COLUMNS};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hearability"));
    c.env_remove("HEARABILITY_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn analytic_rows_follow_the_column_contract() {
    let csv = stdout_of(&[
        "analytic",
        "--no-timestamp",
        "--set",
        "methods=UpperBound,SingleIntegralAlpha4,PerfectCoord",
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(COLUMNS));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 3 * 21);
    for r in &rows {
        assert_eq!(r.len(), 10);
        for i in [0, 2, 3, 4, 6] {
            assert!(r[i].parse::<f64>().unwrap().is_finite(), "{r:?}");
        }
        let v: f64 = r[8].parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
        assert_eq!(r[9], "", "analytic rows carry no stderr");
        assert!(
            !r[8].contains('e') && !r[8].contains('E'),
            "plain decimals only: {}",
            r[8]
        );
    }
}

#[test]
fn rows_are_sorted_by_method_then_grid() {
    let csv = stdout_of(&["analytic", "--no-timestamp", "--set", "methods=UpperBound,PerfectCoord"]);
    let keys: Vec<(String, f64)> = data_rows(&csv)
        .iter()
        .map(|r| (r[7].clone(), r[0].parse().unwrap()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    assert_eq!(keys, sorted);
}

#[test]
fn timestamp_header_is_suppressible() {
    let with = stdout_of(&["analytic", "--set", "methods=UpperBound"]);
    assert!(with.starts_with("# generated unix="));
    let without = stdout_of(&["analytic", "--no-timestamp", "--set", "methods=UpperBound"]);
    assert!(without.starts_with(COLUMNS));
    assert_eq!(
        with.lines().skip(1).collect::<Vec<_>>(),
        without.lines().collect::<Vec<_>>()
    );
}

#[test]
fn simulate_is_deterministic_and_has_stderr() {
    let args = ["simulate", "--no-timestamp", "--seed", "3", "--realizations", "1500"];
    let a = stdout_of(&args);
    let b = stdout_of(&args);
    assert_eq!(a, b);
    for r in data_rows(&a) {
        assert_eq!(r[7], "MonteCarloJoint");
        let se: f64 = r[9].parse().unwrap();
        assert!(se >= 0.0);
    }
    let other = stdout_of(&["simulate", "--no-timestamp", "--seed", "4", "--realizations", "1500"]);
    assert_ne!(a, other);
}

#[test]
fn seed_falls_back_to_environment() {
    let args = ["simulate", "--no-timestamp", "--realizations", "800"];
    let env = bin().args(args).env("HEARABILITY_SEED", "9").output().unwrap();
    assert!(env.status.success());
    let flag = stdout_of(&[&args[..], &["--seed", "9"]].concat());
    assert_eq!(String::from_utf8(env.stdout).unwrap(), flag);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# alpha family member\nalpha = 3.5\np = 0.5\nL = 3\nsweep_start_db = -10\nsweep_stop_db = -8\nsweep_step_db = 0.5\n\
         methods = DoubleIntegral\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let csv = stdout_of(&["analytic", "--no-timestamp", "--config", cfg, "--set", "L=5"]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 5);
    assert!(rows
        .iter()
        .all(|r| r[1] == "5" && r[2] == "0.5" && r[4] == "3.5" && r[7] == "DoubleIntegral"));
}

#[test]
fn unknown_key_fails_naming_it() {
    let out = run(&["analytic", "--set", "alhpa=3"]);
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("`alhpa`"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "alpha = 4\nrealisations = 10\n").unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = stderr_of(&out);
    assert!(err.contains("`realisations`") && err.contains("line 2"), "{err}");
}

#[test]
fn invalid_values_fail_naming_the_key() {
    for (set, key) in [
        ("methods=", "methods"),
        ("sweep_step_db=0", "sweep_step_db"),
        ("sweep_start_db=5", "sweep_start_db"),
        ("methods=Nope", "methods"),
        ("alpha=abc", "alpha"),
    ] {
        let out = run(&["analytic", "--set", set]);
        assert!(!out.status.success(), "{set}");
        assert!(
            stderr_of(&out).contains(&format!("`{key}`")),
            "{set}: {}",
            stderr_of(&out)
        );
    }
    let out = run(&["analytic", "--set", "methods=MonteCarloJoint"]);
    assert!(!out.status.success());
    let out = run(&["analytic", "--set", "alpha=3", "--set", "methods=NearFieldAlpha4"]);
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("alpha = 4"));
}

#[test]
fn unknown_figure_lists_valid_names() {
    let out = run(&["figure", "fig12"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    for name in ["fig2", "fig3", "fig11"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn figure_writes_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f3.csv");
    let status = bin()
        .args(["figure", "fig3", "--no-timestamp", "--realizations", "3000", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let script = fs::read_to_string(dir.path().join("f3.py")).unwrap();
    assert!(script.contains("\"f3.csv\"") && script.contains("matplotlib"));
    let rows = data_rows(&csv);
    let methods: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[7].as_str()).collect();
    assert_eq!(
        methods.into_iter().collect::<Vec<_>>(),
        [
            "MonteCarloJoint",
            "NearFieldAlpha4",
            "SingleIntegralAlpha4",
            "UpperBound"
        ]
    );
    // The bound dominates the simulation at every grid point.
    let at = |m: &str| -> Vec<(f64, f64, f64)> {
        rows.iter()
            .filter(|r| r[7] == m)
            .map(|r| {
                (
                    r[8].parse().unwrap(),
                    r[9].parse().unwrap_or(0.0),
                    r[0].parse().unwrap(),
                )
            })
            .collect()
    };
    for (b, m) in at("UpperBound").iter().zip(at("MonteCarloJoint")) {
        assert_eq!(b.2, m.2);
        assert!(b.0 >= m.0 - 3.0 * m.1, "{b:?} {m:?}");
    }
}

#[test]
fn fig7_lower_activity_gives_higher_probability() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f7.csv");
    let status = bin()
        .args(["figure", "fig7", "--no-timestamp", "--realizations", "2000", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    for db in ["-16", "-10", "-4"] {
        let mut by_p: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r[7] == "SingleIntegralAlpha4" && r[0] == db)
            .map(|r| (r[2].parse().unwrap(), r[8].parse().unwrap()))
            .collect();
        by_p.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(by_p.len(), 4);
        assert!(by_p.windows(2).all(|w| w[1].1 < w[0].1), "{db}: {by_p:?}");
    }
}

#[test]
fn e911_writes_compliance_table() {
    let csv = stdout_of(&["e911", "--no-timestamp", "--realizations", "400", "--seed", "2"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(COMPLIANCE_COLUMNS));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][0], "4");
    for r in &rows {
        assert!(r[3] == "true" || r[3] == "false");
        assert_eq!(r[5], "400");
    }
}

#[test]
fn fig5_gain_table_matches_bound_inversion() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f5.csv");
    let status = bin()
        .args(["figure", "fig5", "--no-timestamp", "--realizations", "2000", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    let l4 = rows.iter().find(|r| r[7] == "ProcGainBound" && r[1] == "4").unwrap();
    let db: f64 = l4[8].parse().unwrap();
    assert!((db - 10.0 * 196.615_284_4f64.log10()).abs() < 1e-6);
}

#[test]
fn worker_count_does_not_change_output() {
    let base = [
        "reuse",
        "--no-timestamp",
        "--seed",
        "5",
        "--realizations",
        "1500",
        "--set",
        "K=3",
    ];
    let one = stdout_of(&[&base[..], &["--workers", "1"]].concat());
    let three = stdout_of(&[&base[..], &["--workers", "3"]].concat());
    assert_eq!(one, three);
    let rows = data_rows(&one);
    assert!(rows.iter().any(|r| r[7] == "MonteCarloReuse"));
    assert!(rows.iter().all(|r| r[5] == "3"));
}

#[test]
fn hexgrid_rows_are_tail_probabilities() {
    let csv = stdout_of(&[
        "hexgrid",
        "--no-timestamp",
        "--realizations",
        "1000",
        "--set",
        "hex_sigmas=8",
        "--set",
        "max_l=6",
    ]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 12);
    for m in ["MonteCarloHex_s8", "MonteCarloPpp_s8"] {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r[7] == m)
            .map(|r| r[8].parse().unwrap())
            .collect();
        assert_eq!(v.len(), 6);
        assert!(v.windows(2).all(|w| w[1] <= w[0]), "{m}: {v:?}");
    }
}

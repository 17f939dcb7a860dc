use std::path::Path;
use std::process::{Command, Output};

fn hardedge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardedge"))
        .args(args)
        .env_remove("HARDEDGE_PRECISION_BITS")
        .env_remove("HARDEDGE_THREADS")
        .output()
        .expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn gap_auto_uses_fredholm_at_beta_two() {
    let o = hardedge(&["gap", "--beta", "2", "--a", "1", "--xi", "1", "--s", "0:20:11", "--route", "auto"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("s,value,correction_n2,correction_n1,route,est_error\n"));
    assert_eq!(csv.lines().count(), 12);
    assert!(column(&csv, "route").iter().all(|r| r == "fredholm"));
    let v: Vec<f64> = column(&csv, "value").iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!(v[0], 1.0);
    assert!(v.windows(2).all(|w| w[1] < w[0]));
    // 17 significant digits
    let cell = &column(&csv, "value")[3];
    let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{cell}");
}

#[test]
fn a_zero_gap_is_exponential() {
    let o = hardedge(&["gap", "--a", "0", "--s", "1:20:4"]);
    let csv = stdout(&o);
    for (s, v) in column(&csv, "s").iter().zip(column(&csv, "value")) {
        let (s, v): (f64, f64) = (s.parse().unwrap(), v.parse().unwrap());
        assert!((v - (-s / 4.0).exp()).abs() < 1e-10);
    }
}

#[test]
fn finite_n_routes_agree() {
    let run = |route: &str| {
        let o = hardedge(&["gap", "--beta", "2", "--a", "1", "--N", "15", "--s", "1:15:5", "--route", route]);
        assert!(o.status.success(), "{route}: {}", stderr(&o));
        column(&stdout(&o), "value").iter().map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>()
    };
    let (f, r, e) = (run("fredholm"), run("recurrence"), run("exact-a1"));
    for i in 0..5 {
        assert!((f[i] - r[i]).abs() < 1e-9 && (r[i] - e[i]).abs() < 1e-9);
    }
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["gap", "--beta", "3", "--a", "1", "--s", "1:2:3", "--route", "fredholm"][..],
        &["gap", "--a", "1", "--s", "1:2:1"],
        &["gap", "--a", "-2", "--s", "1:2:3"],
        &["gap", "--beta", "3", "--a", "1.5", "--s", "1:2:3", "--route", "torus"],
        &["recurrence", "--beta", "6", "--a", "2", "--N", "50", "--N0", "100", "--s", "1:2:3"],
        &["mc", "--N", "5", "--samples", "10"],
        &["gap", "--a", "1", "--s", "1:2:3", "--plot-script"],
        &["gap", "--a", "1", "--s", "1:2:3", "--precision-bits", "32"],
    ] {
        let o = hardedge(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn numerical_failure_exits_three() {
    let o = hardedge(&["gap", "--a", "1", "--s", "5000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ill-conditioned"));
}

#[test]
fn env_overrides_and_flags_win() {
    let bin = env!("CARGO_BIN_EXE_hardedge");
    let args = ["gap", "--beta", "6", "--a", "2", "--N", "20", "--s", "4", "--route", "recurrence"];
    let o = Command::new(bin).args(args).env("HARDEDGE_PRECISION_BITS", "16").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(bin)
        .args(args)
        .args(["--precision-bits", "128"])
        .env("HARDEDGE_PRECISION_BITS", "16")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(bin).args(["gap", "--a", "1", "--s", "4"]).env("HARDEDGE_THREADS", "x").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_writes_sidecar_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("gap.csv");
    let o = hardedge(&["gap", "--a", "1", "--s", "0:10:3", "--out", csv.to_str().unwrap(), "--plot-script"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("s,value"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("gap.csv.json")).unwrap()).unwrap();
    for key in ["config", "version", "started_at", "wall_seconds", "warnings"] {
        assert!(meta.get(key).is_some(), "missing {key}");
    }
    assert_eq!(meta["config"]["command"], "gap");
    assert_eq!(meta["config"]["a"], 1.0);
    assert!(meta["wall_seconds"].as_f64().unwrap() >= 0.0);
    let gp = std::fs::read_to_string(dir.path().join("gap.csv.gp")).unwrap();
    assert!(gp.contains("'gap.csv' using 1:2"));
}

fn mc_csv(threads: &str, dir: &Path) -> String {
    let path = dir.join(format!("mc{threads}.csv"));
    let o = hardedge(&[
        "mc",
        "--beta",
        "2",
        "--a",
        "1",
        "--N",
        "12",
        "--samples",
        "2e4",
        "--bins",
        "20",
        "--smax",
        "40",
        "--seed",
        "7",
        "--threads",
        threads,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn mc_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (mc_csv("1", dir.path()), mc_csv("3", dir.path()));
    assert_eq!(a, b);
    assert!(a.starts_with("bin_lo,bin_hi,count,density,std_error,scaled_difference,scaled_std_error,predicted,z\n"));
    assert_eq!(a.lines().count(), 21);
}

#[test]
fn cross_validate_quick_passes_and_catches_perturbation() {
    let o = hardedge(&["cross-validate", "--suite", "quick"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(column(&stdout(&o), "status").iter().all(|s| s == "pass"));
    let o = hardedge(&["cross-validate", "--perturb-l2hat", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("c2 fredholm/painleve"), "{err}");
    let failed = column(&stdout(&o), "pair")
        .into_iter()
        .zip(column(&stdout(&o), "status"))
        .filter(|(_, s)| s == "FAIL")
        .map(|(p, _)| p)
        .collect::<Vec<_>>();
    assert!(failed.iter().all(|p| p.starts_with("c2 ")), "{failed:?}");
}

#[test]
fn other_commands_run() {
    for args in [
        &["pdf", "--a", "1", "--s", "1:5:3"][..],
        &["density", "--beta", "4", "--a", "1", "--s", "1:9:3"],
        &["density", "--beta", "2", "--a", "1", "--N", "30", "--s", "1:9:3"],
        &["density", "--beta", "4", "--a", "1", "--N", "30", "--s", "1:9:3", "--route", "recurrence"],
        &["correction", "--beta", "2", "--a", "1", "--s", "2:8:2"],
        &["painleve", "--a", "1", "--s", "1:5:3"],
        &["recurrence", "--beta", "6", "--a", "2", "--N", "10,20", "--N0", "400", "--s", "2:12:3"],
        &["convergence", "--beta", "3", "--a", "1", "--N", "50,100,200", "--s", "5"],
        &["gap", "--beta", "1", "--a", "2", "--s", "1:8:3", "--route", "torus"],
        &["gap", "--beta", "3", "--a", "2", "--s", "1:8:3"],
    ] {
        let o = hardedge(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        assert!(stdout(&o).lines().count() >= 2);
    }
}

#[test]
fn density_warning_beyond_valid_range() {
    let o = hardedge(&[
        "recurrence",
        "--beta",
        "6",
        "--a",
        "2",
        "--N",
        "10",
        "--N0",
        "400",
        "--s",
        "2:12:2",
        "--quantity",
        "density",
    ]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn convergence_ratios_near_one() {
    let o = hardedge(&["convergence", "--beta", "3", "--a", "1", "--N", "50,100,200", "--s", "8"]);
    let ratios: Vec<f64> =
        column(&stdout(&o), "ratio").iter().filter(|r| !r.is_empty()).map(|r| r.parse().unwrap()).collect();
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().all(|r| (0.8..=1.25).contains(r)));
}

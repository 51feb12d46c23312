//! End-to-end checks of the binary: output formats and the exit-code
//! contract (0 ok, 1 chain violation, 2 budget, 3 exactness unavailable).

use std::process::Command;

use lattice_segments_cli::CliError;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lattice-segments"))
}

#[test]
fn exit_code_mapping() {
    assert_eq!(CliError::ExactChainViolation("x".into()).exit_code(), 1);
    assert_eq!(CliError::Budget("x".into()).exit_code(), 2);
    assert_eq!(CliError::ExactnessUnavailable("x".into()).exit_code(), 3);
    assert_eq!(CliError::Usage("x".into()).exit_code(), 64);
    assert_eq!(CliError::Failure("x".into()).exit_code(), 70);
}

#[test]
fn enumerate_prints_count_and_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("points.txt");
    let res = bin()
        .args(["enumerate", "-d", "2", "-n", "25", "-o"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert_eq!(String::from_utf8_lossy(&res.stdout).trim(), "12");
    let file = std::fs::File::open(&out).unwrap();
    let set = lattice_segments::lattice::read_point_set(std::io::BufReader::new(file)).unwrap();
    assert_eq!(set.len(), 12);
    assert_eq!(set.sphere().dim(), 2);
    assert_eq!(set.sphere().n(), 25);
}

#[test]
fn enumerate_known_zero_and_24() {
    let res = bin()
        .args(["enumerate", "-d", "3", "-n", "7"])
        .output()
        .unwrap();
    assert!(res.status.success());
    assert_eq!(String::from_utf8_lossy(&res.stdout).trim(), "0");

    let res = bin()
        .args(["enumerate", "-d", "4", "-n", "2"])
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&res.stdout).trim(), "24");
}

#[test]
fn enumerate_budget_exit_2() {
    let res = bin()
        .args(["enumerate", "-d", "5", "-n", "1000000"])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn count_worked_example() {
    let res = bin()
        .args([
            "count", "-d", "2", "-n", "25", "--dir", "1,0", "--rho1", "50", "--rho2", "2",
        ])
        .output()
        .unwrap();
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["count"], 6);
    assert_eq!(v["exact"], true);
}

#[test]
fn count_exact_demanded_uncertain_exit_3() {
    // boundary points (0, ±5) land inside the float tolerance band
    let res = bin()
        .args([
            "count",
            "-d",
            "2",
            "-n",
            "25",
            "--dir-real",
            "1,0",
            "--rho1",
            "50",
            "--exact",
        ])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn count_interval_without_exact_flag() {
    let res = bin()
        .args([
            "count",
            "-d",
            "2",
            "-n",
            "25",
            "--dir-real",
            "1,0",
            "--rho1",
            "50",
        ])
        .output()
        .unwrap();
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(v["count_interval"].is_array());
    assert_eq!(v["exact"], false);
}

#[test]
fn usage_error_exit_64() {
    let res = bin()
        .args(["count", "-d", "2", "-n", "25", "--rho1", "50"])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(64));
}

#[test]
fn slice_csv_output() {
    let res = bin()
        .args(["slice", "-d", "2", "-n", "25", "-b", "0,1"])
        .output()
        .unwrap();
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "normal,t,count");
    assert!(lines.contains(&"0;1,-5,1"));
    assert!(lines.contains(&"0;1,0,2"));
    assert!(lines.contains(&"0;1,4,2"));
    assert_eq!(lines.len(), 1 + 7);
}

#[test]
fn kappa_d3_n9_axis() {
    let res = bin()
        .args(["kappa", "-d", "3", "-n", "9", "--max-norm", "1"])
        .output()
        .unwrap();
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["lower_bound"], 8);
}

#[test]
fn approx_worked_example() {
    let res = bin()
        .args([
            "approx",
            "--beta",
            "0.5773502691896258,0.8164965809277260",
            "-H",
            "4",
        ])
        .output()
        .unwrap();
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["a"], serde_json::json!([2, 3]));
    assert_eq!(v["q"], 3);
}

#[test]
fn approx_rational_quotients() {
    let res = bin()
        .args([
            "approx",
            "--beta",
            "0.5,0.5,0.7071067811865476",
            "--mask",
            "0=1,1=1",
            "-H",
            "5",
            "--rational-quotients",
        ])
        .output()
        .unwrap();
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["a"], serde_json::json!([2, 2, 3]));
    assert_eq!(v["rq"]["s"], 1);
}

#[test]
fn cover_reports_containment() {
    let res = bin()
        .args([
            "cover",
            "-d",
            "2",
            "-n",
            "25",
            "--dir-real",
            "0.5,0.8660254037844386",
            "--rho1",
            "20",
            "--rho2",
            "5",
            "-a",
            "1,2",
        ])
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["containment_ok"], true);
    assert_eq!(v["a"], serde_json::json!([1, 2]));
}

#[test]
fn verify_small_config_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let summary = dir.path().join("summary.json");
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "dims": [3],
            "n_values": [50, 100],
            "thetas": [0.2],
            "inner_thetas": [0.0],
            "lattice_directions": 2,
            "random_directions": 1,
            "seed": 5,
            "out_csv": csv,
            "out_summary": summary,
        })
        .to_string(),
    )
    .unwrap();
    let res = bin()
        .args(["verify", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("# lattice-segments v1\n"));
    let sum: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(sum["chain_failures"], 0);
}

#[test]
fn verify_full_mask_takes_exact_branch() {
    // mask_size = d: every sampled direction is exactly rational, the
    // pipeline skips approximation, and φ is identically zero
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "dims": [3],
            "n_values": [81, 100],
            "thetas": [0.3],
            "mode": {"rational_quotients": {"mask_size": 3}},
            "random_directions": 3,
            "seed": 9,
            "out_csv": csv,
            "out_summary": dir.path().join("summary.json"),
        })
        .to_string(),
    )
    .unwrap();
    let res = bin()
        .args(["verify", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let body = std::fs::read_to_string(&csv).unwrap();
    for line in body.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[7], "1", "H reported as 1 on the exact branch");
        assert_eq!(cols[10], "0", "phi_upper must be exactly zero: {line}");
        assert_eq!(cols[19], "true");
    }
}

#[test]
fn verify_rejects_missing_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "dims": [3],
            "n_values": [50],
            "thetas": [0.2],
            "random_directions": 1,
            "out_csv": dir.path().join("rows.csv"),
            "out_summary": dir.path().join("summary.json"),
        })
        .to_string(),
    )
    .unwrap();
    let res = bin()
        .args(["verify", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(64));
}

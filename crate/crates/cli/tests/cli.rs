//! End-to-end runs of the `ptg` binary.

use std::path::Path;
use std::process::{Command, Output};

fn ptg(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ptg"));
    cmd.args(args).env_remove("PTG_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("ptg runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn trajectory_csv_layout_and_first_row() {
    let out = ptg(
        &[
            "trajectory",
            "--gamma",
            "0.5",
            "--t-final",
            "50",
            "--samples",
            "500",
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(
        header,
        ["t", "S", "S_L", "S_G", "I", "D_LG", "D_GL", "nu_pt_min"]
    );
    assert_eq!(rows.len(), 500);
    let first: Vec<f64> = rows[0].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(&first[..7], &[0.0; 7]);
    assert_eq!(first[7], 1.0);
    // 17 significant digits
    assert!(
        rows[1][0].split('e').next().unwrap().len() == 18,
        "{}",
        rows[1][0]
    );
    let last_t: f64 = rows[499][0].parse().unwrap();
    assert_eq!(last_t, 50.0);
}

#[test]
fn trajectory_round_trip_reproduces_mutual_information() {
    let out = ptg(
        &[
            "trajectory",
            "--gamma-l",
            "0.3",
            "--gamma-g",
            "0.9",
            "--t-final",
            "30",
            "--samples",
            "301",
        ],
        &[],
    );
    assert_eq!(code(&out), 0);
    let (_, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    for row in rows {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        let raw = (v[2] + v[3]) - v[1];
        let i = if raw < 0.0 && raw > -1e-9 { 0.0 } else { raw };
        assert_eq!(i.to_bits(), v[4].to_bits(), "t = {}", v[0]);
    }
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "sweep-pt-line".to_owned(),
            "--gamma-min".into(),
            "0.2".into(),
            "--gamma-max".into(),
            "2.0".into(),
            "--n-gamma".into(),
            "10".into(),
            "-o".into(),
            p.to_str().unwrap().to_owned(),
        ]
    };
    let run = |p: &Path, threads: &str| {
        let a: Vec<String> = args(p);
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(code(&ptg(&a, &[("PTG_THREADS", threads)])), 0);
    };
    run(&a, "1");
    run(&b, "4");
    assert_eq!(read(&a), read(&b));

    let c = dir.path().join("c.csv");
    let d = dir.path().join("d.csv");
    for p in [&c, &d] {
        let out = ptg(
            &[
                "trajectory",
                "--gamma",
                "1.5",
                "--t-final",
                "40",
                "--samples",
                "81",
                "-o",
                p.to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&c).unwrap(), std::fs::read(&d).unwrap());
}

#[test]
fn sweep_crosses_the_critical_point() {
    let out = ptg(
        &[
            "sweep-pt-line",
            "--gamma-min",
            "0.5",
            "--gamma-max",
            "3.0",
            "--n-gamma",
            "11",
        ],
        &[],
    );
    assert_eq!(code(&out), 0);
    let (header, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(
        header,
        [
            "gamma_over_g",
            "D_LG_formula",
            "D_GL_formula",
            "D_LG_measured",
            "D_GL_measured"
        ]
    );
    for row in rows {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        if v[0] <= 1.0 {
            assert_eq!((v[1], v[2]), (0.0, 0.0));
        } else {
            assert!(v[1] > 0.0 && v[2] > 0.0);
        }
        if v[0] >= 1.2 {
            assert!(
                (v[1] - v[3]).abs() < 1e-3 && (v[2] - v[4]).abs() < 1e-3,
                "{v:?}"
            );
        }
        if v[0] == 3.0 {
            assert!((v[2] - 0.6502).abs() < 1e-3);
        }
    }
}

#[test]
fn phase_diagram_rows_follow_the_grid() {
    let out = ptg(
        &[
            "phase-diagram",
            "--gamma-l-min",
            "0.1",
            "--gamma-l-max",
            "2.0",
            "--gamma-g-min",
            "0.4",
            "--gamma-g-max",
            "2.5",
            "--n-grid",
            "3",
            "--format",
            "json",
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 9);
    let at = |k: usize| {
        (
            rows[k]["gamma_L"].as_f64().unwrap(),
            rows[k]["gamma_G"].as_f64().unwrap(),
        )
    };
    let close = |k: usize, want: (f64, f64)| {
        let got = at(k);
        assert!(
            (got.0 - want.0).abs() < 1e-12 && (got.1 - want.1).abs() < 1e-12,
            "row {k}: {got:?}"
        );
    };
    close(0, (0.1, 0.4));
    close(1, (0.1, 1.45));
    close(3, (1.05, 0.4));
    // (0.1, 2.5): unstable node, discord gone
    assert_eq!(rows[2]["region"], "II");
    assert!(rows[2]["D_longtime_value"].as_f64().unwrap() < 1e-3);
    // (2.0, 1.45): saddle, linear information, stationary discord
    assert_eq!(rows[7]["region"], "V");
    assert_eq!(rows[7]["fixed_point"], "saddle");
    assert_eq!(rows[7]["I_longtime_form"], "linear");
    assert!(rows[7]["D_longtime_value"].as_f64().unwrap() > 1e-3);
    // (1.05, 0.4): stable spiral, finite stationary values
    assert_eq!(rows[3]["region"], "III");
    assert_eq!(rows[3]["I_longtime_form"], "constant");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "trajectory", "gamma": 1.5, "t_final": 10, "n_samples": 11}"#,
    )
    .unwrap();
    let out = ptg(
        &[
            "trajectory",
            "--config",
            cfg.to_str().unwrap(),
            "--samples",
            "21",
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[20][0].parse::<f64>().unwrap(), 10.0);

    let out = ptg(&["sweep-pt-line", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 3);
}

#[test]
fn g_sets_the_time_scale() {
    let out = ptg(
        &[
            "--g",
            "2",
            "trajectory",
            "--gamma",
            "1.5",
            "--t-final",
            "40",
            "--samples",
            "2",
        ],
        &[],
    );
    assert_eq!(code(&out), 0);
    let (_, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    let v: Vec<f64> = rows[1].iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!(v[0], 20.0);
    assert!((v[5] - 0.0907).abs() < 1e-3);
}

#[test]
fn asymptotics_report_schema() {
    let out = ptg(&["asymptotics-check", "--criterion", "3,6"], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|_| panic!("not JSON: {}", String::from_utf8_lossy(&out.stdout)));
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        for key in ["check_name", "measured", "expected", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "missing {key} in {c}");
        }
    }
    let identity = checks
        .iter()
        .find(|c| c["check_name"] == "c06_identity_max_scaled_residual")
        .unwrap();
    assert!(identity["measured"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["summary"]["all_pass"], true);
    let phases: Vec<&str> = report["scalings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["phase"].as_str().unwrap())
        .collect();
    assert_eq!(phases, ["UP", "EP", "BP"]);
}

#[test]
fn exit_codes() {
    // bad config
    assert_eq!(
        code(&ptg(&["--g", "0", "trajectory", "--gamma", "0.5"], &[])),
        3
    );
    assert_eq!(
        code(&ptg(&["trajectory", "--gamma", "0.5", "--bogus"], &[])),
        3
    );
    assert_eq!(code(&ptg(&["trajectory"], &[])), 3);
    assert_eq!(
        code(&ptg(
            &[
                "trajectory",
                "--gamma",
                "0.5",
                "-o",
                "/nonexistent/dir/out.csv"
            ],
            &[]
        )),
        3
    );
    assert_eq!(
        code(&ptg(
            &["trajectory", "--gamma", "0.5"],
            &[("PTG_THREADS", "zero")]
        )),
        3
    );
    // numerical failure: dense RK4 cannot follow e^{2000} growth
    let out = ptg(
        &[
            "trajectory",
            "--gamma-l",
            "0",
            "--gamma-g",
            "5",
            "--t-final",
            "200",
            "--samples",
            "3",
            "--integrator",
            "rk4",
            "--rk4-step",
            "0.01",
        ],
        &[],
    );
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    // check failure: a cutoff of 3 cannot follow the gain
    let out = ptg(
        &[
            "oracle-check",
            "--cutoff",
            "3",
            "--leak-tol",
            "0.9",
            "--t-final",
            "1",
            "--samples",
            "3",
        ],
        &[],
    );
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    // help
    assert_eq!(code(&ptg(&["--help"], &[])), 0);
}

#[test]
fn oracle_check_passes_on_a_short_run() {
    let out = ptg(&["oracle-check", "--t-final", "0.5", "--samples", "3"], &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header[0], "t");
    assert_eq!(rows.len(), 3);
}

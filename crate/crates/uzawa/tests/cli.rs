//! End-to-end tests of the `uzawa` binary: exit codes, artifact contents,
//! and byte determinism, all through the public command-line surface.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn uzawa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uzawa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "expected exit {code}\nstdout:\n{}\nstderr:\n{}",
        stdout_of(out),
        stderr_of(out)
    );
}

/// A 1x1 system whose coupling row is entirely zero, so the first descent
/// direction has zero curvature and the line search must report breakdown.
fn write_zero_curvature_bundle(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    let put = |name: &str, text: &str| fs::write(dir.join(name), text).unwrap();
    put(
        "A.mtx",
        "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1.0\n",
    );
    put(
        "B.mtx",
        "%%MatrixMarket matrix coordinate real general\n1 1 0\n",
    );
    put("f.mtx", "%%MatrixMarket matrix array real general\n1 1\n0.0\n");
    put("h.mtx", "%%MatrixMarket matrix array real general\n1 1\n1.0\n");
    put(
        "manifest.json",
        "{\"name\":\"zero-row\",\"n\":1,\"m\":1,\"params\":{},\"c_zero\":true}\n",
    );
}

#[test]
fn gen_then_solve_round_trips_a_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = tmp.path().join("vi");
    let run = tmp.path().join("run");

    let out = uzawa(&[
        "gen",
        "--gen-vi",
        "n=60,m=30,seed=4",
        "--out",
        bundle.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    for file in ["A.mtx", "B.mtx", "f.mtx", "h.mtx", "manifest.json"] {
        assert!(bundle.join(file).exists(), "bundle is missing {file}");
    }

    let out = uzawa(&[
        "solve",
        "--bundle",
        bundle.to_str().unwrap(),
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);

    let history = fs::read_to_string(run.join("history.csv")).unwrap();
    assert!(history.starts_with("k,residual_norm,residual_ratio,alpha,d_norm,Q\n"));
    let rows = history.lines().count() - 1;
    assert!(rows > 2, "expected several history rows, found {rows}");

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    let mut keys: Vec<&str> = summary.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "final_residual_inf",
            "iterations",
            "m",
            "n",
            "termination_reason",
            "wall_seconds"
        ]
    );
    assert_eq!(summary["n"], 60);
    assert_eq!(summary["m"], 30);
    assert_eq!(summary["termination_reason"], "converged");
    assert_eq!(summary["iterations"].as_u64().unwrap() as usize, rows - 1);

    // Small systems also get the certification report.
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(run.join("theorem_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["theorem1_pass"], true);
    assert_eq!(report["theorem2_pass"], true);
}

#[test]
fn gen_refuses_overwrite_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = tmp.path().join("vi");
    let spec = ["gen", "--gen-vi", "n=20,seed=1", "--out"];

    let out = uzawa(&[&spec[..], &[bundle.to_str().unwrap()]].concat());
    assert_exit(&out, 0);
    let out = uzawa(&[&spec[..], &[bundle.to_str().unwrap()]].concat());
    assert_exit(&out, 1);
    assert!(
        stderr_of(&out).contains("already"),
        "stderr should mention the existing bundle: {}",
        stderr_of(&out)
    );
    let out = uzawa(&[&spec[..], &[bundle.to_str().unwrap(), "--force"]].concat());
    assert_exit(&out, 0);
}

#[test]
fn missing_bundle_exits_one_with_message() {
    let tmp = tempfile::tempdir().unwrap();
    let out = uzawa(&[
        "solve",
        "--bundle",
        tmp.path().join("absent").to_str().unwrap(),
        "--out",
        tmp.path().join("run").to_str().unwrap(),
    ]);
    assert_exit(&out, 1);
    assert!(stderr_of(&out).contains("bundle not found"));
}

#[test]
fn iteration_cap_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = uzawa(&[
        "solve",
        "--gen-vi",
        "n=60,seed=4",
        "--max-iter",
        "3",
        "--out",
        tmp.path().join("run").to_str().unwrap(),
    ]);
    assert_exit(&out, 2);
}

#[test]
fn zero_curvature_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = tmp.path().join("zero");
    write_zero_curvature_bundle(&bundle);
    let out = uzawa(&[
        "solve",
        "--bundle",
        bundle.to_str().unwrap(),
        "--out",
        tmp.path().join("run").to_str().unwrap(),
    ]);
    assert_exit(&out, 3);
    assert!(stderr_of(&out).contains("broke down"));
}

#[test]
fn verify_passes_on_generated_system() {
    let tmp = tempfile::tempdir().unwrap();
    let report_dir = tmp.path().join("report");
    let out = uzawa(&[
        "verify",
        "--gen-vi",
        "n=40,seed=1",
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    for section in [
        "contraction bound: pass",
        "residual envelope: pass",
        "direction identity: pass",
        "coercivity probes: pass",
        "coupling rank: pass",
    ] {
        assert!(text.contains(section), "missing '{section}' in:\n{text}");
    }
    assert!(report_dir.join("theorem_report.json").exists());
    assert!(report_dir.join("history.csv").exists());
}

#[test]
fn verify_flags_a_divergent_fixed_step_run() {
    // A fixed step far above the stable range makes the merit grow; the
    // certification must catch the broken contraction and exit 4.
    let out = uzawa(&[
        "verify",
        "--gen-vi",
        "n=40,seed=1",
        "--alpha",
        "50",
        "--max-iter",
        "40",
    ]);
    assert_exit(&out, 4);
    assert!(stdout_of(&out).contains("contraction bound: FAIL"));
    assert!(stderr_of(&out).contains("contraction bound violated"));
}

#[test]
fn sweep_without_inputs_writes_header_only_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = uzawa(&["sweep", "--out", tmp.path().to_str().unwrap()]);
    assert_exit(&out, 0);
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert_eq!(
        csv,
        "n,m,cond_a,cond_kkt,residual_inf,iterations,cpu_seconds,status\n"
    );
}

#[test]
fn sweep_tabulates_rows_and_keeps_failures_in_band() {
    let tmp = tempfile::tempdir().unwrap();
    let out = uzawa(&[
        "sweep",
        "--gen-vi",
        "n=40,seed=1",
        "--gen-vi",
        "n=10,m=20,seed=1", // m > n: generator must reject it
        "--gen-oseen",
        "nx=8,ny=8,nu=1",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4, "header plus one row per input:\n{csv}");
    assert!(lines[1].starts_with("40,20,") && lines[1].ends_with("converged"));
    assert!(lines[2].contains("error:"), "failure row in band: {}", lines[2]);
    assert!(lines[3].starts_with("120,63,") && lines[3].ends_with("converged"));
    // Every row keeps the column count despite the embedded message.
    for line in &lines {
        assert_eq!(line.matches(',').count(), 7, "column drift in {line}");
    }
}

#[test]
fn artifacts_are_deterministic_modulo_wall_time() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &Path| {
        let out = uzawa(&[
            "solve",
            "--gen-oseen",
            "nx=8,ny=8,nu=0.5,stab=0.25",
            "--seed",
            "9",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_exit(&out, 0);
    };
    let (d1, d2) = (tmp.path().join("r1"), tmp.path().join("r2"));
    run(&d1);
    run(&d2);
    assert_eq!(
        fs::read(d1.join("history.csv")).unwrap(),
        fs::read(d2.join("history.csv")).unwrap(),
        "history must be byte-identical across reruns"
    );
    let strip = |dir: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_seconds");
        v
    };
    assert_eq!(strip(&d1), strip(&d2));
}

#[test]
fn generated_bundles_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = |dir: &Path| {
        let out = uzawa(&[
            "gen",
            "--gen-oseen",
            "nx=8,ny=8,nu=0.5,stab=0.25,wind=recirculating,seed=3",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_exit(&out, 0);
    };
    let (d1, d2) = (tmp.path().join("b1"), tmp.path().join("b2"));
    gen(&d1);
    gen(&d2);
    for file in ["A.mtx", "B.mtx", "C.mtx", "f.mtx", "h.mtx", "manifest.json"] {
        assert_eq!(
            fs::read(d1.join(file)).unwrap(),
            fs::read(d2.join(file)).unwrap(),
            "{file} differs between identical gen runs"
        );
    }
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let out = uzawa(&[]);
    assert_exit(&out, 1);

    let out = uzawa(&["--help"]);
    assert_exit(&out, 0);
    assert!(stdout_of(&out).contains("gen"));

    // Unknown generator key.
    let tmp = tempfile::tempdir().unwrap();
    let out = uzawa(&[
        "solve",
        "--gen-vi",
        "n=40,bogus=1",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_exit(&out, 1);
    assert!(stderr_of(&out).contains("bogus"));

    // Two input sources at once.
    let out = uzawa(&[
        "solve",
        "--gen-vi",
        "n=40",
        "--gen-oseen",
        "nx=8,ny=8",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_exit(&out, 1);
    assert!(stderr_of(&out).contains("exactly one"));

    // gen does not accept --bundle as its source.
    let out = uzawa(&[
        "gen",
        "--bundle",
        tmp.path().to_str().unwrap(),
        "--out",
        tmp.path().join("x").to_str().unwrap(),
    ]);
    assert_exit(&out, 1);
}

#[test]
fn solve_honors_fixed_step_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let out = uzawa(&[
        "solve",
        "--gen-vi",
        "n=60,seed=4",
        "--alpha",
        "0.012",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let history = fs::read_to_string(tmp.path().join("history.csv")).unwrap();
    // Every step of the fixed-step method reports the same alpha.
    let alphas: Vec<&str> = history
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    let steps = &alphas[..alphas.len() - 1]; // final row carries no step
    assert!(!steps.is_empty());
    assert!(steps.iter().all(|&a| a == "0.012"), "alphas: {steps:?}");
}

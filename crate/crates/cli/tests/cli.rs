//! End-to-end checks of the `adiab` binary: exit-status contract, config
//! handling, and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn adiab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adiab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("adiab_test_{}_{name}", std::process::id()));
    p
}

#[test]
fn unknown_config_key_exits_2() {
    let cfg = tmp_path("bad.cfg");
    std::fs::write(&cfg, "model = lz\nomg = 3\n").unwrap();
    let out = adiab(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn foreign_model_key_exits_2() {
    let out = adiab(&["evolve", "--model", "deutsch", "--omega0", "100.0", "--tau", "1e-4"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("omega0"), "stderr: {msg}");
}

#[test]
fn bad_pair_exits_2() {
    let out = adiab(&["xi", "--model", "deutsch", "--pairs", "45", "--tau", "1e-4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_sweep_exits_2() {
    let out = adiab(&["sweep", "--model", "deutsch"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn preset_pinned_key_exits_2() {
    let out = adiab(&["fig2", "--gamma", "17.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn defective_superoperator_exits_3() {
    // gamma = 2 omega makes the Deutsch pair block a genuine Jordan block.
    let out = adiab(&[
        "spectrum",
        "--model",
        "deutsch",
        "--omega-d",
        "1.0",
        "--gamma",
        "2.0",
        "--tau",
        "1.0",
        "--tmax",
        "1.0",
        "--samples",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn spectrum_flushes_partial_output_before_failing() {
    let out = adiab(&[
        "spectrum",
        "--model",
        "deutsch",
        "--omega-d",
        "1.0",
        "--gamma",
        "2.0",
        "--tau",
        "1.0",
        "--tmax",
        "1.0",
        "--samples",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("t,"), "header missing: {text}");
    assert!(text.contains("# error"), "no error footer: {text}");
}

#[test]
fn spectrum_deutsch_row_contains_true_eigenvalues() {
    let out = adiab(&[
        "spectrum", "--model", "deutsch", "--omega-d", "1.5", "--gamma", "5.0", "--tau", "1.0",
        "--tmax", "1.0", "--samples", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    // Columns: t, re0, im0, re1, im1, re2, im2, re3, im3, ...
    // gamma = 5, omega = 1.5: {0, -10, -(5 +/- 4)} from Delta^2 = g^2-4w^2.
    let mut res = vec![row[1], row[3], row[5], row[7]];
    res.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let want = [-10.0, -9.0, -1.0, 0.0];
    for (got, want) in res.iter().zip(&want) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn lz_gamma_zero_spectrum_is_purely_imaginary() {
    let out = adiab(&[
        "spectrum", "--model", "lz", "--gamma", "0.0", "--samples", "11", "--tmax", "3e-6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let row: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        for a in 0..4 {
            assert!(row[1 + 2 * a].abs() < 1e-9, "nonzero real part in {line}");
        }
    }
}

#[test]
fn tomo_is_deterministic_and_seed_sensitive() {
    let run = |seed: &str, path: &PathBuf| {
        let out = adiab(&[
            "tomo",
            "--model",
            "deutsch",
            "--tau",
            "1e-4",
            "--samples",
            "5",
            "--shots",
            "200",
            "--repeats",
            "3",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let p1 = tmp_path("tomo1.csv");
    let p2 = tmp_path("tomo2.csv");
    let p3 = tmp_path("tomo3.csv");
    let a = run("7", &p1);
    let b = run("7", &p2);
    let c = run("8", &p3);
    assert_eq!(a, b, "same seed must give byte-identical output");
    assert_ne!(a, c, "different seed must change the counts");
    for p in [p1, p2, p3] {
        std::fs::remove_file(p).ok();
    }
}

#[test]
fn config_file_and_flags_are_equivalent_and_flags_win() {
    let cfg = tmp_path("equiv.cfg");
    std::fs::write(
        &cfg,
        "model = deutsch\ntau = 2e-4\ngamma = 3141\nsamples = 7\nseed = 9\n",
    )
    .unwrap();
    let by_file = adiab(&["evolve", "--config", cfg.to_str().unwrap()]);
    let by_flags = adiab(&[
        "evolve", "--model", "deutsch", "--tau", "2e-4", "--gamma", "3141", "--samples", "7",
        "--seed", "9",
    ]);
    assert_eq!(by_file.status.code(), Some(0));
    assert_eq!(by_file.stdout, by_flags.stdout);

    // CLI overrides the config file.
    let override_run = adiab(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--gamma",
        "6283",
    ]);
    assert_eq!(override_run.status.code(), Some(0));
    assert_ne!(by_file.stdout, override_run.stdout);
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn evolve_deutsch_closed_system_reaches_target() {
    let out = adiab(&[
        "evolve", "--model", "deutsch", "--gamma", "0", "--tau", "2e-3", "--samples", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let last = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('t'))
        .last()
        .unwrap();
    let cells: Vec<f64> = last.split(',').map(|x| x.parse().unwrap()).collect();
    // Columns: t, fid_adiabatic, fid_target, ...
    assert!(cells[2] >= 0.999, "fid_target at tau: {}", cells[2]);
}

#[test]
fn xi_footer_reports_verdict() {
    let out = adiab(&[
        "xi", "--model", "deutsch", "--tau", "2e-4", "--gamma", "3141", "--samples", "41",
        "--pairs", "21,31",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().next().unwrap().starts_with("t,xi_21,xi_31,gap_ok,running_max"));
    assert!(text.contains("# aqc_verdict = "), "{text}");
}

#[test]
fn sweep_deutsch_emits_windows_and_floor() {
    let taus: Vec<String> = (1..=40).map(|k| format!("{}", k as f64 * 2e-5)).collect();
    let out = adiab(&[
        "sweep",
        "--model",
        "deutsch",
        "--gamma",
        "1256",
        "--taus",
        &taus.join(","),
        "--window-threshold",
        "0.9",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().next().unwrap().starts_with("gamma,tau,fid_adiabatic,fid_target,in_window,window_id"));
    assert!(text.contains("# window gamma=1256"), "no window footer:\n{text}");
}

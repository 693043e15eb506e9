use std::process::Command;

fn askline() -> Command {
    Command::new(env!("CARGO_BIN_EXE_askline"))
}

#[test]
fn theory_prints_a_curve() {
    let out = askline().args(["theory", "--format", "4ask", "--from-db", "15", "--to-db", "17", "--step-db", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "osnr_db,ber,q2_db");
    assert_eq!(lines.len(), 4);
}

#[test]
fn b2b_sweep_then_penalty_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg,
        "[sweep]\nosnr_db = [7.0, 9.0, 11.0, 13.0]\n[monte_carlo]\nseeds = [2]\nmin_bits = 50000\nmax_bits = 70000\nbatch_frames = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = askline()
        .args(["b2b", "--ideal", "--format", "2ask", "--constellations", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = out.join("metrics_b2b_2ask.csv");
    for f in ["metrics_b2b_2ask.json", "summary_b2b_2ask.json", "constellation_last.csv", "psd_tx.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let pen = askline().args(["penalty", "--format", "2ask"]).arg(&csv).output().unwrap();
    assert!(pen.status.success());
    let p: f64 = String::from_utf8(pen.stdout).unwrap().trim().parse().unwrap();
    assert!(p.abs() < 0.5, "{p}");
    let rep = askline().args(["report", "--format", "2ask", "--out"]).arg(dir.path().join("rep")).arg(&csv).status().unwrap();
    assert!(rep.success());
}

#[test]
fn bad_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[sweep]\nosnr_db = [20.0, 10.0]\n").unwrap();
    let out = askline().args(["b2b", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error:"));
}

use std::fs;
use std::process::Command;

fn medium(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_medium"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn throughput_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.cfg");
    fs::write(
        &cfg,
        "experiment = throughput\nprotocols = ghost, bitcoin\nn = 20\nq = 5\nt_values = 2, 4\n",
    )
    .unwrap();
    let out = |name: &str| {
        let path = dir.path().join(name);
        let o = medium(&[
            "throughput",
            "--config",
            cfg.to_str().unwrap(),
            "--reps",
            "3",
            "--rounds",
            "300",
            "--seed",
            "9",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(path).unwrap()
    };
    let a = out("a.csv");
    assert_eq!(a, out("b.csv"));
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("experiment,protocol,c,var,seed,metric,value")
    );
    // 2 protocols, 2 t values, 3 seeds, 4 metrics
    assert_eq!(lines.count(), 48);
}

#[test]
fn params_goes_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.cfg");
    fs::write(&cfg, "protocols = 10001521^(1/100)\n").unwrap();
    let o = medium(&["params", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains(",R,226"), "{text}");
}

#[test]
fn check_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    let path = dir.path().join("c.csv");
    fs::write(
        &cfg,
        "protocols = 10001521^(1/100)\nn = 30\nt = 5\nq = 4\nlambda = 50\n",
    )
    .unwrap();
    let o = medium(&[
        "check",
        "--config",
        cfg.to_str().unwrap(),
        "--reps",
        "1",
        "--rounds",
        "400",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("check_name,params_digest,pass,first_violation_round,detail\n"));
    assert!(text.contains("\ncommon_prefix,"));
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.cfg");
    fs::write(&cfg, "experiment = balance\n").unwrap();
    let o = medium(&["throughput", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    let o = medium(&[
        "simulate",
        "--config",
        dir.path().join("missing.cfg").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
}

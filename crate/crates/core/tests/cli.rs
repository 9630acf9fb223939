use std::path::Path;
use std::process::{Command, Output};

fn qkdauth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdauth")).args(args).env_remove("QKDAUTH_OUT_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sweep_is_deterministic_and_decreasing() {
    let args = ["sweep", "--lengths", "10:100:10", "--seed", "4"];
    let (a, b) = (qkdauth(&args), qkdauth(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r = rows(&stdout(&a));
    assert_eq!(r.len(), 10);
    let rates: Vec<f64> = r.iter().map(|x| x[1].parse().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] < w[0]));
    let at50 = rates[4];
    assert!((72.16 / 3.0..=72.16 * 3.0).contains(&at50));
}

#[test]
fn empty_sweep_is_header_only() {
    let o = qkdauth(&["sweep", "--lengths", "", "--seed", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim_end(), "length_km,key_rate_kbps,qber_percent,stddev_kbps");
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(qkdauth(&["scenario", "--plan", "no-such-plan"]).status.code(), Some(2));
    assert_eq!(qkdauth(&["sweep", "--lengths", "10:x", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(qkdauth(&["stability", "--hours", "-1", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(qkdauth(&["attack", "--pair", "U1-U9", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn scenario_files_and_env_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qkdauth"))
            .args(["scenario", "--plan", "metro-join"])
            .env("QKDAUTH_OUT_DIR", dir.path())
            .output()
            .unwrap()
    };
    assert!(run().status.success());
    let first = std::fs::read(dir.path().join("metro-join.csv")).unwrap();
    assert!(run().status.success());
    assert_eq!(first, std::fs::read(dir.path().join("metro-join.csv")).unwrap());
    let r = rows(std::str::from_utf8(&first).unwrap());
    let got: Vec<(&str, &str)> = r.iter().map(|x| (x[0].as_str(), x[1].as_str())).collect();
    assert_eq!(got, [("U11-U2", "40"), ("U11-U7", "50"), ("U12-U4", "40"), ("U12-U9", "40"), ("U11-U12", "50")]);
}

#[test]
fn ring_matches_golden_structure() {
    let o = qkdauth(&["scenario", "--plan", "ring"]);
    assert!(o.status.success());
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/golden/ring.csv")).unwrap();
    for (g, r) in rows(&golden).iter().zip(rows(&stdout(&o))) {
        assert_eq!(g[0], r[0]);
        assert_eq!(g[1].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap());
        assert_eq!(g[2].parse::<f64>().unwrap(), r[2].parse::<f64>().unwrap());
    }
}

#[test]
fn mitm_check_exits_4_with_no_key() {
    let o = qkdauth(&["attack", "--pair", "U1-U2", "--mitm", "--check", "--seed", "2", "--duration", "10"]);
    assert_eq!(o.status.code(), Some(4));
    let r = rows(&stdout(&o));
    assert_eq!(r[0][4], "failed(cert-invalid)");
    assert_eq!(r[0][7], "0");
}

#[test]
fn full_intercept_resend_kills_key() {
    let o = qkdauth(&["attack", "--pair", "U1-U2", "--attack-fraction", "1", "--seed", "2", "--duration", "10"]);
    assert!(o.status.success());
    let r = &rows(&stdout(&o))[0];
    let qber: f64 = r[5].parse().unwrap();
    assert!((qber - 25.0).abs() < 1.0, "{qber}");
    assert_eq!(r[6].parse::<f64>().unwrap(), 0.0);

    let honest = qkdauth(&["attack", "--pair", "U1-U2", "--seed", "2", "--duration", "10", "--check"]);
    assert!(honest.status.success());
    let r = &rows(&stdout(&honest))[0];
    assert_eq!(r[4], "pass");
    assert!(r[6].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn short_stability_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = qkdauth(&["stability", "--hours", "0.01", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!rows(&std::fs::read_to_string(&out).unwrap()).is_empty());
    let trace = std::fs::read_to_string(dir.path().join("s-trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 37);
}

#[test]
fn authbench_reports_sizes_and_consumption() {
    let o = qkdauth(&["authbench", "--iterations", "5", "--sig-params", "desk"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let sign = r.iter().find(|x| x[2] == "sign").unwrap();
    assert_eq!(sign[6].parse::<usize>().unwrap(), qkdauth::crypto::SigParams::DESK.signature_len());

    let o = qkdauth(&["authbench", "--mode", "psk", "--iterations", "5"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let tag = r.iter().find(|x| x[2] == "tag").unwrap();
    assert!(tag[7].parse::<f64>().unwrap() >= 128.0);
}

#[test]
fn keygen_issue_verify() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    for (prefix, seed) in [("ca", "1"), ("user", "2"), ("rogue", "3")] {
        let o = qkdauth(&["keygen", "--sig-params", "desk", "--seed", seed, "--prefix", &p(prefix)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = qkdauth(&[
        "issue", "--ca-key", &p("ca.sec"), "--subject", "U1", "--subject-key", &p("user.pub"), "--not-after", "1000",
        "--seed", "4", "--out", &p("u1.cert"),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ok = qkdauth(&["verify-cert", "--ca-pub", &p("ca.pub"), "--cert", &p("u1.cert"), "--now", "10"]);
    assert!(ok.status.success());
    assert!(stdout(&ok).starts_with("valid"));
    let bad = qkdauth(&["verify-cert", "--ca-pub", &p("rogue.pub"), "--cert", &p("u1.cert"), "--now", "10"]);
    assert_eq!(bad.status.code(), Some(4));
    let late = qkdauth(&["verify-cert", "--ca-pub", &p("ca.pub"), "--cert", &p("u1.cert"), "--now", "1001"]);
    assert_eq!(late.status.code(), Some(4));
    assert!(stdout(&late).contains("expired"));
}

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khinchin")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let o = run(&a);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn describe_and_errors() {
    let o = run(&["describe", "--f", "partition"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("in_class_k,true"));
    assert!(s.contains("coefficients,1 1 2 3 5 7 11 15 22 30"));

    let v = json(&["describe", "--f", "1/(1-z)^2"]);
    let c: Vec<f64> = v["results"][0]["coefficients"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(c, (1..=10).map(f64::from).collect::<Vec<_>>());

    assert_eq!(run(&["describe", "--f", "z"]).status.code(), Some(2));
    assert_eq!(run(&["describe", "--f", "1+"]).status.code(), Some(2));
    assert_eq!(run(&["describe"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["stats", "--f", "partition", "--grid", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["sample", "--f", "exp(z)", "--t", "1", "--count", "0"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn stats_bell() {
    let v = json(&["stats", "--f", "bell", "--grid", "1"]);
    let r = &v["results"][0];
    let e = std::f64::consts::E;
    assert!((r["mean"].as_f64().unwrap() - e).abs() < 1e-12);
    assert!((r["var"].as_f64().unwrap() - 2.0 * e).abs() < 1e-12);
}

#[test]
fn estimate_partition() {
    let v = json(&["estimate", "--f", "partition", "--n", "100"]);
    let r = v["results"][0]["ratio"].as_f64().unwrap();
    assert!((0.9..=1.1).contains(&r), "{r}");
}

#[test]
fn clan_geometric() {
    let v = json(&["clan", "--f", "1/(1-z)"]);
    assert_eq!(v["results"][0]["verdict"]["kind"], "nonclan-consistent");
}

#[test]
fn verify_exit_codes() {
    assert_eq!(run(&["verify"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--precision", "high"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--f", "exp(z)", "--suite", "quotient-bound,stirling"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn output_is_reproducible() {
    let dir = std::env::temp_dir().join(format!("khinchin-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for args in [
        &["sample", "--f", "partition", "--t", "0.9", "--count", "200", "--seed", "7"][..],
        &["clan", "--f", "exp(z)"][..],
        &["verify"][..],
    ] {
        let a = run(args);
        let mut seq = args.to_vec();
        seq.extend(["--exec", "sequential"]);
        let b = run(&seq);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let path = dir.join("out.csv");
        let mut with_out = args.to_vec();
        with_out.extend(["--out", path.to_str().unwrap()]);
        assert_eq!(run(&with_out).status.code(), Some(0));
        assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_envelope() {
    for args in [
        &["describe", "--f", "exp(z)"][..],
        &["order", "--f", "exp(z)"][..],
        &["clt", "--f", "exp(z)", "--grid", "10,100"][..],
        &["sample", "--f", "exp(z)", "--t", "3", "--count", "10"][..],
    ] {
        let v = json(args);
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["command"], args[0]);
        assert!(v["config"].is_object() && v["results"].is_array());
    }
    let v = json(&["stats", "--f", "exp(z)", "--grid", "2", "--precision", "high"]);
    assert_eq!(v["results"][0]["mean"], "2.0");
}

use std::process::{Command, Output};

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("binary runs")
}

fn records(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON record per line"))
        .collect()
}

#[test]
fn passing_check_exits_zero() {
    let out = verify(&["birch", "--n", "1", "--ell", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS"));
}

#[test]
fn json_schema() {
    let out = verify(&["satake", "--json"]);
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    let obj = recs[0].as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
    keys.sort();
    assert_eq!(keys, ["check", "params", "seconds", "status", "witness"]);
    assert_eq!(obj["status"], "pass");
    assert!(obj["witness"].is_null());
    assert!(obj["seconds"].is_number());
}

#[test]
fn t_range_streams_one_record_per_level() {
    let out = verify(&["wild", "--n", "1", "--ell", "2", "--t", "1..2", "--json"]);
    let recs = records(&out);
    assert_eq!(recs.iter().map(|r| r["params"]["t"].as_u64().unwrap()).collect::<Vec<_>>(), [1, 2]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn failure_exits_two() {
    let out = verify(&["wild", "--n", "1", "--ell", "2", "--t", "0", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(records(&out)[0]["status"], "fail");
}

#[test]
fn exhausted_budget_exits_three() {
    let out = verify(&["tame", "--ell", "3", "--budget-card", "4", "--json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(records(&out)[0]["status"], "inconclusive");
}

#[test]
fn invalid_configuration_exits_64() {
    for args in [&["tame", "--ell", "6"][..], &["bogus"], &["tame", "--t", "3..1"], &["tame", "--n", "x"], &[]] {
        let out = verify(args);
        assert_eq!(out.status.code(), Some(64), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    }
    assert_eq!(verify(&["--help"]).status.code(), Some(0));
}

#[test]
fn all_gives_one_record_per_check_in_order() {
    let out = verify(&["all", "--n", "1", "--ell", "3", "--t", "0..1", "--json", "--fixed-clock"]);
    let names: Vec<String> = records(&out).iter().map(|r| r["check"].as_str().unwrap().to_string()).collect();
    assert_eq!(
        names,
        [
            "lemma21", "wild", "stab-factors", "birch", "satake", "ell-op", "prop45", "integrality", "tame",
            "euler-factor", "branching", "lattice-int"
        ]
    );
}

#[test]
fn fixed_clock_output_is_byte_identical() {
    let args = ["all", "--n", "1", "--ell", "2", "--seed", "11", "--json", "--fixed-clock"];
    let (a, b) = (verify(&args), verify(&args));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "# settings\nn = 2\nell = 3\nseed = 5\n").unwrap();
    let out = verify(&["satake", "--config", path.to_str().unwrap(), "--n", "1", "--json"]);
    let p = &records(&out)[0]["params"];
    assert_eq!((p["n"].as_u64(), p["ell"].as_u64(), p["seed"].as_u64()), (Some(1), Some(3), Some(5)));

    std::fs::write(&path, "colour = blue\n").unwrap();
    assert_eq!(verify(&["satake", "--config", path.to_str().unwrap()]).status.code(), Some(64));
}

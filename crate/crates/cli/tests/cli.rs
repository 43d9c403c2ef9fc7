use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seesaw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn orbit_counts() {
    assert_eq!(json(&["orbits", "--n", "2"]).as_array().unwrap().len(), 3);
    assert_eq!(json(&["orbits", "--n", "3"]).as_array().unwrap().len(), 7);
}

#[test]
fn symmetric_orbits_carry_eps_dimensions() {
    let v = json(&["orbits", "--n", "4", "--epsilon", "+1"]);
    let records = v.as_array().unwrap();
    for pattern in ["1->2,3->4", "1->3,2->4"] {
        let r = records.iter().find(|r| r["pattern"] == pattern).unwrap();
        assert_eq!(r["symmetric"]["epsilon"], 1);
        assert_eq!(r["symmetric"]["dim_orbit_eps"], 2);
    }
}

#[test]
fn closure_dot_for_n2() {
    let out = run(&["closure", "--n", "2", "--format", "dot"]);
    assert_eq!(out.status.code(), Some(0));
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.lines().filter(|l| l.contains("[label=")).count(), 3);
    assert_eq!(dot.lines().filter(|l| l.contains("->") && !l.contains("label")).count(), 2);
}

#[test]
fn closure_n4_plus_separates_the_gamma_pair() {
    let v = json(&["closure", "--n", "4", "--epsilon", "+1"]);
    assert!(v["undecided"].as_array().unwrap().is_empty());
    let hasse = v["hasse"].as_array().unwrap();
    let (m, n) = ("1->3,2->4", "1->2,3->4");
    assert!(!hasse.iter().any(|e| (e[0] == m && e[1] == n) || (e[0] == n && e[1] == m)));
    let rel = v["relations"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["from"] == m && r["to"] == n)
        .unwrap();
    assert_eq!(rel["status"], "CERTIFIED_NLEQ");
}

#[test]
fn induced_exit_codes() {
    assert_eq!(run(&["induced", "--n", "4", "--epsilon", "+1", "--expect-violation"]).status.code(), Some(0));
    assert_eq!(run(&["induced", "--n", "4", "--epsilon", "+1"]).status.code(), Some(4));
    assert_eq!(run(&["induced", "--n", "4", "--epsilon", "-1"]).status.code(), Some(0));
}

#[test]
fn counterexample_and_tables() {
    let out = run(&["counterexample", "--l", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("NotInduced"));

    let out = run(&["tables", "--l-max", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("mismatches: 0"));
    assert!(text.contains("26"));
}

#[test]
fn weyl_lengths() {
    let out = run(&["weyl", "--l", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("length 36") && text.contains("length 34"));
    let v = json(&["weyl", "--l", "5", "--format", "json"]);
    assert_eq!(v["gmp"]["length_m"], 48);
    assert_eq!(v["gmp"]["length_n"], 46);
}

#[test]
fn seesaw_outputs() {
    let v = json(&["seesaw", "--l", "2", "--format", "json"]);
    assert_eq!(v["report"]["hom_m_m"], 3);
    assert_eq!(v["representations"]["N"]["dims"], serde_json::json!([1, 2, 4, 2, 1]));
    let dot = stdout(&run(&["seesaw", "--l", "2", "--format", "dot", "--rep", "m"]));
    assert!(dot.starts_with("digraph"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["orbits", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["tables", "--l-max", "1"]).status.code(), Some(2));
    assert_eq!(run(&["orbits", "--n", "3", "--format", "dot"]).status.code(), Some(2));
    assert_eq!(run(&["orbits", "--n", "3", "--epsilon", "2"]).status.code(), Some(2));
}

#[test]
fn json_round_trips_and_is_deterministic() {
    for args in [
        &["orbits", "--n", "4", "--epsilon", "-1"][..],
        &["closure", "--n", "4", "--epsilon", "-1"][..],
        &["counterexample", "--l", "3", "--format", "json"][..],
    ] {
        let a = stdout(&run(args));
        let b = stdout(&run(args));
        assert_eq!(a, b, "{args:?}");
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", a);
    }
}

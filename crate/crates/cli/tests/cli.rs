use std::process::{Command, Output};

use dhc_core::dsl::bundled_file;
use dhc_core::export::{dot_counts, xta_check};

fn dhc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhc"))
        .args(args)
        .env_remove("DHC_RULE_PATH")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SG_A: &str = "<<(re(A) and not cs) chop (free and not cs) chop (sg(A) and cs)>>";

#[test]
fn eval_examples() {
    let o = dhc(&["eval", "free", "empty.snapshot.json"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "true\n"));
    let o = dhc(&["eval", SG_A, "fig2.snapshot.json"]);
    assert_eq!(stdout(&o), "true\n");
    let o = dhc(&["eval", "cs", "fig2.snapshot.json", "--view", "0", "2"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "false\n"));
}

#[test]
fn eval_explain_and_oracle_json() {
    let o = dhc(&["--json", "--explain", "--oracle", "eval", SG_A, "fig2.snapshot.json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["holds"], true);
    assert_eq!(v["oracle"]["agrees"], true);
    assert_eq!(v["view"], serde_json::json!(["0", "20"]));
    assert!(!v["splits"].as_array().unwrap().is_empty());
}

#[test]
fn eval_input_errors() {
    assert_eq!(code(&dhc(&["eval", "free and", "fig2.snapshot.json"])), 2);
    assert_eq!(code(&dhc(&["eval", "re(c)", "fig2.snapshot.json"])), 2);
    assert_eq!(code(&dhc(&["eval", "free", "nope.snapshot.json"])), 2);
    assert_eq!(code(&dhc(&["eval", "free", "fig2.snapshot.json", "--view", "5", "30"])), 2);
    assert_eq!(code(&dhc(&["eval", "free", "fig2.snapshot.json", "--view", "5", "1"])), 2);
    let o = dhc(&["eval", "free and", "fig2.snapshot.json"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("formula:1:"));
}

#[test]
fn somewhere_brackets_switch() {
    let on = dhc(&["eval", "<<cs>>", "fig2.snapshot.json"]);
    let off = dhc(&["--somewhere-brackets", "off", "eval", "<<cs>>", "fig2.snapshot.json"]);
    assert_eq!(stdout(&on), "true\n");
    assert_eq!(stdout(&off), "false\n");
}

#[test]
fn reach_examples() {
    let o = dhc(&["reach", "ukhc_170.rule", "go.snapshot.json"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("L3 reachable"), "{out}");
    assert!(out.contains("ukhc_170: L2 --enter--> L3"), "{out}");
    let o = dhc(&["reach", "ukhc_170.rule", "pedestrian.snapshot.json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("L3 unreachable"));
    assert_eq!(code(&dhc(&["reach", "missing.rule", "go.snapshot.json"])), 2);
    assert_eq!(code(&dhc(&["reach", "ukhc_170.rule", "go.snapshot.json", "--target", "L9"])), 2);
}

#[test]
fn reach_json_with_oracle() {
    let o = dhc(&["--json", "--oracle", "--explain", "reach", "ukhc_171", "go.snapshot.json", "--target", "L2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["oracle"]["agrees"], true);
    assert_eq!(v["targets"][0]["location"], "L2");
    assert_eq!(v["targets"][0]["reachable"], true);
    assert_eq!(v["reachable"], serde_json::json!(["L0", "L1", "L2", "L3"]));
    assert!(v["zones"]["L1"].is_array());
}

#[test]
fn conflicts_examples() {
    let o = dhc(&["--json", "conflicts", "demo_red_light.rule", "demo_green_arrow.rule", "--universe", "default"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pc = v["permission_conflicts"].as_array().unwrap();
    assert_eq!(pc.len(), 1);
    assert_eq!(pc[0]["action"], "enter");
    assert_eq!(pc[0]["forbidding_rule"], "demo_red_light");
    assert_eq!(v["conflict"], true);

    let o = dhc(&["--json", "conflicts", "ukhc_170.rule", "ukhc_171.rule", "--universe", "default"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mut at: Vec<String> = v["permission_conflicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| format!("{}|{} {}", r["locations"]["ukhc_170"], r["locations"]["ukhc_171"], r["action"]))
        .collect();
    at.sort();
    assert_eq!(at, ["\"L1\"|\"L2\" \"enter\"", "\"L2\"|\"L1\" \"enter\""]);
    assert!(v["timelocks"].as_array().unwrap().is_empty());

    assert_eq!(code(&dhc(&["conflicts", "ukhc_170.rule"])), 2);
    assert_eq!(code(&dhc(&["conflicts", "ukhc_170.rule", "ukhc_170.rule"])), 2);
}

#[test]
fn conflicts_on_explicit_scenarios() {
    let o = dhc(&["conflicts", "demo_red_light.rule", "demo_green_arrow.rule", "nosigns.snapshot.json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("0 permission conflict(s)"));
}

#[test]
fn conflicts_with_universe_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("u.json");
    std::fs::write(&bad, "{\"max_cars\": 1}").unwrap();
    let o = dhc(&["conflicts", "ukhc_170.rule", "ukhc_171.rule", "--universe", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn export_examples() {
    let o = dhc(&["export", "ukhc_170.rule", "--format", "bdi"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().any(|l| l == "~potential-collision : ~pedestrian-ahead <- checkForSafeGap;"));
    let o = dhc(&["export", "ukhc_171.rule", "--format", "dot"]);
    assert_eq!(dot_counts(&stdout(&o)).unwrap(), (4, 4));
    for mode in ["bool-env", "comment"] {
        let o = dhc(&["export", "ukhc_170.rule", "--format", "xta", "--mode", mode]);
        assert_eq!(code(&o), 0);
        xta_check(&stdout(&o)).unwrap();
    }
    let o = dhc(&["export", "ukhc_170.rule", "ukhc_171.rule", "--format", "dot"]);
    assert_eq!(dot_counts(&stdout(&o)).unwrap().0, 16);
    assert_eq!(code(&dhc(&["export", "ukhc_170.rule", "ukhc_171.rule", "--format", "xta"])), 2);
    assert_eq!(code(&dhc(&["export", "ukhc_170.rule", "--format", "pdf"])), 2);
}

#[test]
fn export_is_deterministic_and_writes_out() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.xta");
    let o = dhc(&["--out", p.to_str().unwrap(), "export", "ukhc_171.rule", "--format", "xta"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let first = std::fs::read_to_string(&p).unwrap();
    let again = stdout(&dhc(&["export", "ukhc_171.rule", "--format", "xta"]));
    assert_eq!(first, again);
}

#[test]
fn rule_path_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let text = bundled_file("ukhc_170.rule").unwrap().replace("rule \"ukhc_170\"", "rule \"local_copy\"");
    std::fs::write(dir.path().join("local.rule"), text).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dhc"))
        .args(["reach", "local.rule", "go.snapshot.json"])
        .env("DHC_RULE_PATH", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("rule local_copy"));
    assert_eq!(code(&dhc(&["reach", "local.rule", "go.snapshot.json"])), 2);
}

#[test]
fn validate_reports_problems() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.rule");
    std::fs::write(&bad, "rule \"b\" {\n  location A { }\n}\n").unwrap();
    let badsnap = dir.path().join("bad.json");
    std::fs::write(&badsnap, "{\"extent\": [0, 1]}").unwrap();
    let o = dhc(&["validate", "ukhc_170.rule", bad.to_str().unwrap(), badsnap.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("ukhc_170.rule: ok (rule)"), "{out}");
    assert!(out.contains("bad.rule:"), "{out}");
    assert!(out.contains("malformed snapshot JSON"), "{out}");
    let o = dhc(&["--json", "validate", "go.snapshot.json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["valid"], true);
    assert_eq!(code(&dhc(&["validate", "absent.rule"])), 2);
}

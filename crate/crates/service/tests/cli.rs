mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use mu_core::bundled::chest_pain;
use mu_core::planner::{run_workup, MumStrategy};

fn mu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mu")).args(args).output().unwrap()
}

fn mu_with_input(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mu"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = mu(&["validate", "chest-pain"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("ok (11 findings, 5 clusters, 2 hypotheses"));

    let file = dir.path().join("chest.mu");
    std::fs::write(&file, mu_core::bundled::CHEST_PAIN_SOURCE).unwrap();
    assert_eq!(mu(&["validate", file.to_str().unwrap()]).status.code(), Some(0));

    let cyclic = dir.path().join("cyclic.mu");
    std::fs::write(
        &cyclic,
        "finding f\ncluster a { rule: if f = true then supported; rule: if b at-least supported then supported }\ncluster b { rule: if a at-least supported then supported }\nlink f -> a role potentially-supporting\nlink b -> a role potentially-supporting\nlink a -> b role potentially-supporting\n",
    )
    .unwrap();
    let bad = mu(&["validate", cyclic.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let out = stdout(&bad);
    assert!(out.contains("cyclic.mu:2:1: error cycle-detected"), "{out}");

    assert_eq!(mu(&["validate", "/no/such/file.mu"]).status.code(), Some(2));
}

#[test]
fn run_writes_the_batch_trace() {
    let dir = tempfile::tempdir().unwrap();
    let patient = dir.path().join("patient.json");
    let trace = dir.path().join("trace.json");
    std::fs::write(&patient, common::classic_patient().to_string()).unwrap();
    let out = mu(&[
        "run",
        "chest-pain",
        "--patient",
        patient.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("actions: ask-age, ask-sex, ask-episode, ekg, trial-therapy, stress-test, angiogram\n"));

    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    common::assert_schema("TraceDocument", &doc);

    let kb = chest_pain();
    let answers: std::collections::BTreeMap<String, String> = [
        ("age", "older"),
        ("sex", "male"),
        ("substernal-pain", "present"),
        ("pain-after-eating", "false"),
        ("episode-pattern", "exertional"),
        ("ekg-result", "normal"),
        ("during-episode", "false"),
        ("therapy-response", "abated"),
        ("stress-test-result", "severe-ischemia"),
        ("angiogram-result", "positive"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    let batch = run_workup(&kb.network, &answers, &MumStrategy::from_config(kb.network.strategy()), 50).unwrap();
    assert_eq!(doc["trace"], serde_json::to_value(&batch).unwrap());
}

#[test]
fn run_reports_bad_patients_as_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let patient = dir.path().join("patient.json");
    std::fs::write(&patient, r#"{"substernal-pain": "sometimes"}"#).unwrap();
    let out = mu(&["run", "chest-pain", "--patient", patient.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out-of-domain-value"));
    std::fs::write(&patient, "[1, 2]").unwrap();
    assert_eq!(mu(&["run", "chest-pain", "--patient", patient.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn query_prints_json_results() {
    let out = mu(&["query", "chest-pain", "discriminate", "angina", "esophageal-spasm"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    common::assert_schema("QueryResult", &v);
    assert!(v["discriminators"].as_array().unwrap().contains(&"postprandial".into()));

    let out = mu(&["query", "chest-pain", "--observe", "age=older", "--observe", "sex=female", "state", "angina", "critical"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], true);

    let out = mu(&["query", "chest-pain", "change", "angina", "increase", "--ceiling", "monetary=free"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    common::assert_schema("QueryResult", &v);
    for plan in v["plans"].as_array().unwrap() {
        assert_eq!(plan["cost"]["monetary"], "free");
    }

    let out = mu(&["query", "chest-pain", "focus", "--kind", "hypothesis", "--condition", "dangerous"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nodes"], serde_json::json!(["angina"]));

    let out = mu(&["query", "chest-pain", "effect", "nowhere"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mu(&["query", "chest-pain", "--observe", "age", "effect", "sex"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn consult_reads_answers_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.json");
    let script = "present\nyoung\n:state\nfemale\n";
    let out = mu_with_input(&["consult", "chest-pain", "--trace", trace.to_str().unwrap()], script);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("presenting findings: substernal-pain"), "{text}");
    assert!(text.contains("next question ask-age"), "{text}");
    assert!(text.contains("  angina: unknown"), "{text}");
    assert!(text.contains("angina: unknown -> disconfirmed"), "{text}");
    assert!(text.contains("done (resolved): confirmed [], disconfirmed [angina]"), "{text}");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    common::assert_schema("TraceDocument", &doc);
}

#[test]
fn consult_recovers_from_bad_answers_and_quits() {
    let out = mu_with_input(&["consult", "chest-pain", "--interactive"], "maybe\npresent\n:why\n:quit\n");
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("substernal-pain [present|absent]? "), "{text}");
    assert!(text.contains("error: out-of-domain-value"), "{text}");
    assert!(text.contains("focus angina (triggered-dangerous"), "{text}");
    assert!(text.contains("session ended"), "{text}");
}

mod common;

use std::io::Write;

use common::kbs;
use mu_core::network::RawValue;
use mu_service::error::codes;
use mu_service::protocol::{QueryRequest, Recommendation, SessionStatus};
use mu_service::store::EventLog;
use mu_service::SessionManager;

fn drive(m: &SessionManager, id: &str, answers: &[(&str, &str)]) {
    for _ in 0..3 {
        let rec = m.recommendation(id).unwrap().recommendation;
        let asks = match rec {
            Recommendation::Presenting { findings, .. } => findings,
            Recommendation::Action { chosen, .. } => chosen.asks,
            Recommendation::Terminal { .. } => return,
        };
        for f in asks {
            if let Some((_, v)) = answers.iter().find(|(g, _)| *g == f) {
                m.record_finding(id, &f, Some(&RawValue::from(*v))).unwrap();
            }
        }
    }
}

const ANSWERS: &[(&str, &str)] = &[
    ("substernal-pain", "present"),
    ("age", "older"),
    ("sex", "male"),
    ("pain-after-eating", "false"),
    ("episode-pattern", "exertional"),
];

#[test]
fn restart_restores_every_session_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (ids, snapshots) = {
        let m = SessionManager::open(kbs(), dir.path()).unwrap();
        let a = m.create("chest-pain").unwrap().session;
        let b = m.create("chest-pain").unwrap().session;
        drive(&m, &a, ANSWERS);
        drive(&m, &b, &ANSWERS[..1]);
        m.query(
            &a,
            &QueryRequest::Discriminate {
                h1: "angina".into(),
                h2: "esophageal-spasm".into(),
                mode: Default::default(),
            },
        )
        .unwrap();
        let ids = vec![a, b];
        let snaps: Vec<_> = ids.iter().map(|id| m.snapshot(id).unwrap()).collect();
        (ids, snaps)
    };
    let m = SessionManager::open(kbs(), dir.path()).unwrap();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(m.session_ids(), sorted);
    for (id, snap) in ids.iter().zip(&snapshots) {
        assert_eq!(&m.snapshot(id).unwrap(), snap);
    }
    // The restored session keeps going and keeps logging.
    let seq = m.state(&ids[0]).unwrap().seq;
    m.record_finding(&ids[0], "dysphagia", Some(&RawValue::Bool(false))).unwrap();
    drop(m);
    let m = SessionManager::open(kbs(), dir.path()).unwrap();
    assert_eq!(m.state(&ids[0]).unwrap().seq, seq + 1);
}

#[test]
fn one_log_file_per_session_with_one_event_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let m = SessionManager::open(kbs(), dir.path()).unwrap();
    let id = m.create("chest-pain").unwrap().session;
    drive(&m, &id, ANSWERS);
    let path = EventLog::path_for(dir.path(), &id);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len() as u64, m.state(&id).unwrap().seq);
    for (i, line) in lines.iter().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["seq"], i as u64 + 1);
        common::assert_schema("SessionEvent", &v);
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn rejected_operations_leave_the_log_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let m = SessionManager::open(kbs(), dir.path()).unwrap();
    let id = m.create("chest-pain").unwrap().session;
    let path = EventLog::path_for(dir.path(), &id);
    let before = std::fs::read(&path).unwrap();
    let err = m.record_finding(&id, "sex", Some(&RawValue::from("other"))).unwrap_err();
    assert_eq!(err.code, codes::OUT_OF_DOMAIN_VALUE);
    let err = m
        .query(
            &id,
            &QueryRequest::State {
                node: "nowhere".into(),
                parameter: "belief".into(),
            },
        )
        .unwrap_err();
    assert_eq!(err.code, codes::UNKNOWN_NODE);
    assert_eq!(std::fs::read(&path).unwrap(), before);
}

#[test]
fn torn_final_line_is_dropped_on_restart() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let m = SessionManager::open(kbs(), dir.path()).unwrap();
        let id = m.create("chest-pain").unwrap().session;
        m.record_finding(&id, "age", Some(&RawValue::from("older"))).unwrap();
        id
    };
    let path = EventLog::path_for(dir.path(), &id);
    let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
    f.write_all(br#"{"seq":3,"timestamp":"2026-01-01T00:00:00.000Z","kind":"finding-rec"#).unwrap();
    drop(f);
    let m = SessionManager::open(kbs(), dir.path()).unwrap();
    assert_eq!(m.state(&id).unwrap().seq, 2);
    m.record_finding(&id, "sex", Some(&RawValue::from("male"))).unwrap();
    drop(m);
    let m = SessionManager::open(kbs(), dir.path()).unwrap();
    let state = m.state(&id).unwrap();
    assert_eq!(state.seq, 3);
    assert_eq!(state.observations.len(), 2);
}

#[test]
fn damage_before_the_last_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let m = SessionManager::open(kbs(), dir.path()).unwrap();
        let id = m.create("chest-pain").unwrap().session;
        m.record_finding(&id, "age", Some(&RawValue::from("older"))).unwrap();
        id
    };
    let path = EventLog::path_for(dir.path(), &id);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, format!("garbage\n{text}")).unwrap();
    let err = SessionManager::open(kbs(), dir.path()).err().unwrap();
    assert_eq!(err.code, codes::CORRUPT_LOG);
}

#[test]
fn terminated_sessions_stay_terminated_after_restart() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let m = SessionManager::open(kbs(), dir.path()).unwrap();
        let id = m.create("chest-pain").unwrap().session;
        m.record_finding(&id, "substernal-pain", Some(&RawValue::from("absent"))).unwrap();
        assert!(matches!(
            m.recommendation(&id).unwrap().recommendation,
            Recommendation::Terminal { .. }
        ));
        id
    };
    let m = SessionManager::open(kbs(), dir.path()).unwrap();
    assert_eq!(m.state(&id).unwrap().status, SessionStatus::Terminated);
    let err = m.record_finding(&id, "age", Some(&RawValue::from("older"))).unwrap_err();
    assert_eq!(err.code, codes::SESSION_TERMINATED);
}

#[test]
fn concurrent_sessions_do_not_interfere() {
    let m = std::sync::Arc::new(SessionManager::in_memory(kbs()));
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let m = m.clone();
            std::thread::spawn(move || {
                let id = m.create("chest-pain").unwrap().session;
                let age = if i % 2 == 0 { "older" } else { "young" };
                m.record_finding(&id, "age", Some(&RawValue::from(age))).unwrap();
                m.record_finding(&id, "sex", Some(&RawValue::from("female"))).unwrap();
                (i, m.state(&id).unwrap())
            })
        })
        .collect();
    for h in handles {
        let (i, state) = h.join().unwrap();
        let expected = if i % 2 == 0 { "supported" } else { "disconfirmed" };
        assert_eq!(state.beliefs["angina"].to_string(), expected);
        assert_eq!(state.seq, 3);
    }
}

#[test]
fn one_session_serializes_concurrent_writers() {
    let m = std::sync::Arc::new(SessionManager::in_memory(kbs()));
    let id = m.create("chest-pain").unwrap().session;
    let handles: Vec<_> = (0..16)
        .map(|i| {
            let (m, id) = (m.clone(), id.clone());
            std::thread::spawn(move || {
                let v = if i % 2 == 0 { "true" } else { "false" };
                m.record_finding(&id, "dysphagia", Some(&RawValue::from(v))).unwrap();
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let snap = m.snapshot(&id).unwrap();
    assert_eq!(snap.events.len(), 17);
    assert!(snap.events.iter().enumerate().all(|(i, e)| e.seq == i as u64 + 1));
    let replayed = mu_service::Session::replay(&snap.events, &kbs()).unwrap();
    assert_eq!(replayed.snapshot(), snap);
}

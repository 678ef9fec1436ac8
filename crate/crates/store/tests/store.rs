use std::fs::OpenOptions;
use std::io::Write;
use std::sync::Arc;

use gdss_core::{MethodId, SchemeDescriptor, SchemeLookup, UncertaintyClass};
use gdss_store::{Clock, KnowledgeStatus, KnowledgeStore, SessionRecord};
use proptest::prelude::*;
use serde_json::json;

fn descriptor(a: usize, c: usize, m: usize, class: UncertaintyClass) -> SchemeDescriptor {
    SchemeDescriptor {
        alternative_count: a,
        criterion_count: c,
        maker_count: m,
        uncertainty_class: class,
    }
}

fn session(id: &str) -> SessionRecord {
    SessionRecord {
        id: id.into(),
        problem: json!({"id": id, "weights": [0.1, 0.2, 0.7], "note": "ünïcode ✓"}),
        report: json!({"stages": [], "result": null}),
        scheme_refs: vec![format!("scheme-{id}")],
    }
}

fn open(dir: &tempfile::TempDir) -> KnowledgeStore {
    KnowledgeStore::open_with_clock(dir.path(), Clock::epoch()).unwrap()
}

#[test]
fn session_round_trip_is_byte_equal() {
    let dir = tempfile::tempdir().unwrap();
    let store = open(&dir);
    let s = session("s1");
    store.persist_session(&s).unwrap();
    let written = serde_json::to_vec(&s).unwrap();
    assert_eq!(store.load_session_bytes("s1").unwrap(), written);
    assert_eq!(store.load_session("s1").unwrap(), s);
}

#[test]
fn duplicate_session_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = open(&dir);
    store.persist_session(&session("s1")).unwrap();
    let err = store.persist_session(&session("s1")).unwrap_err();
    assert_eq!(err.code(), "DUPLICATE_ID");
}

#[test]
fn unknown_session_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let store = open(&dir);
    assert_eq!(store.load_session("nope").unwrap_err().code(), "UNKNOWN_RECORD");
}

#[test]
fn ids_cannot_escape_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let store = open(&dir);
    for bad in ["", "../evil", "a/b", "x.json"] {
        assert_eq!(store.persist_session(&session(bad)).unwrap_err().code(), "INVALID_ID");
    }
}

#[test]
fn sessions_keep_insertion_order_across_reopen() {
    let dir = tempfile::tempdir().unwrap();
    {
        let store = open(&dir);
        for id in ["zeta", "alpha", "mid"] {
            store.persist_session(&session(id)).unwrap();
        }
    }
    let store = open(&dir);
    assert_eq!(store.session_ids(), vec!["zeta", "alpha", "mid"]);
    assert_eq!(store.load_session("alpha").unwrap(), session("alpha"));
}

#[test]
fn lifecycle_accepts_only_listed_edges() {
    use KnowledgeStatus::*;
    let legal = [
        (Acquired, Represented),
        (Represented, Selected),
        (Represented, Generated),
        (Selected, Assimilated),
        (Generated, Assimilated),
        (Assimilated, Emitted),
    ];
    for from in KnowledgeStatus::ALL {
        for to in KnowledgeStatus::ALL {
            assert_eq!(from.can_move_to(to), legal.contains(&(from, to)), "{from} -> {to}");
        }
    }
}

#[test]
fn transitions_append_versions() {
    let dir = tempfile::tempdir().unwrap();
    let store = open(&dir);
    let d = descriptor(3, 2, 2, UncertaintyClass::Certain);
    store.put_scheme("k1", d, MethodId::WeightedSum, vec!["a".into()]).unwrap();
    let err = store.transition_status("k1", KnowledgeStatus::Emitted).unwrap_err();
    assert_eq!(err.code(), "ILLEGAL_TRANSITION");
    store.transition_status("k1", KnowledgeStatus::Represented).unwrap();
    store.transition_status("k1", KnowledgeStatus::Selected).unwrap();
    assert_eq!(
        store.transition_status("k1", KnowledgeStatus::Generated).unwrap_err().code(),
        "ILLEGAL_TRANSITION"
    );
    store.transition_status("k1", KnowledgeStatus::Assimilated).unwrap();
    let last = store.transition_status("k1", KnowledgeStatus::Emitted).unwrap();
    assert_eq!(last.version, 5);
    let history: Vec<_> = store.scheme_history("k1").iter().map(|r| (r.version, r.status)).collect();
    assert_eq!(
        history,
        vec![
            (1, KnowledgeStatus::Acquired),
            (2, KnowledgeStatus::Represented),
            (3, KnowledgeStatus::Selected),
            (4, KnowledgeStatus::Assimilated),
            (5, KnowledgeStatus::Emitted),
        ]
    );
    assert_eq!(
        store.transition_status("missing", KnowledgeStatus::Represented).unwrap_err().code(),
        "UNKNOWN_RECORD"
    );
    assert_eq!(
        store.put_scheme("k1", d, MethodId::Sir, vec![]).unwrap_err().code(),
        "DUPLICATE_ID"
    );
}

#[test]
fn retrieval_sees_only_emitted_schemes_in_similarity_order() {
    let dir = tempfile::tempdir().unwrap();
    let store = open(&dir);
    let probe = descriptor(4, 3, 2, UncertaintyClass::Fuzzy);
    store
        .file_generated_scheme("far", descriptor(30, 9, 7, UncertaintyClass::Stochastic), MethodId::Fsd, vec![])
        .unwrap();
    store
        .file_generated_scheme("near", descriptor(4, 3, 3, UncertaintyClass::Fuzzy), MethodId::IfwaGroup, vec![])
        .unwrap();
    store
        .put_scheme("pending", probe, MethodId::IfwaGroup, vec![])
        .unwrap();
    let hits = store.retrieve_similar_schemes(&probe, 10);
    let ids: Vec<_> = hits.iter().map(|(r, _)| r.id.as_str()).collect();
    assert_eq!(ids, vec!["near", "far"]);
    assert!(hits[0].1 > hits[1].1);
    assert_eq!(store.retrieve_similar_schemes(&probe, 1).len(), 1);
    let via_trait = store.similar(&probe, 5);
    assert_eq!(via_trait[0].id, "near");
    assert_eq!(via_trait[0].method, MethodId::IfwaGroup);
}

#[test]
fn equal_similarity_prefers_newest() {
    let dir = tempfile::tempdir().unwrap();
    let store = open(&dir);
    let d = descriptor(3, 2, 1, UncertaintyClass::Certain);
    for id in ["first", "second", "third"] {
        store.file_generated_scheme(id, d, MethodId::WeightedSum, vec![]).unwrap();
    }
    let ids: Vec<_> = store.retrieve_similar_schemes(&d, 3).into_iter().map(|(r, _)| r.id).collect();
    assert_eq!(ids, vec!["third", "second", "first"]);
}

#[test]
fn torn_final_line_is_dropped() {
    let dir = tempfile::tempdir().unwrap();
    {
        let store = open(&dir);
        store.persist_session(&session("s1")).unwrap();
    }
    let journal = dir.path().join("journal.ndjson");
    OpenOptions::new()
        .append(true)
        .open(&journal)
        .unwrap()
        .write_all(br#"{"op":"session.persist","id":"s2","vers"#)
        .unwrap();
    let store = open(&dir);
    assert_eq!(store.session_ids(), vec!["s1"]);
    store.persist_session(&session("s3")).unwrap();
    drop(store);
    let store = open(&dir);
    assert_eq!(store.session_ids(), vec!["s1", "s3"]);
    assert_eq!(store.journal().unwrap().len(), 2);
}

#[test]
fn corrupt_interior_line_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("journal.ndjson"), "garbage\n{}\n").unwrap();
    let err = KnowledgeStore::open(dir.path()).unwrap_err();
    assert_eq!(err.code(), "CORRUPT_JOURNAL");
}

#[test]
fn fixed_clock_gives_identical_journals() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let store = open(&dir);
        store.persist_session(&session("s1")).unwrap();
        store
            .file_generated_scheme("k", descriptor(2, 2, 1, UncertaintyClass::Certain), MethodId::Sir, vec!["a".into()])
            .unwrap();
        std::fs::read(dir.path().join("journal.ndjson")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn journal_lines_carry_the_record_fields() {
    let dir = tempfile::tempdir().unwrap();
    let store = open(&dir);
    store.persist_session(&session("s1")).unwrap();
    let text = std::fs::read_to_string(dir.path().join("journal.ndjson")).unwrap();
    let line: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in ["op", "id", "version", "timestamp", "payload"] {
        assert!(line.get(key).is_some(), "missing {key}");
    }
    assert_eq!(line["timestamp"], "1970-01-01T00:00:00.000Z");
}

#[test]
fn concurrent_writers_do_not_lose_records() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(open(&dir));
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let store = Arc::clone(&store);
            std::thread::spawn(move || {
                for i in 0..10 {
                    store.persist_session(&session(&format!("t{t}-{i}"))).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(store.session_ids().len(), 80);
    drop(store);
    assert_eq!(open(&dir).session_ids().len(), 80);
}

fn json_leaf() -> impl Strategy<Value = serde_json::Value> {
    prop_oneof![
        Just(serde_json::Value::Null),
        any::<bool>().prop_map(serde_json::Value::from),
        any::<i64>().prop_map(serde_json::Value::from),
        (-1e9f64..1e9).prop_map(serde_json::Value::from),
        "\\PC{0,12}".prop_map(serde_json::Value::from),
    ]
}

fn json_value() -> impl Strategy<Value = serde_json::Value> {
    json_leaf().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(serde_json::Value::from),
            prop::collection::btree_map("[a-z]{1,6}", inner, 0..4)
                .prop_map(|m| serde_json::Value::Object(m.into_iter().collect())),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_sessions_round_trip(
        id in "[A-Za-z0-9_-]{1,20}",
        problem in json_value(),
        report in json_value(),
        refs in prop::collection::vec("[a-z0-9-]{1,8}", 0..3),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let store = open(&dir);
        let s = SessionRecord { id: id.clone(), problem, report, scheme_refs: refs };
        store.persist_session(&s).unwrap();
        let expected = serde_json::to_vec(&s).unwrap();
        prop_assert_eq!(store.load_session_bytes(&id).unwrap(), expected);
        drop(store);
        let reopened = open(&dir);
        prop_assert_eq!(reopened.load_session(&id).unwrap(), s);
    }
}

use std::collections::BTreeMap;
use std::time::Instant;

use ose_planner::fixtures::{generated_500, pump_carter, sealed_cavity, seed_db, seed_tools};
use ose_planner::matching::{CustomConfig, Origin, Selection};
use ose_planner::ose::{CuttingParam, OseDatabase};
use ose_planner::pipeline::{run_pipeline, PipelineError, PipelineOptions};
use ose_planner::session::{Session, SessionError, SessionStore};
use ose_planner::transform::Tolerances;

fn batch() -> ose_planner::pipeline::PipelineOutput {
    run_pipeline(&pump_carter(), &seed_db(), &seed_tools(), &PipelineOptions::default()).unwrap()
}

fn session() -> Session {
    Session::create("s0001", pump_carter(), seed_db(), seed_tools(), Tolerances::default()).unwrap()
}

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let a = batch();
    let b = batch();
    assert_eq!(a.document, b.document);
    assert_eq!(
        serde_json::to_string(&a.attributes).unwrap(),
        serde_json::to_string(&b.attributes).unwrap()
    );
    assert_eq!(
        serde_json::to_string(&a.candidates).unwrap(),
        serde_json::to_string(&b.candidates).unwrap()
    );
}

#[test]
fn every_face_is_planned_once() {
    let out = batch();
    let mut faces = out.plan.all_faces();
    faces.sort();
    let mut expected: Vec<&str> = out.attributes.faces.iter().map(|f| f.face.as_str()).collect();
    expected.sort();
    assert_eq!(faces, expected);
    assert!(out.plan.unmatched.is_empty());
    assert!(out.plan.inaccessible.is_empty());
    for s in &out.plan.setups {
        for q in &s.sequences {
            assert!(q.conditions.is_some(), "{}", q.id);
        }
    }
}

#[test]
fn inaccessible_face_goes_to_exceptions() {
    let out = run_pipeline(&sealed_cavity(), &seed_db(), &seed_tools(), &PipelineOptions::default()).unwrap();
    assert_eq!(out.plan.inaccessible, vec!["CAVITY".to_string()]);
    assert!(out.document.text.contains("INACCESSIBLE FACES: CAVITY"));
}

#[test]
fn empty_database_leaves_every_face_unmatched() {
    let part = pump_carter();
    let out = run_pipeline(&part, &OseDatabase::default(), &seed_tools(), &PipelineOptions::default()).unwrap();
    assert!(out.plan.setups.is_empty());
    assert_eq!(out.plan.unmatched.len(), part.faces.len());
}

#[test]
fn invalid_database_stops_before_transformation() {
    let mut db = seed_db();
    db.oses[0].config = "C_MISSING".into();
    let err = run_pipeline(&pump_carter(), &db, &seed_tools(), &PipelineOptions::default()).unwrap_err();
    assert!(matches!(err, PipelineError::Validation(_)));
    assert!(err.to_string().starts_with("[validate]"));
}

#[test]
fn unmutated_session_exports_the_batch_document() {
    assert_eq!(session().export(), batch().document);
}

#[test]
fn defaults_are_proposed_not_frozen() {
    let s = session();
    for (face, cands) in &s.candidates {
        let sel: Vec<_> = cands.iter().filter(|c| c.selected).collect();
        assert_eq!(sel.len(), 1, "{face}");
        assert_eq!(sel[0].origin, Origin::Default);
    }
    assert_eq!(s.version, 0);
    assert!(s.events.is_empty());
}

/// A face with at least two candidates and the id of its second one.
fn alternative(s: &Session) -> (String, String) {
    let (face, cands) = s
        .candidates
        .iter()
        .find(|(_, c)| c.len() >= 2 && c[0].ose == c[1].ose)
        .unwrap();
    (face.clone(), cands[1].id.clone())
}

#[test]
fn level_2_selection_reaches_the_plan_and_keeps_alternatives() {
    let mut s = session();
    let (face, alt) = alternative(&s);
    let before = s.candidates[&face].len();
    s.select(&face, Selection::Choose { candidate: alt.clone() }, Some(0)).unwrap();
    assert!(s.stale);
    s.rebuild(Some(1)).unwrap();
    assert!(!s.stale);
    let seq = s
        .plan
        .setups
        .iter()
        .flat_map(|x| &x.sequences)
        .find(|q| q.faces.contains(&face))
        .unwrap();
    let j = seq.justification.iter().find(|j| j.face == face).unwrap();
    assert_eq!(j.candidate, alt);
    assert_eq!(j.origin, Origin::ExpertChoice);
    assert_eq!(s.candidates[&face].len(), before);
    assert_ne!(s.export(), batch().document);
}

#[test]
fn stale_version_is_rejected() {
    let mut s = session();
    let (face, alt) = alternative(&s);
    s.select(&face, Selection::Choose { candidate: alt.clone() }, Some(0)).unwrap();
    let err = s.select(&face, Selection::Default, Some(0)).unwrap_err();
    assert!(matches!(err, SessionError::Conflict { expected: 0, actual: 1 }));
    assert_eq!(s.version, 1);
    assert_eq!(s.events.len(), 1);
}

#[test]
fn unknown_ids_are_not_found() {
    let mut s = session();
    assert!(matches!(s.face("NOPE"), Err(SessionError::UnknownFace(_))));
    assert!(matches!(
        s.select("NOPE", Selection::Default, None),
        Err(SessionError::UnknownFace(_))
    ));
    let face = s.candidates.keys().next().unwrap().clone();
    assert!(matches!(
        s.select(&face, Selection::Choose { candidate: "X/Y".into() }, None),
        Err(SessionError::Select(_))
    ));
}

fn mutated_session() -> Session {
    let mut s = session();
    let (face, alt) = alternative(&s);
    s.select(&face, Selection::Choose { candidate: alt }, None).unwrap();
    let cands = &s.candidates["FLOOR"];
    let custom = CustomConfig {
        ose: cands[0].ose.clone(),
        cutting_set: cands[0].cutting_set.clone(),
        tmc: None,
        conditions: BTreeMap::from([(CuttingParam::CuttingSpeed, 9999.0)]),
    };
    s.select("FLOOR", Selection::Custom(custom), None).unwrap();
    s.rebuild(None).unwrap();
    s
}

#[test]
fn custom_out_of_range_condition_is_flagged() {
    let s = mutated_session();
    let c = s.candidates["FLOOR"].iter().find(|c| c.selected).unwrap();
    assert_eq!(c.origin, Origin::ExpertCustom);
    assert!(c.warnings.iter().any(|w| w.contains("cutting_speed")), "{:?}", c.warnings);
}

#[test]
fn event_log_replays_to_the_same_plan() {
    let s = mutated_session();
    let r = Session::replay(
        "s0002",
        pump_carter(),
        seed_db(),
        seed_tools(),
        Tolerances::default(),
        &s.events,
    )
    .unwrap();
    assert_eq!(r.export(), s.export());
    assert_eq!(r.version, s.version);
    assert_eq!(r.events, s.events);
}

#[test]
fn sessions_survive_the_store() {
    let dir = std::env::temp_dir().join(format!("ose-store-{}", std::process::id()));
    let store = SessionStore::open(&dir).unwrap();
    let mut s = mutated_session();
    s.id = store.next_id().unwrap();
    store.save(&s).unwrap();
    let back = store.load(&s.id).unwrap();
    assert_eq!(back.export(), s.export());
    assert_eq!(back.events, s.events);
    assert_eq!(store.next_id().unwrap(), "s0002");
    assert!(matches!(store.load("s9999"), Err(SessionError::NotFound(_))));
    assert!(matches!(store.load("../etc"), Err(SessionError::NotFound(_))));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn five_hundred_faces_within_budget() {
    let part = generated_500();
    assert_eq!(part.faces.len(), 500);
    let t0 = Instant::now();
    let out = run_pipeline(&part, &seed_db(), &seed_tools(), &PipelineOptions::default()).unwrap();
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "{elapsed:?}");
    assert_eq!(out.plan.all_faces().len(), 500);
}

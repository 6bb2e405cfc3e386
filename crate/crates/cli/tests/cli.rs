//! Exit-code contract and outputs of the batch verbs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ose_planner::fixtures::{pump_carter, seed_db, seed_tools, shipped_files};
use ose_planner::ose::{CuttingParam, Interval};
use ose_planner::pipeline::{run_pipeline, PipelineOptions};
use tempfile::TempDir;

fn fixtures() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in shipped_files() {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn ose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ose")).args(args).output().unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn inputs(dir: &Path, part: &str, osedb: &str, tools: &str) -> Vec<String> {
    vec![
        "--part".into(),
        p(dir, part),
        "--osedb".into(),
        p(dir, osedb),
        "--tools".into(),
        p(dir, tools),
    ]
}

fn run(verb: &str, extra: &[String]) -> Output {
    let mut args = vec![verb];
    args.extend(extra.iter().map(String::as_str));
    ose(&args)
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, v: &T) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

#[test]
fn plan_writes_the_batch_document() {
    let dir = fixtures();
    let args = inputs(dir.path(), "part_pump_carter.json", "osedb_seed.json", "tools_seed.json");
    let o = run("plan", &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let expected = run_pipeline(&pump_carter(), &seed_db(), &seed_tools(), &PipelineOptions::default()).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), expected.document.json);

    let out = p(dir.path(), "plan.json");
    let mut with_out = args.clone();
    with_out.extend(["--out".into(), out.clone()]);
    assert_eq!(code(&run("plan", &with_out)), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), expected.document.json);

    let r = ose(&["report", "--plan", &out]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert_eq!(String::from_utf8(r.stdout).unwrap(), expected.document.text);
}

#[test]
fn transform_and_match_succeed() {
    let dir = fixtures();
    let t = ose(&["transform", "--part", &p(dir.path(), "part_type_zoo.json")]);
    assert_eq!(code(&t), 0, "{}", stderr(&t));
    let v: serde_json::Value = serde_json::from_slice(&t.stdout).unwrap();
    assert_eq!(v["faces"].as_array().unwrap().len(), 6);

    let m = run("match", &inputs(dir.path(), "part_pump_carter.json", "osedb_seed.json", "tools_seed.json"));
    assert_eq!(code(&m), 0, "{}", stderr(&m));
    let v: serde_json::Value = serde_json::from_slice(&m.stdout).unwrap();
    let floor = v["FLOOR"].as_array().unwrap();
    assert!(!floor.is_empty());
    assert_eq!(floor.iter().filter(|c| c["selected"] == true).count(), 1);
}

#[test]
fn input_errors_exit_1() {
    let dir = fixtures();
    let missing = run("plan", &inputs(dir.path(), "nope.json", "osedb_seed.json", "tools_seed.json"));
    assert_eq!(code(&missing), 1);

    std::fs::write(dir.path().join("broken.json"), "{\n  \"id\": \"x\",\n  \"faces\": [\n").unwrap();
    let syntax = run("plan", &inputs(dir.path(), "broken.json", "osedb_seed.json", "tools_seed.json"));
    assert_eq!(code(&syntax), 1);
    assert!(stderr(&syntax).contains("line 4"), "{}", stderr(&syntax));

    let mut tools = seed_tools();
    tools[2].diameter = -4.0;
    write_json(dir.path(), "bad_tools.json", &tools);
    let schema = run("plan", &inputs(dir.path(), "part_pump_carter.json", "osedb_seed.json", "bad_tools.json"));
    assert_eq!(code(&schema), 1);
    assert!(stderr(&schema).contains("diameter"), "{}", stderr(&schema));

    assert_eq!(code(&ose(&["plan", "--part", "x.json"])), 1);
    assert_eq!(code(&ose(&["frobnicate"])), 1);
    assert_eq!(code(&ose(&["--help"])), 0);
}

#[test]
fn validation_findings_exit_2() {
    let dir = fixtures();
    let mut db = seed_db();
    db.oses[0].family = "F_MISSING".into();
    write_json(dir.path(), "dangling.json", &db);
    let o = run("plan", &inputs(dir.path(), "part_pump_carter.json", "dangling.json", "tools_seed.json"));
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("F_MISSING"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn audit_findings_exit_2() {
    let dir = fixtures();
    let seeded = ose(&["audit", "--osedb", &p(dir.path(), "osedb_audit_seeded.json")]);
    assert_eq!(code(&seeded), 2);
    let r: serde_json::Value = serde_json::from_slice(&seeded.stdout).unwrap();
    for kind in ["shadowing", "duplicates", "unsatisfiable"] {
        assert_eq!(r[kind].as_array().unwrap().len(), 1, "{kind}");
    }
    let clean = ose(&["audit", "--osedb", &p(dir.path(), "osedb_seed.json")]);
    assert_eq!(code(&clean), 0);
}

#[test]
fn infeasible_conditions_exit_3() {
    let dir = fixtures();
    let mut db = seed_db();
    for t in &mut db.tmcs {
        t.constraints.insert(CuttingParam::CuttingSpeed, Interval { min: 1.0, max: 2.0 });
    }
    write_json(dir.path(), "slow.json", &db);
    let o = run("plan", &inputs(dir.path(), "part_pump_carter.json", "slow.json", "tools_seed.json"));
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("[automate]"), "{}", stderr(&o));
}

#[test]
fn whatif_lists_variants() {
    let dir = fixtures();
    let db = p(dir.path(), "osedb_seed.json");
    let o = ose(&["whatif", "--osedb", &db, "--ose", "O_PLAN_END_R", "--vary", "mode"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let variants = v.as_array().unwrap();
    assert!(!variants.is_empty());
    assert!(variants.iter().all(|x| x["field"] == "mode"));
    assert_eq!(code(&ose(&["whatif", "--osedb", &db, "--ose", "NOPE"])), 1);
}

#[test]
fn tolerances_file_is_honoured() {
    let dir = fixtures();
    // a plane tolerance this loose turns every gently curved face into a plane
    let tol = write_json(dir.path(), "tol.json", &serde_json::json!({ "plane": 100.0 }));
    let o = ose(&[
        "transform",
        "--part",
        &p(dir.path(), "part_type_zoo.json"),
        "--tolerances",
        tol.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let types: Vec<&str> = v["faces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["geometry_type"].as_str().unwrap())
        .collect();
    assert!(types.iter().all(|&t| t == "Plan"), "{types:?}");
}

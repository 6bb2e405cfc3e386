//! Batch verbs. Each returns the text to write and the exit code, or a
//! failure carrying its own code.

use std::path::Path;

use ose_planner::matching::match_all;
use ose_planner::ose::{audit_database, validate_db, what_if_expand, AuditGrid, OseDatabase, WhatIfField};
use ose_planner::part::{validate_part, Part};
use ose_planner::pipeline::{
    default_selections, load_inputs, parse_json, parse_osedb, parse_part, read_file, validate_inputs, Inputs,
    PipelineError, PipelineOptions, ValidationReport,
};
use ose_planner::report::{parse_plan, render_text};
use ose_planner::transform::{transform_part, Tolerances};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Validation(String),
    Infeasible(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Validation(m) | Failure::Infeasible(m) => m,
        }
    }
}

impl From<ose_planner::pipeline::InputError> for Failure {
    fn from(e: ose_planner::pipeline::InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Validation(_) => Failure::Validation(e.to_string()),
            _ => Failure::Infeasible(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub code: u8,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, code: EXIT_OK }
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("domain types serialise");
    s.push('\n');
    s
}

fn check(report: ValidationReport) -> Result<(), Failure> {
    if report.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("[validate] input validation failed:\n{report}")))
    }
}

pub fn load_tolerances(path: Option<&Path>) -> Result<Tolerances, Failure> {
    match path {
        None => Ok(Tolerances::default()),
        Some(p) => Ok(parse_json(&read_file(p)?, &p.display().to_string())?),
    }
}

fn load_part(path: &Path) -> Result<Part, Failure> {
    Ok(parse_part(&read_file(path)?, &path.display().to_string())?)
}

fn load_db(path: &Path) -> Result<OseDatabase, Failure> {
    Ok(parse_osedb(&read_file(path)?, &path.display().to_string())?)
}

/// Paths of the three pipeline inputs.
#[derive(Debug, Clone, Copy)]
pub struct InputPaths<'a> {
    pub part: &'a Path,
    pub osedb: &'a Path,
    pub tools: &'a Path,
}

fn load_valid(paths: InputPaths) -> Result<Inputs, Failure> {
    let inputs = load_inputs(paths.part, paths.osedb, paths.tools)?;
    check(validate_inputs(&inputs.part, &inputs.db))?;
    Ok(inputs)
}

/// Face attributes with the synthesis block.
pub fn transform(part: &Path, tol: &Tolerances) -> Result<Output, Failure> {
    let part = load_part(part)?;
    check(ValidationReport {
        part: validate_part(&part),
        osedb: vec![],
    })?;
    Ok(Output::ok(pretty(&transform_part(&part, tol))))
}

/// Ranked candidates per face with the level-1 selections marked.
pub fn match_faces(paths: InputPaths, tol: &Tolerances) -> Result<Output, Failure> {
    let inputs = load_valid(paths)?;
    let attrs = transform_part(&inputs.part, tol);
    let mut candidates = match_all(&attrs.faces, &inputs.db, &inputs.tools);
    default_selections(&mut candidates, &inputs.db, &inputs.tools)?;
    Ok(Output::ok(pretty(&candidates)))
}

/// The plan document JSON of the batch pipeline.
pub fn plan(paths: InputPaths, tol: &Tolerances) -> Result<Output, Failure> {
    let inputs = load_valid(paths)?;
    let options = PipelineOptions {
        tolerances: tol.clone(),
    };
    let out = ose_planner::pipeline::run_pipeline(&inputs.part, &inputs.db, &inputs.tools, &options)?;
    Ok(Output::ok(out.document.json))
}

/// Text rendering, either of an existing plan document or of a fresh run.
pub fn report(plan_file: Option<&Path>, paths: Option<InputPaths>, tol: &Tolerances) -> Result<Output, Failure> {
    if let Some(p) = plan_file {
        let plan = parse_plan(&read_file(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        return Ok(Output::ok(render_text(&plan)));
    }
    let paths = paths.ok_or_else(|| Failure::Input("report needs --plan or --part, --osedb and --tools".into()))?;
    let inputs = load_valid(paths)?;
    let options = PipelineOptions {
        tolerances: tol.clone(),
    };
    let out = ose_planner::pipeline::run_pipeline(&inputs.part, &inputs.db, &inputs.tools, &options)?;
    Ok(Output::ok(out.document.text))
}

/// Audit report; any finding makes the exit code nonzero.
pub fn audit(osedb: &Path) -> Result<Output, Failure> {
    let db = load_db(osedb)?;
    check(ValidationReport {
        part: vec![],
        osedb: validate_db(&db),
    })?;
    let r = audit_database(&db, &AuditGrid::for_database(&db));
    Ok(Output {
        code: if r.is_clean() { EXIT_OK } else { EXIT_VALIDATION },
        body: pretty(&r),
    })
}

pub fn whatif(osedb: &Path, ose: &str, vary: &[WhatIfField]) -> Result<Output, Failure> {
    let db = load_db(osedb)?;
    check(ValidationReport {
        part: vec![],
        osedb: validate_db(&db),
    })?;
    let vary = if vary.is_empty() { &WhatIfField::ALL[..] } else { vary };
    let variants = what_if_expand(ose, &db, vary).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(Output::ok(pretty(&variants)))
}

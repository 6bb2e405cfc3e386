//! Input parsing and the end-to-end batch pipeline.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::matching::{infeasible_params, match_all, select_candidate, Candidate, Selection};
use crate::ose::{validate_db, validate_tools, CuttingSet, Finding, OseDatabase};
use crate::part::{validate_part, Part, Violation};
use crate::report::{generate_documentation, optimize_conditions, report_statistics, PlanDocument};
use crate::setup::{
    build_setups, group_sequences, plan_skeleton, same_direction, Exceptions, FaceAccess, PlanError, ProcessPlan,
    Tension,
};
use crate::transform::{transform_part, Tolerances, TransformOutput};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{file}: cannot read: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: malformed JSON at line {line}, column {column}: {message}")]
    Syntax {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{file}: {path}: {message}")]
    Schema { file: String, path: String, message: String },
}

/// Parses JSON into `T`, reporting syntax errors by position and schema errors
/// by field path.
pub fn parse_json<T: DeserializeOwned>(text: &str, file: &str) -> Result<T, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let res: Result<T, _> = serde_path_to_error::deserialize(de);
    res.map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => InputError::Schema {
                file: file.into(),
                path,
                message: inner.to_string(),
            },
            _ => InputError::Syntax {
                file: file.into(),
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            },
        }
    })
}

pub fn parse_part(text: &str, file: &str) -> Result<Part, InputError> {
    parse_json(text, file)
}

pub fn parse_osedb(text: &str, file: &str) -> Result<OseDatabase, InputError> {
    parse_json(text, file)
}

/// Parses a tool list; non-positive dimensions, cutting lengths above tool
/// lengths and invalid ranges are schema errors naming the field.
pub fn parse_tools(text: &str, file: &str) -> Result<Vec<CuttingSet>, InputError> {
    let tools: Vec<CuttingSet> = parse_json(text, file)?;
    let problems = validate_tools(&tools);
    match problems.first() {
        None => Ok(tools),
        Some(first) => Err(InputError::Schema {
            file: file.into(),
            path: first.path.clone(),
            message: problems.iter().map(|f| f.message.clone()).collect::<Vec<_>>().join("; "),
        }),
    }
}

pub fn read_file(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io {
        file: path.display().to_string(),
        source,
    })
}

/// Validation findings over all inputs; empty means the pipeline may run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub part: Vec<Violation>,
    pub osedb: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.part.is_empty() && self.osedb.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.part {
            writeln!(f, "part: {}: {}", v.face.as_deref().unwrap_or("-"), v.reason)?;
        }
        for x in &self.osedb {
            writeln!(f, "osedb: {x}")?;
        }
        Ok(())
    }
}

pub fn validate_inputs(part: &Part, db: &OseDatabase) -> ValidationReport {
    ValidationReport {
        part: validate_part(part),
        osedb: validate_db(db),
    }
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub part: Part,
    pub db: OseDatabase,
    pub tools: Vec<CuttingSet>,
}

/// Reads and parses the three input files. Validation is left to the caller
/// so that findings can be reported separately from parse errors.
pub fn load_inputs(part: &Path, osedb: &Path, tools: &Path) -> Result<Inputs, InputError> {
    let name = |p: &Path| p.display().to_string();
    Ok(Inputs {
        part: parse_part(&read_file(part)?, &name(part))?,
        db: parse_osedb(&read_file(osedb)?, &name(osedb))?,
        tools: parse_tools(&read_file(tools)?, &name(tools))?,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("[validate] input validation failed:\n{0}")]
    Validation(ValidationReport),
    #[error("[automate] face {face}: no candidate has feasible cutting conditions ({detail})")]
    Infeasible { face: String, detail: String },
    #[error("[prepare] {0}")]
    Plan(#[from] PlanError),
    #[error("[automate] sequence {sequence}: {detail}")]
    Conditions { sequence: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineOptions {
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Level-1 selection for every face with candidates. A best-ranked candidate
/// whose cutting conditions are infeasible is demoted in favour of the next
/// feasible rank; the returned notices record each demotion.
pub fn default_selections(
    candidates: &mut BTreeMap<String, Vec<Candidate>>,
    db: &OseDatabase,
    tools: &[CuttingSet],
) -> Result<Vec<String>, PipelineError> {
    let mut notices = Vec::new();
    for (face, cands) in candidates.iter_mut() {
        if cands.is_empty() {
            continue;
        }
        select_candidate(cands, face, &Selection::Default, db, tools).expect("non-empty list has a rank 1");
        let mut rejected = Vec::new();
        let mut chosen = None;
        for c in cands.iter() {
            let bad = infeasible_params(c, db, tools);
            if bad.is_empty() {
                chosen = Some(c.id.clone());
                break;
            }
            let names: Vec<&str> = bad.iter().map(|p| p.as_str()).collect();
            rejected.push(format!("{} ({})", c.id, names.join(", ")));
        }
        let Some(id) = chosen else {
            return Err(PipelineError::Infeasible {
                face: face.clone(),
                detail: rejected.join("; "),
            });
        };
        if !rejected.is_empty() {
            for c in cands.iter_mut() {
                c.selected = c.id == id;
            }
            notices.push(format!(
                "face {face}: demoted {} for infeasible conditions, selected {id}",
                rejected.join(", ")
            ));
        }
    }
    Ok(notices)
}

/// Preparation and automation phases from the current selections: setups,
/// sequences, skeleton, resolved conditions and synthesis.
pub fn build_plan(
    part: &Part,
    attrs: &TransformOutput,
    candidates: &BTreeMap<String, Vec<Candidate>>,
    db: &OseDatabase,
    tools: &[CuttingSet],
    notices: &[String],
) -> Result<ProcessPlan, PipelineError> {
    let selected: BTreeMap<String, &Candidate> = candidates
        .iter()
        .filter_map(|(f, cs)| cs.iter().find(|c| c.selected).map(|c| (f.clone(), c)))
        .collect();
    let mut exceptions = Exceptions::default();
    let mut accesses = Vec::new();
    for f in &attrs.faces {
        if f.inaccessible {
            exceptions.inaccessible.push(f.face.clone());
        } else if !selected.contains_key(&f.face) {
            exceptions.unmatched.push(f.face.clone());
        } else {
            accesses.push(FaceAccess::from_attributes(f));
        }
    }
    let setups = build_setups(&accesses);
    let sequences: Vec<_> = setups
        .setups
        .iter()
        .flat_map(|s| {
            let sel: BTreeMap<String, &Candidate> = s
                .faces
                .iter()
                .map(|f| (f.clone(), selected[f]))
                .collect();
            group_sequences(s, &sel, part, db)
        })
        .collect();
    let mut plan = plan_skeleton(part, &setups.setups, &sequences, &exceptions, candidates, db)?;

    for s in &plan.setups {
        for f in &s.faces {
            let Some(a) = attrs.face(f) else { continue };
            if let Some(p) = a.primary_direction.filter(|p| !same_direction(p, &s.direction)) {
                plan.tensions.push(Tension {
                    face: f.clone(),
                    setup: s.id.clone(),
                    setup_direction: s.direction,
                    matched_direction: p,
                });
            }
        }
    }
    for s in &mut plan.setups {
        for q in &mut s.sequences {
            let cand = selected[&q.faces[0]];
            let tool = tools
                .iter()
                .find(|t| t.id == cand.cutting_set)
                .ok_or_else(|| PipelineError::Conditions {
                    sequence: q.id.clone(),
                    detail: format!("cutting set {} is not in the tool list", cand.cutting_set),
                })?;
            let tmc = cand.tmc.as_deref().and_then(|t| db.tmc(t));
            q.conditions = Some(optimize_conditions(cand, tool, tmc).map_err(|e| PipelineError::Conditions {
                sequence: q.id.clone(),
                detail: e.to_string(),
            })?);
        }
    }
    plan.notices = notices.to_vec();
    plan.synthesis = report_statistics(&attrs.synthesis, attrs.faces.len()).ok();
    Ok(plan)
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub attributes: TransformOutput,
    pub candidates: BTreeMap<String, Vec<Candidate>>,
    pub plan: ProcessPlan,
    pub document: PlanDocument,
}

/// Transformation, matching with level-1 selections, then plan building and
/// documentation.
pub fn run_pipeline(
    part: &Part,
    db: &OseDatabase,
    tools: &[CuttingSet],
    options: &PipelineOptions,
) -> Result<PipelineOutput, PipelineError> {
    let report = validate_inputs(part, db);
    if !report.is_empty() {
        return Err(PipelineError::Validation(report));
    }
    let attributes = transform_part(part, &options.tolerances);
    let mut candidates = match_all(&attributes.faces, db, tools);
    let notices = default_selections(&mut candidates, db, tools)?;
    let plan = build_plan(part, &attributes, &candidates, db, tools, &notices)?;
    let document = generate_documentation(&plan);
    Ok(PipelineOutput {
        attributes,
        candidates,
        plan,
        document,
    })
}

//! Matching faces against the OSE database: each face gets the ranked list of
//! (OSE, cutting set) candidates whose checks it passes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ose::{
    classify_tool, eval_check, Bindings, Check, CheckError, CuttingParam, CuttingSet,
    ExtendedCuttingConditions, GeometryFamily, Interval, Ose, OseDatabase, Priority, Tmc,
};
use crate::transform::FaceAttributes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Origin {
    Default,
    ExpertChoice,
    ExpertCustom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Family,
    Geometric,
    Envelope,
    Manufacturing,
}

/// Outcome of one check while matching a candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub stage: Stage,
    pub check: String,
    pub passed: bool,
    /// Values read by the check, `attribute=value`.
    pub detail: String,
}

/// Expert-specified cutting conditions of a level-3 selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomConfig {
    pub ose: String,
    pub cutting_set: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tmc: Option<String>,
    #[serde(default)]
    pub conditions: BTreeMap<CuttingParam, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// `ose/cutting_set`, with a `/custom-n` suffix for expert configurations.
    pub id: String,
    pub face: String,
    pub ose: String,
    pub cutting_set: String,
    pub config: String,
    pub priority: Priority,
    /// TMC used for condition calculus: the allowed couple with the largest
    /// feasible feed rate.
    pub tmc: Option<String>,
    /// Upper bound of the feasible feed-rate interval, when non-empty.
    pub feed_rate_bound: Option<f64>,
    pub diameter: f64,
    pub rank: usize,
    pub selected: bool,
    pub origin: Origin,
    pub trace: Vec<TraceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Candidate {
    /// Key grouping faces into one sequence.
    pub fn sequence_key(&self) -> (&str, &str, Option<&str>) {
        (
            &self.ose,
            &self.cutting_set,
            self.custom.as_ref().map(|_| self.id.as_str()),
        )
    }
}

fn describe(check: &Check, b: &Bindings) -> String {
    check
        .attributes()
        .iter()
        .map(|a| match crate::ose::AttributeSource::value(b, a) {
            Some(v) => format!("{a}={}", show(&v)),
            None => format!("{a}=?"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn show(v: &crate::ose::Value) -> String {
    use crate::ose::Value::*;
    match v {
        Number(x) if x.is_infinite() => "unbounded".into(),
        Number(x) => format!("{}", (x * 1e6).round() / 1e6),
        Symbol(s) => s.clone(),
        Boolean(b) => b.to_string(),
        List(l) => format!("[{}]", l.join(", ")),
    }
}

fn run_checks(stage: Stage, checks: &[Check], b: &Bindings, trace: &mut Vec<TraceEntry>) -> Result<bool, CheckError> {
    let mut all = true;
    for c in checks {
        let passed = eval_check(c, b)?;
        trace.push(TraceEntry {
            stage,
            check: c.to_string(),
            passed,
            detail: describe(c, b),
        });
        all &= passed;
    }
    Ok(all)
}

/// Geometry type equality plus every family check.
pub fn face_in_family(attrs: &FaceAttributes, family: &GeometryFamily) -> Result<bool, CheckError> {
    family_trace(attrs, family).map(|(ok, _)| ok)
}

fn family_trace(attrs: &FaceAttributes, family: &GeometryFamily) -> Result<(bool, Vec<TraceEntry>), CheckError> {
    let type_ok = attrs.geometry_type == family.required_type;
    let mut trace = vec![TraceEntry {
        stage: Stage::Family,
        check: format!("face.geometry_type = {}", family.required_type),
        passed: type_ok,
        detail: format!("face.geometry_type={}", attrs.geometry_type),
    }];
    let checks_ok = run_checks(Stage::Family, &family.checks, &Bindings::face(attrs), &mut trace)?;
    Ok((type_ok && checks_ok, trace))
}

/// Whether the tool reaches the deepest point of the face: its length covers
/// the face's depth below the entry plane plus its own extent along the
/// access direction.
pub fn envelope_fits(attrs: &FaceAttributes, tool: &CuttingSet) -> bool {
    tool.tool_length >= attrs.global_accessibility + attrs.axial_extent
}

/// Compliance checks of the OSE under face, tool and configuration bindings,
/// plus the envelope pre-filter.
pub fn geometric_compliance(
    attrs: &FaceAttributes,
    tool: &CuttingSet,
    ose: &Ose,
    config: Option<&ExtendedCuttingConditions>,
) -> Result<bool, CheckError> {
    geometric_trace(attrs, tool, ose, config).map(|(ok, _)| ok)
}

fn geometric_trace(
    attrs: &FaceAttributes,
    tool: &CuttingSet,
    ose: &Ose,
    config: Option<&ExtendedCuttingConditions>,
) -> Result<(bool, Vec<TraceEntry>), CheckError> {
    let b = Bindings {
        face: attrs,
        tool: Some(tool),
        config,
    };
    let mut trace = Vec::new();
    let checks_ok = run_checks(Stage::Geometric, &ose.compliance_checks, &b, &mut trace)?;
    let env = envelope_fits(attrs, tool);
    trace.push(TraceEntry {
        stage: Stage::Envelope,
        check: "tool.tool_length >= face.global_accessibility + face.axial_extent".into(),
        passed: env,
        detail: format!(
            "tool.tool_length={}, face.global_accessibility={}, face.axial_extent={}",
            show(&crate::ose::Value::Number(tool.tool_length)),
            show(&crate::ose::Value::Number(attrs.global_accessibility)),
            show(&crate::ose::Value::Number(attrs.axial_extent)),
        ),
    });
    Ok((checks_ok && env, trace))
}

fn manufacturing_trace(tool: &CuttingSet, config: &ExtendedCuttingConditions) -> (bool, Vec<TraceEntry>) {
    let mfg = tool.mfg_types.contains(&config.mfg_type);
    let mode = tool.modes.contains(&config.mode);
    let tmc = tool.tmcs.iter().any(|t| config.allowed_tmcs.contains(t));
    let list = |v: Vec<&str>| v.join(", ");
    let trace = vec![
        TraceEntry {
            stage: Stage::Manufacturing,
            check: format!("tool.mfg_types = {}", config.mfg_type),
            passed: mfg,
            detail: format!("tool.mfg_types=[{}]", list(tool.mfg_types.iter().map(|m| m.as_str()).collect())),
        },
        TraceEntry {
            stage: Stage::Manufacturing,
            check: format!("tool.modes = {}", config.mode),
            passed: mode,
            detail: format!("tool.modes=[{}]", list(tool.modes.iter().map(|m| m.as_str()).collect())),
        },
        TraceEntry {
            stage: Stage::Manufacturing,
            check: format!("tool.tmcs contains any of {{{}}}", config.allowed_tmcs.join(", ")),
            passed: tmc,
            detail: format!("tool.tmcs=[{}]", tool.tmcs.join(", ")),
        },
    ];
    (mfg && mode && tmc, trace)
}

/// The tool supports the configuration's manufacturing type and mode and
/// shares a TMC with it. On success the configuration's priority is returned.
pub fn manufacturing_compliance(tool: &CuttingSet, config: &ExtendedCuttingConditions) -> Option<Priority> {
    manufacturing_trace(tool, config).0.then_some(config.priority)
}

/// Feasible interval of one parameter: tool range intersected with the TMC
/// constraint, if the TMC constrains it.
pub fn feasible_interval(tool: &CuttingSet, tmc: Option<&Tmc>, p: CuttingParam) -> Option<Interval> {
    let own = tool.conditions.get(p);
    match tmc.and_then(|t| t.constraints.get(&p)) {
        Some(c) => own.intersect(c),
        None => Some(own),
    }
}

/// Chooses the TMC for condition calculus among the couples allowed by the
/// configuration and the tool: fully feasible couples first, then the larger
/// feed-rate upper bound, then the smaller id.
pub fn choose_tmc<'a>(
    tool: &CuttingSet,
    config: &ExtendedCuttingConditions,
    db: &'a OseDatabase,
) -> (Option<&'a Tmc>, Option<f64>) {
    let mut best: Option<(&Tmc, bool, Option<f64>)> = None;
    let mut ids: Vec<&String> = config.allowed_tmcs.iter().filter(|t| tool.tmcs.contains(t)).collect();
    ids.sort();
    for id in ids {
        let Some(tmc) = db.tmc(id) else { continue };
        let feasible = CuttingParam::ALL
            .iter()
            .all(|p| feasible_interval(tool, Some(tmc), *p).is_some());
        let feed = feasible_interval(tool, Some(tmc), CuttingParam::FeedRate).map(|i| i.max);
        let better = match best {
            None => true,
            Some((_, bf, bfeed)) => (feasible, feed.unwrap_or(f64::NEG_INFINITY)) > (bf, bfeed.unwrap_or(f64::NEG_INFINITY)),
        };
        if better {
            best = Some((tmc, feasible, feed));
        }
    }
    match best {
        Some((t, _, feed)) => (Some(t), feed),
        None => (None, feasible_interval(tool, None, CuttingParam::FeedRate).map(|i| i.max)),
    }
}

/// Deterministic ranking: Qmax before Default, larger feasible feed-rate
/// bound, smaller diameter, then tool id and OSE id.
pub fn rank_order(a: &Candidate, b: &Candidate) -> Ordering {
    let prio = |c: &Candidate| match c.priority {
        Priority::Qmax => 0,
        Priority::Default => 1,
    };
    let feed = |c: &Candidate| c.feed_rate_bound.unwrap_or(f64::NEG_INFINITY);
    prio(a)
        .cmp(&prio(b))
        .then(feed(b).total_cmp(&feed(a)))
        .then(a.diameter.total_cmp(&b.diameter))
        .then_with(|| a.cutting_set.cmp(&b.cutting_set))
        .then_with(|| a.ose.cmp(&b.ose))
}

/// Tool membership per cutting-set type, computed once per tool list.
pub struct ToolIndex<'a> {
    members: HashMap<&'a str, Vec<&'a CuttingSet>>,
}

impl<'a> ToolIndex<'a> {
    pub fn new(db: &'a OseDatabase, tools: &'a [CuttingSet]) -> Self {
        let mut members: HashMap<&str, Vec<&CuttingSet>> = HashMap::new();
        for tool in tools {
            for ty in classify_tool(tool, db) {
                let key = db.cutting_set_type(&ty).expect("classified type exists").id.as_str();
                members.entry(key).or_default().push(tool);
            }
        }
        ToolIndex { members }
    }

    pub fn members(&self, type_id: &str) -> &[&'a CuttingSet] {
        self.members.get(type_id).map_or(&[], Vec::as_slice)
    }
}

/// Ranked candidates of one face. An empty list means no capable process.
pub fn match_face(attrs: &FaceAttributes, db: &OseDatabase, tools: &[CuttingSet]) -> Vec<Candidate> {
    match_face_indexed(attrs, db, &ToolIndex::new(db, tools))
}

pub fn match_face_indexed(attrs: &FaceAttributes, db: &OseDatabase, index: &ToolIndex) -> Vec<Candidate> {
    let mut out = Vec::new();
    for ose in &db.oses {
        let (Some(family), Some(config)) = (db.family(&ose.family), db.config(&ose.config)) else {
            continue;
        };
        let Ok((true, fam_trace)) = family_trace(attrs, family) else {
            continue;
        };
        for tool in index.members(&ose.cutting_set_type) {
            let Ok((true, geo_trace)) = geometric_trace(attrs, tool, ose, Some(config)) else {
                continue;
            };
            let (true, mfg_trace) = manufacturing_trace(tool, config) else {
                continue;
            };
            let (tmc, feed) = choose_tmc(tool, config, db);
            let mut trace = fam_trace.clone();
            trace.extend(geo_trace);
            trace.extend(mfg_trace);
            out.push(Candidate {
                id: format!("{}/{}", ose.id, tool.id),
                face: attrs.face.clone(),
                ose: ose.id.clone(),
                cutting_set: tool.id.clone(),
                config: config.id.clone(),
                priority: config.priority,
                tmc: tmc.map(|t| t.id.clone()),
                feed_rate_bound: feed,
                diameter: tool.diameter,
                rank: 0,
                selected: false,
                origin: Origin::Default,
                trace,
                custom: None,
                warnings: vec![],
            });
        }
    }
    out.sort_by(rank_order);
    for (k, c) in out.iter_mut().enumerate() {
        c.rank = k + 1;
    }
    out
}

/// Candidates of every face, keyed by face id.
pub fn match_all(faces: &[FaceAttributes], db: &OseDatabase, tools: &[CuttingSet]) -> BTreeMap<String, Vec<Candidate>> {
    let index = ToolIndex::new(db, tools);
    faces
        .par_iter()
        .map(|f| (f.face.clone(), match_face_indexed(f, db, &index)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Expert selection request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "level")]
pub enum Selection {
    /// Level 1: the best-ranked candidate.
    #[serde(rename = "1")]
    Default,
    /// Level 2: any listed alternative.
    #[serde(rename = "2")]
    Choose { candidate: String },
    /// Level 3: an expert-tailored configuration.
    #[serde(rename = "3")]
    Custom(CustomConfig),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectError {
    #[error("face has no candidates")]
    NoCandidates,
    #[error("no such alternative: {0}")]
    NoSuchAlternative(String),
    #[error("invalid custom configuration: {0}")]
    InvalidCustom(String),
    #[error("infeasible conditions for {candidate}: empty range for {params}")]
    Infeasible { candidate: String, params: String },
}

fn mark_selected(cands: &mut [Candidate], idx: usize, origin: Origin) {
    for (k, c) in cands.iter_mut().enumerate() {
        c.selected = k == idx;
        if c.origin != Origin::ExpertCustom {
            c.origin = if k == idx { origin } else { Origin::Default };
        }
    }
}

/// Parameters whose feasible interval is empty for this candidate.
pub fn infeasible_params(c: &Candidate, db: &OseDatabase, tools: &[CuttingSet]) -> Vec<CuttingParam> {
    let Some(tool) = tools.iter().find(|t| t.id == c.cutting_set) else {
        return CuttingParam::ALL.to_vec();
    };
    let tmc = c.tmc.as_deref().and_then(|t| db.tmc(t));
    CuttingParam::ALL
        .into_iter()
        .filter(|p| feasible_interval(tool, tmc, *p).is_none())
        .collect()
}

/// Builds the level-3 candidate. Range violations become warnings, structural
/// problems are errors.
pub fn custom_candidate(
    face: &str,
    custom: &CustomConfig,
    existing: &[Candidate],
    db: &OseDatabase,
    tools: &[CuttingSet],
) -> Result<Candidate, SelectError> {
    let invalid = |m: String| SelectError::InvalidCustom(m);
    let ose = db.ose(&custom.ose).ok_or_else(|| invalid(format!("unknown OSE {}", custom.ose)))?;
    let config = db
        .config(&ose.config)
        .ok_or_else(|| invalid(format!("OSE {} has no configuration", ose.id)))?;
    let tool = tools
        .iter()
        .find(|t| t.id == custom.cutting_set)
        .ok_or_else(|| invalid(format!("unknown cutting set {}", custom.cutting_set)))?;
    let tmc = match &custom.tmc {
        Some(id) => Some(db.tmc(id).ok_or_else(|| invalid(format!("unknown TMC {id}")))?),
        None => choose_tmc(tool, config, db).0,
    };
    let mut warnings = Vec::new();
    if !existing.iter().any(|c| c.ose == ose.id && c.cutting_set == tool.id) {
        warnings.push(format!("{}/{} is not a matched candidate for {face}", ose.id, tool.id));
    }
    for p in CuttingParam::ALL {
        let interval = feasible_interval(tool, tmc, p);
        match (custom.conditions.get(&p), interval) {
            (Some(v), _) if !v.is_finite() || *v <= 0.0 => {
                return Err(invalid(format!("{p} must be a positive number, found {v}")))
            }
            (Some(v), Some(i)) if !i.contains(*v) => {
                warnings.push(format!("{p} {v} {} outside feasible range {i}", p.unit()))
            }
            (Some(v), None) => warnings.push(format!("{p} {v} {} set although no feasible range exists", p.unit())),
            (None, None) => return Err(invalid(format!("{p} has no feasible range and no value was given"))),
            _ => {}
        }
    }
    let n = existing.iter().filter(|c| c.origin == Origin::ExpertCustom).count() + 1;
    let base = existing.iter().find(|c| c.ose == ose.id && c.cutting_set == tool.id);
    Ok(Candidate {
        id: format!("{}/{}/custom-{n}", ose.id, tool.id),
        face: face.to_string(),
        ose: ose.id.clone(),
        cutting_set: tool.id.clone(),
        config: config.id.clone(),
        priority: config.priority,
        tmc: tmc.map(|t| t.id.clone()),
        feed_rate_bound: feasible_interval(tool, tmc, CuttingParam::FeedRate).map(|i| i.max),
        diameter: tool.diameter,
        rank: existing.len() + 1,
        selected: false,
        origin: Origin::ExpertCustom,
        trace: base.map(|b| b.trace.clone()).unwrap_or_default(),
        custom: Some(custom.clone()),
        warnings,
    })
}

/// Applies a selection to one face's candidate list and returns the id of the
/// selected candidate. Alternatives are never removed; a custom candidate is
/// appended with the next rank.
pub fn select_candidate(
    cands: &mut Vec<Candidate>,
    face: &str,
    selection: &Selection,
    db: &OseDatabase,
    tools: &[CuttingSet],
) -> Result<String, SelectError> {
    match selection {
        Selection::Default => {
            let idx = cands
                .iter()
                .position(|c| c.rank == 1)
                .ok_or(SelectError::NoCandidates)?;
            mark_selected(cands, idx, Origin::Default);
            Ok(cands[idx].id.clone())
        }
        Selection::Choose { candidate } => {
            let idx = cands
                .iter()
                .position(|c| &c.id == candidate)
                .ok_or_else(|| SelectError::NoSuchAlternative(candidate.clone()))?;
            if cands[idx].origin != Origin::ExpertCustom {
                let bad = infeasible_params(&cands[idx], db, tools);
                if !bad.is_empty() {
                    return Err(SelectError::Infeasible {
                        candidate: candidate.clone(),
                        params: bad.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(", "),
                    });
                }
            }
            mark_selected(cands, idx, Origin::ExpertChoice);
            Ok(cands[idx].id.clone())
        }
        Selection::Custom(custom) => {
            let cand = custom_candidate(face, custom, cands, db, tools)?;
            let id = cand.id.clone();
            cands.push(cand);
            let idx = cands.len() - 1;
            mark_selected(cands, idx, Origin::ExpertCustom);
            Ok(id)
        }
    }
}

/// Selected candidate of a list, if any.
pub fn selected(cands: &[Candidate]) -> Option<&Candidate> {
    cands.iter().find(|c| c.selected)
}

/// Carries a previous selection over to freshly matched candidates. Expert
/// choices survive while their candidate still exists, custom candidates
/// survive while their base pair is still matched; otherwise the face falls
/// back to the default with a notice.
pub fn reconcile(previous: &[Candidate], mut fresh: Vec<Candidate>) -> (Vec<Candidate>, Option<String>) {
    let customs: Vec<Candidate> = previous
        .iter()
        .filter(|c| c.origin == Origin::ExpertCustom)
        .filter(|c| fresh.iter().any(|f| f.ose == c.ose && f.cutting_set == c.cutting_set))
        .cloned()
        .collect();
    let start = fresh.len();
    for (k, mut c) in customs.into_iter().enumerate() {
        c.rank = start + k + 1;
        c.selected = false;
        fresh.push(c);
    }
    let Some(prev) = selected(previous) else {
        return (fresh, None);
    };
    if prev.origin != Origin::Default {
        if let Some(idx) = fresh.iter().position(|c| c.id == prev.id) {
            mark_selected(&mut fresh, idx, prev.origin);
            return (fresh, None);
        }
    }
    let notice = (prev.origin != Origin::Default)
        .then(|| format!("selection {} no longer exists; reverted to the default", prev.id));
    if let Some(idx) = fresh.iter().position(|c| c.rank == 1) {
        mark_selected(&mut fresh, idx, Origin::Default);
    }
    (fresh, notice)
}

//! Structural validation of a database and of a tool list.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::check::{Check, Namespace};
use super::model::{CuttingSet, Interval, OseDatabase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    DuplicateId,
    DanglingReference,
    InvertedInterval,
    IllTypedCheck,
    EmptyCapability,
    EmptyChecks,
    InvalidValue,
}

/// One validation problem. `path` locates the offending field, for example
/// `oses[O_END].family`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub path: String,
    pub message: String,
}

impl Finding {
    fn new(kind: FindingKind, path: String, message: impl Into<String>) -> Self {
        Finding {
            kind,
            path,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn duplicates<'a>(out: &mut Vec<Finding>, collection: &str, ids: impl Iterator<Item = &'a str>) {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            out.push(Finding::new(
                FindingKind::DuplicateId,
                format!("{collection}[{id}]"),
                format!("id {id} is used more than once"),
            ));
        }
    }
}

fn interval(out: &mut Vec<Finding>, path: String, i: &Interval) {
    if !i.is_valid() {
        out.push(Finding::new(
            FindingKind::InvertedInterval,
            path,
            format!("interval {i} is empty, inverted or not finite"),
        ));
    }
}

fn checks(out: &mut Vec<Finding>, path: &str, checks: &[Check], face_only: bool) {
    for (k, c) in checks.iter().enumerate() {
        let p = format!("{path}[{k}]");
        if let Err(e) = c.type_check() {
            out.push(Finding::new(FindingKind::IllTypedCheck, p, e));
        } else if face_only && c.attributes().iter().any(|a| a.namespace != Namespace::Face) {
            out.push(Finding::new(
                FindingKind::IllTypedCheck,
                p,
                format!("family check {c} may only read face attributes"),
            ));
        }
    }
}

fn tmc_refs(out: &mut Vec<Finding>, db: &OseDatabase, path: &str, tmcs: &[String]) {
    for t in tmcs {
        if db.tmc(t).is_none() {
            out.push(Finding::new(
                FindingKind::DanglingReference,
                path.to_string(),
                format!("TMC {t} does not exist"),
            ));
        }
    }
}

fn non_empty(out: &mut Vec<Finding>, path: String, len: usize) {
    if len == 0 {
        out.push(Finding::new(FindingKind::EmptyCapability, path, "list must not be empty"));
    }
}

/// Every structural problem of `db`: duplicate ids, dangling references,
/// invalid intervals, ill-typed checks and empty capability lists. An empty
/// result means the database is valid.
pub fn validate_db(db: &OseDatabase) -> Vec<Finding> {
    let mut out = Vec::new();
    duplicates(&mut out, "families", db.families.iter().map(|x| x.id.as_str()));
    duplicates(&mut out, "configs", db.configs.iter().map(|x| x.id.as_str()));
    duplicates(&mut out, "cutting_set_types", db.cutting_set_types.iter().map(|x| x.id.as_str()));
    duplicates(&mut out, "tmcs", db.tmcs.iter().map(|x| x.id.as_str()));
    duplicates(&mut out, "oses", db.oses.iter().map(|x| x.id.as_str()));

    for f in &db.families {
        checks(&mut out, &format!("families[{}].checks", f.id), &f.checks, true);
    }
    for t in &db.tmcs {
        for (p, i) in &t.constraints {
            interval(&mut out, format!("tmcs[{}].constraints.{p}", t.id), i);
        }
    }
    for c in &db.configs {
        let path = format!("configs[{}].allowed_tmcs", c.id);
        non_empty(&mut out, path.clone(), c.allowed_tmcs.len());
        tmc_refs(&mut out, db, &path, &c.allowed_tmcs);
    }
    for t in &db.cutting_set_types {
        let base = format!("cutting_set_types[{}]", t.id);
        for (name, i) in t.dimensions.named() {
            interval(&mut out, format!("{base}.dimensions.{name}"), &i);
        }
        for p in super::model::CuttingParam::ALL {
            interval(&mut out, format!("{base}.conditions.{p}"), &t.conditions.get(p));
        }
        non_empty(&mut out, format!("{base}.mfg_types"), t.mfg_types.len());
        non_empty(&mut out, format!("{base}.modes"), t.modes.len());
        non_empty(&mut out, format!("{base}.tmcs"), t.tmcs.len());
        tmc_refs(&mut out, db, &format!("{base}.tmcs"), &t.tmcs);
    }
    for o in &db.oses {
        let base = format!("oses[{}]", o.id);
        let refs = [
            ("family", &o.family, db.family(&o.family).is_some()),
            ("config", &o.config, db.config(&o.config).is_some()),
            (
                "cutting_set_type",
                &o.cutting_set_type,
                db.cutting_set_type(&o.cutting_set_type).is_some(),
            ),
        ];
        for (field, id, ok) in refs {
            if !ok {
                out.push(Finding::new(
                    FindingKind::DanglingReference,
                    format!("{base}.{field}"),
                    format!("{field} {id} does not exist"),
                ));
            }
        }
        if o.compliance_checks.is_empty() {
            out.push(Finding::new(
                FindingKind::EmptyChecks,
                format!("{base}.compliance_checks"),
                "an OSE needs at least one compliance check",
            ));
        }
        checks(&mut out, &format!("{base}.compliance_checks"), &o.compliance_checks, false);
    }
    out.sort();
    out
}

/// Field-level problems of a tool list: non-positive or non-finite scalars,
/// cutting length above tool length, invalid ranges, empty capability lists,
/// duplicate ids.
pub fn validate_tools(tools: &[CuttingSet]) -> Vec<Finding> {
    let mut out = Vec::new();
    duplicates(&mut out, "tools", tools.iter().map(|t| t.id.as_str()));
    for (k, t) in tools.iter().enumerate() {
        let base = format!("tools[{k}]");
        for (name, x) in t.named_dimensions() {
            let ok = x.is_finite() && if name == "end_radius" { x >= 0.0 } else { x > 0.0 };
            if !ok {
                out.push(Finding::new(
                    FindingKind::InvalidValue,
                    format!("{base}.{name}"),
                    format!("{name} of tool {} must be positive, found {x}", t.id),
                ));
            }
        }
        if t.cutting_length > t.tool_length {
            out.push(Finding::new(
                FindingKind::InvalidValue,
                format!("{base}.cutting_length"),
                format!("cutting length {} exceeds tool length {}", t.cutting_length, t.tool_length),
            ));
        }
        for p in super::model::CuttingParam::ALL {
            interval(&mut out, format!("{base}.conditions.{p}"), &t.conditions.get(p));
        }
        non_empty(&mut out, format!("{base}.mfg_types"), t.mfg_types.len());
        non_empty(&mut out, format!("{base}.modes"), t.modes.len());
        non_empty(&mut out, format!("{base}.tmcs"), t.tmcs.len());
    }
    out
}

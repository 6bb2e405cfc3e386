//! Automation phase: resolving cutting conditions, synthesis statistics and
//! the plan document.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::matching::{feasible_interval, Candidate};
use crate::ose::{CuttingParam, CuttingSet, Interval, Priority, Tmc};
use crate::setup::ProcessPlan;
use crate::transform::GeometryType;

/// Numeric value per cutting parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionValues {
    pub cutting_speed: f64,
    pub feed_per_tooth: f64,
    pub advance_x: f64,
    pub advance_z: f64,
    pub feed_rate: f64,
}

impl ConditionValues {
    pub fn get(&self, p: CuttingParam) -> f64 {
        match p {
            CuttingParam::CuttingSpeed => self.cutting_speed,
            CuttingParam::FeedPerTooth => self.feed_per_tooth,
            CuttingParam::AdvanceX => self.advance_x,
            CuttingParam::AdvanceZ => self.advance_z,
            CuttingParam::FeedRate => self.feed_rate,
        }
    }

    fn set(&mut self, p: CuttingParam, v: f64) {
        match p {
            CuttingParam::CuttingSpeed => self.cutting_speed = v,
            CuttingParam::FeedPerTooth => self.feed_per_tooth = v,
            CuttingParam::AdvanceX => self.advance_x = v,
            CuttingParam::AdvanceZ => self.advance_z = v,
            CuttingParam::FeedRate => self.feed_rate = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConditions {
    pub values: ConditionValues,
    /// Tool range intersected with the TMC constraint, per parameter. Missing
    /// only for expert values set where no feasible range exists.
    pub intervals: BTreeMap<CuttingParam, Interval>,
    pub priority: Priority,
    pub tmc: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConditionError {
    #[error("infeasible conditions: empty feasible range for {0}")]
    Infeasible(CuttingParam),
}

/// Resolves every cutting parameter on its feasible interval (tool range
/// intersected with the TMC constraint): the maximum under Qmax, the midpoint
/// otherwise. Values set by an expert override the calculus; values outside
/// the interval are kept and flagged.
pub fn optimize_conditions(
    candidate: &Candidate,
    tool: &CuttingSet,
    tmc: Option<&Tmc>,
) -> Result<ResolvedConditions, ConditionError> {
    let mut values = ConditionValues {
        cutting_speed: 0.0,
        feed_per_tooth: 0.0,
        advance_x: 0.0,
        advance_z: 0.0,
        feed_rate: 0.0,
    };
    let mut intervals = BTreeMap::new();
    let mut warnings = candidate.warnings.clone();
    let custom = candidate.custom.as_ref().map(|c| &c.conditions);
    for p in CuttingParam::ALL {
        let interval = feasible_interval(tool, tmc, p);
        let expert = custom.and_then(|c| c.get(&p)).copied();
        let v = match (expert, interval) {
            (Some(v), _) => v,
            (None, Some(i)) => match candidate.priority {
                Priority::Qmax => i.max,
                Priority::Default => i.midpoint(),
            },
            (None, None) => return Err(ConditionError::Infeasible(p)),
        };
        if let Some(i) = interval {
            intervals.insert(p, i);
        }
        values.set(p, v);
    }
    warnings.dedup();
    Ok(ResolvedConditions {
        values,
        intervals,
        priority: candidate.priority,
        tmc: tmc.map(|t| t.id.clone()),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRow {
    pub geometry_type: GeometryType,
    pub count: usize,
    /// Percentage of the total, rounded half-up to two decimals.
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisTable {
    pub rows: Vec<SynthesisRow>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("empty population")]
    EmptyPopulation,
    #[error("counts sum to {sum} but the total is {total}")]
    TotalMismatch { sum: usize, total: usize },
}

/// `100 * count / total` rounded half-up to two decimals, computed exactly in
/// integers.
pub fn percentage(count: usize, total: usize) -> f64 {
    let (c, t) = (count as u128, total as u128);
    let hundredths = (c * 10_000 * 2 + t) / (2 * t);
    hundredths as f64 / 100.0
}

/// One row per geometry type, in type order; types missing from `counts`
/// count zero.
pub fn report_statistics(counts: &BTreeMap<GeometryType, usize>, total: usize) -> Result<SynthesisTable, StatsError> {
    if total == 0 {
        return Err(StatsError::EmptyPopulation);
    }
    let sum: usize = counts.values().sum();
    if sum != total {
        return Err(StatsError::TotalMismatch { sum, total });
    }
    Ok(SynthesisTable {
        rows: GeometryType::ALL
            .iter()
            .map(|t| {
                let count = counts.get(t).copied().unwrap_or(0);
                SynthesisRow {
                    geometry_type: *t,
                    count,
                    percentage: percentage(count, total),
                }
            })
            .collect(),
        total,
    })
}

/// The plan document: JSON (a serialised [`ProcessPlan`]) and a text
/// rendering of the same content.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanDocument {
    pub json: String,
    pub text: String,
}

pub fn generate_documentation(plan: &ProcessPlan) -> PlanDocument {
    PlanDocument {
        json: plan_json(plan),
        text: render_text(plan),
    }
}

pub fn plan_json(plan: &ProcessPlan) -> String {
    let mut s = serde_json::to_string_pretty(plan).expect("plan serialises");
    s.push('\n');
    s
}

pub fn parse_plan(json: &str) -> Result<ProcessPlan, serde_json::Error> {
    serde_json::from_str(json)
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e4).round() / 1e4;
    if r == r.trunc() {
        format!("{r:.0}")
    } else {
        format!("{r}")
    }
}

fn fmt_dir(d: &crate::geometry::Vec3) -> String {
    format!("({}, {}, {})", fmt_num(d.x), fmt_num(d.y), fmt_num(d.z))
}

/// Human-readable rendering with the same setups, sequences, faces and
/// exceptions as the JSON.
pub fn render_text(plan: &ProcessPlan) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "PROCESS PLAN {}", plan.part);
    if let Some(t) = &plan.synthesis {
        let _ = writeln!(w, "\nSYNTHESIS ({} faces)", t.total);
        for r in &t.rows {
            let _ = writeln!(w, "  {:<18} {:>5} {:>7.2}%", r.geometry_type.as_str(), r.count, r.percentage);
        }
    }
    for s in &plan.setups {
        let _ = writeln!(w, "\nSETUP {} direction {}", s.id, fmt_dir(&s.direction));
        let _ = writeln!(w, "  faces: {}", s.faces.join(", "));
        for q in &s.sequences {
            let _ = writeln!(w, "\n  SEQUENCE {} [{}]", q.id, q.mode);
            let _ = writeln!(w, "    faces: {}", q.faces.join(", "));
            let _ = writeln!(w, "    ose: {}  config: {}  cutting set: {}", q.ose, q.config, q.cutting_set);
            let mfg = q.mfg_type.map_or("-", |m| m.as_str());
            let strat = q.trajectory_strategy.map_or("-", |t| t.as_str());
            let _ = writeln!(w, "    manufacturing: {mfg}  trajectory: {strat}");
            if let Some(c) = &q.conditions {
                let _ = writeln!(
                    w,
                    "    conditions ({}, TMC {}):",
                    c.priority,
                    c.tmc.as_deref().unwrap_or("-")
                );
                for p in CuttingParam::ALL {
                    let range = c
                        .intervals
                        .get(&p)
                        .map_or("no feasible range".to_string(), |i| format!("range [{}, {}]", fmt_num(i.min), fmt_num(i.max)));
                    let _ = writeln!(w, "      {:<15} {:>10} {:<7} {range}", p.as_str(), fmt_num(c.values.get(p)), p.unit());
                }
                for warn in &c.warnings {
                    let _ = writeln!(w, "      WARNING {warn}");
                }
            }
            for j in &q.justification {
                let _ = writeln!(w, "    justification {} (candidate {}, rank {}, {:?}):", j.face, j.candidate, j.rank, j.origin);
                for t in &j.trace {
                    let mark = if t.passed { "ok" } else { "FAIL" };
                    let _ = writeln!(w, "      [{mark}] {}  ({})", t.check, t.detail);
                }
            }
        }
    }
    if !plan.tensions.is_empty() {
        let _ = writeln!(w, "\nDIRECTION/CANDIDATE TENSION");
        for t in &plan.tensions {
            let _ = writeln!(
                w,
                "  {} in {}: setup {} vs matched {}",
                t.face,
                t.setup,
                fmt_dir(&t.setup_direction),
                fmt_dir(&t.matched_direction)
            );
        }
    }
    if !plan.notices.is_empty() {
        let _ = writeln!(w, "\nNOTICES");
        for n in &plan.notices {
            let _ = writeln!(w, "  {n}");
        }
    }
    let _ = writeln!(w, "\nUNMATCHED FACES: {}", list_or_none(&plan.unmatched));
    let _ = writeln!(w, "INACCESSIBLE FACES: {}", list_or_none(&plan.inaccessible));
    out
}

fn list_or_none(v: &[String]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.join(", ")
    }
}

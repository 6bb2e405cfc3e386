//! Exhaustive enumeration of (OSE, cutting set) pairs that re-derives every
//! acceptance rule directly from the data.

use std::cmp::Ordering;

use ose_planner::ose::{eval_check, Bindings, CuttingParam, CuttingSet, CuttingSetType, OseDatabase, Priority};
use ose_planner::transform::FaceAttributes;

fn in_range(x: f64, r: [f64; 2]) -> bool {
    r[0] <= x && x <= r[1]
}

fn in_type(t: &CuttingSet, ty: &CuttingSetType) -> bool {
    let d = &ty.dimensions;
    in_range(t.diameter, d.diameter.into())
        && in_range(t.cutting_length, d.cutting_length.into())
        && in_range(t.tool_length, d.tool_length.into())
        && in_range(t.end_radius, d.end_radius.into())
        && t.cutting_material == ty.cutting_material
        && t.mfg_types.iter().any(|m| ty.mfg_types.contains(m))
        && t.modes.iter().any(|m| ty.modes.contains(m))
        && t.tmcs.iter().any(|m| ty.tmcs.contains(m))
}

/// Largest feed-rate bound over the usable TMCs, preferring couples under
/// which every parameter range is non-empty.
fn feed_bound(t: &CuttingSet, allowed: &[String], db: &OseDatabase) -> Option<f64> {
    let own = |p: CuttingParam| -> [f64; 2] { t.conditions.get(p).into() };
    let mut best: Option<(bool, f64)> = None;
    let mut any = false;
    for id in allowed.iter().filter(|id| t.tmcs.contains(id)) {
        let Some(tmc) = db.tmc(id) else { continue };
        any = true;
        let range = |p: CuttingParam| {
            let [a, b] = own(p);
            match tmc.constraints.get(&p) {
                Some(c) => [a.max(c.min), b.min(c.max)],
                None => [a, b],
            }
        };
        let feasible = CuttingParam::ALL.iter().all(|p| {
            let [a, b] = range(*p);
            a <= b
        });
        let [a, b] = range(CuttingParam::FeedRate);
        let feed = if a <= b { b } else { f64::NEG_INFINITY };
        if best.is_none_or(|(bf, bfeed)| (feasible, feed) > (bf, bfeed)) {
            best = Some((feasible, feed));
        }
    }
    if !any {
        return Some(own(CuttingParam::FeedRate)[1]);
    }
    best.map(|(_, f)| f).filter(|f| f.is_finite())
}

#[derive(Debug, PartialEq)]
struct Row {
    ose: String,
    tool: String,
    priority: Priority,
    feed: Option<f64>,
    diameter: f64,
}

pub fn brute_force(face: &FaceAttributes, db: &OseDatabase, tools: &[CuttingSet]) -> Vec<(String, String)> {
    let mut rows = Vec::new();
    for ose in &db.oses {
        let family = db.family(&ose.family).unwrap();
        let config = db.config(&ose.config).unwrap();
        let ty = db.cutting_set_type(&ose.cutting_set_type).unwrap();
        for t in tools {
            let b = Bindings {
                face,
                tool: Some(t),
                config: Some(config),
            };
            let accepted = face.geometry_type == family.required_type
                && family.checks.iter().all(|c| eval_check(c, &b).unwrap())
                && in_type(t, ty)
                && ose.compliance_checks.iter().all(|c| eval_check(c, &b).unwrap())
                && t.tool_length >= face.global_accessibility + face.axial_extent
                && t.mfg_types.contains(&config.mfg_type)
                && t.modes.contains(&config.mode)
                && t.tmcs.iter().any(|x| config.allowed_tmcs.contains(x));
            if accepted {
                rows.push(Row {
                    ose: ose.id.clone(),
                    tool: t.id.clone(),
                    priority: config.priority,
                    feed: feed_bound(t, &config.allowed_tmcs, db),
                    diameter: t.diameter,
                });
            }
        }
    }
    let prio = |r: &Row| (r.priority != Priority::Qmax) as u8;
    rows.sort_by(|a, b| {
        prio(a)
            .cmp(&prio(b))
            .then(
                b.feed
                    .unwrap_or(f64::NEG_INFINITY)
                    .partial_cmp(&a.feed.unwrap_or(f64::NEG_INFINITY))
                    .unwrap_or(Ordering::Equal),
            )
            .then(a.diameter.partial_cmp(&b.diameter).unwrap())
            .then(a.tool.cmp(&b.tool))
            .then(a.ose.cmp(&b.ose))
    });
    rows.into_iter().map(|r| (r.ose, r.tool)).collect()
}


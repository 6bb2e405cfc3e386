//! Database audit: shadowed, unsatisfiable and duplicated OSEs.
//!
//! An OSE accepts a point of the face/tool attribute space when the point has
//! the family's geometry type, passes the family and compliance checks, lies
//! in the cutting-set type's ranges and meets the configuration's
//! manufacturing requirements. Checks are threshold comparisons, so the
//! acceptance region is a union of cells bounded by the database's constants
//! and a finite grid through those cells decides emptiness and equality.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::check::{
    eval_check, AttrKind, AttributeRef, AttributeSource, Check, Domain, Literal, Namespace, Op, Rhs, Value,
    VOCABULARY,
};
use super::model::{ExtendedCuttingConditions, Ose, OseDatabase};
use crate::ose::check::config_value;

/// Finite set of candidate values for every face and tool attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditGrid {
    pub values: BTreeMap<AttributeRef, Vec<Value>>,
}

const MAX_OPEN_SUBSET_SYMBOLS: usize = 10;

fn numeric_constants(db: &OseDatabase) -> Vec<f64> {
    let mut cs = Vec::new();
    let mut from_checks = |checks: &[Check]| {
        for c in checks {
            if let Rhs::Value(Literal::Number(x)) = c.rhs {
                cs.push(x);
            }
        }
    };
    for f in &db.families {
        from_checks(&f.checks);
    }
    for o in &db.oses {
        from_checks(&o.compliance_checks);
    }
    for t in &db.cutting_set_types {
        for (_, i) in t.dimensions.named() {
            cs.push(i.min);
            cs.push(i.max);
        }
    }
    cs.retain(|x| x.is_finite());
    cs
}

/// Breakpoints for one numeric axis: every constant, its double and half (the
/// derived `tool.radius` is half the diameter), then points a third and two
/// thirds into each gap, and one point beyond each end.
fn numeric_axis(constants: &[f64]) -> Vec<f64> {
    let mut bp: Vec<f64> = constants
        .iter()
        .flat_map(|&c| [c, 2.0 * c, 0.5 * c])
        .chain([0.0])
        .collect();
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let mut out = Vec::with_capacity(3 * bp.len() + 2);
    out.push(bp[0] - 1.0);
    for w in bp.windows(2) {
        out.push(w[0]);
        out.push(w[0] + (w[1] - w[0]) / 3.0);
        out.push(w[0] + 2.0 * (w[1] - w[0]) / 3.0);
    }
    let last = *bp.last().unwrap();
    out.push(last);
    out.push(if last > 0.0 { 2.0 * last + 1.0 } else { last + 1.0 });
    out
}

fn subsets(symbols: &[String]) -> Vec<Value> {
    if symbols.len() > MAX_OPEN_SUBSET_SYMBOLS {
        let mut out = vec![Value::List(vec![]), Value::List(symbols.to_vec())];
        out.extend(symbols.iter().map(|s| Value::List(vec![s.clone()])));
        return out;
    }
    (0u32..1 << symbols.len())
        .map(|mask| {
            Value::List(
                symbols
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, s)| s.clone())
                    .collect(),
            )
        })
        .collect()
}

fn open_symbols(db: &OseDatabase, attr: &str) -> Vec<String> {
    let mut s: BTreeSet<String> = BTreeSet::new();
    match attr {
        "cutting_material" => {
            s.extend(db.cutting_set_types.iter().map(|t| t.cutting_material.clone()));
            s.extend(db.tmcs.iter().map(|t| t.cutting_material.clone()));
            s.insert("__other__".into());
        }
        _ => {
            s.extend(db.tmcs.iter().map(|t| t.id.clone()));
            s.extend(db.configs.iter().flat_map(|c| c.allowed_tmcs.iter().cloned()));
            s.extend(db.cutting_set_types.iter().flat_map(|t| t.tmcs.iter().cloned()));
        }
    }
    let mut with_checks = |checks: &[Check]| {
        for c in checks {
            if c.lhs.name != attr {
                continue;
            }
            match &c.rhs {
                Rhs::Value(Literal::Text(t)) => {
                    s.insert(t.clone());
                }
                Rhs::AnyOf(v) | Rhs::AllOf(v) => s.extend(v.iter().cloned()),
                _ => {}
            }
        }
    };
    for o in &db.oses {
        with_checks(&o.compliance_checks);
    }
    s.into_iter().collect()
}

impl AuditGrid {
    /// The default grid for `db`.
    pub fn for_database(db: &OseDatabase) -> Self {
        let axis = numeric_axis(&numeric_constants(db));
        let mut values = BTreeMap::new();
        for spec in VOCABULARY {
            if spec.namespace == Namespace::Config || (spec.namespace, spec.name) == (Namespace::Tool, "radius") {
                continue;
            }
            let attr = AttributeRef::new(spec.namespace, spec.name);
            let vals: Vec<Value> = match (spec.kind, spec.domain) {
                (AttrKind::Number, _) => {
                    let mut v: Vec<f64> = axis.iter().copied().filter(|x| *x >= 0.0).collect();
                    if spec.name == "min_fillet_radius" {
                        v.retain(|x| *x > 0.0);
                        v.push(f64::INFINITY);
                    }
                    v.into_iter().map(Value::Number).collect()
                }
                (AttrKind::Boolean, _) => vec![Value::Boolean(false), Value::Boolean(true)],
                (AttrKind::Symbol, Domain::Closed(d)) => d.iter().map(|s| Value::Symbol(s.to_string())).collect(),
                (AttrKind::Symbol, _) => open_symbols(db, spec.name).into_iter().map(Value::Symbol).collect(),
                (AttrKind::List, Domain::Closed(d)) => {
                    subsets(&d.iter().map(|s| s.to_string()).collect::<Vec<_>>())
                }
                (AttrKind::List, _) => subsets(&open_symbols(db, spec.name)),
            };
            values.insert(attr, vals);
        }
        AuditGrid { values }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Constraint {
    check: Check,
    negated: bool,
}

fn canonical(attr: &AttributeRef) -> Option<AttributeRef> {
    match attr.namespace {
        Namespace::Config => None,
        Namespace::Tool if attr.name == "radius" => Some(AttributeRef::tool("diameter")),
        _ => Some(attr.clone()),
    }
}

impl Constraint {
    fn vars(&self) -> BTreeSet<AttributeRef> {
        self.check.attributes().into_iter().filter_map(canonical).collect()
    }
}

struct Point<'a> {
    config: &'a ExtendedCuttingConditions,
    vals: &'a BTreeMap<AttributeRef, Value>,
}

impl AttributeSource for Point<'_> {
    fn value(&self, attr: &AttributeRef) -> Option<Value> {
        match attr.namespace {
            Namespace::Config => config_value(self.config, &attr.name),
            Namespace::Tool if attr.name == "radius" => match self.vals.get(&AttributeRef::tool("diameter"))? {
                Value::Number(d) => Some(Value::Number(d / 2.0)),
                _ => None,
            },
            _ => self.vals.get(attr).cloned(),
        }
    }
}

fn holds(c: &Constraint, p: &Point) -> bool {
    eval_check(&c.check, p).is_ok_and(|r| r != c.negated)
}

/// The acceptance region of an OSE as a conjunction of checks over face and
/// tool attributes, with configuration attributes bound to the OSE's config.
fn region<'a>(db: &'a OseDatabase, ose: &Ose) -> Option<(Vec<Check>, &'a ExtendedCuttingConditions)> {
    let family = db.family(&ose.family)?;
    let config = db.config(&ose.config)?;
    let ty = db.cutting_set_type(&ose.cutting_set_type)?;
    let mut out = vec![Check::sym(AttributeRef::face("geometry_type"), family.required_type.as_str())];
    out.extend(family.checks.iter().cloned());
    out.extend(ose.compliance_checks.iter().cloned());
    for (name, i) in ty.dimensions.named() {
        out.push(Check::num(AttributeRef::tool(name), Op::Ge, i.min));
        out.push(Check::num(AttributeRef::tool(name), Op::Le, i.max));
    }
    out.push(Check::sym(AttributeRef::tool("cutting_material"), &ty.cutting_material));
    let mfg: Vec<&str> = ty.mfg_types.iter().map(|m| m.as_str()).collect();
    let modes: Vec<&str> = ty.modes.iter().map(|m| m.as_str()).collect();
    out.push(Check::any_of(AttributeRef::tool("mfg_types"), &mfg));
    out.push(Check::any_of(AttributeRef::tool("modes"), &modes));
    out.push(Check::new(AttributeRef::tool("tmcs"), Op::ContainsAny, Rhs::AnyOf(ty.tmcs.clone())));
    out.push(Check::sym(AttributeRef::tool("mfg_types"), config.mfg_type.as_str()));
    out.push(Check::sym(AttributeRef::tool("modes"), config.mode.as_str()));
    out.push(Check::new(
        AttributeRef::tool("tmcs"),
        Op::ContainsAny,
        Rhs::AnyOf(config.allowed_tmcs.clone()),
    ));
    Some((out, config))
}

/// Whether some grid point satisfies every constraint.
fn satisfiable(grid: &AuditGrid, config: &ExtendedCuttingConditions, constraints: &[Constraint]) -> bool {
    let empty = BTreeMap::new();
    let ground = Point { config, vals: &empty };
    let mut domains: BTreeMap<AttributeRef, Vec<Value>> = BTreeMap::new();
    let mut multi: Vec<(&Constraint, BTreeSet<AttributeRef>)> = Vec::new();
    for c in constraints {
        let vars = c.vars();
        match vars.len() {
            0 => {
                if !holds(c, &ground) {
                    return false;
                }
            }
            1 => {
                let v = vars.into_iter().next().unwrap();
                let dom = domains
                    .entry(v.clone())
                    .or_insert_with(|| grid.values.get(&v).cloned().unwrap_or_default());
                dom.retain(|x| {
                    let vals = BTreeMap::from([(v.clone(), x.clone())]);
                    holds(c, &Point { config, vals: &vals })
                });
                if dom.is_empty() {
                    return false;
                }
            }
            _ => {
                for v in &vars {
                    domains
                        .entry(v.clone())
                        .or_insert_with(|| grid.values.get(v).cloned().unwrap_or_default());
                }
                multi.push((c, vars));
            }
        }
    }
    if domains.values().any(Vec::is_empty) {
        return false;
    }

    // independent groups of variables linked by multi-variable constraints
    let mut groups: Vec<(BTreeSet<AttributeRef>, Vec<&Constraint>)> = Vec::new();
    for (c, vars) in multi {
        let (mut joined, rest): (Vec<_>, Vec<_>) = groups.into_iter().partition(|(g, _)| !g.is_disjoint(&vars));
        let mut g = (vars, vec![c]);
        for (gv, gc) in joined.drain(..) {
            g.0.extend(gv);
            g.1.extend(gc);
        }
        groups = rest;
        groups.push(g);
    }
    groups.iter().all(|(vars, cs)| {
        let order: Vec<&AttributeRef> = vars.iter().collect();
        let mut vals = BTreeMap::new();
        search(&order, 0, &domains, cs, config, &mut vals)
    })
}

fn search(
    order: &[&AttributeRef],
    depth: usize,
    domains: &BTreeMap<AttributeRef, Vec<Value>>,
    cs: &[&Constraint],
    config: &ExtendedCuttingConditions,
    vals: &mut BTreeMap<AttributeRef, Value>,
) -> bool {
    if depth == order.len() {
        return true;
    }
    let var = order[depth];
    // constraints that become fully assigned at this depth
    let ready: Vec<&Constraint> = cs
        .iter()
        .copied()
        .filter(|c| {
            let vs = c.vars();
            vs.contains(var) && vs.iter().all(|v| v == var || order[..depth].contains(&v))
        })
        .collect();
    for x in &domains[var] {
        vals.insert(var.clone(), x.clone());
        let p = Point { config, vals };
        if ready.iter().all(|c| holds(c, &p)) && search(order, depth + 1, domains, cs, config, vals) {
            return true;
        }
    }
    vals.remove(var);
    false
}

fn positive(checks: &[Check]) -> Vec<Constraint> {
    checks
        .iter()
        .map(|c| Constraint {
            check: c.clone(),
            negated: false,
        })
        .collect()
}

/// Whether the region of `a` is contained in the region of `b` (same config).
fn contained(grid: &AuditGrid, config: &ExtendedCuttingConditions, a: &[Check], b: &[Check]) -> bool {
    let base = positive(a);
    b.iter().all(|nb| {
        let mut cs = base.clone();
        cs.push(Constraint {
            check: nb.clone(),
            negated: true,
        });
        !satisfiable(grid, config, &cs)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AuditFinding {
    pub oses: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AuditReport {
    pub shadowing: Vec<AuditFinding>,
    pub unsatisfiable: Vec<AuditFinding>,
    pub duplicates: Vec<AuditFinding>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.total() == 0
    }

    pub fn total(&self) -> usize {
        self.shadowing.len() + self.unsatisfiable.len() + self.duplicates.len()
    }
}

fn structural_key(o: &Ose) -> (String, String, String, Vec<String>) {
    let mut checks: Vec<String> = o
        .compliance_checks
        .iter()
        .map(|c| serde_json::to_string(c).expect("checks serialise"))
        .collect();
    checks.sort();
    checks.dedup();
    (o.family.clone(), o.config.clone(), o.cutting_set_type.clone(), checks)
}

/// Audits a valid database over `grid`.
///
/// * shadowing: two OSEs with the same family and configuration accepting
///   the same non-empty set of grid points;
/// * unsatisfiable: an OSE accepting no grid point;
/// * duplicates: OSEs identical up to id and check order.
pub fn audit_database(db: &OseDatabase, grid: &AuditGrid) -> AuditReport {
    let mut report = AuditReport::default();
    let regions: Vec<Option<(Vec<Check>, &ExtendedCuttingConditions)>> =
        db.oses.iter().map(|o| region(db, o)).collect();
    let non_empty: Vec<bool> = regions
        .iter()
        .map(|r| r.as_ref().is_some_and(|(cs, cfg)| satisfiable(grid, cfg, &positive(cs))))
        .collect();
    for (o, ok) in db.oses.iter().zip(&non_empty) {
        if !ok {
            report.unsatisfiable.push(AuditFinding {
                oses: vec![o.id.clone()],
                message: format!("{} accepts no face/tool combination", o.id),
            });
        }
    }
    for i in 0..db.oses.len() {
        for j in i + 1..db.oses.len() {
            let (a, b) = (&db.oses[i], &db.oses[j]);
            let mut ids = vec![a.id.clone(), b.id.clone()];
            ids.sort();
            if structural_key(a) == structural_key(b) {
                report.duplicates.push(AuditFinding {
                    oses: ids.clone(),
                    message: format!("{} and {} are structurally identical", ids[0], ids[1]),
                });
            }
            if a.family != b.family || a.config != b.config || !non_empty[i] || !non_empty[j] {
                continue;
            }
            let (Some((ra, cfg)), Some((rb, _))) = (&regions[i], &regions[j]) else {
                continue;
            };
            if contained(grid, cfg, ra, rb) && contained(grid, cfg, rb, ra) {
                report.shadowing.push(AuditFinding {
                    oses: ids.clone(),
                    message: format!(
                        "{} and {} accept the same faces and tools for family {} and configuration {}",
                        ids[0], ids[1], a.family, a.config
                    ),
                });
            }
        }
    }
    report.shadowing.sort();
    report.unsatisfiable.sort();
    report.duplicates.sort();
    report
}

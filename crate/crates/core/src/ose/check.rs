//! Attribute references, values and elementary checks.
//!
//! A check compares an attribute with another attribute, a constant, or a
//! set of symbols. It only passes or fails; alternatives are expressed as
//! separate rules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::model::{CuttingSet, ExtendedCuttingConditions, Mode, Priority, TrajectoryStrategy};
use crate::transform::{AccessKind, FaceAttributes, GeometryType, MfgType, Openness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Namespace {
    Face,
    Tool,
    Config,
}

impl Namespace {
    pub fn as_str(self) -> &'static str {
        match self {
            Namespace::Face => "face",
            Namespace::Tool => "tool",
            Namespace::Config => "config",
        }
    }
}

/// Kind of value an attribute holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    Number,
    Symbol,
    Boolean,
    List,
}

/// Admissible symbols of a symbol or list attribute. `Open` vocabularies are
/// identifiers defined by the database itself (materials, TMC ids).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Closed(&'static [&'static str]),
    Open,
    Any,
}

#[derive(Debug, Clone, Copy)]
pub struct AttrSpec {
    pub namespace: Namespace,
    pub name: &'static str,
    pub kind: AttrKind,
    pub domain: Domain,
}

macro_rules! names {
    ($t:ty) => {{
        const N: usize = <$t>::ALL.len();
        const fn build() -> [&'static str; N] {
            let mut out = [""; N];
            let mut i = 0;
            while i < N {
                out[i] = <$t>::ALL[i].as_str();
                i += 1;
            }
            out
        }
        const OUT: [&'static str; N] = build();
        &OUT
    }};
}

const GEOMETRY_TYPES: &[&str] = names!(GeometryType);
const OPENNESS: &[&str] = names!(Openness);
const ACCESS_KINDS: &[&str] = &["SingleVector", "TwoOppositeVectors", "NVectors", "None"];
const MFG_TYPES: &[&str] = names!(MfgType);
const MODES: &[&str] = names!(Mode);
const PRIORITIES: &[&str] = names!(Priority);
const STRATEGIES: &[&str] = &[
    "Forth",
    "BackAndForth",
    "InOutSpiral",
    "OutInSpiral",
    "NormalDrilling",
    "Deburring",
    "Flank",
    "Sweeping",
    "None",
];

const fn spec(namespace: Namespace, name: &'static str, kind: AttrKind, domain: Domain) -> AttrSpec {
    AttrSpec {
        namespace,
        name,
        kind,
        domain,
    }
}

use AttrKind::{Boolean, List, Number, Symbol};
use Namespace::{Config, Face, Tool};

/// The fixed attribute vocabulary, per namespace.
pub const VOCABULARY: &[AttrSpec] = &[
    spec(Face, "geometry_type", Symbol, Domain::Closed(GEOMETRY_TYPES)),
    spec(Face, "fit_residual", Number, Domain::Any),
    spec(Face, "openness", Symbol, Domain::Closed(OPENNESS)),
    spec(Face, "access_kind", Symbol, Domain::Closed(ACCESS_KINDS)),
    spec(Face, "access_compulsory", Boolean, Domain::Any),
    spec(Face, "end_accessibility", Number, Domain::Any),
    spec(Face, "flank_accessibility", Number, Domain::Any),
    spec(Face, "global_accessibility", Number, Domain::Any),
    spec(Face, "axial_extent", Number, Domain::Any),
    spec(Face, "min_fillet_radius", Number, Domain::Any),
    spec(Face, "potential_mfg_types", List, Domain::Closed(MFG_TYPES)),
    spec(Tool, "diameter", Number, Domain::Any),
    spec(Tool, "radius", Number, Domain::Any),
    spec(Tool, "cutting_length", Number, Domain::Any),
    spec(Tool, "tool_length", Number, Domain::Any),
    spec(Tool, "end_radius", Number, Domain::Any),
    spec(Tool, "cutting_material", Symbol, Domain::Open),
    spec(Tool, "mfg_types", List, Domain::Closed(MFG_TYPES)),
    spec(Tool, "modes", List, Domain::Closed(MODES)),
    spec(Tool, "tmcs", List, Domain::Open),
    spec(Config, "mfg_type", Symbol, Domain::Closed(MFG_TYPES)),
    spec(Config, "mode", Symbol, Domain::Closed(MODES)),
    spec(Config, "trajectory_strategy", Symbol, Domain::Closed(STRATEGIES)),
    spec(Config, "allowed_tmcs", List, Domain::Open),
    spec(Config, "priority", Symbol, Domain::Closed(PRIORITIES)),
];

/// `namespace.name`, serialised as that dotted string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeRef {
    pub namespace: Namespace,
    pub name: String,
}

impl AttributeRef {
    pub fn new(namespace: Namespace, name: impl Into<String>) -> Self {
        AttributeRef {
            namespace,
            name: name.into(),
        }
    }

    pub fn face(name: &str) -> Self {
        Self::new(Namespace::Face, name)
    }

    pub fn tool(name: &str) -> Self {
        Self::new(Namespace::Tool, name)
    }

    pub fn config(name: &str) -> Self {
        Self::new(Namespace::Config, name)
    }

    /// Vocabulary entry, if the name exists in its namespace.
    pub fn spec(&self) -> Option<&'static AttrSpec> {
        VOCABULARY
            .iter()
            .find(|s| s.namespace == self.namespace && s.name == self.name)
    }
}

impl fmt::Display for AttributeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.namespace.as_str(), self.name)
    }
}

impl FromStr for AttributeRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (ns, name) = s
            .split_once('.')
            .ok_or_else(|| format!("attribute {s:?} is not of the form namespace.name"))?;
        let namespace = match ns {
            "face" => Namespace::Face,
            "tool" => Namespace::Tool,
            "config" => Namespace::Config,
            _ => return Err(format!("unknown namespace {ns:?} in {s:?}")),
        };
        if name.is_empty() {
            return Err(format!("attribute {s:?} has an empty name"));
        }
        Ok(AttributeRef::new(namespace, name))
    }
}

impl Serialize for AttributeRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AttributeRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    ContainsAny,
    ContainsAll,
}

impl Op {
    pub fn as_str(self) -> &'static str {
        match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Eq => "=",
            Op::ContainsAny => "contains any of",
            Op::ContainsAll => "contains all of",
        }
    }
}

/// Constant operand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Bool(bool),
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rhs {
    Ref(AttributeRef),
    Value(Literal),
    AnyOf(Vec<String>),
    AllOf(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub lhs: AttributeRef,
    pub op: Op,
    pub rhs: Rhs,
}

impl Check {
    pub fn new(lhs: AttributeRef, op: Op, rhs: Rhs) -> Self {
        Check { lhs, op, rhs }
    }

    pub fn num(lhs: AttributeRef, op: Op, value: f64) -> Self {
        Check::new(lhs, op, Rhs::Value(Literal::Number(value)))
    }

    pub fn attr(lhs: AttributeRef, op: Op, rhs: AttributeRef) -> Self {
        Check::new(lhs, op, Rhs::Ref(rhs))
    }

    pub fn sym(lhs: AttributeRef, value: &str) -> Self {
        Check::new(lhs, Op::Eq, Rhs::Value(Literal::Text(value.into())))
    }

    pub fn flag(lhs: AttributeRef, value: bool) -> Self {
        Check::new(lhs, Op::Eq, Rhs::Value(Literal::Bool(value)))
    }

    pub fn any_of(lhs: AttributeRef, values: &[&str]) -> Self {
        Check::new(lhs, Op::ContainsAny, Rhs::AnyOf(values.iter().map(|v| v.to_string()).collect()))
    }

    pub fn all_of(lhs: AttributeRef, values: &[&str]) -> Self {
        Check::new(lhs, Op::ContainsAll, Rhs::AllOf(values.iter().map(|v| v.to_string()).collect()))
    }

    /// Every attribute the check reads.
    pub fn attributes(&self) -> Vec<&AttributeRef> {
        match &self.rhs {
            Rhs::Ref(r) => vec![&self.lhs, r],
            _ => vec![&self.lhs],
        }
    }

    /// Type-checks the check against the vocabulary.
    pub fn type_check(&self) -> Result<(), String> {
        let lhs = self
            .lhs
            .spec()
            .ok_or_else(|| format!("unknown attribute {}", self.lhs))?;
        let rhs_spec = match &self.rhs {
            Rhs::Ref(r) => Some(r.spec().ok_or_else(|| format!("unknown attribute {r}"))?),
            _ => None,
        };
        let symbols_ok = |domain: Domain, values: &[&str]| -> Result<(), String> {
            if let Domain::Closed(allowed) = domain {
                if let Some(bad) = values.iter().find(|v| !allowed.contains(v)) {
                    return Err(format!("{bad:?} is not a value of {}", self.lhs));
                }
            }
            Ok(())
        };
        match self.op {
            Op::Lt | Op::Le | Op::Gt | Op::Ge => {
                if lhs.kind != AttrKind::Number {
                    return Err(format!("{} needs a numeric left side, {} is not numeric", self.op.as_str(), self.lhs));
                }
                match (&self.rhs, rhs_spec) {
                    (Rhs::Ref(r), Some(s)) if s.kind != AttrKind::Number => Err(format!("{r} is not numeric")),
                    (Rhs::Ref(_), _) | (Rhs::Value(Literal::Number(_)), _) => Ok(()),
                    _ => Err(format!("{} needs a numeric right side", self.op.as_str())),
                }
            }
            Op::Eq => match (&self.rhs, rhs_spec) {
                (Rhs::Ref(r), Some(s)) => match (lhs.kind, s.kind) {
                    (AttrKind::List, AttrKind::Symbol) => Ok(()),
                    (a, b) if a == b && a != AttrKind::List => Ok(()),
                    _ => Err(format!("cannot compare {} with {r}", self.lhs)),
                },
                (Rhs::Value(lit), _) => match (lhs.kind, lit) {
                    (AttrKind::Number, Literal::Number(_)) | (AttrKind::Boolean, Literal::Bool(_)) => Ok(()),
                    (AttrKind::Symbol | AttrKind::List, Literal::Text(t)) => symbols_ok(lhs.domain, &[t]),
                    _ => Err(format!("constant {lit:?} does not fit {}", self.lhs)),
                },
                _ => Err("= takes a single value or attribute; use contains_any or contains_all for sets".into()),
            },
            Op::ContainsAny | Op::ContainsAll => {
                if lhs.kind != AttrKind::List {
                    return Err(format!("{} needs a list-valued left side", self.op.as_str()));
                }
                match (&self.rhs, self.op, rhs_spec) {
                    (Rhs::AnyOf(v), Op::ContainsAny, _) | (Rhs::AllOf(v), Op::ContainsAll, _) => {
                        if v.is_empty() {
                            return Err("empty value set".into());
                        }
                        symbols_ok(lhs.domain, &v.iter().map(String::as_str).collect::<Vec<_>>())
                    }
                    (Rhs::Ref(_), _, Some(s)) if s.kind == AttrKind::List => Ok(()),
                    _ => Err(format!("{} needs a matching value set", self.op.as_str())),
                }
            }
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.lhs, self.op.as_str())?;
        match &self.rhs {
            Rhs::Ref(r) => write!(f, "{r}"),
            Rhs::Value(Literal::Number(x)) => write!(f, "{x}"),
            Rhs::Value(Literal::Bool(b)) => write!(f, "{b}"),
            Rhs::Value(Literal::Text(t)) => write!(f, "{t}"),
            Rhs::AnyOf(v) | Rhs::AllOf(v) => write!(f, "{{{}}}", v.join(", ")),
        }
    }
}

/// Resolved attribute value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Symbol(String),
    Boolean(bool),
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("binding error: {0} cannot be resolved")]
    Binding(String),
    #[error("type error in check {check}: {reason}")]
    Type { check: String, reason: String },
}

/// Anything that can supply attribute values to a check.
pub trait AttributeSource {
    fn value(&self, attr: &AttributeRef) -> Option<Value>;
}

/// Value of a face attribute. Unbounded fillet radii read as `+inf`; faces
/// without access read access kind `None`.
pub fn face_value(face: &FaceAttributes, name: &str) -> Option<Value> {
    Some(match name {
        "geometry_type" => Value::Symbol(face.geometry_type.as_str().into()),
        "fit_residual" => Value::Number(face.fit_residual),
        "openness" => Value::Symbol(face.openness.as_str().into()),
        "access_kind" => Value::Symbol(face.access_kind().map_or("None", AccessKind::as_str).into()),
        "access_compulsory" => Value::Boolean(face.compulsory()),
        "end_accessibility" => Value::Number(face.end_accessibility),
        "flank_accessibility" => Value::Number(face.flank_accessibility),
        "global_accessibility" => Value::Number(face.global_accessibility),
        "axial_extent" => Value::Number(face.axial_extent),
        "min_fillet_radius" => Value::Number(face.min_fillet_radius.value()),
        "potential_mfg_types" => Value::List(face.potential_mfg_types.iter().map(|m| m.as_str().into()).collect()),
        _ => return None,
    })
}

pub fn tool_value(tool: &CuttingSet, name: &str) -> Option<Value> {
    Some(match name {
        "diameter" => Value::Number(tool.diameter),
        "radius" => Value::Number(tool.diameter / 2.0),
        "cutting_length" => Value::Number(tool.cutting_length),
        "tool_length" => Value::Number(tool.tool_length),
        "end_radius" => Value::Number(tool.end_radius),
        "cutting_material" => Value::Symbol(tool.cutting_material.clone()),
        "mfg_types" => Value::List(tool.mfg_types.iter().map(|m| m.as_str().into()).collect()),
        "modes" => Value::List(tool.modes.iter().map(|m| m.as_str().into()).collect()),
        "tmcs" => Value::List(tool.tmcs.clone()),
        _ => return None,
    })
}

pub fn config_value(config: &ExtendedCuttingConditions, name: &str) -> Option<Value> {
    Some(match name {
        "mfg_type" => Value::Symbol(config.mfg_type.as_str().into()),
        "mode" => Value::Symbol(config.mode.as_str().into()),
        "trajectory_strategy" => {
            Value::Symbol(config.trajectory_strategy.map_or("None", TrajectoryStrategy::as_str).into())
        }
        "allowed_tmcs" => Value::List(config.allowed_tmcs.clone()),
        "priority" => Value::Symbol(config.priority.as_str().into()),
        _ => return None,
    })
}

/// Face, optional tool and optional configuration a check is evaluated
/// against.
#[derive(Debug, Clone, Copy)]
pub struct Bindings<'a> {
    pub face: &'a FaceAttributes,
    pub tool: Option<&'a CuttingSet>,
    pub config: Option<&'a ExtendedCuttingConditions>,
}

impl<'a> Bindings<'a> {
    pub fn face(face: &'a FaceAttributes) -> Self {
        Bindings {
            face,
            tool: None,
            config: None,
        }
    }
}

impl AttributeSource for Bindings<'_> {
    fn value(&self, attr: &AttributeRef) -> Option<Value> {
        match attr.namespace {
            Namespace::Face => face_value(self.face, &attr.name),
            Namespace::Tool => tool_value(self.tool?, &attr.name),
            Namespace::Config => config_value(self.config?, &attr.name),
        }
    }
}

fn resolve(src: &dyn AttributeSource, attr: &AttributeRef) -> Result<Value, CheckError> {
    src.value(attr).ok_or_else(|| CheckError::Binding(attr.to_string()))
}

fn literal_value(lit: &Literal) -> Value {
    match lit {
        Literal::Bool(b) => Value::Boolean(*b),
        Literal::Number(x) => Value::Number(*x),
        Literal::Text(t) => Value::Symbol(t.clone()),
    }
}

/// Evaluates one check. A failed comparison is `Ok(false)`; an attribute that
/// cannot be resolved is a binding error, which signals a malformed database.
pub fn eval_check(check: &Check, src: &dyn AttributeSource) -> Result<bool, CheckError> {
    let lhs = resolve(src, &check.lhs)?;
    let rhs = match &check.rhs {
        Rhs::Ref(r) => resolve(src, r)?,
        Rhs::Value(lit) => literal_value(lit),
        Rhs::AnyOf(v) | Rhs::AllOf(v) => Value::List(v.clone()),
    };
    let mismatch = || CheckError::Type {
        check: check.to_string(),
        reason: format!("operands {lhs:?} and {rhs:?}"),
    };
    Ok(match (check.op, &lhs, &rhs) {
        (Op::Lt, Value::Number(a), Value::Number(b)) => a < b,
        (Op::Le, Value::Number(a), Value::Number(b)) => a <= b,
        (Op::Gt, Value::Number(a), Value::Number(b)) => a > b,
        (Op::Ge, Value::Number(a), Value::Number(b)) => a >= b,
        (Op::Eq, Value::List(l), Value::Symbol(s)) => l.contains(s),
        (Op::Eq, Value::List(_), _) | (Op::Eq, _, Value::List(_)) => return Err(mismatch()),
        (Op::Eq, a, b) if std::mem::discriminant(a) == std::mem::discriminant(b) => a == b,
        (Op::ContainsAny, Value::List(l), Value::List(r)) => r.iter().any(|x| l.contains(x)),
        (Op::ContainsAll, Value::List(l), Value::List(r)) => r.iter().all(|x| l.contains(x)),
        _ => return Err(mismatch()),
    })
}

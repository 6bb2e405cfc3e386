//! The OSE knowledge base: geometry families, extended cutting conditions and
//! cutting-set types linked by OSE triples, with validation, tool sorting,
//! audit and what-if analysis.

pub mod audit;
pub mod check;
pub mod model;
pub mod tools;
pub mod validate;
pub mod whatif;

pub use audit::{audit_database, AuditFinding, AuditGrid, AuditReport};
pub use check::{
    eval_check, AttrKind, AttributeRef, AttributeSource, Bindings, Check, CheckError, Literal, Namespace, Op, Rhs,
    Value, VOCABULARY,
};
pub use model::{
    ConditionRanges, CuttingParam, CuttingSet, CuttingSetType, DimensionRanges, ExtendedCuttingConditions,
    GeometryFamily, Interval, Mode, Ose, OseDatabase, Priority, Tmc, TrajectoryStrategy,
};
pub use tools::{classify_tool, tool_in_type};
pub use validate::{validate_db, validate_tools, Finding, FindingKind};
pub use whatif::{what_if_expand, Variant, WhatIfError, WhatIfField};

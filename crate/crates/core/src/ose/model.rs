//! The three linked tables (geometry families, extended cutting conditions,
//! cutting-set types), tool/material couples, cutting sets and the OSE triples
//! binding them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::check::Check;
use crate::transform::{GeometryType, MfgType};
use crate::vocab::vocab_enum;

vocab_enum! {
    pub enum Mode {
        Roughing,
        SemiFinishing,
        Finishing,
    }
}

vocab_enum! {
    /// Cutting-condition calculus priority.
    pub enum Priority {
        Qmax,
        Default,
    }
}

vocab_enum! {
    pub enum TrajectoryStrategy {
        Forth,
        BackAndForth,
        InOutSpiral,
        OutInSpiral,
        NormalDrilling,
        Deburring,
        Flank,
        Sweeping,
    }
}

/// Closed interval `[min, max]`, serialised as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl From<[f64; 2]> for Interval {
    fn from([min, max]: [f64; 2]) -> Self {
        Interval { min, max }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.min, i.max]
    }
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Interval { min, max }
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min <= self.max
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let i = Interval::new(self.min.max(other.min), self.max.min(other.max));
        (i.min <= i.max).then_some(i)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.min, self.max)
    }
}

/// Cutting-condition parameters. Speeds in m/min, feeds and advances in mm,
/// feed rate in mm/min.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CuttingParam {
    CuttingSpeed,
    FeedPerTooth,
    AdvanceX,
    AdvanceZ,
    FeedRate,
}

impl CuttingParam {
    pub const ALL: [CuttingParam; 5] = [
        CuttingParam::CuttingSpeed,
        CuttingParam::FeedPerTooth,
        CuttingParam::AdvanceX,
        CuttingParam::AdvanceZ,
        CuttingParam::FeedRate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CuttingParam::CuttingSpeed => "cutting_speed",
            CuttingParam::FeedPerTooth => "feed_per_tooth",
            CuttingParam::AdvanceX => "advance_x",
            CuttingParam::AdvanceZ => "advance_z",
            CuttingParam::FeedRate => "feed_rate",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            CuttingParam::CuttingSpeed => "m/min",
            CuttingParam::FeedRate => "mm/min",
            _ => "mm",
        }
    }
}

impl fmt::Display for CuttingParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionRanges {
    pub cutting_speed: Interval,
    pub feed_per_tooth: Interval,
    pub advance_x: Interval,
    pub advance_z: Interval,
    pub feed_rate: Interval,
}

impl ConditionRanges {
    pub fn get(&self, p: CuttingParam) -> Interval {
        match p {
            CuttingParam::CuttingSpeed => self.cutting_speed,
            CuttingParam::FeedPerTooth => self.feed_per_tooth,
            CuttingParam::AdvanceX => self.advance_x,
            CuttingParam::AdvanceZ => self.advance_z,
            CuttingParam::FeedRate => self.feed_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionRanges {
    pub diameter: Interval,
    pub cutting_length: Interval,
    pub tool_length: Interval,
    pub end_radius: Interval,
}

impl DimensionRanges {
    pub fn named(&self) -> [(&'static str, Interval); 4] {
        [
            ("diameter", self.diameter),
            ("cutting_length", self.cutting_length),
            ("tool_length", self.tool_length),
            ("end_radius", self.end_radius),
        ]
    }
}

/// A geometry type plus conjunctive checks over face attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryFamily {
    pub id: String,
    pub required_type: GeometryType,
    #[serde(default)]
    pub checks: Vec<Check>,
}

/// Tool/material couple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tmc {
    pub id: String,
    pub cut_material: String,
    pub cutting_material: String,
    #[serde(default)]
    pub constraints: BTreeMap<CuttingParam, Interval>,
    pub lubrication: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedCuttingConditions {
    pub id: String,
    pub mfg_type: MfgType,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_strategy: Option<TrajectoryStrategy>,
    pub allowed_tmcs: Vec<String>,
    pub priority: Priority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuttingSetType {
    pub id: String,
    pub dimensions: DimensionRanges,
    pub conditions: ConditionRanges,
    pub cutting_material: String,
    pub mfg_types: Vec<MfgType>,
    pub modes: Vec<Mode>,
    pub tmcs: Vec<String>,
}

/// A tool with its holder, managed as one resource.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuttingSet {
    pub id: String,
    pub diameter: f64,
    pub cutting_length: f64,
    pub tool_length: f64,
    pub end_radius: f64,
    pub cutting_material: String,
    pub mfg_types: Vec<MfgType>,
    pub modes: Vec<Mode>,
    pub tmcs: Vec<String>,
    pub conditions: ConditionRanges,
}

impl CuttingSet {
    pub fn named_dimensions(&self) -> [(&'static str, f64); 4] {
        [
            ("diameter", self.diameter),
            ("cutting_length", self.cutting_length),
            ("tool_length", self.tool_length),
            ("end_radius", self.end_radius),
        ]
    }
}

/// A validated compatible triple plus the checks tying faces to tools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ose {
    pub id: String,
    pub family: String,
    pub config: String,
    pub cutting_set_type: String,
    pub compliance_checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OseDatabase {
    /// Free-form version label of the database document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default)]
    pub families: Vec<GeometryFamily>,
    #[serde(default)]
    pub configs: Vec<ExtendedCuttingConditions>,
    #[serde(default)]
    pub cutting_set_types: Vec<CuttingSetType>,
    #[serde(default)]
    pub tmcs: Vec<Tmc>,
    #[serde(default)]
    pub oses: Vec<Ose>,
}

impl OseDatabase {
    pub fn family(&self, id: &str) -> Option<&GeometryFamily> {
        self.families.iter().find(|f| f.id == id)
    }

    pub fn config(&self, id: &str) -> Option<&ExtendedCuttingConditions> {
        self.configs.iter().find(|c| c.id == id)
    }

    pub fn cutting_set_type(&self, id: &str) -> Option<&CuttingSetType> {
        self.cutting_set_types.iter().find(|t| t.id == id)
    }

    pub fn tmc(&self, id: &str) -> Option<&Tmc> {
        self.tmcs.iter().find(|t| t.id == id)
    }

    pub fn ose(&self, id: &str) -> Option<&Ose> {
        self.oses.iter().find(|o| o.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_intersection() {
        let a = Interval::new(1.0, 5.0);
        assert_eq!(a.intersect(&Interval::new(3.0, 9.0)), Some(Interval::new(3.0, 5.0)));
        assert_eq!(a.intersect(&Interval::new(5.0, 9.0)), Some(Interval::new(5.0, 5.0)));
        assert_eq!(a.intersect(&Interval::new(6.0, 9.0)), None);
        assert!(a.contains(1.0) && a.contains(5.0) && !a.contains(5.01));
        assert_eq!(a.midpoint(), 3.0);
        assert!(!Interval::new(2.0, 1.0).is_valid());
        assert!(!Interval::new(0.0, f64::NAN).is_valid());
    }

    #[test]
    fn interval_is_a_json_pair() {
        assert_eq!(serde_json::to_string(&Interval::new(0.5, 2.0)).unwrap(), "[0.5,2.0]");
        let back: Interval = serde_json::from_str("[1, 3]").unwrap();
        assert_eq!(back, Interval::new(1.0, 3.0));
        assert!(serde_json::from_str::<Interval>("[1]").is_err());
    }

    #[test]
    fn cutting_params_name_their_fields() {
        let json = serde_json::to_value(CuttingParam::ALL).unwrap();
        let names: Vec<&str> = CuttingParam::ALL.iter().map(|p| p.as_str()).collect();
        assert_eq!(json, serde_json::json!(names));
        assert_eq!(CuttingParam::FeedRate.unit(), "mm/min");
    }
}

//! Parts as collections of sampled faces.
//!
//! A face is a rectangular `rows x cols` grid of points. The grid orientation
//! carries meaning: the normal `d/du x d/dv` (u = row index, v = column
//! index) points away from the material. Adjacency edges carry the angle of
//! material measured across the shared edge, in degrees.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::geometry::{Box3, Point3};

pub const UNITS_MM: &str = "mm";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adjacency {
    pub face: String,
    pub material_angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFace {
    pub id: String,
    pub grid: Vec<Vec<Point3>>,
    #[serde(default)]
    pub adjacency: Vec<Adjacency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl SampledFace {
    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    pub fn cols(&self) -> usize {
        self.grid.first().map_or(0, Vec::len)
    }

    pub fn points(&self) -> impl Iterator<Item = &Point3> {
        self.grid.iter().flatten()
    }

    pub fn bounding_box(&self) -> Box3 {
        Box3::from_points(self.points()).expect("validated face has samples")
    }

    /// Applies `f` to every sample, keeping topology.
    pub fn map_points<F: Fn(&Point3) -> Point3>(&self, f: F) -> SampledFace {
        SampledFace {
            grid: self
                .grid
                .iter()
                .map(|row| row.iter().map(&f).collect())
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub id: String,
    #[serde(default = "default_units")]
    pub units: String,
    pub faces: Vec<SampledFace>,
}

fn default_units() -> String {
    UNITS_MM.to_string()
}

impl Part {
    pub fn new(id: impl Into<String>, faces: Vec<SampledFace>) -> Self {
        Part {
            id: id.into(),
            units: default_units(),
            faces,
        }
    }

    pub fn face(&self, id: &str) -> Option<&SampledFace> {
        self.faces.iter().find(|f| f.id == id)
    }

    pub fn face_index(&self) -> BTreeMap<&str, usize> {
        self.faces
            .iter()
            .enumerate()
            .map(|(i, f)| (f.id.as_str(), i))
            .collect()
    }

    pub fn bounding_box(&self) -> Box3 {
        Box3::from_points(self.faces.iter().flat_map(|f| f.points())).expect("validated part has samples")
    }

    pub fn map_points<F: Fn(&Point3) -> Point3>(&self, f: F) -> Part {
        Part {
            faces: self.faces.iter().map(|face| face.map_points(&f)).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyPart,
    UnsupportedUnits,
    DuplicateFaceId,
    GridTooSmall,
    NonRectangularGrid,
    NonFiniteCoordinate,
    UnknownNeighbor,
    SelfAdjacency,
    AsymmetricAdjacency,
    MaterialAngleOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub face: Option<String>,
    pub kind: ViolationKind,
    pub reason: String,
}

impl Violation {
    fn new(face: Option<&str>, kind: ViolationKind, reason: impl Into<String>) -> Self {
        Violation {
            face: face.map(str::to_string),
            kind,
            reason: reason.into(),
        }
    }
}

/// Every invariant violation of `part`. An empty list means the part is valid.
///
/// The result is sorted, so it does not depend on the order of the faces.
pub fn validate_part(part: &Part) -> Vec<Violation> {
    use ViolationKind::*;
    let mut out = Vec::new();
    if part.faces.is_empty() {
        out.push(Violation::new(None, EmptyPart, "part has no faces"));
    }
    if part.units != UNITS_MM {
        out.push(Violation::new(
            None,
            UnsupportedUnits,
            format!("units must be \"mm\", found {:?}", part.units),
        ));
    }

    let mut seen = BTreeSet::new();
    for f in &part.faces {
        if !seen.insert(f.id.as_str()) {
            out.push(Violation::new(Some(&f.id), DuplicateFaceId, "face id used more than once"));
        }
    }

    let adjacency: BTreeMap<&str, BTreeSet<&str>> = part
        .faces
        .iter()
        .map(|f| (f.id.as_str(), f.adjacency.iter().map(|a| a.face.as_str()).collect()))
        .collect();

    for f in &part.faces {
        let id = Some(f.id.as_str());
        let rows = f.rows();
        let cols = f.cols();
        if rows < 2 || cols < 2 {
            out.push(Violation::new(id, GridTooSmall, format!("grid is {rows}x{cols}, need at least 2x2")));
        }
        if f.grid.iter().any(|r| r.len() != cols) {
            out.push(Violation::new(id, NonRectangularGrid, "rows have different lengths"));
        }
        let bad = f
            .points()
            .filter(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
            .count();
        if bad > 0 {
            out.push(Violation::new(id, NonFiniteCoordinate, format!("{bad} non-finite coordinate sample(s)")));
        }
        for a in &f.adjacency {
            if !(a.material_angle_deg > 0.0 && a.material_angle_deg < 360.0) {
                out.push(Violation::new(
                    id,
                    MaterialAngleOutOfRange,
                    format!("material angle {} towards {} not in (0, 360)", a.material_angle_deg, a.face),
                ));
            }
            if a.face == f.id {
                out.push(Violation::new(id, SelfAdjacency, "face lists itself as a neighbour"));
                continue;
            }
            match adjacency.get(a.face.as_str()) {
                None => out.push(Violation::new(id, UnknownNeighbor, format!("neighbour {} does not exist", a.face))),
                Some(back) if !back.contains(f.id.as_str()) => out.push(Violation::new(
                    id,
                    AsymmetricAdjacency,
                    format!("lists {} but {} does not list it back", a.face, a.face),
                )),
                Some(_) => {}
            }
        }
    }
    out.sort();
    out
}

/// Smallest axis-aligned box around all samples of a part.
pub fn bounding_box(part: &Part) -> Box3 {
    part.bounding_box()
}

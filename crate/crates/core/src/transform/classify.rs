//! Exclusive geometry-type classification.
//!
//! Tests run in a fixed precedence order and the first one within tolerance
//! wins, so every face lands in the most restrictive type it satisfies: a
//! plane is never reported as a ruled surface even though it is one.

use serde::{Deserialize, Serialize};

use super::fit::{fit_cone, fit_cylinder, fit_plane, ConeFit, CylinderFit, PlaneFit};
use super::Tolerances;
use crate::geometry::{grid_normals, Point3, Vec3};
use crate::part::SampledFace;
use crate::vocab::vocab_enum;

vocab_enum! {
    pub enum GeometryType {
        Plan,
        Cylinder,
        ConeShaped,
        Ruled,
        ConstRadiusSweep,
        Unspecified,
    }
}

/// Iso-parameter family of a grid: lines of constant row or constant column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsoFamily {
    /// Each grid row (fixed u, varying v) is one line.
    Rows,
    /// Each grid column (fixed v, varying u) is one line.
    Columns,
}

/// Parameters of the primitive that won the classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Plane(PlaneFit),
    Cylinder(CylinderFit),
    Cone(ConeFit),
    Ruled { ruling: Vec3, family: IsoFamily },
    Sweep { radius: f64, family: IsoFamily },
    Freeform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub geometry_type: GeometryType,
    pub fit_residual: f64,
    pub primitive: Primitive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuledTest {
    pub max_deviation: f64,
    pub family: IsoFamily,
    /// Mean unit direction of the straighter family, first to last sample.
    pub ruling: Vec3,
}

fn line(grid: &[Vec<Point3>], family: IsoFamily, k: usize) -> Vec<Point3> {
    match family {
        IsoFamily::Rows => grid[k].clone(),
        IsoFamily::Columns => grid.iter().map(|r| r[k]).collect(),
    }
}

fn line_count(grid: &[Vec<Point3>], family: IsoFamily) -> usize {
    match family {
        IsoFamily::Rows => grid.len(),
        IsoFamily::Columns => grid[0].len(),
    }
}

fn family_straightness(grid: &[Vec<Point3>], family: IsoFamily) -> (f64, Vec3) {
    let mut worst = 0.0f64;
    let mut dir_sum = Vec3::zeros();
    for k in 0..line_count(grid, family) {
        let pts = line(grid, family, k);
        let a = pts[0];
        let b = pts[pts.len() - 1];
        let ab = b - a;
        let len = ab.norm();
        if len <= 1e-12 {
            // a collapsed line is only straight if every sample coincides
            let spread = pts.iter().map(|p| (p - a).norm()).fold(0.0, f64::max);
            worst = worst.max(spread);
            continue;
        }
        let d = ab / len;
        dir_sum += d;
        for p in &pts[1..pts.len() - 1] {
            let t = (p - a).dot(&d).clamp(0.0, len);
            worst = worst.max((p - (a + d * t)).norm());
        }
    }
    (worst, dir_sum.try_normalize(1e-12).unwrap_or_else(Vec3::zeros))
}

/// Maximum deviation of the straighter iso-parameter family from the line
/// segments joining each line's end samples.
pub fn ruled_test(grid: &[Vec<Point3>]) -> RuledTest {
    let (dr, rr) = family_straightness(grid, IsoFamily::Rows);
    let (dc, rc) = family_straightness(grid, IsoFamily::Columns);
    if dr <= dc {
        RuledTest {
            max_deviation: dr,
            family: IsoFamily::Rows,
            ruling: rr,
        }
    } else {
        RuledTest {
            max_deviation: dc,
            family: IsoFamily::Columns,
            ruling: rc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepTest {
    /// Signed offset radius; negative when the spine lies on the normal side.
    pub radius: f64,
    /// Largest distance of an offset sample from its line's collapse point.
    pub spread: f64,
    pub family: IsoFamily,
}

/// Offsets interior samples by one common radius along their normals and
/// measures how well each iso-line collapses to a single point (the sweep
/// spine). The radius minimising the squared spread has a closed form.
pub fn sweep_test(grid: &[Vec<Point3>], tol: &Tolerances) -> Option<SweepTest> {
    let rows = grid.len();
    let cols = grid[0].len();
    if rows < 4 || cols < 4 {
        return None;
    }
    let normals = grid_normals(grid);
    let mut best: Option<SweepTest> = None;
    for family in [IsoFamily::Rows, IsoFamily::Columns] {
        let lines: Vec<Vec<(Point3, Vec3)>> = match family {
            IsoFamily::Rows => (1..rows - 1)
                .map(|i| (1..cols - 1).map(|j| (grid[i][j], normals[i][j])).collect())
                .collect(),
            IsoFamily::Columns => (1..cols - 1)
                .map(|j| (1..rows - 1).map(|i| (grid[i][j], normals[i][j])).collect())
                .collect(),
        };
        let mut num = 0.0;
        let mut den = 0.0;
        for l in &lines {
            let n = l.len() as f64;
            let pm = l.iter().fold(Vec3::zeros(), |a, (p, _)| a + p.coords) / n;
            let nm = l.iter().fold(Vec3::zeros(), |a, (_, v)| a + v) / n;
            for (p, v) in l {
                let dp = p.coords - pm;
                let dn = v - nm;
                num += dp.dot(&dn);
                den += dn.norm_squared();
            }
        }
        if den <= 1e-12 {
            continue;
        }
        let r = num / den;
        if !(tol.sweep_radius_min..=tol.sweep_radius_max).contains(&r.abs()) {
            continue;
        }
        let mut spread = 0.0f64;
        for l in &lines {
            let offs: Vec<Vec3> = l.iter().map(|(p, v)| p.coords - v * r).collect();
            let c = offs.iter().fold(Vec3::zeros(), |a, o| a + o) / offs.len() as f64;
            spread = offs.iter().map(|o| (o - c).norm()).fold(spread, f64::max);
        }
        if best.is_none_or(|b| spread < b.spread) {
            best = Some(SweepTest {
                radius: r,
                spread,
                family,
            });
        }
    }
    best
}

/// Classifies a face into exactly one geometry type.
///
/// Precedence: Plan, Cylinder, ConeShaped, Ruled, ConstRadiusSweep; the first
/// test whose residual is within its tolerance wins, otherwise Unspecified.
pub fn classify_face(face: &SampledFace, tol: &Tolerances) -> Classification {
    classify_grid(&face.grid, tol)
}

pub fn classify_grid(grid: &[Vec<Point3>], tol: &Tolerances) -> Classification {
    let plane = fit_plane(grid).ok();
    if let Some(p) = plane.filter(|p| p.rms_residual <= tol.plane) {
        return Classification {
            geometry_type: GeometryType::Plan,
            fit_residual: p.rms_residual,
            primitive: Primitive::Plane(p),
        };
    }
    if let Ok(c) = fit_cylinder(grid) {
        if c.rms_residual <= tol.cylinder {
            return Classification {
                geometry_type: GeometryType::Cylinder,
                fit_residual: c.rms_residual,
                primitive: Primitive::Cylinder(c),
            };
        }
    }
    if let Ok(c) = fit_cone(grid) {
        if c.rms_residual <= tol.cone {
            return Classification {
                geometry_type: GeometryType::ConeShaped,
                fit_residual: c.rms_residual,
                primitive: Primitive::Cone(c),
            };
        }
    }
    let ruled = ruled_test(grid);
    if ruled.max_deviation <= tol.ruled && ruled.ruling.norm() > 0.5 {
        return Classification {
            geometry_type: GeometryType::Ruled,
            fit_residual: ruled.max_deviation,
            primitive: Primitive::Ruled {
                ruling: ruled.ruling,
                family: ruled.family,
            },
        };
    }
    if let Some(s) = sweep_test(grid, tol).filter(|s| s.spread <= tol.sweep) {
        return Classification {
            geometry_type: GeometryType::ConstRadiusSweep,
            fit_residual: s.spread,
            primitive: Primitive::Sweep {
                radius: s.radius.abs(),
                family: s.family,
            },
        };
    }
    Classification {
        geometry_type: GeometryType::Unspecified,
        fit_residual: plane.map_or(0.0, |p| p.rms_residual),
        primitive: Primitive::Freeform,
    }
}

//! Openness, accessibility directions, accessibility dimensions and the
//! potential manufacturing types deduced from them.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::classify::{Classification, GeometryType, Primitive};
use super::fit::{cone_normal, cylinder_normal};
use super::{FaceAttributes, Tolerances};
use crate::geometry::{
    angle_between, grid_normals, interior_nodes, orthonormal_frame, unit, vector_area, Box3, Point3, TriangleSoup,
    Vec3,
};
use crate::part::{Part, SampledFace};
use crate::vocab::vocab_enum;

vocab_enum! {
    pub enum Openness {
        Open,
        Closed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeOpenness {
    pub neighbor: String,
    pub material_angle_deg: f64,
    pub openness: Openness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceOpenness {
    pub aggregate: Openness,
    pub edges: Vec<EdgeOpenness>,
}

/// Edge openness: strictly less than 180 degrees of material is open.
pub fn edge_openness(material_angle_deg: f64) -> Openness {
    if material_angle_deg < 180.0 {
        Openness::Open
    } else {
        Openness::Closed
    }
}

/// Per-edge openness plus the aggregate (open iff every edge is open).
pub fn compute_openness(face: &SampledFace) -> FaceOpenness {
    let edges: Vec<EdgeOpenness> = face
        .adjacency
        .iter()
        .map(|a| EdgeOpenness {
            neighbor: a.face.clone(),
            material_angle_deg: a.material_angle_deg,
            openness: edge_openness(a.material_angle_deg),
        })
        .collect();
    let aggregate = if edges.iter().all(|e| e.openness == Openness::Open) {
        Openness::Open
    } else {
        Openness::Closed
    };
    FaceOpenness { aggregate, edges }
}

vocab_enum! {
    pub enum AccessKind {
        SingleVector,
        TwoOppositeVectors,
        NVectors,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessDirection {
    pub direction: Vec3,
    pub kind: AccessKind,
    pub compulsory: bool,
}

vocab_enum! {
    pub enum MfgType {
        EndManufacturing,
        FlankManufacturing,
        Sweeping,
        Drilling,
    }
}

/// Smallest concave radius of curvature, or unbounded for faces without
/// concavity. Serialised as a number or the string `"unbounded"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum FilletRadius {
    Finite(f64),
    Unbounded,
}

impl FilletRadius {
    /// Numeric view, `+inf` when unbounded.
    pub fn value(self) -> f64 {
        match self {
            FilletRadius::Finite(r) => r,
            FilletRadius::Unbounded => f64::INFINITY,
        }
    }
}

impl Serialize for FilletRadius {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FilletRadius::Finite(r) => s.serialize_f64(*r),
            FilletRadius::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for FilletRadius {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = FilletRadius;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive radius or \"unbounded\"")
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<FilletRadius, E> {
                if v > 0.0 {
                    Ok(FilletRadius::Finite(v))
                } else {
                    Err(E::custom("fillet radius must be positive"))
                }
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<FilletRadius, E> {
                self.visit_f64(v as f64)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<FilletRadius, E> {
                self.visit_f64(v as f64)
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<FilletRadius, E> {
                if v == "unbounded" {
                    Ok(FilletRadius::Unbounded)
                } else {
                    Err(E::custom(format!("unknown fillet radius {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Accessibility dimensions measured along one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalDimensions {
    pub direction: Vec3,
    /// Smaller side of the minimal-area rectangle of the projected face.
    pub end_accessibility: f64,
    /// Longer side of that rectangle.
    pub flank_accessibility: f64,
    /// Depth of the face below the part's entry plane along the direction.
    pub global_accessibility: f64,
    /// Extent of the face itself along the direction.
    pub axial_extent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessDimensions {
    #[serde(flatten)]
    pub directional: DirectionalDimensions,
    pub min_fillet_radius: FilletRadius,
    pub dimension_box: Box3,
}

/// Part-level data shared by every face's accessibility analysis.
pub(crate) struct PartContext {
    pub part_box: Box3,
    soups: Vec<TriangleSoup>,
    raw_mean_normals: Vec<Option<Vec3>>,
    index: std::collections::BTreeMap<String, usize>,
}

impl PartContext {
    pub fn new(part: &Part) -> Self {
        PartContext {
            part_box: part.bounding_box(),
            soups: part.faces.iter().map(|f| TriangleSoup::from_grid(&f.grid)).collect(),
            raw_mean_normals: part
                .faces
                .iter()
                .map(|f| unit(&vector_area(&f.grid).0))
                .collect(),
            index: part.faces.iter().enumerate().map(|(i, f)| (f.id.clone(), i)).collect(),
        }
    }

    fn occluded(&self, own: usize, origin: &Point3, dir: &Vec3, clearance: f64) -> bool {
        self.soups
            .iter()
            .enumerate()
            .any(|(k, s)| k != own && s.ray_hits(origin, dir, clearance))
    }
}

/// Unit normals at every sample, taken from the fitted primitive when there is
/// one and from grid differences otherwise. Oriented away from the material.
pub fn sample_normals(face: &SampledFace, class: &Classification) -> Vec<Vec3> {
    let fd: Vec<Vec3> = grid_normals(&face.grid).into_iter().flatten().collect();
    let pts: Vec<Point3> = face.points().copied().collect();
    let analytic: Option<Vec<Vec3>> = match &class.primitive {
        Primitive::Plane(p) => Some(vec![p.normal; pts.len()]),
        Primitive::Cylinder(c) => pts.iter().map(|x| cylinder_normal(c, x)).collect(),
        Primitive::Cone(c) => pts.iter().map(|x| cone_normal(c, x)).collect(),
        _ => None,
    };
    match analytic {
        Some(ns) => {
            let agree: f64 = ns.iter().zip(&fd).map(|(a, b)| a.dot(b)).sum();
            let sign = if agree < 0.0 { -1.0 } else { 1.0 };
            ns.into_iter().map(|n| n * sign).collect()
        }
        None => fd.into_iter().filter(|n| n.norm() > 0.5).collect(),
    }
}

fn snap(v: Vec3) -> Vec3 {
    let s = v.map(|c| if c.abs() < 1e-12 { 0.0 } else { c });
    s.try_normalize(1e-300).unwrap_or(s)
}

/// Area-weighted mean unit normal, when the normals do not cancel out.
pub(crate) fn mean_normal(face: &SampledFace) -> Option<Vec3> {
    let (sum, total) = vector_area(&face.grid);
    (total > 0.0 && sum.norm() > 0.1 * total).then(|| snap(sum.normalize()))
}

fn axis_of(primitive: &Primitive) -> Option<Vec3> {
    match primitive {
        Primitive::Cylinder(c) => Some(c.axis),
        Primitive::Cone(c) => Some(c.axis),
        Primitive::Ruled { ruling, .. } => Some(*ruling),
        _ => None,
    }
}

struct Candidate {
    dir: Vec3,
    ring_slot: Option<usize>,
}

fn push_unique(list: &mut Vec<Candidate>, dir: Vec3, ring_slot: Option<usize>) {
    let dir = snap(dir);
    if list.iter().all(|c| angle_between(&c.dir, &dir) > 1e-6) {
        list.push(Candidate { dir, ring_slot });
    }
}

pub(crate) fn access_directions_in(
    ctx: &PartContext,
    part: &Part,
    own: usize,
    class: &Classification,
    normals: &[Vec3],
    tol: &Tolerances,
) -> Vec<AccessDirection> {
    let face = &part.faces[own];
    let mut cands: Vec<Candidate> = Vec::new();
    let m = mean_normal(face);
    if let Some(m) = m {
        push_unique(&mut cands, m, None);
        push_unique(&mut cands, -m, None);
    }
    match class.geometry_type {
        GeometryType::Plan => {
            // flank directions run along concave neighbours lying in the plane
            if let Primitive::Plane(p) = &class.primitive {
                for a in &face.adjacency {
                    if edge_openness(a.material_angle_deg) != Openness::Closed {
                        continue;
                    }
                    let Some(&k) = ctx.index.get(&a.face) else { continue };
                    if let Some(nn) = ctx.raw_mean_normals[k] {
                        if nn.dot(&p.normal).abs() <= tol.normal_cone_eps {
                            push_unique(&mut cands, nn - p.normal * nn.dot(&p.normal), None);
                        }
                    }
                }
            }
        }
        GeometryType::Ruled | GeometryType::Cylinder | GeometryType::ConeShaped => {
            if let Some(ax) = axis_of(&class.primitive) {
                push_unique(&mut cands, ax, None);
                push_unique(&mut cands, -ax, None);
                if class.geometry_type != GeometryType::Ruled {
                    let (e1, e2) = orthonormal_frame(&ax);
                    for s in 0..tol.ring_probes {
                        let t = std::f64::consts::TAU * s as f64 / tol.ring_probes as f64;
                        push_unique(&mut cands, e1 * t.cos() + e2 * t.sin(), Some(s));
                    }
                }
            }
        }
        _ => {}
    }

    // origins sit just off the surface so in-plane rays cannot slip through
    // the shared edge of a neighbour lying in the same plane
    let fd = grid_normals(&face.grid);
    let origins: Vec<Point3> = interior_nodes(face.rows(), face.cols())
        .into_iter()
        .map(|(i, j)| face.grid[i][j] + fd[i][j] * tol.occlusion_clearance)
        .collect();
    let admissible: Vec<&Candidate> = cands
        .iter()
        .filter(|c| normals.iter().all(|n| n.dot(&c.dir) >= -tol.normal_cone_eps))
        .filter(|c| {
            !origins
                .iter()
                .any(|o| ctx.occluded(own, o, &c.dir, tol.occlusion_clearance))
        })
        .collect();

    let ring_continuum = tol.ring_probes > 1 && {
        let slots: Vec<usize> = admissible.iter().filter_map(|c| c.ring_slot).collect();
        slots
            .iter()
            .any(|&s| slots.contains(&((s + 1) % tol.ring_probes)))
    };
    let kind = if ring_continuum {
        AccessKind::NVectors
    } else if admissible.len() == 1 {
        AccessKind::SingleVector
    } else if admissible.len() == 2 && admissible[0].dir.dot(&admissible[1].dir) < -1.0 + 1e-9 {
        AccessKind::TwoOppositeVectors
    } else {
        AccessKind::NVectors
    };
    let compulsory = admissible.len() == 1;
    admissible
        .iter()
        .map(|c| AccessDirection {
            direction: c.dir,
            kind,
            compulsory,
        })
        .collect()
}

/// Admissible access directions of one face within its part.
///
/// A candidate direction is admissible when no sample normal points against
/// it by more than the normal-cone tolerance and no ray cast from the face's
/// interior samples along it hits another face.
pub fn compute_access_directions(
    face: &SampledFace,
    part: &Part,
    class: &Classification,
    tol: &Tolerances,
) -> Vec<AccessDirection> {
    let ctx = PartContext::new(part);
    let own = part
        .faces
        .iter()
        .position(|f| f.id == face.id)
        .expect("face belongs to part");
    let normals = sample_normals(&part.faces[own], class);
    access_directions_in(&ctx, part, own, class, &normals, tol)
}

fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let half = |it: &mut dyn Iterator<Item = &(f64, f64)>| {
        let mut h: Vec<(f64, f64)> = Vec::new();
        for &p in it {
            while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], p) <= 1e-12 {
                h.pop();
            }
            h.push(p);
        }
        h.pop();
        h
    };
    let mut hull = half(&mut pts.iter());
    hull.extend(half(&mut pts.iter().rev()));
    if hull.len() < 3 {
        // collinear input: keep the two extremes
        return vec![pts[0], pts[pts.len() - 1]];
    }
    hull
}

/// Sides of the minimal-area enclosing rectangle, `(short, long)`.
pub fn min_area_rectangle(points: &[(f64, f64)]) -> (f64, f64) {
    let hull = convex_hull(points.to_vec());
    if hull.len() < 2 {
        return (0.0, 0.0);
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for k in 0..hull.len() {
        let a = hull[k];
        let b = hull[(k + 1) % hull.len()];
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len = dx.hypot(dy);
        if len <= 1e-12 {
            continue;
        }
        let (ux, uy) = (dx / len, dy / len);
        let (mut lo_u, mut hi_u, mut lo_v, mut hi_v) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &hull {
            let su = p.0 * ux + p.1 * uy;
            let sv = -p.0 * uy + p.1 * ux;
            lo_u = lo_u.min(su);
            hi_u = hi_u.max(su);
            lo_v = lo_v.min(sv);
            hi_v = hi_v.max(sv);
        }
        let (w, h) = (hi_u - lo_u, hi_v - lo_v);
        let area = w * h;
        if best.is_none_or(|(a0, _, _)| area < a0 - 1e-12) {
            best = Some((area, w.min(h), w.max(h)));
        }
    }
    best.map_or((0.0, 0.0), |(_, s, l)| (s, l))
}

pub(crate) fn directional_dimensions(face: &SampledFace, part_box: &Box3, d: &Vec3) -> DirectionalDimensions {
    let (e1, e2) = orthonormal_frame(d);
    let projected: Vec<(f64, f64)> = face.points().map(|p| (p.coords.dot(&e1), p.coords.dot(&e2))).collect();
    let (end, flank) = min_area_rectangle(&projected);
    let heights: Vec<f64> = face.points().map(|p| p.coords.dot(d)).collect();
    let top = heights.iter().copied().fold(f64::MIN, f64::max);
    let bottom = heights.iter().copied().fold(f64::MAX, f64::min);
    let entry = part_box
        .corners()
        .iter()
        .map(|c| c.coords.dot(d))
        .fold(f64::MIN, f64::max);
    DirectionalDimensions {
        direction: *d,
        end_accessibility: end,
        flank_accessibility: flank,
        global_accessibility: (entry - top).max(0.0),
        axial_extent: top - bottom,
    }
}

/// Smallest concave principal radius of curvature over the interior samples,
/// from finite differences on the grid.
pub fn min_fillet_radius(face: &SampledFace) -> FilletRadius {
    let g = &face.grid;
    if face.rows() < 3 || face.cols() < 3 {
        return FilletRadius::Unbounded;
    }
    let mut best = f64::INFINITY;
    for i in 1..face.rows() - 1 {
        for j in 1..face.cols() - 1 {
            let pu = (g[i + 1][j] - g[i - 1][j]) * 0.5;
            let pv = (g[i][j + 1] - g[i][j - 1]) * 0.5;
            let Some(n) = unit(&pu.cross(&pv)) else { continue };
            let puu = g[i + 1][j].coords - g[i][j].coords * 2.0 + g[i - 1][j].coords;
            let pvv = g[i][j + 1].coords - g[i][j].coords * 2.0 + g[i][j - 1].coords;
            let puv = (g[i + 1][j + 1] - g[i + 1][j - 1] - (g[i - 1][j + 1] - g[i - 1][j - 1])) * 0.25;
            let (e, f, gg) = (pu.dot(&pu), pu.dot(&pv), pv.dot(&pv));
            let (l, m, nn) = (puu.dot(&n), puv.dot(&n), pvv.dot(&n));
            let a = e * gg - f * f;
            if a <= 1e-300 {
                continue;
            }
            let b = e * nn + gg * l - 2.0 * f * m;
            let c = l * nn - m * m;
            let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
            let kmax = (b + disc) / (2.0 * a);
            if kmax > 1e-4 {
                best = best.min(1.0 / kmax);
            }
        }
    }
    if best.is_finite() {
        FilletRadius::Finite(best)
    } else {
        FilletRadius::Unbounded
    }
}

/// End, flank and global accessibility along `d`, plus the direction-free
/// fillet radius and dimension box.
pub fn compute_access_dimensions(face: &SampledFace, part: &Part, d: &Vec3) -> AccessDimensions {
    AccessDimensions {
        directional: directional_dimensions(face, &part.bounding_box(), d),
        min_fillet_radius: min_fillet_radius(face),
        dimension_box: face.bounding_box(),
    }
}

fn parallel(a: &Vec3, b: &Vec3, eps: f64) -> bool {
    let ang = angle_between(a, b);
    ang <= eps || std::f64::consts::PI - ang <= eps
}

/// Potential manufacturing types deduced from the accessibility results.
///
/// * End manufacturing: an access direction along the mean face normal.
/// * Flank manufacturing: a ruled, cylindrical or conical face whose ruling or
///   axis is an access direction, or a planar face with an access direction
///   lying in its plane.
/// * Sweeping: unspecified and constant-radius sweep faces.
/// * Drilling (in addition): a closed cylinder whose axis is an access
///   direction.
pub fn deduce_mfg_types(attrs: &FaceAttributes, eps: f64) -> Vec<MfgType> {
    let mut out = Vec::new();
    if attrs.access.is_empty() {
        return out;
    }
    let dirs: Vec<Vec3> = attrs.access.iter().map(|a| a.direction).collect();
    if let Some(m) = attrs.mean_normal {
        if dirs.iter().any(|d| angle_between(d, &m) <= eps) {
            out.push(MfgType::EndManufacturing);
        }
    }
    let axis = axis_of(&attrs.primitive);
    let flank = match attrs.geometry_type {
        GeometryType::Ruled | GeometryType::Cylinder | GeometryType::ConeShaped => {
            axis.is_some_and(|ax| dirs.iter().any(|d| parallel(d, &ax, eps)))
        }
        GeometryType::Plan => attrs
            .mean_normal
            .is_some_and(|m| dirs.iter().any(|d| d.dot(&m).abs() <= eps.sin())),
        _ => false,
    };
    if flank {
        out.push(MfgType::FlankManufacturing);
    }
    if matches!(
        attrs.geometry_type,
        GeometryType::Unspecified | GeometryType::ConstRadiusSweep
    ) {
        out.push(MfgType::Sweeping);
    }
    if attrs.geometry_type == GeometryType::Cylinder
        && attrs.openness == Openness::Closed
        && axis.is_some_and(|ax| dirs.iter().any(|d| parallel(d, &ax, eps)))
    {
        out.push(MfgType::Drilling);
    }
    out.sort();
    out
}

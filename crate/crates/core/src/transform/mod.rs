//! Transformation phase: classify every face and compute the attributes the
//! knowledge base reasons about.

pub mod access;
pub mod classify;
pub mod fit;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use access::{
    compute_access_dimensions, compute_access_directions, compute_openness, deduce_mfg_types, edge_openness,
    min_fillet_radius, AccessDimensions, AccessDirection, AccessKind, DirectionalDimensions, EdgeOpenness,
    FaceOpenness, FilletRadius, MfgType, Openness,
};
pub use classify::{classify_face, classify_grid, Classification, GeometryType, IsoFamily, Primitive};
pub use fit::{fit_cone, fit_cylinder, fit_plane, ConeFit, CylinderFit, FitError, PlaneFit};

use crate::geometry::{Box3, Vec3};
use crate::part::Part;
use access::{access_directions_in, directional_dimensions, mean_normal, sample_normals, PartContext};

/// Thresholds of the transformation phase, all in millimetres or radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// RMS residual for the plane test.
    pub plane: f64,
    pub cylinder: f64,
    pub cone: f64,
    /// Maximum deviation of the straighter iso-family from line segments.
    pub ruled: f64,
    /// Collapse spread for the constant-radius sweep test.
    pub sweep: f64,
    pub sweep_radius_min: f64,
    pub sweep_radius_max: f64,
    /// Slack on `n . d >= 0` and angular tolerance for parallelism tests.
    pub normal_cone_eps: f64,
    /// Ray hits closer than this to the origin are ignored.
    pub occlusion_clearance: f64,
    /// Directions probed around cylinder and cone axes.
    pub ring_probes: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            plane: 1e-3,
            cylinder: 1e-3,
            cone: 1e-3,
            ruled: 1e-3,
            sweep: 1e-2,
            sweep_radius_min: 0.1,
            sweep_radius_max: 1e3,
            normal_cone_eps: 1e-3,
            occlusion_clearance: 1e-3,
            ring_probes: 24,
        }
    }
}

/// Everything the transformation phase knows about one face.
///
/// The scalar accessibility fields come from the access direction with the
/// smallest global accessibility (`primary_direction`); the values for every
/// admissible direction are kept in `per_direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceAttributes {
    pub face: String,
    pub geometry_type: GeometryType,
    pub fit_residual: f64,
    pub primitive: Primitive,
    pub mean_normal: Option<Vec3>,
    pub openness: Openness,
    pub edges: Vec<EdgeOpenness>,
    pub access: Vec<AccessDirection>,
    pub inaccessible: bool,
    pub primary_direction: Option<Vec3>,
    pub end_accessibility: f64,
    pub flank_accessibility: f64,
    pub global_accessibility: f64,
    pub axial_extent: f64,
    pub min_fillet_radius: FilletRadius,
    pub dimension_box: Box3,
    pub per_direction: Vec<DirectionalDimensions>,
    pub potential_mfg_types: Vec<MfgType>,
}

impl FaceAttributes {
    pub fn access_kind(&self) -> Option<AccessKind> {
        self.access.first().map(|a| a.kind)
    }

    pub fn compulsory(&self) -> bool {
        self.access.first().is_some_and(|a| a.compulsory)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformOutput {
    pub part: String,
    /// Face count per geometry type; every type is present.
    pub synthesis: BTreeMap<GeometryType, usize>,
    pub faces: Vec<FaceAttributes>,
    pub inaccessible: Vec<String>,
}

impl TransformOutput {
    pub fn face(&self, id: &str) -> Option<&FaceAttributes> {
        self.faces.iter().find(|f| f.face == id)
    }
}

fn analyse_face(ctx: &PartContext, part: &Part, idx: usize, tol: &Tolerances) -> FaceAttributes {
    let face = &part.faces[idx];
    let class = classify_face(face, tol);
    let normals = sample_normals(face, &class);
    let openness = compute_openness(face);
    let access = access_directions_in(ctx, part, idx, &class, &normals, tol);
    let mean = mean_normal(face);
    let per_direction: Vec<DirectionalDimensions> = access
        .iter()
        .map(|a| directional_dimensions(face, &ctx.part_box, &a.direction))
        .collect();
    let primary = per_direction
        .iter()
        .min_by(|a, b| a.global_accessibility.total_cmp(&b.global_accessibility))
        .copied()
        .unwrap_or_else(|| directional_dimensions(face, &ctx.part_box, &mean.unwrap_or_else(Vec3::z)));
    let mut attrs = FaceAttributes {
        face: face.id.clone(),
        geometry_type: class.geometry_type,
        fit_residual: class.fit_residual,
        primitive: class.primitive,
        mean_normal: mean,
        openness: openness.aggregate,
        edges: openness.edges,
        inaccessible: access.is_empty(),
        primary_direction: (!access.is_empty()).then_some(primary.direction),
        access,
        end_accessibility: primary.end_accessibility,
        flank_accessibility: primary.flank_accessibility,
        global_accessibility: primary.global_accessibility,
        axial_extent: primary.axial_extent,
        min_fillet_radius: min_fillet_radius(face),
        dimension_box: face.bounding_box(),
        per_direction,
        potential_mfg_types: vec![],
    };
    attrs.potential_mfg_types = deduce_mfg_types(&attrs, tol.normal_cone_eps);
    attrs
}

/// A face bounded by a concave cylindrical or swept blend across a closed
/// edge inherits the blend's radius when it is smaller than its own.
fn blend_fillet_radii(part: &Part, mut faces: Vec<FaceAttributes>) -> Vec<FaceAttributes> {
    let own: Vec<f64> = faces.iter().map(|f| f.min_fillet_radius.value()).collect();
    let faces_type: Vec<GeometryType> = faces.iter().map(|f| f.geometry_type).collect();
    let index = part.face_index();
    for (i, f) in faces.iter_mut().enumerate() {
        let mut r = own[i];
        for adj in &part.faces[i].adjacency {
            if edge_openness(adj.material_angle_deg) != Openness::Closed {
                continue;
            }
            let Some(&k) = index.get(adj.face.as_str()) else { continue };
            if matches!(
                faces_type[k],
                GeometryType::Cylinder | GeometryType::ConstRadiusSweep
            ) {
                r = r.min(own[k]);
            }
        }
        if r.is_finite() {
            f.min_fillet_radius = FilletRadius::Finite(r);
        }
    }
    faces
}

/// Runs classification, openness, accessibility and manufacturing-type
/// deduction over every face of a validated part.
pub fn transform_part(part: &Part, tol: &Tolerances) -> TransformOutput {
    let ctx = PartContext::new(part);
    let faces: Vec<FaceAttributes> = (0..part.faces.len())
        .into_par_iter()
        .map(|i| analyse_face(&ctx, part, i, tol))
        .collect();
    let faces = blend_fillet_radii(part, faces);
    let mut synthesis: BTreeMap<GeometryType, usize> = GeometryType::ALL.iter().map(|t| (*t, 0)).collect();
    for f in &faces {
        *synthesis.entry(f.geometry_type).or_default() += 1;
    }
    TransformOutput {
        part: part.id.clone(),
        synthesis,
        inaccessible: faces.iter().filter(|f| f.inaccessible).map(|f| f.face.clone()).collect(),
        faces,
    }
}

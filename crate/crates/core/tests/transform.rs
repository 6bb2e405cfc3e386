use proptest::prelude::*;

use ose_planner::fixtures::{
    bracket, cone_flank, curved_web, fillet_blend, isolated_block, pump_carter, ruled_slot, sealed_cavity,
};
use ose_planner::transform::access::min_area_rectangle;
use ose_planner::transform::{
    edge_openness, transform_part, AccessKind, FaceAttributes, FilletRadius, GeometryType, MfgType, Openness,
    Tolerances, TransformOutput,
};

fn run(part: ose_planner::part::Part) -> TransformOutput {
    transform_part(&part, &Tolerances::default())
}

fn face<'a>(out: &'a TransformOutput, id: &str) -> &'a FaceAttributes {
    out.face(id).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn material_angle_threshold() {
    assert_eq!(edge_openness(90.0), Openness::Open);
    assert_eq!(edge_openness(179.9), Openness::Open);
    assert_eq!(edge_openness(180.0), Openness::Closed);
    assert_eq!(edge_openness(270.0), Openness::Closed);
}

#[test]
fn block_faces_have_their_own_normal() {
    let out = run(isolated_block(20.0, 50.0, 10.0));
    for f in &out.faces {
        assert_eq!(f.geometry_type, GeometryType::Plan);
        assert_eq!(f.openness, Openness::Open);
        assert_eq!(f.access_kind(), Some(AccessKind::SingleVector));
        let d = f.access[0].direction;
        let n = f.mean_normal.unwrap();
        assert!(d.dot(&n) > 1.0 - 1e-9, "{}", f.face);
        assert_eq!(f.potential_mfg_types, vec![MfgType::EndManufacturing]);
        assert_eq!(f.global_accessibility, 0.0);
    }
    let top = face(&out, "TOP");
    assert!(close(top.end_accessibility, 20.0, 1e-9));
    assert!(close(top.flank_accessibility, 50.0, 1e-9));
}

#[test]
fn sealed_cavity_is_inaccessible() {
    let out = run(sealed_cavity());
    let c = face(&out, "CAVITY");
    assert!(c.inaccessible);
    assert!(c.access.is_empty());
    assert!(c.potential_mfg_types.is_empty());
    assert_eq!(out.inaccessible, vec!["CAVITY".to_string()]);
}

#[test]
fn curved_web_has_two_opposite_directions() {
    let out = run(curved_web());
    let w = face(&out, "WEB");
    assert_eq!(w.geometry_type, GeometryType::Ruled);
    assert_eq!(w.access_kind(), Some(AccessKind::TwoOppositeVectors));
    assert_eq!(w.access.len(), 2);
    assert!(close(w.access[0].direction.dot(&w.access[1].direction), -1.0, 1e-9));
    assert!(w.potential_mfg_types.contains(&MfgType::FlankManufacturing));
}

#[test]
fn external_cone_has_many_directions() {
    let out = run(cone_flank());
    let c = face(&out, "CONE");
    assert_eq!(c.geometry_type, GeometryType::ConeShaped);
    assert_eq!(c.access_kind(), Some(AccessKind::NVectors));
    assert!(c.access.len() > 2);
}

#[test]
fn fillet_radius_is_recovered() {
    let out = run(fillet_blend());
    let f = face(&out, "FILLET");
    assert_eq!(f.geometry_type, GeometryType::Cylinder);
    let FilletRadius::Finite(r) = f.min_fillet_radius else {
        panic!("fillet has no finite radius")
    };
    assert!(close(r, 3.0, 0.15), "{r}");
    for id in ["FLOOR", "WALL"] {
        let FilletRadius::Finite(r) = face(&out, id).min_fillet_radius else {
            panic!("{id} does not inherit the fillet radius")
        };
        assert!(close(r, 3.0, 0.15), "{id} {r}");
    }
}

#[test]
fn ruled_slot_wall_is_flank_machined() {
    let out = run(ruled_slot());
    let w = face(&out, "RULED_WALL");
    assert_eq!(w.geometry_type, GeometryType::Ruled);
    assert_eq!(w.potential_mfg_types, vec![MfgType::FlankManufacturing]);
    assert_eq!(face(&out, "SLOT_FLOOR").potential_mfg_types, vec![MfgType::EndManufacturing]);
}

#[test]
fn pump_carter_pocket_dimensions() {
    let out = run(pump_carter());
    let floor = face(&out, "FLOOR");
    assert!(close(floor.global_accessibility, 30.0, 1e-6), "{}", floor.global_accessibility);
    assert_eq!(floor.openness, Openness::Closed);
    assert_eq!(floor.access_kind(), Some(AccessKind::SingleVector));
    assert!(floor.compulsory());

    let bore = face(&out, "BORE");
    assert_eq!(bore.access_kind(), Some(AccessKind::SingleVector));
    assert!(bore.potential_mfg_types.contains(&MfgType::Drilling));
    assert!(close(bore.access[0].direction.z, 1.0, 1e-9));

    let torus = face(&out, "TORUS");
    assert!(torus.potential_mfg_types.contains(&MfgType::Sweeping));

    for wall in ["WALL_W", "WALL_S", "WALL_N", "WALL_E"] {
        let w = face(&out, wall);
        assert_eq!(w.potential_mfg_types, vec![MfgType::FlankManufacturing], "{wall}");
        assert!(close(w.axial_extent, 30.0, 1e-6), "{wall} {}", w.axial_extent);
    }
}

#[test]
fn bracket_inner_corner_sees_two_directions() {
    let out = run(bracket());
    for id in ["BASE_TOP", "UP_INNER"] {
        let f = face(&out, id);
        assert_eq!(f.openness, Openness::Closed);
        assert_eq!(f.access.len(), 2, "{id}");
    }
}

#[test]
fn transform_is_deterministic() {
    let a = serde_json::to_string(&run(pump_carter())).unwrap();
    let b = serde_json::to_string(&run(pump_carter())).unwrap();
    assert_eq!(a, b);
}

/// Minimum over a fine sweep of rotation angles of the bounding-box area.
fn rectangle_oracle(points: &[(f64, f64)]) -> f64 {
    (0..=18_000)
        .map(|k| {
            let a = std::f64::consts::FRAC_PI_2 * k as f64 / 18_000.0;
            let (c, s) = (a.cos(), a.sin());
            let (mut lo_u, mut hi_u, mut lo_v, mut hi_v) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for &(x, y) in points {
                let u = c * x + s * y;
                let v = -s * x + c * y;
                lo_u = lo_u.min(u);
                hi_u = hi_u.max(u);
                lo_v = lo_v.min(v);
                hi_v = hi_v.max(v);
            }
            (hi_u - lo_u) * (hi_v - lo_v)
        })
        .fold(f64::MAX, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn min_area_rectangle_matches_rotation_sweep(
        points in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..30)
    ) {
        let (short, long) = min_area_rectangle(&points);
        prop_assert!(short <= long + 1e-12);
        let oracle = rectangle_oracle(&points);
        // the sweep overestimates by at most the angular step
        prop_assert!(short * long <= oracle + 1e-6, "{} > {}", short * long, oracle);
        prop_assert!(short * long >= oracle * (1.0 - 1e-3) - 1e-6, "{} < {}", short * long, oracle);
    }

    #[test]
    fn collinear_points_give_a_segment(
        a in -50.0f64..50.0, b in -50.0f64..50.0, dx in -1.0f64..1.0, dy in -1.0f64..1.0,
        ts in prop::collection::vec(-20.0f64..20.0, 2..12)
    ) {
        prop_assume!(dx.abs() + dy.abs() > 0.1);
        let pts: Vec<(f64, f64)> = ts.iter().map(|t| (a + t * dx, b + t * dy)).collect();
        let (short, long) = min_area_rectangle(&pts);
        let span = (ts.iter().cloned().fold(f64::MIN, f64::max) - ts.iter().cloned().fold(f64::MAX, f64::min))
            * (dx * dx + dy * dy).sqrt();
        prop_assert!(short.abs() < 1e-9);
        prop_assert!((long - span).abs() < 1e-9 * span.max(1.0));
    }
}

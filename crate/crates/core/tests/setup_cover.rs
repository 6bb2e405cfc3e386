//! Greedy setup construction against an exhaustive minimum cover.

mod common;

use common::cover_oracle::{exact_min_cover, feasibility};
use nalgebra::Vector3;
use proptest::prelude::*;

use ose_planner::fixtures::all_parts;
use ose_planner::setup::{build_setups, FaceAccess, SetupResult};
use ose_planner::transform::{transform_part, Tolerances};

fn assert_feasible(faces: &[FaceAccess], r: &SetupResult) {
    if let Err(e) = feasibility(faces, r) {
        panic!("{e}");
    }
}

type Vec3 = Vector3<f64>;

#[test]
fn greedy_equals_exact_on_small_fixtures() {
    let mut checked = 0;
    for part in all_parts().into_iter().filter(|p| p.faces.len() <= 12) {
        let attrs = transform_part(&part, &Tolerances::default());
        let faces: Vec<FaceAccess> = attrs.faces.iter().map(FaceAccess::from_attributes).collect();
        let r = build_setups(&faces);
        assert_feasible(&faces, &r);
        assert_eq!(r.setups.len(), exact_min_cover(&faces), "part {}", part.id);
        checked += 1;
    }
    assert!(checked >= 6);
}

#[test]
fn pump_carter_setups_are_feasible() {
    let part = ose_planner::fixtures::pump_carter();
    let attrs = transform_part(&part, &Tolerances::default());
    let faces: Vec<FaceAccess> = attrs.faces.iter().map(FaceAccess::from_attributes).collect();
    let r = build_setups(&faces);
    assert_feasible(&faces, &r);
    assert!(r.setups.len() >= exact_min_cover(&faces));
}

fn axis(k: usize) -> Vec3 {
    [
        Vec3::x(),
        -Vec3::x(),
        Vec3::y(),
        -Vec3::y(),
        Vec3::z(),
        -Vec3::z(),
        Vec3::new(1.0, 1.0, 0.0).normalize(),
        Vec3::new(0.0, 1.0, 1.0).normalize(),
    ][k]
}

fn instance() -> impl Strategy<Value = Vec<FaceAccess>> {
    prop::collection::vec((prop::collection::btree_set(0usize..8, 0..4), any::<bool>()), 1..12).prop_map(|specs| {
        specs
            .into_iter()
            .enumerate()
            .map(|(i, (dirs, compulsory))| FaceAccess {
                face: format!("F{i}"),
                directions: dirs.into_iter().map(axis).collect(),
                compulsory,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn greedy_is_feasible_and_bounded(faces in instance()) {
        let r = build_setups(&faces);
        assert_feasible(&faces, &r);
        let exact = exact_min_cover(&faces);
        prop_assert!(r.setups.len() >= exact);
        // harmonic bound of greedy set cover, 12 faces at most
        prop_assert!(r.setups.len() as f64 <= exact as f64 * 3.11 + 1e-9);
    }

    #[test]
    fn setups_ignore_face_order(faces in instance()) {
        let r1 = build_setups(&faces);
        let mut rev = faces.clone();
        rev.reverse();
        let r2 = build_setups(&rev);
        prop_assert_eq!(r1.setups.len(), r2.setups.len());
    }
}

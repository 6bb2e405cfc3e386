//! `match_face` against an exhaustive enumeration of (OSE, cutting set)
//! pairs that re-derives every acceptance rule directly from the data.

mod common;

use std::time::Instant;

use common::match_oracle::brute_force;

use ose_planner::fixtures::{pump_carter, seed_db, seed_tools, type_zoo};
use ose_planner::matching::match_face;
use ose_planner::transform::{transform_part, Tolerances};

fn check_part(part: &ose_planner::part::Part) -> usize {
    let db = seed_db();
    let tools = seed_tools();
    let attrs = transform_part(part, &Tolerances::default());
    let mut matched = 0;
    for f in &attrs.faces {
        let got: Vec<(String, String)> = match_face(f, &db, &tools)
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                assert_eq!(c.rank, k + 1);
                (c.ose, c.cutting_set)
            })
            .collect();
        assert_eq!(got, brute_force(f, &db, &tools), "face {}", f.face);
        matched += !got.is_empty() as usize;
    }
    matched
}

#[test]
fn pump_carter_matches_brute_force() {
    let t0 = Instant::now();
    let matched = check_part(&pump_carter());
    assert_eq!(matched, 24);
    assert!(t0.elapsed().as_secs_f64() < 5.0, "{:?}", t0.elapsed());
}

#[test]
fn type_zoo_matches_brute_force() {
    check_part(&type_zoo());
}

#[test]
fn perturbed_attributes_match_brute_force() {
    use rand::{Rng, SeedableRng};
    let db = seed_db();
    let tools = seed_tools();
    let attrs = transform_part(&pump_carter(), &Tolerances::default());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let mut f = attrs.faces[rng.gen_range(0..attrs.faces.len())].clone();
        f.end_accessibility = rng.gen_range(0.0..40.0);
        f.global_accessibility = rng.gen_range(0.0..120.0);
        f.axial_extent = rng.gen_range(0.0..60.0);
        let got: Vec<(String, String)> = match_face(&f, &db, &tools)
            .into_iter()
            .map(|c| (c.ose, c.cutting_set))
            .collect();
        assert_eq!(got, brute_force(&f, &db, &tools));
    }
}

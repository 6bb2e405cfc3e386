//! Exact minimum setup cover by exhaustive search, and the feasibility
//! invariant of a setup result.

use ose_planner::setup::{candidate_directions, same_direction, FaceAccess, SetupResult};

/// Smallest number of directions covering every face with at least one
/// direction, by enumerating direction subsets in increasing size.
pub fn exact_min_cover(faces: &[FaceAccess]) -> usize {
    let dirs = candidate_directions(faces);
    let masks: Vec<u64> = dirs
        .iter()
        .map(|d| {
            faces
                .iter()
                .enumerate()
                .filter(|(_, f)| f.directions.iter().any(|x| same_direction(x, d)))
                .fold(0u64, |m, (i, _)| m | 1 << i)
        })
        .collect();
    let target = faces
        .iter()
        .enumerate()
        .filter(|(_, f)| !f.directions.is_empty())
        .fold(0u64, |m, (i, _)| m | 1 << i);
    fn search(masks: &[u64], start: usize, left: usize, covered: u64, target: u64) -> bool {
        if covered & target == target {
            return true;
        }
        if left == 0 {
            return false;
        }
        (start..masks.len()).any(|k| search(masks, k + 1, left - 1, covered | masks[k], target))
    }
    (0..=masks.len())
        .find(|&k| search(&masks, 0, k, 0, target))
        .expect("the full direction set covers every face")
}

/// Every reachable face sits in exactly one non-empty setup whose direction
/// it admits; unreachable faces are excluded.
pub fn feasibility(faces: &[FaceAccess], r: &SetupResult) -> Result<(), String> {
    for f in faces {
        let homes: Vec<_> = r.setups.iter().filter(|s| s.faces.contains(&f.face)).collect();
        if f.directions.is_empty() {
            if !homes.is_empty() || !r.excluded.contains(&f.face) {
                return Err(format!("unreachable face {} is placed", f.face));
            }
        } else if homes.len() != 1 {
            return Err(format!("face {} in {} setups", f.face, homes.len()));
        } else if !f.admits(&homes[0].direction) {
            return Err(format!("face {} cannot be reached in {}", f.face, homes[0].id));
        }
    }
    match r.setups.iter().find(|s| s.faces.is_empty()) {
        Some(s) => Err(format!("setup {} is empty", s.id)),
        None => Ok(()),
    }
}


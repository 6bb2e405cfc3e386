//! Sorting tools into cutting-set types.

use super::model::{CuttingSet, CuttingSetType, OseDatabase};

fn intersects<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.iter().any(|x| b.contains(x))
}

/// Whether `tool` belongs to `ty`: every scalar inside the type's range
/// (bounds inclusive), same cutting material, and each capability list sharing
/// at least one entry with the type's.
pub fn tool_in_type(tool: &CuttingSet, ty: &CuttingSetType) -> bool {
    let d = &ty.dimensions;
    d.diameter.contains(tool.diameter)
        && d.cutting_length.contains(tool.cutting_length)
        && d.tool_length.contains(tool.tool_length)
        && d.end_radius.contains(tool.end_radius)
        && tool.cutting_material == ty.cutting_material
        && intersects(&tool.mfg_types, &ty.mfg_types)
        && intersects(&tool.modes, &ty.modes)
        && intersects(&tool.tmcs, &ty.tmcs)
}

/// Ids of every cutting-set type the tool belongs to, in database order. A
/// tool may belong to several types; an empty list means the tool is unsorted.
pub fn classify_tool(tool: &CuttingSet, db: &OseDatabase) -> Vec<String> {
    db.cutting_set_types
        .iter()
        .filter(|t| tool_in_type(tool, t))
        .map(|t| t.id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{seed_db, seed_tools};

    #[test]
    fn range_bounds_are_inclusive() {
        let db = seed_db();
        let ty = db.cutting_set_types[0].clone();
        let tool = seed_tools().into_iter().find(|t| tool_in_type(t, &ty)).unwrap();
        let at_max = CuttingSet {
            diameter: ty.dimensions.diameter.max,
            ..tool.clone()
        };
        assert!(tool_in_type(&at_max, &ty));
        let above = CuttingSet {
            diameter: ty.dimensions.diameter.max + 1e-9,
            ..tool.clone()
        };
        assert!(!tool_in_type(&above, &ty));
        let other_material = CuttingSet {
            cutting_material: "ceramic".into(),
            ..tool
        };
        assert!(!tool_in_type(&other_material, &ty));
    }

    #[test]
    fn every_seed_tool_is_sorted() {
        let db = seed_db();
        for t in seed_tools() {
            assert!(!classify_tool(&t, &db).is_empty(), "{}", t.id);
        }
    }
}

//! Constructed parts, the seed knowledge base and the seed tool set.
//!
//! Every part here is built analytically so that tests can compare the
//! transformation results against closed-form expectations. The same objects
//! are shipped as JSON under `fixtures/` at the repository root.

mod parts;
mod seed;

pub use parts::*;
pub use seed::*;

use crate::part::Part;

/// Every constructed part, in a fixed order.
pub fn all_parts() -> Vec<Part> {
    vec![
        pump_carter(),
        type_zoo(),
        bracket(),
        sealed_cavity(),
        curved_web(),
        cone_flank(),
        fillet_blend(),
        ruled_slot(),
        isolated_block(20.0, 50.0, 10.0),
    ]
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("fixtures serialize");
    s.push('\n');
    s
}

/// File name and JSON text of every fixture shipped under `fixtures/`.
pub fn shipped_files() -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = all_parts()
        .iter()
        .map(|p| (format!("part_{}.json", p.id.replace('-', "_")), pretty(p)))
        .collect();
    files.push(("osedb_seed.json".into(), pretty(&seed_db())));
    files.push(("osedb_audit_seeded.json".into(), pretty(&audit_seeded_db())));
    files.push(("tools_seed.json".into(), pretty(&seed_tools())));
    files
}

//! Writes the shipped JSON fixtures from their builders.
//!
//! Usage: `cargo run -p ose-planner --example export_fixtures -- <dir>`

use std::path::PathBuf;

use ose_planner::fixtures;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    for (name, text) in fixtures::shipped_files() {
        std::fs::write(dir.join(&name), text)?;
        println!("wrote {}", dir.join(name).display());
    }
    Ok(())
}

//! Writes one simulated FROC study as `subjects.csv` and `marks.csv`.
//!
//! cargo run --example simulate_dataset -- OUT_DIR [N] [SEED]

use std::fs::File;
use std::path::PathBuf;

use froc_core::data::{write_marks, write_subjects};
use froc_core::simulate::{generate_dataset, SimConfig};

fn main() -> froc_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut cfg = SimConfig::scenario(1.0, 0.8, 0.0, n, 1);
    cfg.master_seed = seed;
    let ds = generate_dataset(&cfg, 0)?;
    std::fs::create_dir_all(&dir)?;
    write_subjects(&ds, File::create(dir.join("subjects.csv"))?)?;
    write_marks(&ds, File::create(dir.join("marks.csv"))?)?;
    Ok(())
}

//! Recomputes every golden file and writes it to `data/golden/`.
//!
//! ```text
//! cargo run --example freeze_golden [-- <dir>]
//! ```
//!
//! Run only after a deliberate change to a fixture; `delta2 verify` compares
//! the committed files against fresh computations.

use std::fs;
use std::path::PathBuf;

use delta2_capacity::golden::{self, to_json};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(golden::default_dir);
    fs::create_dir_all(&dir)?;
    let files = [
        (golden::SPECKER_FILE, to_json(&golden::compute_specker()?)),
        (golden::GEN_PDF_FILE, to_json(&golden::compute_gen_pdf()?)),
        (golden::THEOREM1_FILE, to_json(&golden::compute_theorem1()?)),
        (golden::ORACLE_FILE, to_json(&golden::compute_oracle()?)),
    ];
    for (name, text) in files {
        fs::write(dir.join(name), text)?;
        println!("wrote {}", dir.join(name).display());
    }
    Ok(())
}

//! Write JSON inputs for the `qfsp` command line into a directory.
//!
//! ```text
//! cargo run --example write_inputs -- /tmp/qfsp
//! qfsp overlap /tmp/qfsp/fock_1.json /tmp/qfsp/squeeze.json
//! ```

use std::path::PathBuf;

use qfsp::implementers;
use qfsp::{PhaseSpace, Presentation, QuasifreeForm};
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "qfsp-inputs".into()));
    std::fs::create_dir_all(&dir)?;
    let ps1 = PhaseSpace::build_standard(1, Presentation::Diagonal)?;

    let write = |name: &str, v: serde_json::Value| -> std::io::Result<()> {
        std::fs::write(dir.join(name), serde_json::to_string_pretty(&v)?)
    };
    write("space_1.json", serde_json::to_value(&ps1)?)?;
    write("fock_1.json", serde_json::to_value(QuasifreeForm::fock(&ps1)?)?)?;
    write("thermal_1.json", serde_json::to_value(QuasifreeForm::thermal(&ps1, &[0.5])?)?)?;
    write("squeeze.json", serde_json::to_value(implementers::diagonal_squeeze(2, 0, 0.7))?)?;
    write(
        "family.json",
        json!({ "generator": { "kind": "thermal_pair", "tau": "0.5 + 1/k", "tau_prime": 0.5 }, "n_max": 10000 }),
    )?;
    println!("wrote inputs to {}", dir.display());
    Ok(())
}

//! Drives the harness from an in-memory config and writes the outputs.

use adiabatic_wkb::harness::{run, RunConfig};

const CONFIG: &str = r#"{
    "system": {"hbar": 0.5, "energy": 8.0, "potential": {"type": "harmonic", "omega": 1.0}},
    "grid": {"x_start": -3.5, "x_end": 3.5, "count": 701},
    "methods": ["oracle", "wkb", "cubic", "roots"],
    "x_ref": 0.0,
    "exclusion_radius": 0.5
}"#;

fn main() -> adiabatic_wkb::Result<()> {
    let cfg = RunConfig::from_json(CONFIG)?;
    let out = run(&cfg)?;
    let dir = std::env::temp_dir().join("adiabatic-wkb-example");
    for path in out.write(&dir)? {
        println!("{}", path.display());
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&out.report["wkb"]).unwrap_or_default()
    );
    Ok(())
}

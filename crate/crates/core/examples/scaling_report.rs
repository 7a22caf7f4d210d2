//! Scaling of `ε*(L)`, the distance to a long reference member, and the phase drift,
//! driven through the experiment harness. Writes CSV tables and a JSON summary to `out/scaling`.
//! Runs the full continuation to `L = 256`; allow a couple of minutes in release mode.

use contact_defects::harness::{run, Experiment, ExperimentConfig};

fn main() -> contact_defects::Result<()> {
    let mut cfg = ExperimentConfig::new(Experiment::ScalingReport);
    cfg.output_dir = "out/scaling".into();
    let rec = run(&cfg)?;
    for c in &rec.checks {
        println!("{:<32} {:>14.6e}  {}", c.name, c.measured, if c.pass { "ok" } else { "FAIL" });
    }
    println!("{}", serde_json::to_string_pretty(&rec.summary)?);
    Ok(())
}

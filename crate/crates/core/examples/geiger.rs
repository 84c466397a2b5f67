//! Ionization cascade: very few or very many ions, never a medium number.

use worldsim::scenarios::{geiger_run, GeigerParams};

fn main() -> worldsim::Result<()> {
    for cascade in [1.0, 0.9] {
        let p = GeigerParams::new(12, cascade, 0.5f64.sqrt());
        let run = geiger_run(&p)?;
        println!("cascade {cascade}: U={:.6} D={:.6} medium={:.3e}", run.undetected, run.detected, run.medium_mass);
        for (m, w) in run.counts.iter().enumerate().filter(|(_, w)| **w > 0.0) {
            println!("  {m:2} ions: {w:.6}");
        }
    }
    Ok(())
}

//! Worlds of the Mach-Zehnder universe in the three mirror regimes.

use std::f64::consts::PI;

use worldsim::scenarios::{mzi_report, mzi_run, MirrorMode, MziParams};

fn main() -> worldsim::Result<()> {
    for theta in [0.0, PI / 3.0, PI / 2.0, PI] {
        let run = mzi_run(&MziParams::new(theta, MirrorMode::PI))?;
        let (h, v) = run.detector_weights;
        println!("PI theta={theta:.4}: D_H={h:.6} D_V={v:.6} worlds={}", run.worlds.len());
    }

    let run = mzi_run(&MziParams::new(PI / 3.0, MirrorMode::PS))?;
    println!("PS: {:?}", run.worlds.weights());

    let p = MziParams::new(PI / 3.0, MirrorMode::General { alpha: 0.6 });
    let run = mzi_run(&p)?;
    for b in &run.worlds.branches {
        println!("{:<40} {:.6}", b.label.to_string(), b.weight);
    }
    let report = mzi_report(&p)?;
    println!("assertions pass: {}", report.passed());
    println!("{}", run.tree.to_graphviz());
    Ok(())
}

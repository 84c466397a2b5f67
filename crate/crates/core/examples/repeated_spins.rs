//! Repeated observation of n identically prepared spins: branch weights per up-count.

use worldsim::observers::repeated_spin_run;
use worldsim::scenarios::spins_report;
use worldsim::tensor::C64;

fn main() -> worldsim::Result<()> {
    let h = C64::new(0.5f64.sqrt(), 0.0);
    print!("{}", spins_report(10, h, h)?.to_csv());

    let run = repeated_spin_run(12, C64::new(0.3f64.sqrt(), 0.0), C64::new(0.7f64.sqrt(), 0.0))?;
    println!("|a|^2 = 0.3, n = 12: {} live branches", run.state.len());
    for (m, w) in run.grouped.iter().enumerate() {
        println!("  m={m:2} {:.6} {}", w, "#".repeat((w * 100.0).round() as usize));
    }
    Ok(())
}

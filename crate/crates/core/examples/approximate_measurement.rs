//! The photon-mirror state after M1 seen in the diagonal bases.

use worldsim::scenarios::approx::alpha_tilde;
use worldsim::scenarios::rebase_approximate_measurement;

fn main() -> worldsim::Result<()> {
    for alpha in [0.0, 0.1, 0.5, 0.9, 1.0] {
        let r = rebase_approximate_measurement(alpha)?;
        let w: Vec<String> = r.branches.branches.iter().map(|b| format!("{}:{:.4}", b.label, b.weight)).collect();
        println!(
            "alpha={alpha}: C={:.6} fidelity={:?} (alpha~ {:.6})\n  {}",
            r.correlation,
            r.fidelity_plus,
            alpha_tilde(alpha),
            w.join("  ")
        );
    }
    Ok(())
}

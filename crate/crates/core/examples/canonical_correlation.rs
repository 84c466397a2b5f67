//! Schmidt decomposition and canonical correlation of bipartite states.

use worldsim::quantum::{canonical_correlation, canonical_correlation_by_density, schmidt};
use worldsim::random::{random_state, rng};
use worldsim::tensor::{Register, StateVector, C64};

fn main() -> worldsim::Result<()> {
    let layout = vec![Register::qubit("A"), Register::qubit("B")];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let bell = StateVector::new(layout, vec![C64::new(h, 0.0), z, z, C64::new(h, 0.0)])?;
    println!("Bell: C = {:.12} (ln 2 = {:.12})", canonical_correlation(&bell, &["A"])?, 2f64.ln());

    let layout = vec![
        Register::finite("A", ["0", "1", "2"])?,
        Register::finite("B", ["0", "1", "2", "3"])?,
    ];
    let psi = random_state(&mut rng(5), layout);
    let s = schmidt(&psi, &["A"])?;
    println!("Schmidt weights {:?}", s.lambdas);
    println!("rank {}, entropy {:.12}", s.rank(), s.entropy());
    let (a, b) = canonical_correlation_by_density(&psi, &["A"])?;
    println!("from reduced densities: {a:.12} {b:.12}");
    println!("reconstruction error {:.2e}", s.reconstruct()?.distance(&psi)?);
    Ok(())
}

//! Position plus momentum information against -(1 + ln pi).

use worldsim::quantum::{info_uncertainty, uncertainty_bound};
use worldsim::tensor::{Register, StateVector, C64};

fn packet(reg: &Register, f: impl Fn(f64) -> C64) -> worldsim::Result<StateVector> {
    let xs = reg.coordinates().expect("grid");
    StateVector::from_fn(reg.clone(), |i| f(xs[i]))
}

fn main() -> worldsim::Result<()> {
    let reg = Register::centered_grid("x", 4096, 1.0 / 64.0)?;
    println!("bound {:.6}", uncertainty_bound());
    for a in [1.0, 3.0] {
        let psi = packet(&reg, |x| C64::new((-x * x / (4.0 * a * a)).exp(), 0.0))?;
        let u = info_uncertainty(&psi)?;
        println!("gaussian width {a}: I_x={:.6} I_k={:.6} sum={:.6}", u.i_x, u.i_k, u.sum());
    }
    let two = packet(&reg, |x| C64::new((-(x - 4.0).powi(2) / 4.0).exp() + (-(x + 4.0).powi(2) / 4.0).exp(), 0.0))?;
    let u = info_uncertainty(&two)?;
    println!("two packets 8 apart: sum={:.6} gap={:.6}", u.sum(), u.sum() - uncertainty_bound());

    let narrow = Register::centered_grid("x", 256, 1.0 / 64.0)?;
    match info_uncertainty(&packet(&narrow, |x| C64::new((-x * x / 4.0).exp(), 0.0))?) {
        Err(e) => println!("too small a grid: {e}"),
        Ok(u) => println!("unexpected: {u:?}"),
    }
    Ok(())
}

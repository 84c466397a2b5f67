//! A pointer shifted by the measured coordinate becomes maximally correlated with it.

use worldsim::scenarios::pointer::{von_neumann_run, PointerParams, Profile};

fn main() -> worldsim::Result<()> {
    let (q, r) = PointerParams::grids(8, 0.0, 1.0, 64, 1.0)?;
    let p = PointerParams { q, r, phi: Profile::Uniform, eta: Profile::Delta { cell: 0 }, times: vec![1.0, 2.0, 3.0] };
    let run = von_neumann_run(&p)?;
    for ((t, c), i) in run.times.iter().zip(&run.correlation).zip(&run.info_q) {
        println!("t={t}: C_qr={c:.12} I_q={i:.12}");
    }
    println!("ln 8 = {:.12}", 8f64.ln());

    let (q, r) = PointerParams::grids(16, 0.0, 1.0, 256, 1.0)?;
    let smooth = PointerParams {
        q,
        r,
        phi: Profile::Gaussian { center: 7.5, sigma: 3.0 },
        eta: Profile::Gaussian { center: 20.0, sigma: 2.0 },
        times: vec![1.0, 4.0],
    };
    let run = von_neumann_run(&smooth)?;
    println!("gaussian pointer: C_qr = {:?}", run.correlation);
    Ok(())
}

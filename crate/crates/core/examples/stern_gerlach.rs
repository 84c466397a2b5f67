//! Spin entangles with the orbit through a field gradient; reversing the stages restores it.

use worldsim::scenarios::{stern_gerlach_run, SternGerlachParams};

fn main() -> worldsim::Result<()> {
    let p = SternGerlachParams { flight_times: vec![0.0, 0.5, 1.0, 1.5, 2.0], ..Default::default() };
    let run = stern_gerlach_run(&p)?;
    println!("<k | up> = {:?}, <k | down> = {:?}", run.momentum_up, run.momentum_down);
    for (((t, c), s), o) in run.flight_times.iter().zip(&run.correlation).zip(&run.separation).zip(&run.position_overlap) {
        println!("t={t:.1} separation={s:7.4} overlap={o:.3e} C(spin:orbit)={c:.9}");
    }
    println!("recombined fidelity {:?}", run.recombined_fidelity);

    let weak = SternGerlachParams { phase1: 0.3, flight_times: vec![0.0, 2.0], ..Default::default() };
    let run = stern_gerlach_run(&weak)?;
    println!("weak gradient: C = {:?}", run.correlation);
    Ok(())
}

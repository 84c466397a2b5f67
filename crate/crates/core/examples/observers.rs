//! Two observers: same observable, non-commuting observables, entangled pair.

use worldsim::observers::{multi_observer_case, CaseConfig};
use worldsim::scenarios::observing::dense_oracle_distance;
use worldsim::tensor::C64;

fn main() -> worldsim::Result<()> {
    let amps = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    for case in 1..=3 {
        let cfg = CaseConfig { amplitudes: amps.clone(), second_basis: None };
        let r = multi_observer_case(case, &cfg)?;
        println!("case {case}");
        for b in r.state.branches() {
            let m: Vec<String> = b.memories.iter().map(|(o, m)| format!("{o}:{}", m.to_strings().join(""))).collect();
            println!("  {:<24} w={:.6}", m.join(" "), b.weight);
        }
        for a in &r.assertions {
            println!("  {} {}", if a.pass { "ok  " } else { "FAIL" }, a.name);
        }
        println!("  dense oracle distance {:.1e}", dense_oracle_distance(&r, &cfg)?);
    }
    Ok(())
}

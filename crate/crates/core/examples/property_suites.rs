//! Seeded property suites, each run with a reduced trial count.

use worldsim::verify::{verify_n, SUITES};

fn main() -> worldsim::Result<()> {
    for suite in SUITES {
        let r = verify_n(suite, 42, 50)?;
        println!("{suite:<12} trials={} failures={}", r.trials, r.failures.len());
    }
    Ok(())
}

use std::f64::consts::PI;

use proptest::prelude::*;
use worldsim::branching::{decompose, BasisChoice};
use worldsim::quantum::canonical_correlation;
use worldsim::random::{haar_unitary, random_state, rng};
use worldsim::scenarios::{mzi_run, MirrorMode, MziParams};
use worldsim::tensor::{apply_operator, fourier_dual, LinearOperator, Register, C64};

fn layout() -> Vec<Register> {
    vec![
        Register::qubit("A"),
        Register::finite("B", ["0", "1", "2"]).unwrap(),
        Register::qubit("C"),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn disjoint_operators_commute(seed in any::<u64>()) {
        let mut r = rng(seed);
        let psi = random_state(&mut r, layout());
        let ua = LinearOperator::unitary(&["A"], haar_unitary(&mut r, 2)).unwrap();
        let ubc = LinearOperator::unitary(&["C", "B"], haar_unitary(&mut r, 6)).unwrap();
        let ab = apply_operator(&ubc, &apply_operator(&ua, &psi).unwrap()).unwrap();
        let ba = apply_operator(&ua, &apply_operator(&ubc, &psi).unwrap()).unwrap();
        prop_assert!(ab.distance(&ba).unwrap() <= 1e-12);
    }

    #[test]
    fn fourier_twice_is_parity(seed in any::<u64>(), n in prop::sample::select(vec![8usize, 16, 30, 64])) {
        let mut r = rng(seed);
        let reg = Register::centered_grid("x", n, 0.25).unwrap();
        let psi = random_state(&mut r, vec![reg]);
        let twice = fourier_dual(&fourier_dual(&psi, "x").unwrap(), "x").unwrap();
        let a = psi.amplitudes();
        let worst = twice.amplitudes().iter().enumerate().map(|(j, z)| (z - a[(n - j) % n]).norm()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-12, "worst {}", worst);
    }

    #[test]
    fn global_phase_changes_nothing_observable(seed in any::<u64>(), phi in 0.0..2.0 * PI) {
        let mut r = rng(seed);
        let psi = random_state(&mut r, layout());
        let rotated = psi.scaled(C64::from_polar(1.0, phi));
        let c0 = canonical_correlation(&psi, &["A"]).unwrap();
        let c1 = canonical_correlation(&rotated, &["A"]).unwrap();
        prop_assert!((c0 - c1).abs() <= 1e-12);
        let choices: Vec<BasisChoice> = psi.layout().iter().map(BasisChoice::computational).collect();
        let w0 = decompose(&psi, &choices).unwrap().weights();
        let w1 = decompose(&rotated, &choices).unwrap().weights();
        prop_assert_eq!(w0.len(), w1.len());
        for (a, b) in w0.iter().zip(&w1) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn mzi_is_periodic_in_theta(theta in -PI..PI, alpha in 0.0..=1.0f64) {
        let a = mzi_run(&MziParams::new(theta, MirrorMode::General { alpha })).unwrap();
        let b = mzi_run(&MziParams::new(theta + 2.0 * PI, MirrorMode::General { alpha })).unwrap();
        prop_assert_eq!(a.worlds.len(), b.worlds.len());
        for (x, y) in a.worlds.weights().iter().zip(b.worlds.weights()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!((a.detector_weights.0 - b.detector_weights.0).abs() <= 1e-12);
    }
}

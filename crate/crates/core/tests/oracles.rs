use std::f64::consts::PI;

use worldsim::info::{continuous_correlation, GridDensity};
use worldsim::random::{random_state, rng};
use worldsim::tensor::{fourier_dual, Register, C64};

#[test]
fn fourier_dual_matches_naive_sum() {
    for (n, dx) in [(16usize, 0.5), (25, 0.2), (64, 0.1)] {
        let reg = Register::centered_grid("x", n, dx).unwrap();
        let xs = reg.coordinates().unwrap();
        let psi = random_state(&mut rng(n as u64), vec![reg]);
        let dual = fourier_dual(&psi, "x").unwrap();
        let dk = 2.0 * PI / (n as f64 * dx);
        for j in 0..n {
            let k = (j as f64 - (n / 2) as f64) * dk;
            let naive: C64 = xs.iter().zip(psi.amplitudes()).map(|(x, a)| a * C64::from_polar(1.0, -k * x)).sum::<C64>() / (n as f64).sqrt();
            assert!((naive - dual.amplitudes()[j]).norm() < 1e-12, "n={n} j={j}");
        }
    }
}

#[test]
fn gaussian_mutual_information_converges() {
    let rho: f64 = 0.8;
    let n = 1024;
    let h = 12.0 / n as f64;
    let g = GridDensity::from_fn(n, n, -6.0, -6.0, h, h, |x, y| (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * (1.0 - rho * rho))).exp()).normalize();
    let levels = continuous_correlation(&g, 8).unwrap();
    let exact = -(1.0 - rho * rho).ln() / 2.0;
    assert!((levels[7] - exact).abs() < 0.02, "{levels:?} vs {exact}");
    assert!(levels.windows(2).all(|w| w[1] >= w[0] - 1e-12), "refinement never lowers correlation: {levels:?}");
}

//! Information and correlation of a joint distribution, before and after coarse-graining.

use worldsim::info::{continuous_correlation, Axis, FiniteDistribution, GridDensity, Partition};

fn main() -> worldsim::Result<()> {
    let x = Axis::new("x", ["a", "b", "c"]);
    let y = Axis::new("y", ["0", "1"]);
    let d = FiniteDistribution::from_table(x.clone(), y, &[vec![0.3, 0.05], vec![0.05, 0.3], vec![0.15, 0.15]])?;
    println!("I_xy = {:.6}", d.information());
    println!("I_x  = {:.6}", d.marginal(&["x"])?.information());
    println!("C_xy = {:.6}", d.correlation(&[vec!["x"], vec!["y"]])?);

    let merge = Partition::new([("a", "ab"), ("b", "ab"), ("c", "c")])?;
    let coarse = d.coarsen(&[("x", &merge)])?;
    println!("C_xy after merging a,b = {:.6}", coarse.correlation(&[vec!["x"], vec!["y"]])?);

    let given = d.conditional(&[("y", "0")])?;
    println!("P(x | y=0) = {:?}", given.probs());

    // bivariate Gaussian with rho = 0.8; exact mutual information is -ln(1 - rho^2) / 2
    let rho: f64 = 0.8;
    let n = 1024;
    let h = 12.0 / n as f64;
    let g = GridDensity::from_fn(n, n, -6.0, -6.0, h, h, |x, y| {
        (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * (1.0 - rho * rho))).exp()
    })
    .normalize();
    let levels = continuous_correlation(&g, 8)?;
    println!("box-refined correlation: {:?}", levels.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>());
    println!("exact: {:.4}", -(1.0 - rho * rho).ln() / 2.0);
    Ok(())
}

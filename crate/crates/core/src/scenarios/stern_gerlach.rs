//! Spin coupled to the orbital packet by a field gradient, then free flight
//! (hbar = m = 1).

use serde_json::json;

use crate::branching::{decompose, BasisChoice};
use crate::quantum::{canonical_correlation, relative_state};
use crate::report::{num, nums, BranchRow, ScenarioReport};
use crate::tensor::{apply_operator, check_edges, fourier_dual, fourier_dual_inverse, LinearOperator, Register, StateVector, C64};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SternGerlachParams {
    pub c_up: C64,
    pub c_down: C64,
    pub cells: usize,
    pub spacing: f64,
    /// Standard deviation of `|phi0|^2`.
    pub sigma: f64,
    pub center: f64,
    /// `mu B0 dt / hbar`.
    pub phase0: f64,
    /// `mu B1 dt / hbar`, the momentum kick.
    pub phase1: f64,
    pub flight_times: Vec<f64>,
    pub recombine: bool,
}

impl Default for SternGerlachParams {
    fn default() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            c_up: h,
            c_down: h,
            cells: 2048,
            spacing: 0.05,
            sigma: 1.0,
            center: 0.0,
            phase0: 0.3,
            phase1: 2.5,
            flight_times: vec![0.0, 0.5, 1.0, 2.0],
            recombine: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SternGerlachRun {
    pub initial: StateVector,
    pub coupled: StateVector,
    /// Momentum expectation of the orbit relative to spin up / down.
    pub momentum_up: Option<f64>,
    pub momentum_down: Option<f64>,
    pub flight_times: Vec<f64>,
    /// Spin:orbit canonical correlation after each flight time.
    pub correlation: Vec<f64>,
    /// Distance between the conditional position means.
    pub separation: Vec<f64>,
    /// Bhattacharyya overlap of the conditional position densities.
    pub position_overlap: Vec<f64>,
    pub final_state: StateVector,
    /// `|<Psi0|Psi>|` after undoing flight and coupling.
    pub recombined_fidelity: Option<f64>,
    pub recombined_distance: Option<f64>,
}

fn coupling(p: &SternGerlachParams, z: &Register, sign: f64) -> LinearOperator {
    let zs = z.coordinates().expect("grid");
    let mut d = Vec::with_capacity(2 * zs.len());
    for s in [-1.0, 1.0] {
        for &x in &zs {
            d.push(C64::from_polar(1.0, sign * s * (p.phase0 + p.phase1 * x)));
        }
    }
    LinearOperator::diagonal(&["spin", "z"], d)
}

fn flight(state: &StateVector, z: &Register, t: f64) -> Result<StateVector> {
    if t == 0.0 {
        return Ok(state.clone());
    }
    let dual = fourier_dual(state, "z")?;
    let ks = dual.register("z")?.coordinates().expect("grid");
    let op = LinearOperator::diagonal(&["z"], ks.iter().map(|k| C64::from_polar(1.0, -k * k * t / 2.0)).collect());
    fourier_dual_inverse(&apply_operator(&op, &dual)?, "z", z)
}

fn conditional(state: &StateVector, spin: &Register, label: &str) -> Result<Option<StateVector>> {
    let eta = StateVector::basis(vec![spin.clone()], &[label])?;
    match relative_state(state, &eta) {
        Ok(s) => Ok(Some(s)),
        Err(Error::NullRelativeState) => Ok(None),
        Err(e) => Err(e),
    }
}

fn mean_momentum(orbit: &StateVector) -> Result<f64> {
    let dual = fourier_dual(orbit, "z")?;
    let ks = dual.layout()[0].coordinates().expect("grid");
    Ok(dual.probabilities().iter().zip(&ks).map(|(p, k)| p * k).sum())
}

fn mean_position(orbit: &StateVector) -> f64 {
    let zs = orbit.layout()[0].coordinates().expect("grid");
    orbit.probabilities().iter().zip(&zs).map(|(p, z)| p * z).sum()
}

pub fn stern_gerlach_run(p: &SternGerlachParams) -> Result<SternGerlachRun> {
    let norm = p.c_up.norm_sqr() + p.c_down.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Param(format!("|c_up|^2 + |c_down|^2 = {norm}")));
    }
    if !(p.sigma > 0.0) || p.cells < 2 {
        return Err(Error::Param("sigma must be positive and the grid at least two cells".into()));
    }
    let z = Register::centered_grid("z", p.cells, p.spacing)?;
    let spin = Register::finite("spin", ["u", "d"])?;
    let zs = z.coordinates().expect("grid");
    let packet: Vec<C64> = zs.iter().map(|&x| C64::new((-(x - p.center).powi(2) / (4.0 * p.sigma * p.sigma)).exp(), 0.0)).collect();
    let packet = StateVector::normalized(vec![z.clone()], packet)?;
    check_edges(&packet, "z", "initial packet")?;
    let spinor = StateVector::new(vec![spin.clone()], vec![p.c_up, p.c_down])?;
    let initial = crate::tensor::tensor_product(&[spinor, packet])?;

    let forward = coupling(p, &z, 1.0);
    let coupled = apply_operator(&forward, &initial)?;
    check_edges(&fourier_dual(&coupled, "z")?, "z", "coupled packet in momentum")?;
    let momentum = |label| -> Result<Option<f64>> { conditional(&coupled, &spin, label)?.map(|s| mean_momentum(&s)).transpose() };
    let (momentum_up, momentum_down) = (momentum("u")?, momentum("d")?);

    let mut times: Vec<f64> = p.flight_times.clone();
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Param("flight times must be finite and non-negative".into()));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.is_empty() {
        times.push(0.0);
    }
    let mut run = SternGerlachRun {
        initial: initial.clone(),
        coupled: coupled.clone(),
        momentum_up,
        momentum_down,
        flight_times: times.clone(),
        correlation: vec![],
        separation: vec![],
        position_overlap: vec![],
        final_state: coupled.clone(),
        recombined_fidelity: None,
        recombined_distance: None,
    };
    for &t in &times {
        let s = flight(&coupled, &z, t)?;
        check_edges(&s, "z", &format!("flight time {t}"))?;
        run.correlation.push(canonical_correlation(&s, &["spin"])?);
        match (conditional(&s, &spin, "u")?, conditional(&s, &spin, "d")?) {
            (Some(u), Some(d)) => {
                run.separation.push(mean_position(&d) - mean_position(&u));
                let bc = u.probabilities().iter().zip(d.probabilities()).map(|(a, b)| (a * b).sqrt()).sum();
                run.position_overlap.push(bc);
            }
            _ => {
                run.separation.push(0.0);
                run.position_overlap.push(1.0);
            }
        }
        run.final_state = s;
    }
    if p.recombine {
        let t = *times.last().expect("non-empty");
        let back = flight(&run.final_state, &z, -t)?;
        let back = apply_operator(&coupling(p, &z, -1.0), &back)?;
        run.recombined_fidelity = Some(back.fidelity(&initial)?);
        run.recombined_distance = Some(back.distance(&initial)?);
    }
    Ok(run)
}

/// Binary entropy of the spin weights: the spin:orbit correlation once the packets are disjoint.
pub fn spin_entropy(p: &SternGerlachParams) -> f64 {
    crate::info::shannon_entropy(&[p.c_up.norm_sqr(), p.c_down.norm_sqr()])
}

pub fn stern_gerlach_report(p: &SternGerlachParams) -> Result<ScenarioReport> {
    let run = stern_gerlach_run(p)?;
    let mut r = ScenarioReport::new("stern_gerlach");
    r.param("c_up", json!([num(p.c_up.re), num(p.c_up.im)]))
        .param("c_down", json!([num(p.c_down.re), num(p.c_down.im)]))
        .param("cells", json!(p.cells))
        .param("spacing", num(p.spacing))
        .param("sigma", num(p.sigma))
        .param("phase0", num(p.phase0))
        .param("phase1", num(p.phase1))
        .param("flight_times", nums(&p.flight_times))
        .param("recombine", json!(p.recombine));
    let spin = Register::finite("spin", ["u", "d"])?;
    let set = decompose(&run.final_state, &[BasisChoice::computational(&spin)])?;
    for b in &set.branches {
        r.branches.push(BranchRow::new(b.label.to_string(), b.weight));
    }
    let opt = |x: Option<f64>| x.map_or(json!(null), num);
    r.quantity("momentum_up", opt(run.momentum_up))
        .quantity("momentum_down", opt(run.momentum_down))
        .quantity("flight_times", nums(&run.flight_times))
        .quantity("correlation", nums(&run.correlation))
        .quantity("separation", nums(&run.separation))
        .quantity("position_overlap", nums(&run.position_overlap))
        .quantity("recombined_fidelity", opt(run.recombined_fidelity))
        .quantity("recombined_distance", opt(run.recombined_distance));

    let kick_ok = run.momentum_up.is_none_or(|k| (k + p.phase1).abs() <= 1e-6)
        && run.momentum_down.is_none_or(|k| (k - p.phase1).abs() <= 1e-6);
    r.assert("conditional_momenta", kick_ok);
    let h = spin_entropy(p);
    r.assert("correlation_within_spin_entropy", run.correlation.iter().all(|c| *c <= h + 1e-10));
    let last = run.position_overlap.len() - 1;
    if run.position_overlap[last] < 1e-3 {
        r.assert("separated_correlation", (run.correlation[last] - h).abs() <= 1e-3);
    }
    if p.recombine {
        r.assert("recombination_fidelity", run.recombined_fidelity.is_some_and(|f| f >= 1.0 - 1e-10))
            .assert("recombination_identity", run.recombined_distance.is_some_and(|d| d <= 1e-10));
    }
    Ok(r.seal())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_passes() {
        let r = stern_gerlach_report(&SternGerlachParams::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failed_assertions());
    }

    #[test]
    fn pure_spin_has_no_entanglement() {
        let p = SternGerlachParams { c_up: C64::new(1.0, 0.0), c_down: C64::new(0.0, 0.0), ..Default::default() };
        let run = stern_gerlach_run(&p).unwrap();
        assert!(run.correlation.iter().all(|c| c.abs() < 1e-12));
        assert!(run.momentum_down.is_none());
    }

    #[test]
    fn small_grid_is_rejected() {
        let p = SternGerlachParams { cells: 64, ..Default::default() };
        assert!(matches!(stern_gerlach_run(&p), Err(Error::GridTooSmall(_))));
    }
}

//! Impulsive von Neumann measurement: the pointer `r` is shifted by `q t`.

use serde_json::json;

use crate::branching::{decompose, BasisChoice};
use crate::info::{Axis, FiniteDistribution};
use crate::report::{num, nums, BranchRow, ScenarioReport};
use crate::tensor::{Register, StateVector, C64};
use crate::{Error, Result};

/// Amplitude profile on a grid, by cell index.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Uniform,
    /// Single cell.
    Delta { cell: usize },
    /// Real Gaussian amplitude with `|f|^2` of standard deviation `sigma` (coordinates).
    Gaussian { center: f64, sigma: f64 },
    Amplitudes(Vec<C64>),
}

impl Profile {
    fn state(&self, reg: &Register) -> Result<StateVector> {
        let n = reg.dim();
        let x = reg.coordinates().ok_or_else(|| Error::Kind(reg.name().into()))?;
        let amps: Vec<C64> = match self {
            Self::Uniform => vec![C64::new(1.0, 0.0); n],
            Self::Delta { cell } => {
                if *cell >= n {
                    return Err(Error::Param(format!("cell {cell} outside `{}` (size {n})", reg.name())));
                }
                (0..n).map(|i| C64::new(if i == *cell { 1.0 } else { 0.0 }, 0.0)).collect()
            }
            Self::Gaussian { center, sigma } => {
                if !(*sigma > 0.0) {
                    return Err(Error::Param("sigma must be positive".into()));
                }
                x.iter().map(|&v| C64::new((-(v - center).powi(2) / (4.0 * sigma * sigma)).exp(), 0.0)).collect()
            }
            Self::Amplitudes(a) => {
                if a.len() != n {
                    return Err(Error::Param(format!("{} amplitudes for `{}` of size {n}", a.len(), reg.name())));
                }
                a.clone()
            }
        };
        StateVector::normalized(vec![reg.clone()], amps).map_err(|e| Error::Param(e.to_string()))
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Self::Delta { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointerParams {
    pub q: Register,
    pub r: Register,
    pub phi: Profile,
    pub eta: Profile,
    /// Coupling times at which the state is evaluated.
    pub times: Vec<f64>,
}

impl PointerParams {
    /// `nq` system cells from `q0` with spacing `dq`; `nr` pointer cells from 0 with spacing `dr`.
    pub fn grids(nq: usize, q0: f64, dq: f64, nr: usize, dr: f64) -> Result<(Register, Register)> {
        Ok((Register::grid("q", q0, dq, nq)?, Register::grid("r", 0.0, dr, nr)?))
    }
}

#[derive(Clone, Debug)]
pub struct PointerRun {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `C_{q,r}(t)` under the unit cell measure.
    pub correlation: Vec<f64>,
    /// Marginal information `I_q(t)`.
    pub info_q: Vec<f64>,
}

const ALIGN_TOL: f64 = 1e-9;

/// Pointer shift of every system cell at time `t`, in pointer cells.
pub fn shifts(q: &Register, r: &Register, t: f64) -> Result<Vec<i64>> {
    let dr = r.spacing().ok_or_else(|| Error::Kind("r".into()))?;
    let qs = q.coordinates().ok_or_else(|| Error::Kind("q".into()))?;
    let mut out = Vec::with_capacity(qs.len());
    for qi in qs {
        let s = qi * t / dr;
        if (s - s.round()).abs() > ALIGN_TOL {
            return Err(Error::Alignment(format!("shift q t / dr = {s} at q = {qi}, t = {t} is not an integer")));
        }
        out.push(s.round() as i64);
    }
    let span = out.iter().max().unwrap_or(&0) - out.iter().min().unwrap_or(&0);
    if span >= r.dim() as i64 {
        return Err(Error::GridTooSmall(format!("pointer shifts span {span} cells but r has {}", r.dim())));
    }
    Ok(out)
}

/// `Psi(t)(q, r) = phi(q) eta(r - q t)` on the periodic pointer grid.
pub fn evolve(p: &PointerParams, t: f64) -> Result<StateVector> {
    let phi = p.phi.state(&p.q)?;
    let eta = p.eta.state(&p.r)?;
    let s = shifts(&p.q, &p.r, t)?;
    let nr = p.r.dim() as i64;
    let mut amps = vec![C64::new(0.0, 0.0); p.q.dim() * p.r.dim()];
    for (i, a) in phi.amplitudes().iter().enumerate() {
        for (j, b) in eta.amplitudes().iter().enumerate() {
            let k = (j as i64 + s[i]).rem_euclid(nr) as usize;
            amps[i * p.r.dim() + k] = a * b;
        }
    }
    StateVector::new(vec![p.q.clone(), p.r.clone()], amps)
}

fn joint(state: &StateVector) -> Result<FiniteDistribution> {
    let (q, r) = (&state.layout()[0], &state.layout()[1]);
    FiniteDistribution::new(vec![Axis::indexed("q", q.dim()), Axis::indexed("r", r.dim())], state.probabilities(), None)
}

pub fn von_neumann_run(p: &PointerParams) -> Result<PointerRun> {
    let mut times = vec![0.0];
    times.extend(p.times.iter().copied().filter(|&t| t != 0.0));
    let mut run = PointerRun { times: vec![], states: vec![], correlation: vec![], info_q: vec![] };
    for t in times {
        let s = evolve(p, t)?;
        let d = joint(&s)?;
        run.correlation.push(d.correlation(&[vec!["q"], vec!["r"]])?);
        run.info_q.push(d.marginal(&["q"])?.information());
        run.times.push(t);
        run.states.push(s);
    }
    Ok(run)
}

pub fn pointer_report(p: &PointerParams) -> Result<ScenarioReport> {
    let run = von_neumann_run(p)?;
    let mut r = ScenarioReport::new("pointer");
    r.param("nq", json!(p.q.dim()))
        .param("nr", json!(p.r.dim()))
        .param("times", nums(&p.times))
        .param("pointer_delta", json!(p.eta.is_delta()));
    let last = run.states.last().expect("t = 0 is always evaluated");
    let set = decompose(last, &[BasisChoice::computational(&p.q)])?;
    for b in &set.branches {
        r.branches.push(BranchRow::new(b.label.to_string(), b.weight));
    }
    let i0 = run.info_q[0];
    let drift = run.info_q.iter().map(|i| (i - i0).abs()).fold(0.0, f64::max);
    r.quantity("times", nums(&run.times))
        .quantity("correlation", nums(&run.correlation))
        .quantity("info_q", nums(&run.info_q))
        .quantity("info_q_drift", num(drift));
    let initial_zero = run.correlation[0].abs() <= 1e-12;
    let constant = drift <= 1e-9;
    let bounded = run.correlation.iter().all(|c| *c <= -i0 + 1e-10);
    r.assert("initial_correlation_zero", initial_zero)
        .assert("marginal_information_constant", constant)
        .assert("correlation_bounded", bounded);
    if p.eta.is_delta() {
        let dq = p.q.spacing().expect("grid");
        let maximal = run.times.iter().zip(&run.correlation).skip(1).all(|(t, c)| {
            // distinct shifts once dq t is at least one pointer cell
            (dq * t).abs() < p.r.spacing().expect("grid") - 1e-12 || (c + i0).abs() <= 1e-10
        });
        r.assert("correlation_maximal", maximal);
        r.assert("generates_measurement", initial_zero && constant && maximal);
    }
    Ok(r.seal())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform8() -> PointerParams {
        let (q, r) = PointerParams::grids(8, 0.0, 1.0, 64, 1.0).unwrap();
        PointerParams { q, r, phi: Profile::Uniform, eta: Profile::Delta { cell: 0 }, times: vec![1.0, 2.0] }
    }

    #[test]
    fn uniform_eight_gives_ln8() {
        let run = von_neumann_run(&uniform8()).unwrap();
        assert_eq!(run.correlation[0], 0.0);
        assert!((run.correlation[1] - 8f64.ln()).abs() < 1e-12);
        assert!(pointer_report(&uniform8()).unwrap().passed());
    }

    #[test]
    fn misaligned_time() {
        let mut p = uniform8();
        p.times = vec![0.5];
        p.r = Register::grid("r", 0.0, 1.0, 64).unwrap();
        assert!(matches!(von_neumann_run(&p), Err(Error::Alignment(_))));
        p.times = vec![10.0];
        assert!(matches!(von_neumann_run(&p), Err(Error::GridTooSmall(_))));
    }
}

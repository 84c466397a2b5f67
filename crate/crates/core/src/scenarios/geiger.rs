//! Toy Geiger counter: a particle inside the chamber starts an ionization
//! cascade along a chain of atoms.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde_json::json;

use crate::branching::{decompose, group_by, BasisChoice, BRANCH_TOL};
use crate::report::{num, nums, BranchRow, ScenarioReport};
use crate::tensor::{apply_operator, tensor_product, LinearOperator, Register, StateVector, C64};
use crate::{Error, Result};

pub const MAX_ATOMS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct GeigerParams {
    pub n_atoms: usize,
    /// Probability that an ionized atom ionizes the next one.
    pub cascade: f64,
    /// Amplitude of the particle being inside; the outside amplitude is `sqrt(1 - b^2)`.
    pub inside: f64,
    /// Minimum number of ions read as a click; defaults to `ceil(n / 2)`.
    pub threshold: Option<usize>,
    /// Bound on the weight of medium ionization counts.
    pub epsilon: f64,
}

impl GeigerParams {
    pub fn new(n_atoms: usize, cascade: f64, inside: f64) -> Self {
        Self { n_atoms, cascade, inside, threshold: None, epsilon: 1e-6 }
    }

    pub fn threshold(&self) -> usize {
        self.threshold.unwrap_or(self.n_atoms.div_ceil(2))
    }

    /// Inclusive band of counts that are neither few nor many.
    pub fn medium_band(&self) -> (usize, usize) {
        (self.n_atoms.div_ceil(4), 3 * self.n_atoms / 4)
    }
}

#[derive(Clone, Debug)]
pub struct GeigerRun {
    pub state: StateVector,
    /// Weight of each ionization count `0..=n`.
    pub counts: Vec<f64>,
    /// Weights of the `U` (few ions) and `D` (many ions) groups.
    pub undetected: f64,
    pub detected: f64,
    pub medium_mass: f64,
    pub microstates: usize,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn geiger_run(p: &GeigerParams) -> Result<GeigerRun> {
    let n = p.n_atoms;
    if n == 0 || n > MAX_ATOMS {
        return Err(Error::Size(format!("n_atoms must be in 1..={MAX_ATOMS}, got {n}")));
    }
    if !(0.0..=1.0).contains(&p.cascade) || !(0.0..=1.0).contains(&p.inside) {
        return Err(Error::Param("cascade and inside must lie in [0, 1]".into()));
    }
    if p.threshold() == 0 || p.threshold() > n {
        return Err(Error::Param(format!("threshold must be in 1..={n}")));
    }
    let b = p.inside;
    let a = (1.0 - b * b).max(0.0).sqrt();
    let particle = StateVector::new(vec![Register::finite("particle", ["out", "in"])?], vec![c(a), c(b)])?;
    let mut factors = vec![particle];
    for k in 1..=n {
        factors.push(StateVector::basis(vec![Register::qubit(format!("a{k}"))], &["0"])?);
    }
    let mut state = tensor_product(&factors)?;

    #[rustfmt::skip]
    let cnot = [
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 1.0, 0.0,
    ];
    let first = LinearOperator::unitary(&["particle", "a1"], DMatrix::from_row_slice(4, 4, &cnot.map(c)))?;
    state = apply_operator(&first, &state)?;
    let (s, q) = ((1.0 - p.cascade).sqrt(), p.cascade.sqrt());
    #[rustfmt::skip]
    let rot = [
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, s, -q,
        0.0, 0.0, q, s,
    ];
    let rot = DMatrix::from_row_slice(4, 4, &rot.map(c));
    for k in 2..=n {
        let (prev, next) = (format!("a{}", k - 1), format!("a{k}"));
        let op = LinearOperator::unitary(&[prev.as_str(), next.as_str()], rot.clone())?;
        state = apply_operator(&op, &state)?;
    }

    let choices: Vec<BasisChoice> = state.layout().iter().map(BasisChoice::computational).collect();
    let micro = decompose(&state, &choices)?;
    let ions = |br: &crate::branching::Branch| br.label.0.iter().filter(|(r, l)| r.starts_with('a') && l == "1").count();
    let mut counts = vec![0.0; n + 1];
    for br in &micro.branches {
        counts[ions(br)] += br.weight;
    }
    let th = p.threshold();
    let grouped = group_by(&micro, |br| if ions(br) >= th { "D".into() } else { "U".into() })?;
    let weight_of = |g: &str| grouped.find(&[("group", g)]).map_or(0.0, |b| b.weight);
    let (lo, hi) = p.medium_band();
    let medium_mass = if lo <= hi { counts[lo..=hi].iter().sum() } else { 0.0 };
    Ok(GeigerRun {
        undetected: weight_of("U"),
        detected: weight_of("D"),
        medium_mass,
        microstates: micro.len(),
        counts,
        state,
    })
}

pub fn geiger_report(p: &GeigerParams) -> Result<ScenarioReport> {
    let run = geiger_run(p)?;
    let mut r = ScenarioReport::new("geiger");
    r.param("n_atoms", json!(p.n_atoms))
        .param("cascade", num(p.cascade))
        .param("inside", num(p.inside))
        .param("threshold", json!(p.threshold()))
        .param("epsilon", num(p.epsilon));
    r.branches.push(BranchRow::new("U", run.undetected));
    r.branches.push(BranchRow::new("D", run.detected));
    let (lo, hi) = p.medium_band();
    let mut counts = BTreeMap::new();
    for (m, w) in run.counts.iter().enumerate() {
        counts.insert(m.to_string(), num(*w));
    }
    r.quantity("counts", json!(counts))
        .quantity("medium_band", json!([lo, hi]))
        .quantity("medium_mass", num(run.medium_mass))
        .quantity("microstates", json!(run.microstates))
        .quantity("group_weights", nums(&[run.undetected, run.detected]));
    let b2 = p.inside * p.inside;
    r.assert("grouped_weights_match_amplitudes", (run.undetected - (1.0 - b2)).abs() <= BRANCH_TOL && (run.detected - b2).abs() <= BRANCH_TOL)
        .assert("bimodal", run.medium_mass < p.epsilon);
    Ok(r.seal())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_cascade_is_all_or_nothing() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let run = geiger_run(&GeigerParams::new(8, 1.0, h)).unwrap();
        assert!((run.undetected - 0.5).abs() < 1e-12 && (run.detected - 0.5).abs() < 1e-12);
        assert!(run.medium_mass < 1e-12);
        assert_eq!(run.microstates, 2);
        let run = geiger_run(&GeigerParams::new(5, 1.0, 0.0)).unwrap();
        assert_eq!(run.undetected, 1.0);
    }

    #[test]
    fn size_limit() {
        assert!(matches!(geiger_run(&GeigerParams::new(21, 1.0, 0.5)), Err(Error::Size(_))));
    }

    #[test]
    fn leaky_cascade_spreads_counts() {
        let run = geiger_run(&GeigerParams::new(6, 0.5, 1.0)).unwrap();
        assert_eq!(run.microstates, 6);
        assert!(run.medium_mass > 0.1);
    }
}

//! Photon and first mirror after M1, rebased into the diagonal bases.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use serde_json::json;

use crate::branching::{rebase, BranchSet, LocalBasis, BRANCH_TOL, PRUNE_WEIGHT};
use crate::quantum::{canonical_correlation, observable_correlation, relative_state, ProjectorFamily};
use crate::report::{num, BranchRow, ScenarioReport};
use crate::tensor::{apply_operator, LinearOperator, Register, StateVector, C64};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ApproxRun {
    pub alpha: f64,
    /// `(H|0> - alpha V|0> - beta V|perp>) / sqrt 2`.
    pub state: StateVector,
    pub branches: BranchSet,
    /// Mirror state relative to photon `+` / `-`; `None` for a null branch.
    pub conditional_plus: Option<StateVector>,
    pub conditional_minus: Option<StateVector>,
    /// `|<psi1|cond+>|` and `|<psi2|cond->|`.
    pub fidelity_plus: Option<f64>,
    pub fidelity_minus: Option<f64>,
    /// `C_{A_p, B_M}` for the `{phi+-}` and `{psi1, psi2}` observables.
    pub correlation: f64,
    pub canonical: f64,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(sqrt(1 + alpha) + sqrt(1 - alpha)) / 2`.
pub fn alpha_tilde(alpha: f64) -> f64 {
    ((1.0 + alpha).sqrt() + (1.0 - alpha).sqrt()) / 2.0
}

fn photon_basis() -> Result<LocalBasis> {
    let s = FRAC_1_SQRT_2;
    LocalBasis::new("photon", vec![("+", vec![c(s), c(s)]), ("-", vec![c(s), c(-s)])])
}

fn mirror_basis() -> Result<LocalBasis> {
    let s = FRAC_1_SQRT_2;
    LocalBasis::new("M1", vec![("psi1", vec![c(s), c(-s)]), ("psi2", vec![c(s), c(s)])])
}

/// Closed-form conditional mirror states in the `{psi1, psi2}` basis.
pub fn conditional_closed_form(alpha: f64) -> ([f64; 2], [f64; 2]) {
    let t = alpha_tilde(alpha);
    let x = alpha / (2.0 * t);
    ([t, -x], [x, t])
}

fn in_basis(v: &[f64; 2], basis: &LocalBasis) -> Vec<C64> {
    let (a, b) = (&basis.vectors()[0], &basis.vectors()[1]);
    (0..2).map(|i| a[i] * v[0] + b[i] * v[1]).collect()
}

pub fn rebase_approximate_measurement(alpha: f64) -> Result<ApproxRun> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Param(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let photon = Register::finite("photon", ["H", "V"])?;
    let mirror = Register::finite("M1", ["0", "perp"])?;
    let psi0 = StateVector::basis(vec![photon, mirror], &["H", "0"])?;
    // M1 beam splitter with kick [[alpha, -beta], [beta, alpha]]
    #[rustfmt::skip]
    let u = [
        1.0, 0.0, alpha, beta,
        0.0, 1.0, -beta, alpha,
        -alpha, beta, 1.0, 0.0,
        -beta, -alpha, 0.0, 1.0,
    ];
    let op = LinearOperator::unitary(&["photon", "M1"], DMatrix::from_row_slice(4, 4, &u.map(|x| c(x * FRAC_1_SQRT_2))))?;
    let state = apply_operator(&op, &psi0)?;

    let (pb, mb) = (photon_basis()?, mirror_basis()?);
    let branches = rebase(&state, &[pb.clone(), mb.clone()])?;
    let cond = |label: &str| -> Result<Option<StateVector>> {
        let v = pb.vector(label).expect("photon label");
        let eta = StateVector::new(vec![state.layout()[0].clone()], v.iter().copied().collect())?;
        match relative_state(&state, &eta) {
            Ok(s) => Ok(Some(s)),
            Err(Error::NullRelativeState) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let (cp, cm) = (cond("+")?, cond("-")?);
    let fid = |s: &Option<StateVector>, label: &str| -> Result<Option<f64>> {
        match s {
            Some(s) => {
                let t = StateVector::new(vec![s.layout()[0].clone()], mb.vector(label).expect("mirror label").iter().copied().collect())?;
                Ok(Some(s.fidelity(&t)?))
            }
            None => Ok(None),
        }
    };
    let family = |b: &LocalBasis| {
        let v = b.labels().iter().zip(b.vectors()).enumerate().map(|(i, (l, v))| (l.clone(), i as f64, v.clone())).collect();
        ProjectorFamily::from_basis(&[b.register()], v)
    };
    let correlation = observable_correlation(&state, &family(&pb)?, &family(&mb)?)?;
    Ok(ApproxRun {
        alpha,
        fidelity_plus: fid(&cp, "psi1")?,
        fidelity_minus: fid(&cm, "psi2")?,
        conditional_plus: cp,
        conditional_minus: cm,
        correlation,
        canonical: canonical_correlation(&state, &["photon"])?,
        branches,
        state,
    })
}

pub fn approx_report(alpha: f64) -> Result<ScenarioReport> {
    let run = rebase_approximate_measurement(alpha)?;
    let mut r = ScenarioReport::new("approx");
    r.param("alpha", num(alpha));
    for b in &run.branches.branches {
        r.branches.push(BranchRow::new(b.label.to_string(), b.weight));
    }
    let opt = |x: Option<f64>| x.map_or(json!(null), num);
    let plus = run.branches.branches.iter().filter(|b| b.label.get("photon") == Some("+")).map(|b| b.weight).sum::<f64>();
    r.quantity("alpha_tilde", num(alpha_tilde(alpha)))
        .quantity("weight_plus", num(plus))
        .quantity("fidelity_plus", opt(run.fidelity_plus))
        .quantity("fidelity_minus", opt(run.fidelity_minus))
        .quantity("correlation", num(run.correlation))
        .quantity("canonical_correlation", num(run.canonical));

    let (ep, em) = conditional_closed_form(alpha);
    let mb = mirror_basis()?;
    let check = |s: &Option<StateVector>, e: &[f64; 2]| -> Result<bool> {
        Ok(match s {
            Some(s) => {
                let t = StateVector::new(s.layout().to_vec(), in_basis(e, &mb))?;
                s.distance_up_to_phase(&t)? <= BRANCH_TOL
            }
            None => true,
        })
    };
    r.assert("weight_plus_closed_form", (plus - (1.0 - alpha) / 2.0).abs() <= 1e-12)
        .assert("conditional_plus_closed_form", check(&run.conditional_plus, &ep)?)
        .assert("conditional_minus_closed_form", check(&run.conditional_minus, &em)?)
        .assert("correlation_within_canonical", run.correlation <= run.canonical + 1e-9);
    if let Some(f) = run.fidelity_plus.filter(|_| plus >= PRUNE_WEIGHT) {
        r.assert("fidelity_is_alpha_tilde", (f - alpha_tilde(alpha)).abs() <= BRANCH_TOL);
    }
    Ok(r.seal())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        let r = rebase_approximate_measurement(0.0).unwrap();
        assert_eq!(r.branches.len(), 2);
        assert!((r.correlation - 2f64.ln()).abs() < 1e-12);
        let r = rebase_approximate_measurement(1.0).unwrap();
        assert!(r.correlation.abs() < 1e-12);
        assert!(r.conditional_plus.is_none());
        let r = rebase_approximate_measurement(0.1).unwrap();
        assert!(r.fidelity_plus.unwrap() > 0.99 && r.fidelity_minus.unwrap() > 0.99);
    }

    #[test]
    fn report_passes() {
        for a in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let r = approx_report(a).unwrap();
            assert!(r.passed(), "{a}: {:?}", r.failed_assertions());
        }
    }
}

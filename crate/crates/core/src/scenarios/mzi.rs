//! Mach-Zehnder universe: photon, four mirrors, two detectors.
//!
//! Mirrors M1 and M3 are beam splitters whose recoil state records the
//! photon's path with overlap `alpha`; M2 and M4 are ideal reflectors.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use serde_json::json;

use crate::branching::{decompose, BasisChoice, BranchSet, WorldTree, BRANCH_TOL};
use crate::numfmt::rational;
use crate::report::{num, BranchRow, ScenarioReport};
use crate::tensor::{apply_operator, LinearOperator, Register, StateVector, C64};
use crate::{Error, Result};

/// Overlap of two Gaussian packets of width `a` whose momenta differ by `k`.
pub fn mirror_overlap(a: f64, k: f64) -> Result<f64> {
    if !(a > 0.0) || !(k >= 0.0) || !a.is_finite() || !k.is_finite() {
        return Err(Error::Param(format!("mirror_overlap needs a > 0 and k >= 0, got a={a}, k={k}")));
    }
    Ok((-a * a * k * k / 4.0).exp())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MirrorMode {
    /// Mirror states unchanged by the photon (`alpha = 1`).
    PI,
    /// Mirror states orthogonal after the kick (`alpha = 0`).
    PS,
    General { alpha: f64 },
}

impl MirrorMode {
    /// General mode with `alpha` derived from packet width and wavenumber.
    pub fn from_packet(a: f64, k: f64) -> Result<Self> {
        Ok(Self::General { alpha: mirror_overlap(a, k)? })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PI => "PI",
            Self::PS => "PS",
            Self::General { .. } => "general",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MziParams {
    pub theta: f64,
    pub mode: MirrorMode,
    pub dp_detector: bool,
}

impl MziParams {
    pub fn new(theta: f64, mode: MirrorMode) -> Self {
        Self { theta, mode, dp_detector: false }
    }

    pub fn alpha(&self) -> Result<f64> {
        let a = match self.mode {
            MirrorMode::PI => 1.0,
            MirrorMode::PS => 0.0,
            MirrorMode::General { alpha } => alpha,
        };
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Param(format!("alpha must lie in [0, 1], got {a}")));
        }
        Ok(a)
    }

    /// Overlap of the mirror states as seen by the detectors: zero when DP
    /// detectors record the kick.
    pub fn effective_alpha(&self) -> Result<f64> {
        let a = self.alpha()?;
        Ok(if self.dp_detector { 0.0 } else { a })
    }
}

#[derive(Clone, Debug)]
pub struct MziRun {
    pub params: MziParams,
    pub alpha: f64,
    pub beta: f64,
    /// `(stage name, state)` for the initial state and after each stage.
    pub stages: Vec<(String, StateVector)>,
    pub worlds: BranchSet,
    pub tree: WorldTree,
    /// Probability that D_H resp. D_V fired.
    pub detector_weights: (f64, f64),
}

impl MziRun {
    pub fn final_state(&self) -> &StateVector {
        &self.stages.last().expect("at least one stage").1
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn registers(dp: bool) -> Result<Vec<Register>> {
    let mut regs = vec![
        Register::finite("photon", ["H", "V"])?,
        Register::finite("M1", ["0", "perp"])?,
        Register::finite("M2", ["0"])?,
        Register::finite("M3", ["0", "perp", "perp*"])?,
        Register::finite("M4", ["0"])?,
        Register::qubit("DH"),
        Register::qubit("DV"),
    ];
    if dp {
        regs.push(Register::qubit("DP1"));
        regs.push(Register::qubit("DP3"));
    }
    Ok(regs)
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

/// Block beam splitter on (photon, recoil): `[[I, s K^dag], [-s K, I]] / sqrt 2`
/// with `s = 1` for M1 and `s = -1` for M3.
fn beam_splitter(kick: &DMatrix<C64>, s: f64) -> DMatrix<C64> {
    let m = kick.nrows();
    let id = DMatrix::<C64>::identity(m, m);
    let mut u = DMatrix::zeros(2 * m, 2 * m);
    u.view_mut((0, 0), (m, m)).copy_from(&id);
    u.view_mut((m, m), (m, m)).copy_from(&id);
    u.view_mut((0, m), (m, m)).copy_from(&(kick.adjoint() * c(s)));
    u.view_mut((m, 0), (m, m)).copy_from(&(kick * c(-s)));
    u * c(FRAC_1_SQRT_2)
}

fn m1_kick(alpha: f64, beta: f64) -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(alpha), c(-beta), c(beta), c(alpha)])
}

fn m3_kick(alpha: f64, beta: f64) -> DMatrix<C64> {
    #[rustfmt::skip]
    let k = [
        alpha, 0.0, beta,
        beta, 0.0, -alpha,
        0.0, 1.0, 0.0,
    ];
    DMatrix::from_row_slice(3, 3, &k.map(c))
}

struct Stages {
    m1: LinearOperator,
    sample: LinearOperator,
    m24: LinearOperator,
    m3: LinearOperator,
    detect: LinearOperator,
}

fn stage_operators(alpha: f64, beta: f64, theta: f64, dp: bool) -> Result<Stages> {
    let (k1, k3) = (m1_kick(alpha, beta), m3_kick(alpha, beta));
    let (m1, m3) = if dp {
        (
            LinearOperator::unitary(&["photon", "M1", "DP1"], beam_splitter(&kron(&k1, &pauli_x()), 1.0))?,
            LinearOperator::unitary(&["photon", "M3", "DP3"], beam_splitter(&kron(&k3, &pauli_x()), -1.0))?,
        )
    } else {
        (
            LinearOperator::unitary(&["photon", "M1"], beam_splitter(&k1, 1.0))?,
            LinearOperator::unitary(&["photon", "M3"], beam_splitter(&k3, -1.0))?,
        )
    };
    let sample = LinearOperator::diagonal(&["photon"], vec![C64::from_polar(1.0, theta), c(1.0)]);
    let m24 = LinearOperator::unitary(&["photon"], DMatrix::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(-1.0), c(0.0)]))?;
    // photon H flips DH, photon V flips DV
    let mut det = DMatrix::zeros(8, 8);
    for p in 0..2 {
        for h in 0..2 {
            for v in 0..2 {
                let (h2, v2) = if p == 0 { (h ^ 1, v) } else { (h, v ^ 1) };
                det[(p * 4 + h2 * 2 + v2, p * 4 + h * 2 + v)] = c(1.0);
            }
        }
    }
    let detect = LinearOperator::unitary(&["photon", "DH", "DV"], det)?;
    Ok(Stages { m1, sample, m24, m3, detect })
}

fn labelling(layout: &[Register], dp: bool) -> Vec<BasisChoice> {
    let names: &[&str] = if dp { &["photon", "DH", "DV", "DP1", "DP3"] } else { &["photon", "M1", "M3", "DH", "DV"] };
    names
        .iter()
        .map(|n| BasisChoice::computational(layout.iter().find(|r| r.name() == *n).expect("register exists")))
        .collect()
}

/// Evolves the universe stage by stage and splits it into worlds.
pub fn mzi_run(p: &MziParams) -> Result<MziRun> {
    if !p.theta.is_finite() {
        return Err(Error::Param(format!("theta must be finite, got {}", p.theta)));
    }
    let alpha = p.alpha()?;
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let layout = registers(p.dp_detector)?;
    let zeros: Vec<&str> = layout.iter().map(|r| if r.name() == "photon" { "H" } else { "0" }).collect();
    let psi0 = StateVector::basis(layout.clone(), &zeros)?;
    let ops = stage_operators(alpha, beta, p.theta, p.dp_detector)?;

    let psi1 = apply_operator(&ops.m1, &psi0)?;
    let psi1p = apply_operator(&ops.sample, &psi1)?;
    let psi2 = apply_operator(&ops.m24, &psi1p)?;
    let psi3 = apply_operator(&ops.m3, &psi2)?;
    let psif = apply_operator(&ops.detect, &psi3)?;

    let choices = labelling(&layout, p.dp_detector);
    let split = |s: &StateVector, step: &str| decompose(s, &choices).map(|b| b.with_provenance(step, vec![]));
    let b0 = split(&psi0, "initial")?;
    let b1 = split(&psi1, "M1")?;
    let b2 = split(&psi2, "sample+M2/M4")?;
    let bf = split(&psif, "M3+detection")?;

    let tree = WorldTree::new("initial", &b0)?
        .link_by_evolution("M1", &b0, |s| apply_operator(&ops.m1, s), &b1)?
        .link_by_evolution("sample+M2/M4", &b1, |s| apply_operator(&ops.m24, &apply_operator(&ops.sample, s)?), &b2)?
        .link_by_evolution("M3+detection", &b2, |s| apply_operator(&ops.detect, &apply_operator(&ops.m3, s)?), &bf)?;

    let mut dh = 0.0;
    let mut dv = 0.0;
    for b in &bf.branches {
        if b.label.get("DH") == Some("1") {
            dh += b.weight;
        }
        if b.label.get("DV") == Some("1") {
            dv += b.weight;
        }
    }
    let stages = vec![
        ("initial".to_string(), psi0),
        ("M1".to_string(), psi1),
        ("sample".to_string(), psi1p),
        ("M2/M4".to_string(), psi2),
        ("M3".to_string(), psi3),
        ("detection".to_string(), psif),
    ];
    Ok(MziRun { params: *p, alpha, beta, stages, worlds: bf, tree, detector_weights: (dh, dv) })
}

/// Hand-expanded final state of the general mode (no DP detectors):
/// `1/2 [ a(1+e^{i theta}) H00 + b H perp 0 + b e^{i theta} H 0 perp*
///       + (a^2 - e^{i theta}) V00 + ab V0perp + ab V perp 0 + b^2 V perp perp ]`
/// with detector flags set by the photon direction.
pub fn closed_form_final(alpha: f64, theta: f64) -> Result<StateVector> {
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let layout = registers(false)?;
    let e = C64::from_polar(1.0, theta);
    let terms: [(&str, &str, &str, C64); 7] = [
        ("H", "0", "0", (1.0 + e) * alpha),
        ("H", "perp", "0", c(beta)),
        ("H", "0", "perp*", e * beta),
        ("V", "0", "0", alpha * alpha - e),
        ("V", "0", "perp", c(alpha * beta)),
        ("V", "perp", "0", c(alpha * beta)),
        ("V", "perp", "perp", c(beta * beta)),
    ];
    let mut acc: Option<StateVector> = None;
    for (ph, m1, m3, amp) in terms {
        let (dh, dv) = if ph == "H" { ("1", "0") } else { ("0", "1") };
        let term = StateVector::basis(layout.clone(), &[ph, m1, "0", m3, "0", dh, dv])?.scaled(amp * 0.5);
        acc = Some(match acc {
            Some(a) => a.add(&term)?,
            None => term,
        });
    }
    Ok(acc.expect("seven terms"))
}

/// World-I amplitude as printed for the general case, `1/2 a e^{i theta/2} cos^2(theta/2)`.
pub fn printed_world1_amplitude(alpha: f64, theta: f64) -> C64 {
    C64::from_polar(0.5 * alpha * (theta / 2.0).cos().powi(2), theta / 2.0)
}

/// Dedicated PI path: photon-only interferometer, detector weights `(cos^2, sin^2)` of `theta/2`.
pub fn pi_detector_weights(theta: f64) -> (f64, f64) {
    let h = (theta / 2.0).cos().powi(2);
    (h, 1.0 - h)
}

/// Dedicated PS path: four equal worlds.
pub fn ps_world_weights() -> [f64; 4] {
    [0.25; 4]
}

/// Closed-form weights of worlds I..VII in the general mode.
pub fn general_world_weights(alpha: f64, theta: f64) -> [f64; 7] {
    let b2 = 1.0 - alpha * alpha;
    let e = C64::from_polar(1.0, theta);
    [
        alpha * alpha * (theta / 2.0).cos().powi(2),
        (alpha * alpha - e).norm_sqr() / 4.0,
        b2 / 4.0,
        b2 / 4.0,
        alpha * alpha * b2 / 4.0,
        alpha * alpha * b2 / 4.0,
        b2 * b2 / 4.0,
    ]
}

/// Labels of worlds I..VII over (photon, M1, M3).
pub const GENERAL_WORLDS: [(&str, &str, &str); 7] = [
    ("H", "0", "0"),
    ("V", "0", "0"),
    ("H", "perp", "0"),
    ("H", "0", "perp*"),
    ("V", "0", "perp"),
    ("V", "perp", "0"),
    ("V", "perp", "perp"),
];

const ROMAN: [&str; 7] = ["I", "II", "III", "IV", "V", "VI", "VII"];

fn near(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12
}

/// Exact weight of a rational case: PI with theta in {0, pi/2, pi} (mod 2 pi), or PS.
fn rational_weight(p: &MziParams, w: f64) -> Option<String> {
    let exact = match p.mode {
        MirrorMode::PS => true,
        _ if p.dp_detector => true,
        MirrorMode::PI => {
            let t = p.theta.rem_euclid(2.0 * PI);
            [0.0, PI / 2.0, PI, 1.5 * PI, 2.0 * PI].iter().any(|&x| near(t, x))
        }
        MirrorMode::General { .. } => false,
    };
    if !exact {
        return None;
    }
    [(0u128, 1u128), (1, 4), (1, 2), (3, 4), (1, 1)]
        .iter()
        .find(|(n, d)| near(w, *n as f64 / *d as f64))
        .map(|&(n, d)| rational(n, d))
}

pub fn mzi_report(p: &MziParams) -> Result<ScenarioReport> {
    let run = mzi_run(p)?;
    let mut r = ScenarioReport::new("mzi");
    r.param("theta", num(p.theta))
        .param("mode", json!(p.mode.name()))
        .param("dp_detector", json!(p.dp_detector))
        .param("alpha", num(run.alpha));
    for b in &run.worlds.branches {
        let label = b.label.to_string();
        r.branches.push(match rational_weight(p, b.weight) {
            Some(q) => BranchRow::exact(label, b.weight, q),
            None => BranchRow::new(label, b.weight),
        });
    }
    let (dh, dv) = run.detector_weights;
    r.quantity("alpha", num(run.alpha))
        .quantity("beta", num(run.beta))
        .quantity("detector_DH", num(dh))
        .quantity("detector_DV", num(dv))
        .quantity("world_count", json!(run.worlds.len()))
        .quantity("pruned_mass", num(run.worlds.pruned_mass))
        .quantity("interference_nodes", json!(run.tree.interference_nodes().len()));

    let recon = run.worlds.reconstruct()?.distance(run.final_state())?;
    let orth = run.worlds.max_overlap()?;
    r.quantity("reconstruction_error", num(recon)).quantity("max_branch_overlap", num(orth));
    r.assert("reconstruction", recon <= BRANCH_TOL).assert("branches_orthogonal", orth <= BRANCH_TOL);
    r.assert("total_weight", (run.worlds.total_weight() + run.worlds.pruned_mass - 1.0).abs() <= BRANCH_TOL);

    match (p.mode, p.dp_detector) {
        (MirrorMode::PI, false) => {
            let (h, v) = pi_detector_weights(p.theta);
            r.assert("detector_weights_cos_sin", near(dh, h) && near(dv, v));
        }
        (_, true) | (MirrorMode::PS, _) => {
            let four = run.worlds.len() == 4 && run.worlds.weights().iter().zip(ps_world_weights()).all(|(w, e)| near(*w, e));
            r.assert("four_equal_worlds", four);
        }
        (MirrorMode::General { alpha }, false) => {
            let expect = general_world_weights(alpha, p.theta);
            for (i, ((ph, m1, m3), w)) in GENERAL_WORLDS.iter().zip(expect).enumerate() {
                let got = run.worlds.find(&[("photon", ph), ("M1", m1), ("M3", m3)]).map_or(0.0, |b| b.weight);
                r.quantity(&format!("w_{}", ROMAN[i]), num(got));
                r.assert(&format!("w_{}_closed_form", ROMAN[i]), (got - w).abs() <= 1e-12);
            }
            let dual = closed_form_final(alpha, p.theta)?.distance(run.final_state())?;
            r.quantity("closed_form_distance", num(dual));
            r.assert("closed_form_state", dual <= BRANCH_TOL);
            let printed = printed_world1_amplitude(alpha, p.theta).norm_sqr();
            let w1 = run.worlds.find(&[("photon", "H"), ("M1", "0"), ("M3", "0")]).map_or(0.0, |b| b.weight);
            r.quantity("printed_world1_weight", num(printed));
            r.quantity("printed_world1_coefficient_agrees", json!((printed - w1).abs() <= BRANCH_TOL));
            if 0.0 < alpha && alpha < 1.0 {
                r.assert("seven_worlds", run.worlds.len() == 7);
            }
        }
    }
    r.tree = Some(run.tree);
    Ok(r.seal())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beam_splitters_are_unitary() {
        for a in [0.0, 0.3, 1.0] {
            let b = (1.0f64 - a * a).sqrt();
            assert!(stage_operators(a, b, 0.7, false).is_ok());
            assert!(stage_operators(a, b, 0.7, true).is_ok());
        }
    }

    #[test]
    fn pi_half_tree_layers() {
        let run = mzi_run(&MziParams::new(PI / 2.0, MirrorMode::PI)).unwrap();
        let layers: Vec<Vec<f64>> = run.tree.steps.iter().map(|s| s.branches.iter().map(|b| b.weight).collect()).collect();
        assert_eq!(layers.len(), 4);
        assert_eq!(layers[0].len(), 1);
        for l in &layers[1..] {
            assert_eq!(l.len(), 2);
            assert!(l.iter().all(|w| (w - 0.5).abs() < 1e-12));
        }
    }

    #[test]
    fn general_has_two_interference_nodes() {
        let run = mzi_run(&MziParams::new(PI / 3.0, MirrorMode::General { alpha: 0.6 })).unwrap();
        assert_eq!(run.tree.leaves().len(), 7);
        assert_eq!(run.tree.interference_nodes().len(), 2);
    }

    #[test]
    fn invalid_alpha() {
        assert!(matches!(mzi_run(&MziParams::new(0.0, MirrorMode::General { alpha: 1.5 })), Err(Error::Param(_))));
        assert!(matches!(mirror_overlap(0.0, 1.0), Err(Error::Param(_))));
    }
}

//! Square-amplitude distributions, relative states, Schmidt decompositions and
//! the quantum information measures built on them.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{plogp_over, shannon_entropy, Axis, FiniteDistribution};
use crate::numfmt::format_g;
use crate::tensor::{
    apply_operator, canonical_phase, check_edges, density_of, fourier_dual, hermitian_eigen, layout_dim,
    DensityMatrix, LinearOperator, Register, StateVector, C64, EIGEN_TOL,
};

/// Eigenvalues below this are clamped before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;
/// Schmidt coefficients at or below this are dropped.
pub const SCHMIDT_CUTOFF: f64 = 1e-20;
/// Squared norm below which `<eta|Psi>` counts as zero.
pub const NULL_OVERLAP: f64 = 1e-24;

#[derive(Clone, Debug)]
pub struct Projector {
    pub label: String,
    pub eigenvalue: f64,
    pub matrix: DMatrix<C64>,
    pub multiplicity: usize,
}

/// A Hermitian observable as orthogonal projectors summing to the identity.
#[derive(Clone, Debug)]
pub struct ProjectorFamily {
    registers: Vec<String>,
    projectors: Vec<Projector>,
}

impl ProjectorFamily {
    /// Projectors from explicit matrices; checks `P_i P_j = delta_ij P_i` and completeness.
    pub fn from_projectors(registers: &[&str], projectors: Vec<(String, f64, DMatrix<C64>)>) -> Result<Self> {
        let Some(d) = projectors.first().map(|p| p.2.nrows()) else {
            return Err(Error::Projector("empty family".into()));
        };
        let mut sum = DMatrix::<C64>::zeros(d, d);
        let mut out = Vec::with_capacity(projectors.len());
        for (label, eigenvalue, m) in projectors {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Projector(format!("projector `{label}` has the wrong size")));
            }
            sum += &m;
            let tr = m.trace().re;
            let multiplicity = tr.round() as usize;
            if (tr - multiplicity as f64).abs() > EIGEN_TOL || multiplicity == 0 {
                return Err(Error::Projector(format!("projector `{label}` has trace {tr}")));
            }
            out.push(Projector { label, eigenvalue, matrix: m, multiplicity });
        }
        for (i, a) in out.iter().enumerate() {
            for (j, b) in out.iter().enumerate() {
                let prod = &a.matrix * &b.matrix;
                let target = if i == j { a.matrix.clone() } else { DMatrix::zeros(d, d) };
                if max_abs(&(prod - target)) > EIGEN_TOL {
                    return Err(Error::Projector(format!("`{}` and `{}` are not orthogonal projectors", a.label, b.label)));
                }
            }
        }
        if max_abs(&(sum - DMatrix::identity(d, d))) > EIGEN_TOL {
            return Err(Error::Projector("projectors do not sum to the identity".into()));
        }
        let mut labels = HashSet::new();
        if let Some(p) = out.iter().find(|p| !labels.insert(p.label.as_str())) {
            return Err(Error::Projector(format!("label `{}` repeats", p.label)));
        }
        Ok(Self { registers: registers.iter().map(|s| s.to_string()).collect(), projectors: out })
    }

    /// Rank-one projectors onto an orthonormal basis (label, eigenvalue, vector).
    pub fn from_basis(registers: &[&str], basis: Vec<(String, f64, DVector<C64>)>) -> Result<Self> {
        let ps = basis
            .into_iter()
            .map(|(l, e, v)| {
                let m = &v * v.adjoint();
                (l, e, m)
            })
            .collect();
        Self::from_projectors(registers, ps)
    }

    /// Computational basis of one register, eigenvalue = basis index.
    pub fn computational(register: &Register) -> Self {
        let d = register.dim();
        let projectors = register
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let mut m = DMatrix::zeros(d, d);
                m[(i, i)] = C64::new(1.0, 0.0);
                Projector { label: l.clone(), eigenvalue: i as f64, matrix: m, multiplicity: 1 }
            })
            .collect();
        Self { registers: vec![register.name().to_string()], projectors }
    }

    /// Spectral projectors of a Hermitian matrix; eigenvalues within `1e-9` merge.
    pub fn from_hermitian(registers: &[&str], matrix: &DMatrix<C64>) -> Result<Self> {
        if max_abs(&(matrix - matrix.adjoint())) > EIGEN_TOL {
            return Err(Error::Projector("matrix is not Hermitian".into()));
        }
        let (vals, vecs) = hermitian_eigen(matrix);
        let d = matrix.nrows();
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            match groups.last_mut() {
                Some((g, members)) if (v - *g).abs() < 1e-9 => members.push(i),
                _ => groups.push((v, vec![i])),
            }
        }
        let ps = groups
            .into_iter()
            .map(|(e, members)| {
                let mut m = DMatrix::zeros(d, d);
                for i in members {
                    let c = vecs.column(i);
                    m += c * c.adjoint();
                }
                (format_g(e, 12), e, m)
            })
            .collect();
        Self::from_projectors(registers, ps)
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].matrix.nrows()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.projectors.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.projectors.iter().any(|p| p.multiplicity > 1)
    }

    /// Unit eigenvectors of a nondegenerate family, in projector order.
    pub fn eigenvectors(&self) -> Result<Vec<DVector<C64>>> {
        if self.is_degenerate() {
            return Err(Error::DegenerateObservable);
        }
        Ok(self
            .projectors
            .iter()
            .map(|p| {
                let (_, vecs) = hermitian_eigen(&p.matrix);
                let mut v: Vec<C64> = vecs.column(vecs.ncols() - 1).iter().copied().collect();
                canonical_phase(&mut v);
                DVector::from_vec(v)
            })
            .collect())
    }

    /// The observable `sum mu_i P_i`.
    pub fn observable(&self) -> DMatrix<C64> {
        let d = self.dim();
        self.projectors
            .iter()
            .fold(DMatrix::zeros(d, d), |acc, p| acc + p.matrix.scale(p.eigenvalue))
    }

    fn operator(&self, i: usize) -> Result<LinearOperator> {
        let targets: Vec<&str> = self.registers.iter().map(String::as_str).collect();
        LinearOperator::new(&targets, self.projectors[i].matrix.clone())
    }

    fn axis_name(&self) -> String {
        self.registers.join("+")
    }

    fn weights(&self) -> Vec<f64> {
        self.projectors.iter().map(|p| p.multiplicity as f64).collect()
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Full matrix of `op` on `layout`, identity on the other registers.
pub(crate) fn embed(op: &LinearOperator, layout: &[Register]) -> Result<DMatrix<C64>> {
    let d = layout_dim(layout);
    let mut out = DMatrix::zeros(d, d);
    let mut e = vec![C64::new(0.0, 0.0); d];
    for c in 0..d {
        e[c] = C64::new(1.0, 0.0);
        let col = apply_operator(op, &StateVector::from_raw(layout.to_vec(), e.clone()))?;
        out.set_column(c, &DVector::from_column_slice(col.amplitudes()));
        e[c] = C64::new(0.0, 0.0);
    }
    Ok(out)
}

fn family_on(rho: &DensityMatrix, a: &ProjectorFamily) -> Result<Vec<DMatrix<C64>>> {
    (0..a.len()).map(|i| embed(&a.operator(i)?, rho.registers())).collect()
}

/// `P_ij = <Psi| P_i^A P_j^B |Psi>`; multiplicities become measure weights.
pub fn square_amplitude_joint(psi: &StateVector, a: &ProjectorFamily, b: &ProjectorFamily) -> Result<FiniteDistribution> {
    let shared: Vec<&String> = a.registers.iter().filter(|r| b.registers.contains(r)).collect();
    if !shared.is_empty() {
        return Err(Error::SubsystemOverlap(
            shared.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "),
        ));
    }
    let mut probs = Vec::with_capacity(a.len() * b.len());
    for i in 0..a.len() {
        let pa = apply_operator(&a.operator(i)?, psi)?;
        for j in 0..b.len() {
            probs.push(apply_operator(&b.operator(j)?, &pa)?.norm_sqr());
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let axes = vec![
        Axis::new(a.axis_name(), a.labels()),
        Axis::new(b.axis_name(), b.labels()),
    ];
    let weights = (a.is_degenerate() || b.is_degenerate()).then(|| vec![a.weights(), b.weights()]);
    FiniteDistribution::new(axes, probs, weights)
}

/// Normalized `<eta|Psi>` over the registers not covered by `eta`.
pub fn relative_state(psi: &StateVector, eta: &StateVector) -> Result<StateVector> {
    let eta_names: Vec<&str> = eta.register_names();
    let left: Vec<&str> = psi.register_names().into_iter().filter(|n| !eta_names.contains(n)).collect();
    if left.is_empty() {
        return Err(Error::Shape("eta covers every register".into()));
    }
    let mut order = left.clone();
    order.extend(&eta_names);
    let r = psi.reorder(&order)?;
    let (m, ll, rl) = r.bipartite_matrix(&left)?;
    if rl.iter().map(Register::dim).collect::<Vec<_>>() != eta.dims() {
        return Err(Error::Shape("eta registers differ in dimension from Psi's".into()));
    }
    let ev = DVector::from_iterator(eta.dim(), eta.amplitudes().iter().map(C64::conj));
    let phi = m * ev;
    if phi.norm_squared() < NULL_OVERLAP {
        return Err(Error::NullRelativeState);
    }
    StateVector::normalized(ll, phi.iter().copied().collect())
}

/// `sum_j sqrt(lambda_j) |phi_j> (x) |phi'_j>`.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub lambdas: Vec<f64>,
    pub left_states: Vec<StateVector>,
    pub right_states: Vec<StateVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    /// `-sum lambda ln lambda`.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.lambdas)
    }

    /// True when two coefficients coincide within `EIGEN_TOL`, so the bases are not unique.
    pub fn degenerate(&self) -> bool {
        self.lambdas.windows(2).any(|w| (w[0] - w[1]).abs() < EIGEN_TOL)
    }

    pub fn reconstruct(&self) -> Result<StateVector> {
        let mut acc: Option<StateVector> = None;
        for ((l, a), b) in self.lambdas.iter().zip(&self.left_states).zip(&self.right_states) {
            let term = crate::tensor::tensor_product(&[a.clone(), b.clone()])?.scaled(C64::new(l.sqrt(), 0.0));
            acc = Some(match acc {
                Some(s) => s.add(&term)?,
                None => term,
            });
        }
        acc.ok_or_else(|| Error::InvalidState("empty decomposition".into()))
    }
}

fn check_bipartition(psi: &StateVector, left: &[&str]) -> Result<()> {
    if left.is_empty() || left.len() >= psi.layout().len() {
        return Err(Error::Shape("a bipartition needs registers on both sides".into()));
    }
    let mut seen = HashSet::new();
    for n in left {
        psi.register_index(n)?;
        if !seen.insert(*n) {
            return Err(Error::NameCollision(n.to_string()));
        }
    }
    Ok(())
}

/// Schmidt decomposition of `psi` across `left` versus the remaining registers.
pub fn schmidt(psi: &StateVector, left: &[&str]) -> Result<SchmidtDecomposition> {
    check_bipartition(psi, left)?;
    let (m, ll, rl) = psi.bipartite_matrix(left)?;
    let svd = m.svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let vt = svd.v_t.expect("right vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut out = SchmidtDecomposition { lambdas: vec![], left_states: vec![], right_states: vec![] };
    for j in order {
        let s = svd.singular_values[j];
        let lambda = s * s;
        if lambda <= SCHMIDT_CUTOFF {
            continue;
        }
        let mut a: Vec<C64> = u.column(j).iter().copied().collect();
        let mut b: Vec<C64> = vt.row(j).iter().copied().collect();
        if let Some(lead) = a.iter().find(|z| z.norm() > 1e-12).copied() {
            let rot = lead.conj() / lead.norm();
            a.iter_mut().for_each(|z| *z *= rot);
            b.iter_mut().for_each(|z| *z /= rot);
        }
        out.lambdas.push(lambda);
        out.left_states.push(StateVector::from_raw(ll.clone(), a));
        out.right_states.push(StateVector::from_raw(rl.clone(), b));
    }
    Ok(out)
}

/// `-sum lambda_j ln lambda_j` from the Schmidt spectrum.
pub fn canonical_correlation(psi: &StateVector, left: &[&str]) -> Result<f64> {
    Ok(schmidt(psi, left)?.entropy())
}

/// `(-Tr rho1 ln rho1, -Tr rho2 ln rho2)` from the two reduced densities.
pub fn canonical_correlation_by_density(psi: &StateVector, left: &[&str]) -> Result<(f64, f64)> {
    check_bipartition(psi, left)?;
    let right: Vec<&str> = psi.register_names().into_iter().filter(|n| !left.contains(n)).collect();
    let r1 = density_of(psi, left)?;
    let r2 = density_of(psi, &right)?;
    Ok((-density_information(&r1), -density_information(&r2)))
}

/// `sum_i Tr(rho P_i) ln(Tr(rho P_i) / m_i)`.
pub fn operator_information(rho: &DensityMatrix, a: &ProjectorFamily) -> Result<f64> {
    let ps = family_on(rho, a)?;
    Ok(ps
        .iter()
        .zip(a.projectors())
        .map(|(p, proj)| {
            let tr = (rho.matrix() * p).trace().re.max(0.0);
            plogp_over(tr, proj.multiplicity as f64)
        })
        .sum())
}

/// `C_AB = I_AB - I_A - I_B`; the marginal terms come from reduced densities.
pub fn observable_correlation(psi: &StateVector, a: &ProjectorFamily, b: &ProjectorFamily) -> Result<f64> {
    let joint = square_amplitude_joint(psi, a, b)?;
    let ra: Vec<&str> = a.registers.iter().map(String::as_str).collect();
    let rb: Vec<&str> = b.registers.iter().map(String::as_str).collect();
    let ia = operator_information(&density_of(psi, &ra)?, a)?;
    let ib = operator_information(&density_of(psi, &rb)?, b)?;
    Ok(joint.information() - ia - ib)
}

/// `Tr(rho ln rho)`.
pub fn density_information(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues().iter().map(|&l| if l <= 0.0 { 0.0 } else { l * l.max(LOG_FLOOR).ln() }).sum()
}

/// `sum_i P_i rho P_i`.
pub fn process1_channel(rho: &DensityMatrix, a: &ProjectorFamily) -> Result<DensityMatrix> {
    let ps = family_on(rho, a)?;
    let d = rho.dim();
    let m = ps.iter().fold(DMatrix::zeros(d, d), |acc, p| acc + p * rho.matrix() * p);
    DensityMatrix::new(rho.registers().to_vec(), crate::tensor::hermitize(m))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UncertaintyInfo {
    pub i_x: f64,
    pub i_k: f64,
}

impl UncertaintyInfo {
    pub fn sum(&self) -> f64 {
        self.i_x + self.i_k
    }
}

/// `ln(1/(pi e)) = -(1 + ln pi)`.
pub fn uncertainty_bound() -> f64 {
    -(1.0 + std::f64::consts::PI.ln())
}

/// Differential informations of position and momentum for a one-register grid state.
pub fn info_uncertainty(psi: &StateVector) -> Result<UncertaintyInfo> {
    if psi.layout().len() != 1 {
        return Err(Error::Shape("uncertainty needs a single grid register".into()));
    }
    let reg = &psi.layout()[0];
    let dx = reg.spacing().ok_or_else(|| Error::Kind(reg.name().to_string()))?;
    check_edges(psi, reg.name(), "position")?;
    let dual = fourier_dual(psi, reg.name())?;
    check_edges(&dual, reg.name(), "momentum")?;
    let dk = dual.layout()[0].spacing().expect("dual grid");
    let diff_info = |s: &StateVector, d: f64| s.amplitudes().iter().map(|a| plogp_over(a.norm_sqr(), d)).sum();
    Ok(UncertaintyInfo { i_x: diff_info(psi, dx), i_k: diff_info(&dual, dk) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn two(a: C64, b: C64, cc: C64, d: C64) -> StateVector {
        StateVector::normalized(vec![Register::qubit("a"), Register::qubit("b")], vec![a, b, cc, d]).unwrap()
    }

    fn bell() -> StateVector {
        two(c(1.0), c(0.0), c(0.0), c(1.0))
    }

    fn z(name: &str) -> ProjectorFamily {
        ProjectorFamily::computational(&Register::qubit(name))
    }

    #[test]
    fn bell_joint_is_diagonal() {
        let p = square_amplitude_joint(&bell(), &z("a"), &z("b")).unwrap();
        let expect = [0.5, 0.0, 0.0, 0.5];
        assert!(p.probs().iter().zip(expect).all(|(x, y)| (x - y).abs() < 1e-15));
        assert!(matches!(square_amplitude_joint(&bell(), &z("a"), &z("a")), Err(Error::SubsystemOverlap(_))));
    }

    #[test]
    fn relative_states() {
        let psi = two(c(1.0), c(1.0), c(1.0), c(0.0));
        let one = StateVector::basis(vec![Register::qubit("b")], &["1"]).unwrap();
        let zero = StateVector::basis(vec![Register::qubit("b")], &["0"]).unwrap();
        let r1 = relative_state(&psi, &one).unwrap();
        assert!((r1.amplitudes()[0] - c(1.0)).norm() < 1e-15);
        let r0 = relative_state(&psi, &zero).unwrap();
        let s = 0.5f64.sqrt();
        assert!(r0.amplitudes().iter().all(|a| (a - c(s)).norm() < 1e-15));
        let prod = two(c(1.0), c(0.0), c(0.0), c(0.0));
        assert_eq!(relative_state(&prod, &one).unwrap_err(), Error::NullRelativeState);
    }

    #[test]
    fn schmidt_values() {
        let s = schmidt(&bell(), &["a"]).unwrap();
        assert_eq!(s.rank(), 2);
        assert!(s.lambdas.iter().all(|l| (l - 0.5).abs() < 1e-15));
        assert!(s.degenerate());
        let skew = two(c(0.9f64.sqrt()), c(0.0), c(0.0), c(0.1f64.sqrt()));
        let cc = canonical_correlation(&skew, &["a"]).unwrap();
        assert!((cc - (-0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln())).abs() < 1e-12);
        assert!((cc - 0.3251).abs() < 1e-4);
        let back = schmidt(&skew, &["a"]).unwrap().reconstruct().unwrap();
        assert!(back.distance_up_to_phase(&skew).unwrap() < 1e-12);
    }

    #[test]
    fn operator_information_cases() {
        let mixed = DensityMatrix::new(vec![Register::qubit("a")], DMatrix::identity(2, 2).scale(0.5).map(c)).unwrap();
        assert!((operator_information(&mixed, &z("a")).unwrap() + LN_2).abs() < 1e-15);
        let whole = ProjectorFamily::from_projectors(&["a"], vec![("all".into(), 0.0, DMatrix::identity(2, 2).map(c))]).unwrap();
        assert!((operator_information(&mixed, &whole).unwrap() + LN_2).abs() < 1e-15);
    }

    #[test]
    fn process1_on_plus_state() {
        let plus = StateVector::normalized(vec![Register::qubit("a")], vec![c(1.0), c(1.0)]).unwrap();
        let rho = DensityMatrix::pure(&plus);
        assert!(density_information(&rho).abs() < 1e-12);
        let after = process1_channel(&rho, &z("a")).unwrap();
        assert!((after.matrix() - DMatrix::identity(2, 2).scale(0.5).map(c)).iter().all(|x| x.norm() < 1e-15));
        assert!((density_information(&after) + LN_2).abs() < 1e-12);
    }

    #[test]
    fn from_hermitian_groups_degenerate_eigenvalues() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(2.0), c(1.0)]));
        let f = ProjectorFamily::from_hermitian(&["q"], &m).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.projectors()[0].multiplicity, 2);
        assert!(f.is_degenerate());
        assert_eq!(f.eigenvectors().unwrap_err(), Error::DegenerateObservable);
    }

    #[test]
    fn bad_projectors_rejected() {
        let half = DMatrix::identity(2, 2).scale(0.5).map(c);
        assert!(ProjectorFamily::from_projectors(&["a"], vec![("x".into(), 0.0, half)]).is_err());
    }
}

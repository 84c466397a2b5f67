//! Composite registers, state vectors, operators and reduced densities.
//!
//! Amplitudes are stored dense and row-major over the layout order: the last
//! register varies fastest. Every operation returns a new value.

use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::format_g;

pub type C64 = Complex64;

/// Tolerance for algebraic identities (norms, unitarity, hermiticity).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for results of eigen-decompositions.
pub const EIGEN_TOL: f64 = 1e-10;
/// Fraction of a grid (each side) that must carry negligible probability.
pub const EDGE_FRACTION: usize = 32;
/// Maximum probability allowed inside the edge bands of a grid.
pub const EDGE_MASS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RegisterKind {
    Finite,
    /// Uniform grid, cell centers `start + i * spacing`.
    Grid { start: f64, spacing: f64 },
    Memory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Register {
    name: String,
    kind: RegisterKind,
    labels: Vec<String>,
}

impl Register {
    pub fn finite<S: Into<String>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::with_kind(name.into(), RegisterKind::Finite, labels)
    }

    pub fn memory<S: Into<String>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::with_kind(name.into(), RegisterKind::Memory, labels)
    }

    /// Two-level register labelled `0`, `1`.
    pub fn qubit(name: impl Into<String>) -> Self {
        Self::finite(name, ["0", "1"]).expect("static labels are valid")
    }

    pub fn grid(name: impl Into<String>, start: f64, spacing: f64, cells: usize) -> Result<Self> {
        let name = name.into();
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Shape(format!("grid `{name}` needs a positive cell width")));
        }
        let labels = (0..cells).map(|i| format_g(start + i as f64 * spacing, 12));
        Self::with_kind(name, RegisterKind::Grid { start, spacing }, labels)
    }

    /// Grid whose cell `cells / 2` sits at the origin.
    pub fn centered_grid(name: impl Into<String>, cells: usize, spacing: f64) -> Result<Self> {
        let start = -((cells / 2) as f64) * spacing;
        Self::grid(name, start, spacing, cells)
    }

    fn with_kind<S: Into<String>>(
        name: String,
        kind: RegisterKind,
        labels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Shape(format!("register `{name}` has dimension 0")));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Shape(format!("register `{name}` repeats label `{l}`")));
            }
        }
        Ok(Self { name, kind, labels })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &RegisterKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.kind, RegisterKind::Grid { .. })
    }

    pub fn spacing(&self) -> Option<f64> {
        match self.kind {
            RegisterKind::Grid { spacing, .. } => Some(spacing),
            _ => None,
        }
    }

    pub fn coordinates(&self) -> Option<Vec<f64>> {
        match self.kind {
            RegisterKind::Grid { start, spacing } => {
                Some((0..self.dim()).map(|i| start + i as f64 * spacing).collect())
            }
            _ => None,
        }
    }

    /// Same register under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self { name: name.into(), ..self.clone() }
    }
}

fn check_unique(layout: &[Register]) -> Result<()> {
    let mut seen = HashSet::new();
    for r in layout {
        if !seen.insert(r.name()) {
            return Err(Error::NameCollision(r.name().to_string()));
        }
    }
    Ok(())
}

pub(crate) fn layout_dim(layout: &[Register]) -> usize {
    layout.iter().map(Register::dim).product()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Moves axes so that new axis `k` is old axis `perm[k]`.
pub(crate) fn permute_axes(data: &[C64], dims: &[usize], perm: &[usize]) -> Vec<C64> {
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return data.to_vec();
    }
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out = Vec::with_capacity(data.len());
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..data.len() {
        let src: usize = idx.iter().zip(perm).map(|(&i, &p)| i * old_strides[p]).sum();
        out.push(data[src]);
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < new_dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// Rotates so the first amplitude of magnitude above `ALGEBRA_TOL` is real positive.
pub(crate) fn canonical_phase(amps: &mut [C64]) {
    if let Some(a) = amps.iter().find(|a| a.norm() > ALGEBRA_TOL) {
        let rot = a.conj() / a.norm();
        for x in amps.iter_mut() {
            *x *= rot;
        }
    }
}

/// A pure state of an ordered product of registers.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: Vec<Register>,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Builds a normalized state and applies the global phase convention.
    pub fn new(layout: Vec<Register>, amplitudes: Vec<C64>) -> Result<Self> {
        let s = Self::checked_shape(layout, amplitudes)?;
        let n = s.norm_sqr();
        if (n - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidState(format!("squared norm {n} is not 1")));
        }
        Ok(s.with_canonical_phase())
    }

    /// Normalizes the given amplitudes, then applies the phase convention.
    pub fn normalized(layout: Vec<Register>, amplitudes: Vec<C64>) -> Result<Self> {
        let mut s = Self::checked_shape(layout, amplitudes)?;
        let n = s.norm_sqr().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState("zero vector cannot be normalized".into()));
        }
        for a in &mut s.amplitudes {
            *a /= n;
        }
        Ok(s.with_canonical_phase())
    }

    /// Product basis state picked by one label per register.
    pub fn basis(layout: Vec<Register>, labels: &[&str]) -> Result<Self> {
        if labels.len() != layout.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} registers",
                labels.len(),
                layout.len()
            )));
        }
        let dims: Vec<usize> = layout.iter().map(Register::dim).collect();
        let st = strides(&dims);
        let mut flat = 0;
        for ((r, l), s) in layout.iter().zip(labels).zip(&st) {
            let i = r
                .label_index(l)
                .ok_or_else(|| Error::Shape(format!("`{l}` is not a label of `{}`", r.name())))?;
            flat += i * s;
        }
        let mut amps = vec![C64::new(0.0, 0.0); layout_dim(&layout)];
        amps[flat] = C64::new(1.0, 0.0);
        Self::new(layout, amps)
    }

    /// Single-register state from a function of the basis index.
    pub fn from_fn(register: Register, f: impl Fn(usize) -> C64) -> Result<Self> {
        let amps = (0..register.dim()).map(f).collect();
        Self::normalized(vec![register], amps)
    }

    /// No normalization or phase handling; used for evolution results and
    /// unnormalized branch components.
    pub(crate) fn from_raw(layout: Vec<Register>, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(layout_dim(&layout), amplitudes.len());
        Self { layout, amplitudes }
    }

    fn checked_shape(layout: Vec<Register>, amplitudes: Vec<C64>) -> Result<Self> {
        check_unique(&layout)?;
        let d = layout_dim(&layout);
        if d != amplitudes.len() {
            return Err(Error::Shape(format!(
                "layout has dimension {d} but {} amplitudes were given",
                amplitudes.len()
            )));
        }
        Ok(Self { layout, amplitudes })
    }

    fn with_canonical_phase(mut self) -> Self {
        canonical_phase(&mut self.amplitudes);
        self
    }

    pub fn layout(&self) -> &[Register] {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.layout.iter().map(Register::dim).collect()
    }

    pub fn register_names(&self) -> Vec<&str> {
        self.layout.iter().map(Register::name).collect()
    }

    pub fn register_index(&self, name: &str) -> Result<usize> {
        self.layout
            .iter()
            .position(|r| r.name() == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        Ok(&self.layout[self.register_index(name)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum()
    }

    /// `<self|other>`; layouts must have equal dimensions.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dims() != other.dims() {
            return Err(Error::Shape("inner product of states with different shapes".into()));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Largest amplitude difference after aligning register order by name.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        let names: Vec<&str> = self.register_names();
        let other = other.reorder(&names)?;
        if self.dims() != other.dims() {
            return Err(Error::Shape("states have different shapes".into()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Same as `distance` after removing the relative global phase.
    pub fn distance_up_to_phase(&self, other: &StateVector) -> Result<f64> {
        let names: Vec<&str> = self.register_names();
        let other = other.reorder(&names)?;
        let ov = self.inner(&other)?;
        let rot = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a * rot - b).norm())
            .fold(0.0, f64::max))
    }

    /// Permutes registers into the given name order (must name every register).
    pub fn reorder(&self, names: &[&str]) -> Result<StateVector> {
        if names.len() != self.layout.len() {
            return Err(Error::Shape(format!(
                "reorder needs all {} registers, got {}",
                self.layout.len(),
                names.len()
            )));
        }
        let perm = names
            .iter()
            .map(|n| self.register_index(n))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = HashSet::new();
        if !perm.iter().all(|p| seen.insert(*p)) {
            return Err(Error::NameCollision("reorder lists a register twice".into()));
        }
        let amps = permute_axes(&self.amplitudes, &self.dims(), &perm);
        let layout = perm.iter().map(|&p| self.layout[p].clone()).collect();
        Ok(StateVector::from_raw(layout, amps))
    }

    /// Splits into a `(left, right)` coefficient matrix with `left` registers as rows.
    /// Returns the matrix plus the left and right layouts.
    pub fn bipartite_matrix(
        &self,
        left: &[&str],
    ) -> Result<(DMatrix<C64>, Vec<Register>, Vec<Register>)> {
        for n in left {
            self.register_index(n)?;
        }
        let right: Vec<&str> = self
            .register_names()
            .into_iter()
            .filter(|n| !left.contains(n))
            .collect();
        let mut order: Vec<&str> = left.to_vec();
        order.extend(&right);
        let r = self.reorder(&order)?;
        let (ll, rl) = r.layout.split_at(left.len());
        let (dl, dr) = (layout_dim(ll), layout_dim(rl));
        let m = DMatrix::from_row_slice(dl, dr, &r.amplitudes);
        Ok((m, ll.to_vec(), rl.to_vec()))
    }

    pub fn scaled(&self, c: C64) -> StateVector {
        StateVector::from_raw(self.layout.clone(), self.amplitudes.iter().map(|a| a * c).collect())
    }

    /// Elementwise sum of two vectors over the same layout (no normalization).
    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        let names: Vec<&str> = self.register_names();
        let other = other.reorder(&names)?;
        if self.dims() != other.dims() {
            return Err(Error::Shape("cannot add states of different shape".into()));
        }
        Ok(StateVector::from_raw(
            self.layout.clone(),
            self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Probabilities `|amplitude|^2` in storage order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(C64::norm_sqr).collect()
    }
}

/// Tensor product of factors; the layout is their concatenation.
pub fn tensor_product(factors: &[StateVector]) -> Result<StateVector> {
    let mut layout: Vec<Register> = Vec::new();
    let mut amps = vec![C64::new(1.0, 0.0)];
    for f in factors {
        layout.extend(f.layout.iter().cloned());
        let mut next = Vec::with_capacity(amps.len() * f.dim());
        for a in &amps {
            next.extend(f.amplitudes.iter().map(|b| a * b));
        }
        amps = next;
    }
    check_unique(&layout)?;
    Ok(StateVector::from_raw(layout, amps))
}

#[derive(Clone, Debug)]
enum OperatorMatrix {
    Dense(DMatrix<C64>),
    Diagonal(Vec<C64>),
}

/// An operator on a subset of registers, identity elsewhere.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    targets: Vec<String>,
    matrix: OperatorMatrix,
    unitary: bool,
}

impl LinearOperator {
    pub fn new(targets: &[&str], matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape("operator matrix must be square".into()));
        }
        Ok(Self {
            targets: targets.iter().map(|s| s.to_string()).collect(),
            matrix: OperatorMatrix::Dense(matrix),
            unitary: false,
        })
    }

    /// Checks `U^dagger U = I` within `ALGEBRA_TOL`.
    pub fn unitary(targets: &[&str], matrix: DMatrix<C64>) -> Result<Self> {
        let mut op = Self::new(targets, matrix)?;
        let OperatorMatrix::Dense(m) = &op.matrix else { unreachable!() };
        let dev = unitarity_defect(m);
        if dev > ALGEBRA_TOL {
            return Err(Error::NotUnitary(dev));
        }
        op.unitary = true;
        Ok(op)
    }

    /// Diagonal operator; flagged unitary when every entry has unit modulus.
    pub fn diagonal(targets: &[&str], diag: Vec<C64>) -> Self {
        let unitary = diag.iter().all(|d| (d.norm() - 1.0).abs() <= ALGEBRA_TOL);
        Self {
            targets: targets.iter().map(|s| s.to_string()).collect(),
            matrix: OperatorMatrix::Diagonal(diag),
            unitary,
        }
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn size(&self) -> usize {
        match &self.matrix {
            OperatorMatrix::Dense(m) => m.nrows(),
            OperatorMatrix::Diagonal(d) => d.len(),
        }
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        match &self.matrix {
            OperatorMatrix::Dense(m) => m.clone(),
            OperatorMatrix::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_vec(d.clone())),
        }
    }

    pub fn adjoint(&self) -> Self {
        let matrix = match &self.matrix {
            OperatorMatrix::Dense(m) => OperatorMatrix::Dense(m.adjoint()),
            OperatorMatrix::Diagonal(d) => OperatorMatrix::Diagonal(d.iter().map(C64::conj).collect()),
        };
        Self { targets: self.targets.clone(), matrix, unitary: self.unitary }
    }
}

pub(crate) fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let p = m.adjoint() * m;
    let id = DMatrix::<C64>::identity(m.nrows(), m.ncols());
    (p - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Applies `op` to its target registers of `state`.
pub fn apply_operator(op: &LinearOperator, state: &StateVector) -> Result<StateVector> {
    let dims = state.dims();
    let st = strides(&dims);
    let idx = op
        .targets
        .iter()
        .map(|t| state.register_index(t))
        .collect::<Result<Vec<_>>>()?;
    let tdims: Vec<usize> = idx.iter().map(|&i| dims[i]).collect();
    let tsize: usize = tdims.iter().product();
    if tsize != op.size() {
        return Err(Error::Shape(format!(
            "operator of size {} on targets of total dimension {tsize}",
            op.size()
        )));
    }
    // flat offsets of every target multi-index, in operator order
    let tst = strides(&tdims);
    let offsets: Vec<usize> = (0..tsize)
        .map(|t| idx.iter().enumerate().map(|(k, &i)| (t / tst[k]) % tdims[k] * st[i]).sum())
        .collect();
    let is_base = |flat: usize| idx.iter().all(|&i| (flat / st[i]).is_multiple_of(dims[i]));

    let mut out = state.amplitudes.clone();
    let mut buf = vec![C64::new(0.0, 0.0); tsize];
    for base in (0..state.dim()).filter(|&f| is_base(f)) {
        match &op.matrix {
            OperatorMatrix::Diagonal(d) => {
                for (o, dv) in offsets.iter().zip(d) {
                    out[base + o] = state.amplitudes[base + o] * dv;
                }
            }
            OperatorMatrix::Dense(m) => {
                for (b, o) in buf.iter_mut().zip(&offsets) {
                    *b = state.amplitudes[base + o];
                }
                for (r, o) in offsets.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (c, b) in buf.iter().enumerate() {
                        acc += m[(r, c)] * b;
                    }
                    out[base + o] = acc;
                }
            }
        }
    }
    Ok(StateVector::from_raw(state.layout.clone(), out))
}

/// Hermitian, unit-trace, positive semidefinite matrix over some registers.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    registers: Vec<Register>,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(registers: Vec<Register>, matrix: DMatrix<C64>) -> Result<Self> {
        check_unique(&registers)?;
        let d = layout_dim(&registers);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!("density of size {} for dimension {d}", matrix.nrows())));
        }
        let herm = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > ALGEBRA_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > ALGEBRA_TOL || tr.im.abs() > ALGEBRA_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let rho = Self { registers, matrix };
        if let Some(min) = rho.raw_eigenvalues().iter().cloned().reduce(f64::min) {
            if min < -EIGEN_TOL {
                return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(rho)
    }

    /// `|psi><psi|` over the full layout.
    pub fn pure(state: &StateVector) -> Self {
        let v = DVector::from_column_slice(state.amplitudes());
        let m = &v * v.adjoint();
        Self { registers: state.layout().to_vec(), matrix: hermitize(m) }
    }

    pub(crate) fn from_parts_unchecked(registers: Vec<Register>, matrix: DMatrix<C64>) -> Self {
        Self { registers, matrix: hermitize(matrix) }
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register_names(&self) -> Vec<&str> {
        self.registers.iter().map(Register::name).collect()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    fn raw_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    /// Eigenvalues in descending order; values in `[-EIGEN_TOL, 0)` clamp to 0.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.raw_eigenvalues().into_iter().map(|x| x.max(0.0)).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// `U rho U^dagger`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::Shape("conjugating unitary has the wrong size".into()));
        }
        Ok(Self::from_parts_unchecked(self.registers.clone(), u * &self.matrix * u.adjoint()))
    }
}

pub(crate) fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    (&m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending, unclamped) and eigenvectors of a Hermitian matrix.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = nalgebra::linalg::SymmetricEigen::new(hermitize(m.clone()));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Density matrix of `keep`, allowing the full layout (outer product).
pub(crate) fn density_of(state: &StateVector, keep: &[&str]) -> Result<DensityMatrix> {
    if keep.len() == state.layout().len() {
        return Ok(DensityMatrix::pure(&state.reorder(keep)?));
    }
    let (m, kept, _) = state.bipartite_matrix(keep)?;
    Ok(DensityMatrix::from_parts_unchecked(kept, &m * m.adjoint()))
}

/// Partial trace over every register not in `keep` (kept in the given order).
pub fn reduced_density(state: &StateVector, keep: &[&str]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::Shape("reduced density needs at least one register".into()));
    }
    let mut seen = HashSet::new();
    for k in keep {
        state.register_index(k)?;
        if !seen.insert(*k) {
            return Err(Error::NameCollision(k.to_string()));
        }
    }
    if keep.len() == state.layout().len() {
        return Err(Error::UseOuterProductInstead);
    }
    density_of(state, keep)
}

/// Momentum offset index: dual cell `j` sits at `(j - h) * dk`.
fn dual_offset(n: usize) -> usize {
    n / 2
}

/// Unitary DFT along a grid register, `psi~(k_j) = N^{-1/2} sum_i psi(x_i) e^{-i k_j x_i}`,
/// with `k_j = (j - N/2) dk` and `dk = 2 pi / (N dx)`.
pub fn fourier_dual(state: &StateVector, register: &str) -> Result<StateVector> {
    let ri = state.register_index(register)?;
    let reg = &state.layout()[ri];
    let RegisterKind::Grid { start, spacing } = *reg.kind() else {
        return Err(Error::Kind(register.to_string()));
    };
    let n = reg.dim();
    let h = dual_offset(n);
    let dk = 2.0 * PI / (n as f64 * spacing);
    let pre: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, 2.0 * PI * (h * i) as f64 / n as f64)).collect();
    let post: Vec<C64> = (0..n)
        .map(|j| {
            let k = (j as f64 - h as f64) * dk;
            C64::from_polar(1.0 / (n as f64).sqrt(), -k * start)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let out = transform_axis(state, ri, |line| {
        for (x, p) in line.iter_mut().zip(&pre) {
            *x *= p;
        }
        fft.process(line);
        for (x, p) in line.iter_mut().zip(&post) {
            *x *= p;
        }
    });
    let dual = Register::grid(reg.name(), -(h as f64) * dk, dk, n)?;
    let mut layout = state.layout().to_vec();
    layout[ri] = dual;
    Ok(StateVector::from_raw(layout, out))
}

/// Inverse of `fourier_dual`, mapping back onto the position grid `target`.
pub fn fourier_dual_inverse(
    state: &StateVector,
    register: &str,
    target: &Register,
) -> Result<StateVector> {
    let ri = state.register_index(register)?;
    let reg = &state.layout()[ri];
    let RegisterKind::Grid { spacing: dk, .. } = *reg.kind() else {
        return Err(Error::Kind(register.to_string()));
    };
    let RegisterKind::Grid { start, spacing } = *target.kind() else {
        return Err(Error::Kind(target.name().to_string()));
    };
    let n = reg.dim();
    if target.dim() != n || (dk - 2.0 * PI / (n as f64 * spacing)).abs() > 1e-9 * dk {
        return Err(Error::Shape("target grid is not the Fourier partner of the momentum grid".into()));
    }
    let h = dual_offset(n);
    let pre: Vec<C64> = (0..n)
        .map(|j| {
            let k = (j as f64 - h as f64) * dk;
            C64::from_polar(1.0 / (n as f64).sqrt(), k * start)
        })
        .collect();
    let post: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, -2.0 * PI * (h * i) as f64 / n as f64)).collect();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let out = transform_axis(state, ri, |line| {
        for (x, p) in line.iter_mut().zip(&pre) {
            *x *= p;
        }
        fft.process(line);
        for (x, p) in line.iter_mut().zip(&post) {
            *x *= p;
        }
    });
    let mut layout = state.layout().to_vec();
    layout[ri] = target.renamed(reg.name());
    Ok(StateVector::from_raw(layout, out))
}

fn transform_axis(state: &StateVector, axis: usize, mut f: impl FnMut(&mut [C64])) -> Vec<C64> {
    let dims = state.dims();
    let st = strides(&dims);
    let n = dims[axis];
    let stride = st[axis];
    let mut out = state.amplitudes().to_vec();
    let mut line = vec![C64::new(0.0, 0.0); n];
    for base in (0..state.dim()).filter(|f| (f / stride).is_multiple_of(n)) {
        for (i, x) in line.iter_mut().enumerate() {
            *x = out[base + i * stride];
        }
        f(&mut line);
        for (i, x) in line.iter().enumerate() {
            out[base + i * stride] = *x;
        }
    }
    out
}

/// Probability inside the outer `1/EDGE_FRACTION` of each side of a grid axis.
pub fn edge_mass(state: &StateVector, register: &str) -> Result<f64> {
    let ri = state.register_index(register)?;
    let dims = state.dims();
    let st = strides(&dims);
    let n = dims[ri];
    let band = (n / EDGE_FRACTION).max(1);
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(f, _)| {
            let i = (f / st[ri]) % n;
            i < band || i >= n - band
        })
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Fails with `GridTooSmall` when a packet reaches the edge bands of `register`.
pub fn check_edges(state: &StateVector, register: &str, what: &str) -> Result<()> {
    let m = edge_mass(state, register)?;
    if m > EDGE_MASS_TOL {
        return Err(Error::GridTooSmall(format!(
            "{what}: probability {m:e} within the outer 1/{EDGE_FRACTION} of `{register}`"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus(name: &str) -> StateVector {
        let s = 0.5f64.sqrt();
        StateVector::new(vec![Register::qubit(name)], vec![c(s, 0.0), c(s, 0.0)]).unwrap()
    }

    #[test]
    fn product_of_basis_states() {
        let a = StateVector::basis(vec![Register::qubit("a")], &["0"]).unwrap();
        let b = StateVector::basis(vec![Register::qubit("b")], &["0"]).unwrap();
        let p = tensor_product(&[a, b]).unwrap();
        assert_eq!(p.amplitudes()[0], c(1.0, 0.0));
        assert!(p.amplitudes()[1..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn product_of_superposition() {
        let b = StateVector::basis(vec![Register::qubit("b")], &["0"]).unwrap();
        let p = tensor_product(&[plus("a"), b]).unwrap();
        let s = 0.5f64.sqrt();
        // (0,0) -> 0, (1,0) -> 2
        assert!((p.amplitudes()[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((p.amplitudes()[2] - c(s, 0.0)).norm() < 1e-15);
        assert!((p.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicate_names_collide() {
        let err = tensor_product(&[plus("a"), plus("a")]).unwrap_err();
        assert_eq!(err, Error::NameCollision("a".into()));
    }

    #[test]
    fn phase_convention_applies() {
        let s = StateVector::normalized(vec![Register::qubit("q")], vec![c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        let a = s.amplitudes();
        assert!(a[0].im.abs() < 1e-15 && a[0].re > 0.0);
        assert!((a[1] - c(0.0, -0.5f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn operator_shape_mismatch() {
        let op = LinearOperator::unitary(&["a"], DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(apply_operator(&op, &plus("a")), Err(Error::Shape(_))));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(LinearOperator::unitary(&["a"], m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn operator_acts_on_second_register() {
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let op = LinearOperator::unitary(&["b"], x).unwrap();
        let s = StateVector::basis(vec![Register::qubit("a"), Register::qubit("b")], &["1", "0"]).unwrap();
        let out = apply_operator(&op, &s).unwrap();
        assert_eq!(out.amplitudes()[3], c(1.0, 0.0));
    }

    #[test]
    fn reduced_density_full_layout_is_signalled() {
        let s = tensor_product(&[plus("a"), plus("b")]).unwrap();
        assert_eq!(reduced_density(&s, &["a", "b"]).unwrap_err(), Error::UseOuterProductInstead);
    }

    #[test]
    fn reduced_density_of_product_is_projector() {
        let z = StateVector::basis(vec![Register::qubit("a")], &["0"]).unwrap();
        let s = tensor_product(&[z, plus("b")]).unwrap();
        let rho = reduced_density(&s, &["a"]).unwrap();
        assert!((rho.matrix()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(rho.matrix()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn bell_reduced_density_is_maximally_mixed() {
        let s = 0.5f64.sqrt();
        let bell = StateVector::new(
            vec![Register::qubit("a"), Register::qubit("b")],
            vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)],
        )
        .unwrap();
        let rho = reduced_density(&bell, &["a"]).unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5, 0.0), c(0.5, 0.0)]));
        assert!((rho.matrix() - expect).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn fourier_of_non_grid_is_kind_error() {
        assert_eq!(fourier_dual(&plus("a"), "a").unwrap_err(), Error::Kind("a".into()));
    }

    #[test]
    fn fourier_of_spike_is_flat() {
        let g = Register::centered_grid("x", 64, 0.25).unwrap();
        let s = StateVector::from_fn(g, |i| if i == 10 { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
        let f = fourier_dual(&s, "x").unwrap();
        for a in f.amplitudes() {
            assert!((a.norm() - 1.0 / 8.0).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_register_labels_are_coordinates() {
        let g = Register::centered_grid("x", 4, 0.5).unwrap();
        assert_eq!(g.labels(), &["-1", "-0.5", "0", "0.5"]);
        assert!(Register::grid("y", 0.0, 0.0, 4).is_err());
    }

    #[test]
    fn density_validation() {
        let r = vec![Register::qubit("a")];
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(DensityMatrix::new(r.clone(), bad), Err(Error::InvalidDensity(_))));
        let ok = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.25, 0.0), c(0.75, 0.0)]));
        assert_eq!(DensityMatrix::new(r, ok).unwrap().eigenvalues(), vec![0.75, 0.25]);
    }
}

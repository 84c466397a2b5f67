//! Observers as memory sequences attached to branches.
//!
//! Memories live in the classical half of each branch; only the systems that
//! are still quantum are stored as amplitudes. This is exact as long as every
//! observation records an eigenvalue, which keeps memories branch-diagonal.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::branching::{LocalBasis, PRUNE_WEIGHT};
use crate::error::{Error, Result};
use crate::quantum::ProjectorFamily;
use crate::tensor::{apply_operator, layout_dim, tensor_product, LinearOperator, Register, StateVector, C64};

/// Token standing for whatever the observer remembered before the run.
pub const PRIOR_MEMORY: &str = "…";
/// Largest repeated-spin run the sparse store accepts.
pub const MAX_SPINS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub text: Arc<str>,
    /// Observer whose notebook the symbol was copied from.
    pub source: Option<Arc<str>>,
}

impl std::fmt::Display for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.source {
            Some(s) => write!(f, "{}@{s}", self.text),
            None => f.write_str(&self.text),
        }
    }
}

/// `[..., s1, s2, ...]`: append-only record of one observer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorySequence {
    pub prefix: bool,
    pub symbols: Vec<Symbol>,
}

impl MemorySequence {
    pub fn texts(&self) -> Vec<&str> {
        self.symbols.iter().map(|s| &*s.text).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.symbols.len() + 1);
        if self.prefix {
            out.push(PRIOR_MEMORY.to_string());
        }
        out.extend(self.symbols.iter().map(Symbol::to_string));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Classical {
    memories: Vec<Vec<u16>>,
    pointers: Vec<u16>,
}

#[derive(Clone, Debug)]
struct HybridBranch {
    classical: Classical,
    /// Unnormalized amplitudes over the live quantum layout.
    component: Vec<C64>,
}

/// Branches as (classical record, quantum component) pairs.
#[derive(Clone, Debug)]
pub struct HybridBranchState {
    layout: Vec<Register>,
    observers: Vec<String>,
    retired: Vec<(String, Vec<String>)>,
    symbols: Vec<Symbol>,
    branches: Vec<HybridBranch>,
    pub pruned_mass: f64,
    pub pruned_count: usize,
    /// Branch count if zero-weight components were kept.
    pub potential_branches: u128,
}

/// Read-only view of one branch.
#[derive(Clone, Debug)]
pub struct BranchView {
    pub memories: BTreeMap<String, MemorySequence>,
    pub pointers: BTreeMap<String, String>,
    pub weight: f64,
    /// Normalized quantum residual; `None` when no quantum register is live.
    pub residual: Option<StateVector>,
}

impl HybridBranchState {
    pub fn new(system: StateVector, observers: &[&str]) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(o) = observers.iter().find(|o| !seen.insert(**o)) {
            return Err(Error::NameCollision(o.to_string()));
        }
        let layout = system.layout().to_vec();
        let branch = HybridBranch {
            classical: Classical { memories: vec![vec![]; observers.len()], pointers: vec![] },
            component: system.into_amplitudes(),
        };
        Ok(Self {
            layout,
            observers: observers.iter().map(|s| s.to_string()).collect(),
            retired: vec![],
            symbols: vec![],
            branches: vec![branch],
            pruned_mass: 0.0,
            pruned_count: 0,
            potential_branches: 1,
        })
    }

    pub fn layout(&self) -> &[Register] {
        &self.layout
    }

    pub fn observers(&self) -> &[String] {
        &self.observers
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    fn observer_index(&self, name: &str) -> Result<usize> {
        self.observers
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| Error::UnknownObserver(name.to_string()))
    }

    fn without_branches(&self, capacity: usize) -> Self {
        Self {
            layout: self.layout.clone(),
            observers: self.observers.clone(),
            retired: self.retired.clone(),
            symbols: self.symbols.clone(),
            branches: Vec::with_capacity(capacity),
            pruned_mass: self.pruned_mass,
            pruned_count: self.pruned_count,
            potential_branches: self.potential_branches,
        }
    }

    fn intern(&mut self, s: Symbol) -> u16 {
        match self.symbols.iter().position(|x| *x == s) {
            Some(i) => i as u16,
            None => {
                self.symbols.push(s);
                (self.symbols.len() - 1) as u16
            }
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| norm_sqr(&b.component)).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights().iter().sum()
    }

    pub fn memory(&self, branch: usize, observer: &str) -> Result<MemorySequence> {
        let o = self.observer_index(observer)?;
        Ok(self.memory_at(branch, o))
    }

    fn memory_at(&self, branch: usize, o: usize) -> MemorySequence {
        MemorySequence {
            prefix: true,
            symbols: self.branches[branch].classical.memories[o].iter().map(|&i| self.symbols[i as usize].clone()).collect(),
        }
    }

    pub fn branch(&self, i: usize) -> BranchView {
        let b = &self.branches[i];
        let memories = self.observers.iter().enumerate().map(|(o, n)| (n.clone(), self.memory_at(i, o))).collect();
        let pointers = self
            .retired
            .iter()
            .zip(&b.classical.pointers)
            .map(|((r, labels), &l)| (r.clone(), labels[l as usize].clone()))
            .collect();
        let w = norm_sqr(&b.component);
        let residual = (!self.layout.is_empty() && w > 0.0).then(|| {
            let n = w.sqrt();
            StateVector::from_raw(self.layout.clone(), b.component.iter().map(|a| a / n).collect())
        });
        BranchView { memories, pointers, weight: w, residual }
    }

    pub fn branches(&self) -> Vec<BranchView> {
        (0..self.len()).map(|i| self.branch(i)).collect()
    }

    /// Adds a fresh quantum factor to every branch.
    pub fn attach(&self, factor: &StateVector) -> Result<Self> {
        for r in factor.layout() {
            if self.layout.iter().any(|x| x.name() == r.name()) || self.retired.iter().any(|(x, _)| x == r.name()) {
                return Err(Error::NameCollision(r.name().to_string()));
            }
        }
        let mut out = self.clone();
        out.layout.extend(factor.layout().iter().cloned());
        for b in &mut out.branches {
            let mut next = Vec::with_capacity(b.component.len() * factor.dim());
            for a in &b.component {
                next.extend(factor.amplitudes().iter().map(|f| a * f));
            }
            b.component = next;
        }
        Ok(out)
    }

    /// Moves `register` into the classical record, labelled in `basis`.
    pub fn retire(&self, register: &str, basis: &LocalBasis) -> Result<Self> {
        let ri = self
            .layout
            .iter()
            .position(|r| r.name() == register)
            .ok_or_else(|| Error::UnknownRegister(register.to_string()))?;
        if basis.register() != register {
            return Err(Error::Basis(format!("basis belongs to `{}`, not `{register}`", basis.register())));
        }
        let d = self.layout[ri].dim();
        if basis.vectors().len() != d {
            return Err(Error::Basis(format!("basis of `{register}` has the wrong dimension")));
        }
        let rest: Vec<Register> = self.layout.iter().filter(|r| r.name() != register).cloned().collect();
        let mut order: Vec<&str> = vec![register];
        order.extend(rest.iter().map(Register::name));
        let rdim = layout_dim(&rest);
        let mut out = self.without_branches(self.branches.len());
        out.layout = rest.clone();
        out.retired.push((register.to_string(), basis.labels().to_vec()));
        for b in &self.branches {
            let sv = StateVector::from_raw(self.layout.clone(), b.component.clone()).reorder(&order)?;
            let amps = sv.amplitudes();
            for (l, v) in basis.vectors().iter().enumerate() {
                let mut comp = vec![C64::new(0.0, 0.0); rdim];
                for (i, vi) in v.iter().enumerate() {
                    let row = &amps[i * rdim..(i + 1) * rdim];
                    for (c, a) in comp.iter_mut().zip(row) {
                        *c += vi.conj() * a;
                    }
                }
                let w = norm_sqr(&comp);
                if w < PRUNE_WEIGHT {
                    out.pruned_mass += w;
                    out.pruned_count += 1;
                    continue;
                }
                let mut classical = b.classical.clone();
                classical.pointers.push(l as u16);
                out.branches.push(HybridBranch { classical, component: comp });
            }
        }
        out.potential_branches = self.potential_branches.saturating_mul(d as u128);
        Ok(out)
    }

    /// Good observation of `observable` on `register` by `observer`, applied to
    /// every branch: the branch splits into eigencomponents and the observer
    /// records `symbols[i]` for eigenspace `i`.
    pub fn observe(&self, register: &str, observable: &ProjectorFamily, observer: &str, symbols: &[&str]) -> Result<Self> {
        let o = self.observer_index(observer)?;
        if observable.is_degenerate() {
            return Err(Error::DegenerateObservable);
        }
        if symbols.len() != observable.len() {
            return Err(Error::Alphabet { expected: observable.len(), got: symbols.len() });
        }
        if observable.registers() != [register.to_string()] {
            return Err(Error::Projector(format!("observable must act on `{register}` alone")));
        }
        let reg = self
            .layout
            .iter()
            .find(|r| r.name() == register)
            .ok_or_else(|| Error::UnknownRegister(register.to_string()))?;
        if reg.dim() != observable.dim() {
            return Err(Error::Shape(format!("observable of size {} on `{register}`", observable.dim())));
        }
        let ops = observable
            .projectors()
            .iter()
            .map(|p| LinearOperator::new(&[register], p.matrix.clone()))
            .collect::<Result<Vec<_>>>()?;
        let mut out = self.without_branches(self.branches.len() * ops.len());
        let ids: Vec<u16> = symbols.iter().map(|s| out.intern(Symbol { text: (*s).into(), source: None })).collect();
        for b in &self.branches {
            let sv = StateVector::from_raw(self.layout.clone(), b.component.clone());
            for (op, &id) in ops.iter().zip(&ids) {
                let comp = apply_operator(op, &sv)?.into_amplitudes();
                let w = norm_sqr(&comp);
                if w < PRUNE_WEIGHT {
                    out.pruned_mass += w;
                    out.pruned_count += 1;
                    continue;
                }
                let mut classical = b.classical.clone();
                classical.memories[o].push(id);
                out.branches.push(HybridBranch { classical, component: comp });
            }
        }
        out.potential_branches = self.potential_branches.saturating_mul(ops.len() as u128);
        let unique: HashSet<&&str> = symbols.iter().collect();
        if unique.len() != symbols.len() {
            out.merge_duplicates();
        }
        Ok(out)
    }

    /// `reader` copies the last symbol of `writer`'s memory, tagged with its source.
    pub fn read_notebook(&self, reader: &str, writer: &str) -> Result<Self> {
        let (r, w) = (self.observer_index(reader)?, self.observer_index(writer)?);
        let mut out = self.clone();
        for i in 0..out.branches.len() {
            let last = *out.branches[i].classical.memories[w]
                .last()
                .ok_or_else(|| Error::InvalidState(format!("`{writer}` has nothing recorded")))?;
            let text = out.symbols[last as usize].text.clone();
            let id = out.intern(Symbol { text, source: Some(writer.into()) });
            out.branches[i].classical.memories[r].push(id);
        }
        Ok(out)
    }

    fn merge_duplicates(&mut self) {
        let mut index: HashMap<Classical, usize> = HashMap::new();
        let mut merged: Vec<HybridBranch> = Vec::with_capacity(self.branches.len());
        for b in std::mem::take(&mut self.branches) {
            match index.get(&b.classical) {
                Some(&i) => merged[i].component.iter_mut().zip(&b.component).for_each(|(x, y)| *x += y),
                None => {
                    index.insert(b.classical.clone(), merged.len());
                    merged.push(b);
                }
            }
        }
        self.branches = merged;
    }

    fn keyed(&self) -> Result<BTreeMap<Vec<Vec<String>>, StateVector>> {
        let names: Vec<&str> = {
            let mut n: Vec<&str> = self.layout.iter().map(Register::name).collect();
            n.sort_unstable();
            n
        };
        let mut out = BTreeMap::new();
        for (i, b) in self.branches.iter().enumerate() {
            let mut key: Vec<Vec<String>> = self
                .observers
                .iter()
                .enumerate()
                .map(|(o, name)| {
                    let mut k = vec![name.clone()];
                    k.extend(self.memory_at(i, o).symbols.iter().map(Symbol::to_string));
                    k
                })
                .collect();
            key.sort();
            let mut pointers: Vec<String> = self
                .retired
                .iter()
                .zip(&b.classical.pointers)
                .map(|((r, l), &p)| format!("{r}={}", l[p as usize]))
                .collect();
            pointers.sort();
            key.push(pointers);
            let sv = StateVector::from_raw(self.layout.clone(), b.component.clone()).reorder(&names)?;
            out.insert(key, sv);
        }
        Ok(out)
    }

    /// Largest amplitude difference between two states with matching records,
    /// or `None` when the sets of classical records differ.
    pub fn distance(&self, other: &Self) -> Result<Option<f64>> {
        let (a, b) = (self.keyed()?, other.keyed()?);
        if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
            return Ok(None);
        }
        let mut worst: f64 = 0.0;
        for (x, y) in a.values().zip(b.values()) {
            if x.dims() != y.dims() {
                return Ok(None);
            }
            worst = worst.max(x.distance(y)?);
        }
        Ok(Some(worst))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(self.distance(other)?.is_some_and(|d| d <= tol))
    }

    /// Total weight per key over branches.
    pub fn grouped_weights(&self, key: impl Fn(&BranchView) -> String) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for i in 0..self.len() {
            let v = self.branch(i);
            *out.entry(key(&v)).or_insert(0.0) += v.weight;
        }
        out
    }

    /// Explicit memory registers: `slots` registers per observer named
    /// `<observer>#<k>`, labelled blank (`_`) then the alphabet.
    pub fn to_dense(&self, alphabets: &[(&str, &[&str])], slots: usize) -> Result<StateVector> {
        if !self.retired.is_empty() {
            return Err(Error::InvalidState("retired registers have no dense form".into()));
        }
        let mut layout = self.layout.clone();
        let mut alph: Vec<&[&str]> = Vec::with_capacity(self.observers.len());
        for o in &self.observers {
            let a = alphabets
                .iter()
                .find(|(n, _)| n == o)
                .map(|(_, a)| *a)
                .ok_or_else(|| Error::UnknownObserver(o.clone()))?;
            alph.push(a);
            layout.extend(memory_registers(o, a, slots)?);
        }
        let mut total = vec![C64::new(0.0, 0.0); layout_dim(&layout)];
        let qdim = layout_dim(&self.layout);
        let mdim = total.len() / qdim;
        for b in &self.branches {
            let mut flat = 0;
            for (o, mem) in b.classical.memories.iter().enumerate() {
                if mem.len() > slots {
                    return Err(Error::Size(format!("{} symbols for {slots} slots", mem.len())));
                }
                for k in 0..slots {
                    let idx = match mem.get(k) {
                        Some(&s) => {
                            let text = &*self.symbols[s as usize].text;
                            1 + alph[o].iter().position(|x| *x == text).ok_or_else(|| {
                                Error::Param(format!("symbol `{text}` is not in the alphabet of `{}`", self.observers[o]))
                            })?
                        }
                        None => 0,
                    };
                    flat = flat * (alph[o].len() + 1) + idx;
                }
            }
            for (q, a) in b.component.iter().enumerate() {
                total[q * mdim + flat] += a;
            }
        }
        Ok(StateVector::from_raw(layout, total))
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(C64::norm_sqr).sum()
}

fn memory_registers(observer: &str, alphabet: &[&str], slots: usize) -> Result<Vec<Register>> {
    let mut labels = vec!["_"];
    labels.extend_from_slice(alphabet);
    (0..slots).map(|k| Register::memory(format!("{observer}#{k}"), labels.iter().copied())).collect()
}

pub mod dense {
    //! Explicit memory registers; exponential in memory length, kept for small
    //! cross-checks of the hybrid store.

    use super::*;

    #[derive(Clone, Debug)]
    pub struct DenseObserverUniverse {
        state: StateVector,
        observers: Vec<(String, Vec<String>, usize)>,
        slots: usize,
    }

    impl DenseObserverUniverse {
        pub fn new(system: StateVector, observers: &[(&str, &[&str])], slots: usize) -> Result<Self> {
            let mut factors = vec![system];
            for (o, a) in observers {
                for reg in memory_registers(o, a, slots)? {
                    factors.push(StateVector::basis(vec![reg], &["_"])?);
                }
            }
            Ok(Self {
                state: tensor_product(&factors)?,
                observers: observers.iter().map(|(o, a)| (o.to_string(), a.iter().map(|s| s.to_string()).collect(), 0)).collect(),
                slots,
            })
        }

        pub fn state(&self) -> &StateVector {
            &self.state
        }

        pub fn attach(&self, factor: &StateVector) -> Result<Self> {
            Ok(Self { state: tensor_product(&[self.state.clone(), factor.clone()])?, ..self.clone() })
        }

        /// Applies `sum_j P_j (x) Shift^(a_j + 1)` on (register, next memory slot).
        pub fn observe(&self, register: &str, observable: &ProjectorFamily, observer: &str, symbols: &[&str]) -> Result<Self> {
            if symbols.len() != observable.len() {
                return Err(Error::Alphabet { expected: observable.len(), got: symbols.len() });
            }
            let oi = self
                .observers
                .iter()
                .position(|(o, _, _)| o == observer)
                .ok_or_else(|| Error::UnknownObserver(observer.to_string()))?;
            let (_, alphabet, used) = &self.observers[oi];
            if *used >= self.slots {
                return Err(Error::Size(format!("`{observer}` has no free memory slot")));
            }
            let m = alphabet.len() + 1;
            let d = observable.dim();
            let mut u = DMatrix::<C64>::zeros(d * m, d * m);
            for (p, s) in observable.projectors().iter().zip(symbols) {
                let k = 1 + alphabet
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| Error::Param(format!("symbol `{s}` is not in the alphabet of `{observer}`")))?;
                for r in 0..d {
                    for c in 0..d {
                        for x in 0..m {
                            u[(r * m + (x + k) % m, c * m + x)] += p.matrix[(r, c)];
                        }
                    }
                }
            }
            let slot = format!("{observer}#{used}");
            let op = LinearOperator::unitary(&[register, slot.as_str()], u)?;
            let mut out = self.clone();
            out.state = apply_operator(&op, &self.state)?;
            out.observers[oi].2 += 1;
            Ok(out)
        }
    }
}

/// Result of `repeated_spin_run`.
#[derive(Clone, Debug)]
pub struct SpinRun {
    pub n: usize,
    pub state: HybridBranchState,
    /// Weight of "m spins up" for `m = 0..=n`.
    pub grouped: Vec<f64>,
    pub total_branches: u128,
    pub zero_weight_branches: u128,
}

/// `n` spins prepared as `a|u> + b|d>`, each observed (u -> "0", d -> "1") and retired.
pub fn repeated_spin_run(n: usize, a: C64, b: C64) -> Result<SpinRun> {
    if n > MAX_SPINS {
        return Err(Error::Size(format!("{n} spins exceed the limit of {MAX_SPINS}")));
    }
    let norm = a.norm_sqr() + b.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Param(format!("|a|^2 + |b|^2 = {norm}")));
    }
    let mut state = HybridBranchState::new(StateVector::from_raw(vec![], vec![C64::new(1.0, 0.0)]), &["O"])?;
    for k in 0..n {
        let reg = Register::finite(format!("s{k}"), ["u", "d"])?;
        let spin = StateVector::from_raw(vec![reg.clone()], vec![a, b]);
        state = state
            .attach(&spin)?
            .observe(reg.name(), &ProjectorFamily::computational(&reg), "O", &["0", "1"])?
            .retire(reg.name(), &LocalBasis::computational(&reg))?;
    }
    let mut grouped = vec![0.0; n + 1];
    for (i, w) in state.weights().into_iter().enumerate() {
        let ups = state.branches[i].classical.memories[0].iter().filter(|&&s| &*state.symbols[s as usize].text == "0").count();
        grouped[ups] += w;
    }
    // retiring an eigenstate never splits, so only observations count
    let total = 1u128 << n;
    Ok(SpinRun { n, total_branches: total, zero_weight_branches: total - state.len() as u128, grouped, state })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
}

impl Assertion {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), pass }
    }
}

/// Inputs for the multi-observer cases.
#[derive(Clone, Debug)]
pub struct CaseConfig {
    /// Amplitudes `a_j` of the system (cases 1, 2) or of `sum a_j |j, j>` (case 3).
    pub amplitudes: Vec<C64>,
    /// Second observable's eigenvectors for case 2 (default: Fourier basis).
    pub second_basis: Option<Vec<Vec<C64>>>,
}

#[derive(Clone, Debug)]
pub struct CaseReport {
    pub case: u8,
    pub state: HybridBranchState,
    pub assertions: Vec<Assertion>,
    pub quantities: BTreeMap<String, f64>,
}

pub const CASE_TOL: f64 = 1e-12;

pub(crate) fn symbol_names(d: usize) -> Vec<String> {
    (0..d).map(|i| i.to_string()).collect()
}

/// Fourier basis of dimension `d`; for `d = 2` the `+`/`-` basis.
pub fn fourier_basis(register: &str, d: usize) -> Result<LocalBasis> {
    let s = 1.0 / (d as f64).sqrt();
    let vecs = (0..d)
        .map(|k| {
            let label = if d == 2 { ["+", "-"][k].to_string() } else { format!("f{k}") };
            let v = (0..d).map(|j| C64::from_polar(s, 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64)).collect();
            (label, v)
        })
        .collect();
    LocalBasis::new(register, vecs)
}

pub(crate) fn family_of(basis: &LocalBasis) -> Result<ProjectorFamily> {
    let v = basis
        .labels()
        .iter()
        .zip(basis.vectors())
        .enumerate()
        .map(|(i, (l, v))| (l.clone(), i as f64, v.clone()))
        .collect();
    ProjectorFamily::from_basis(&[basis.register()], v)
}

pub(crate) fn system(name: &str, amplitudes: &[C64]) -> Result<StateVector> {
    let d = amplitudes.len();
    if d < 2 {
        return Err(Error::Config("amplitudes need at least two entries".into()));
    }
    let reg = Register::finite(name, symbol_names(d))?;
    StateVector::normalized(vec![reg], amplitudes.to_vec()).map_err(|e| Error::Config(e.to_string()))
}

/// The three two-observer situations: same observable, non-commuting
/// observables, and an entangled pair observed by separate observers.
pub fn multi_observer_case(case: u8, config: &CaseConfig) -> Result<CaseReport> {
    match case {
        1 => case_one(config),
        2 => case_two(config),
        3 => case_three(config),
        _ => Err(Error::Config(format!("case must be 1, 2 or 3, got {case}"))),
    }
}

fn case_one(cfg: &CaseConfig) -> Result<CaseReport> {
    let psi = system("S", &cfg.amplitudes)?;
    let reg = psi.layout()[0].clone();
    let a = ProjectorFamily::computational(&reg);
    let syms = symbol_names(reg.dim());
    let syms: Vec<&str> = syms.iter().map(String::as_str).collect();
    let start = HybridBranchState::new(psi, &["O1", "O2"])?;
    let first = start.observe("S", &a, "O1", &syms)?;
    let second = first.observe("S", &a, "O2", &syms)?;
    let agree = (0..second.len()).all(|i| {
        let v = second.branch(i);
        v.memories["O1"].texts() == v.memories["O2"].texts()
    });
    let notebook = first.read_notebook("O2", "O1")?;
    let notebook_agrees = (0..notebook.len()).all(|i| {
        let v = notebook.branch(i);
        let m2 = &v.memories["O2"];
        m2.texts() == v.memories["O1"].texts() && m2.symbols.iter().all(|s| s.source.as_deref() == Some("O1"))
    });
    let mut q = BTreeMap::new();
    q.insert("branches_after_first".into(), first.len() as f64);
    q.insert("branches_after_second".into(), second.len() as f64);
    Ok(CaseReport {
        case: 1,
        assertions: vec![
            Assertion::new("memories_agree", agree),
            Assertion::new("no_second_split", second.len() == first.len()),
            Assertion::new("notebook_agrees", notebook_agrees && notebook.len() == first.len()),
            Assertion::new("total_weight", (second.total_weight() - 1.0).abs() < 1e-10),
        ],
        quantities: q,
        state: second,
    })
}

fn case_two(cfg: &CaseConfig) -> Result<CaseReport> {
    let psi = system("S", &cfg.amplitudes)?;
    let reg = psi.layout()[0].clone();
    let d = reg.dim();
    let b_basis = match &cfg.second_basis {
        Some(vs) => {
            let labels = (0..vs.len()).map(|k| format!("b{k}"));
            LocalBasis::new("S", labels.zip(vs.iter().cloned()).collect()).map_err(|e| Error::Config(e.to_string()))?
        }
        None => fourier_basis("S", d)?,
    };
    let a = ProjectorFamily::computational(&reg);
    let b = family_of(&b_basis)?;
    let a_syms = symbol_names(d);
    let a_syms: Vec<&str> = a_syms.iter().map(String::as_str).collect();
    let b_syms: Vec<&str> = b_basis.labels().iter().map(String::as_str).collect();
    let amps = psi.amplitudes().to_vec();
    let fin = HybridBranchState::new(psi, &["O1", "O2"])?
        .observe("S", &a, "O1", &a_syms)?
        .observe("S", &b, "O2", &b_syms)?;
    // expected |a_j <phi_k^B|phi_j^A>|^2
    let mut expected = BTreeMap::new();
    for (j, aj) in amps.iter().enumerate() {
        for (k, v) in b_basis.vectors().iter().enumerate() {
            let w = (aj * v[j].conj()).norm_sqr();
            if w >= PRUNE_WEIGHT {
                expected.insert((a_syms[j].to_string(), b_syms[k].to_string()), w);
            }
        }
    }
    let mut worst: f64 = 0.0;
    let mut matched = fin.len() == expected.len();
    for i in 0..fin.len() {
        let v = fin.branch(i);
        let key = (v.memories["O1"].texts()[0].to_string(), v.memories["O2"].texts()[0].to_string());
        match expected.get(&key) {
            Some(w) => worst = worst.max((w - v.weight).abs()),
            None => matched = false,
        }
    }
    let mut q = BTreeMap::new();
    q.insert("potential_branches".into(), fin.potential_branches as f64);
    q.insert("max_weight_error".into(), worst);
    Ok(CaseReport {
        case: 2,
        assertions: vec![
            Assertion::new("branch_count", matched && fin.potential_branches == (d * d) as u128),
            Assertion::new("weights", matched && worst <= CASE_TOL),
            Assertion::new("total_weight", (fin.total_weight() - 1.0).abs() < 1e-10),
        ],
        quantities: q,
        state: fin,
    })
}

/// Entangled pair `sum a_j |j>_S1 |j>_S2` with observers O1 (on S1) and O2 (on S2).
pub fn entangled_pair(amplitudes: &[C64]) -> Result<StateVector> {
    let d = amplitudes.len();
    if d < 2 {
        return Err(Error::Config("amplitudes need at least two entries".into()));
    }
    let r1 = Register::finite("S1", symbol_names(d))?;
    let r2 = Register::finite("S2", symbol_names(d))?;
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for (j, a) in amplitudes.iter().enumerate() {
        amps[j * d + j] = *a;
    }
    StateVector::normalized(vec![r1, r2], amps).map_err(|e| Error::Config(e.to_string()))
}

/// Order-swap, repeat and no-signalling checks for an entangled pair observed
/// in the given local bases.
pub fn case_three_checks(psi: &StateVector, b1: &LocalBasis, b2: &LocalBasis) -> Result<(HybridBranchState, Vec<Assertion>, BTreeMap<String, f64>)> {
    let (f1, f2) = (family_of(b1)?, family_of(b2)?);
    let s1: Vec<&str> = b1.labels().iter().map(String::as_str).collect();
    let s2: Vec<&str> = b2.labels().iter().map(String::as_str).collect();
    let start = HybridBranchState::new(psi.clone(), &["O1", "O2"])?;
    let o1 = |s: &HybridBranchState| s.observe("S1", &f1, "O1", &s1);
    let o2 = |s: &HybridBranchState| s.observe("S2", &f2, "O2", &s2);
    let after_o1 = o1(&start)?;
    let forward = o2(&after_o1)?;
    let swapped = o1(&o2(&start)?)?;
    let o1_twice_then_o2 = o2(&o1(&after_o1)?)?;
    let o1_o2_o1 = o1(&forward)?;
    let swap_dist = forward.distance(&swapped)?;
    let repeat_dist = o1_twice_then_o2.distance(&o1_o2_o1)?;
    let o1_view = |s: &HybridBranchState| s.grouped_weights(|v| v.memories["O1"].texts().join(","));
    let (before, after) = (o1_view(&after_o1), o1_view(&forward));
    let signalling = if before.keys().eq(after.keys()) {
        before.values().zip(after.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let correlated = (0..forward.len()).all(|i| {
        let v = forward.branch(i);
        v.memories["O1"].texts() == v.memories["O2"].texts()
    });
    let mut q = BTreeMap::new();
    q.insert("order_swap_distance".into(), swap_dist.unwrap_or(f64::INFINITY));
    q.insert("repeat_distance".into(), repeat_dist.unwrap_or(f64::INFINITY));
    q.insert("signalling".into(), signalling);
    let mut assertions = vec![
        Assertion::new("order_swap", swap_dist.is_some_and(|d| d <= CASE_TOL)),
        Assertion::new("repeat_equivalence", repeat_dist.is_some_and(|d| d <= CASE_TOL)),
        Assertion::new("no_signalling", signalling <= CASE_TOL),
        Assertion::new("total_weight", (forward.total_weight() - 1.0).abs() < 1e-10),
    ];
    // symbol agreement only means something when both use the same labels
    if b1.labels() == b2.labels() {
        assertions.push(Assertion::new("memories_correlated", correlated));
    }
    Ok((forward, assertions, q))
}

fn case_three(cfg: &CaseConfig) -> Result<CaseReport> {
    let psi = entangled_pair(&cfg.amplitudes)?;
    let (b1, b2) = (LocalBasis::computational(&psi.layout()[0]), LocalBasis::computational(&psi.layout()[1]));
    let nonzero = psi.amplitudes().iter().filter(|a| a.norm_sqr() >= PRUNE_WEIGHT).count();
    let (state, mut assertions, mut q) = case_three_checks(&psi, &b1, &b2)?;
    assertions.insert(0, Assertion::new("branch_count", state.len() == nonzero));
    q.insert("branches".into(), state.len() as f64);
    Ok(CaseReport { case: 3, state, assertions, quantities: q })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn spin(a: C64, b: C64) -> StateVector {
        StateVector::normalized(vec![Register::finite("S", ["u", "d"]).unwrap()], vec![a, b]).unwrap()
    }

    fn z() -> ProjectorFamily {
        ProjectorFamily::computational(&Register::finite("S", ["u", "d"]).unwrap())
    }

    #[test]
    fn observation_splits_and_repeats() {
        let s = HybridBranchState::new(spin(c(0.6), c(0.8)), &["O"]).unwrap();
        let once = s.observe("S", &z(), "O", &["0", "1"]).unwrap();
        assert_eq!(once.len(), 2);
        assert!((once.weights()[0] - 0.36).abs() < 1e-15);
        assert_eq!(once.memory(1, "O").unwrap().to_strings(), vec!["…", "1"]);
        let twice = once.observe("S", &z(), "O", &["0", "1"]).unwrap();
        assert_eq!(twice.len(), 2);
        assert_eq!(twice.memory(0, "O").unwrap().texts(), vec!["0", "0"]);
        assert_eq!(twice.memory(1, "O").unwrap().texts(), vec!["1", "1"]);
    }

    #[test]
    fn eigenstate_does_not_split() {
        let s = HybridBranchState::new(spin(c(1.0), c(0.0)), &["O"]).unwrap();
        let once = s.observe("S", &z(), "O", &["0", "1"]).unwrap();
        assert_eq!(once.len(), 1);
        assert_eq!(once.weights(), vec![1.0]);
    }

    #[test]
    fn observation_errors() {
        let s = HybridBranchState::new(spin(c(1.0), c(1.0)), &["O"]).unwrap();
        assert_eq!(s.observe("S", &z(), "O", &["0"]).unwrap_err(), Error::Alphabet { expected: 2, got: 1 });
        assert_eq!(s.observe("S", &z(), "X", &["0", "1"]).unwrap_err(), Error::UnknownObserver("X".into()));
        let whole = ProjectorFamily::from_projectors(&["S"], vec![("all".into(), 0.0, DMatrix::identity(2, 2))]).unwrap();
        assert_eq!(s.observe("S", &whole, "O", &["x"]).unwrap_err(), Error::DegenerateObservable);
    }

    #[test]
    fn spin_runs() {
        let h = C64::new(0.5f64.sqrt(), 0.0);
        let r = repeated_spin_run(2, h, h).unwrap();
        assert!(r.grouped.iter().zip([0.25, 0.5, 0.25]).all(|(x, y)| (x - y).abs() < 1e-15));
        let r = repeated_spin_run(3, c(1.0), c(0.0)).unwrap();
        assert_eq!(r.grouped, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!((r.total_branches, r.zero_weight_branches), (8, 7));
        assert!(matches!(repeated_spin_run(21, h, h), Err(Error::Size(_))));
    }

    #[test]
    fn dense_oracle_matches_small_case() {
        let psi = spin(c(0.6), c(0.8));
        let alpha: &[&str] = &["0", "1"];
        let hybrid = HybridBranchState::new(psi.clone(), &["O"])
            .unwrap()
            .observe("S", &z(), "O", alpha)
            .unwrap()
            .observe("S", &z(), "O", alpha)
            .unwrap();
        let dense = dense::DenseObserverUniverse::new(psi, &[("O", alpha)], 2)
            .unwrap()
            .observe("S", &z(), "O", alpha)
            .unwrap()
            .observe("S", &z(), "O", alpha)
            .unwrap();
        let h = hybrid.to_dense(&[("O", alpha)], 2).unwrap();
        assert!(h.distance(dense.state()).unwrap() < 1e-15);
    }

    #[test]
    fn cases_pass() {
        let h = 0.5f64.sqrt();
        for case in 1..=3 {
            let r = multi_observer_case(case, &CaseConfig { amplitudes: vec![c(h), c(h)], second_basis: None }).unwrap();
            assert!(r.assertions.iter().all(|a| a.pass), "case {case}: {:?}", r.assertions);
        }
        let r = multi_observer_case(2, &CaseConfig { amplitudes: vec![c(1.0), c(0.0)], second_basis: None }).unwrap();
        assert_eq!(r.state.len(), 2);
        assert!(matches!(multi_observer_case(4, &CaseConfig { amplitudes: vec![], second_basis: None }), Err(Error::Config(_))));
    }
}

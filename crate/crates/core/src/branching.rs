//! Orthogonal branch decompositions, grouping, rebasing and world trees.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::{format_g, round12};
use crate::quantum::ProjectorFamily;
use crate::tensor::{
    apply_operator, canonical_phase, tensor_product, LinearOperator, Register, StateVector, ALGEBRA_TOL, C64,
    EIGEN_TOL,
};

/// Branches lighter than this are dropped and counted as pruned mass.
pub const PRUNE_WEIGHT: f64 = 1e-12;
/// Tolerance on total weight and reconstruction.
pub const BRANCH_TOL: f64 = 1e-10;

/// Complete orthonormal basis of one register with a label per vector.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    register: String,
    labels: Vec<String>,
    vectors: Vec<DVector<C64>>,
}

impl LocalBasis {
    pub fn new<S: Into<String>>(register: &str, vectors: Vec<(S, Vec<C64>)>) -> Result<Self> {
        let (labels, vectors): (Vec<String>, Vec<DVector<C64>>) =
            vectors.into_iter().map(|(l, v)| (l.into(), DVector::from_vec(v))).unzip();
        let d = vectors.len();
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::Basis(format!("basis of `{register}` must have as many vectors as dimensions")));
        }
        for i in 0..d {
            for j in 0..d {
                let g = vectors[i].dotc(&vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - C64::new(target, 0.0)).norm() > EIGEN_TOL {
                    return Err(Error::Basis(format!(
                        "basis of `{register}` is not orthonormal (<{}|{}> = {g})",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        let mut seen = HashSet::new();
        if let Some(l) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::Basis(format!("label `{l}` repeats")));
        }
        Ok(Self { register: register.to_string(), labels, vectors })
    }

    pub fn computational(register: &Register) -> Self {
        let d = register.dim();
        let vectors = (0..d)
            .map(|i| DVector::from_fn(d, |r, _| C64::new(if r == i { 1.0 } else { 0.0 }, 0.0)))
            .collect();
        Self { register: register.name().to_string(), labels: register.labels().to_vec(), vectors }
    }

    /// Eigenbasis of a nondegenerate single-register observable.
    pub fn from_family(family: &ProjectorFamily) -> Result<Self> {
        if family.registers().len() != 1 {
            return Err(Error::Basis("a local basis lives on one register".into()));
        }
        let vecs = family.eigenvectors()?;
        let pairs = family.labels().into_iter().zip(vecs).map(|(l, v)| (l, v.iter().copied().collect())).collect();
        Self::new(&family.registers()[0], pairs)
    }

    pub fn register(&self) -> &str {
        &self.register
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vectors(&self) -> &[DVector<C64>] {
        &self.vectors
    }

    pub fn vector(&self, label: &str) -> Option<&DVector<C64>> {
        self.labels.iter().position(|l| l == label).map(|i| &self.vectors[i])
    }

    /// `B^dagger`: maps amplitudes into coefficients along the basis.
    fn rotation(&self) -> DMatrix<C64> {
        let d = self.vectors.len();
        DMatrix::from_fn(d, d, |r, c| self.vectors[r][c].conj())
    }
}

/// How one register is labelled: by a basis (register removed from the residual)
/// or by a projector family (register stays in the residual).
#[derive(Clone, Debug)]
pub enum BasisChoice {
    Basis(LocalBasis),
    Projectors(ProjectorFamily),
}

impl BasisChoice {
    pub fn computational(register: &Register) -> Self {
        Self::Basis(LocalBasis::computational(register))
    }

    fn register(&self) -> Result<&str> {
        match self {
            Self::Basis(b) => Ok(b.register()),
            Self::Projectors(f) => match f.registers() {
                [r] => Ok(r),
                _ => Err(Error::Basis("projector labels must act on one register".into())),
            },
        }
    }
}

/// Per-register label assignment, in basis-choice order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchLabel(pub Vec<(String, String)>);

impl BranchLabel {
    pub fn get(&self, register: &str) -> Option<&str> {
        self.0.iter().find(|(r, _)| r == register).map(|(_, l)| l.as_str())
    }
}

impl std::fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(r, l)| format!("{r}={l}")).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub label: BranchLabel,
    pub amplitude: C64,
    pub weight: f64,
    /// Normalized state of the unlabelled registers; `None` when every register is labelled.
    pub residual: Option<StateVector>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub step: String,
    pub parents: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BranchSet {
    layout: Vec<Register>,
    bases: Vec<LocalBasis>,
    residual_layout: Vec<Register>,
    pub branches: Vec<Branch>,
    pub pruned_mass: f64,
    pub pruned_count: usize,
    pub provenance: Provenance,
}

impl BranchSet {
    pub fn layout(&self) -> &[Register] {
        &self.layout
    }

    pub fn residual_layout(&self) -> &[Register] {
        &self.residual_layout
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.weight).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum()
    }

    pub fn find(&self, label: &[(&str, &str)]) -> Option<&Branch> {
        self.branches
            .iter()
            .find(|b| label.iter().all(|(r, l)| b.label.get(r) == Some(*l)))
    }

    pub fn with_provenance(mut self, step: &str, parents: Vec<usize>) -> Self {
        self.provenance = Provenance { step: step.to_string(), parents };
        self
    }

    /// Unnormalized component `amplitude * (basis vectors (x) residual)` over the full layout.
    pub fn component(&self, i: usize) -> Result<StateVector> {
        let b = &self.branches[i];
        let mut factors = Vec::with_capacity(self.bases.len() + 1);
        for basis in &self.bases {
            let label = b.label.get(basis.register()).expect("basis registers are labelled");
            let v = basis.vector(label).expect("label from this basis");
            let reg = self.layout.iter().find(|r| r.name() == basis.register()).expect("register in layout");
            factors.push(StateVector::from_raw(vec![reg.clone()], v.iter().copied().collect()));
        }
        if let Some(r) = &b.residual {
            factors.push(r.clone());
        }
        let names: Vec<&str> = self.layout.iter().map(Register::name).collect();
        tensor_product(&factors)?.scaled(b.amplitude).reorder(&names)
    }

    /// Sum of all components.
    pub fn reconstruct(&self) -> Result<StateVector> {
        let zeros = vec![C64::new(0.0, 0.0); crate::tensor::layout_dim(&self.layout)];
        let mut acc = StateVector::from_raw(self.layout.clone(), zeros);
        for i in 0..self.branches.len() {
            acc = acc.add(&self.component(i)?)?;
        }
        Ok(acc)
    }

    /// Largest `|<c_i|c_j>|` between distinct components.
    pub fn max_overlap(&self) -> Result<f64> {
        let comps = (0..self.len()).map(|i| self.component(i)).collect::<Result<Vec<_>>>()?;
        let mut worst: f64 = 0.0;
        for i in 0..comps.len() {
            for j in i + 1..comps.len() {
                worst = worst.max(comps[i].inner(&comps[j])?.norm());
            }
        }
        Ok(worst)
    }
}

/// Splits `psi` into its components along the chosen per-register labelling.
pub fn decompose(psi: &StateVector, choices: &[BasisChoice]) -> Result<BranchSet> {
    let mut seen = HashSet::new();
    for c in choices {
        let r = c.register()?;
        psi.register_index(r)?;
        if !seen.insert(r.to_string()) {
            return Err(Error::Basis(format!("register `{r}` labelled twice")));
        }
    }
    let bases: Vec<LocalBasis> = choices
        .iter()
        .filter_map(|c| match c {
            BasisChoice::Basis(b) => Some(b.clone()),
            _ => None,
        })
        .collect();
    let families: Vec<&ProjectorFamily> = choices
        .iter()
        .filter_map(|c| match c {
            BasisChoice::Projectors(f) => Some(f),
            _ => None,
        })
        .collect();

    let mut rotated = psi.clone();
    for b in &bases {
        let reg = psi.register(b.register())?;
        if reg.dim() != b.vectors.len() {
            return Err(Error::Basis(format!("basis of `{}` has the wrong dimension", b.register())));
        }
        rotated = apply_operator(&LinearOperator::new(&[b.register()], b.rotation())?, &rotated)?;
    }
    let basis_names: Vec<&str> = bases.iter().map(LocalBasis::register).collect();
    let residual_names: Vec<&str> = psi.register_names().into_iter().filter(|n| !basis_names.contains(n)).collect();
    let residual_layout: Vec<Register> = residual_names.iter().map(|n| psi.register(n).cloned()).collect::<Result<_>>()?;
    let mut order = basis_names.clone();
    order.extend(&residual_names);
    let rotated = rotated.reorder(&order)?;
    let rdim = crate::tensor::layout_dim(&residual_layout);
    let bdims: Vec<usize> = bases.iter().map(|b| b.vectors.len()).collect();
    let fdims: Vec<usize> = families.iter().map(|f| f.len()).collect();
    let fops = families
        .iter()
        .map(|f| {
            let targets: Vec<&str> = f.registers().iter().map(String::as_str).collect();
            f.projectors()
                .iter()
                .map(|p| LinearOperator::new(&targets, p.matrix.clone()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut branches = Vec::new();
    let (mut pruned_mass, mut pruned_count) = (0.0, 0);
    for (t, row) in rotated.amplitudes().chunks(rdim).enumerate() {
        let bidx = unflatten(t, &bdims);
        for f in 0..fdims.iter().product::<usize>() {
            let fidx = unflatten(f, &fdims);
            let mut comp = StateVector::from_raw(residual_layout.clone(), row.to_vec());
            for (k, &j) in fidx.iter().enumerate() {
                comp = apply_operator(&fops[k][j], &comp)?;
            }
            let mut label = Vec::with_capacity(choices.len());
            let (mut bi, mut fi) = (0, 0);
            for c in choices {
                match c {
                    BasisChoice::Basis(b) => {
                        label.push((b.register.clone(), b.labels[bidx[bi]].clone()));
                        bi += 1;
                    }
                    BasisChoice::Projectors(fam) => {
                        label.push((fam.registers()[0].clone(), fam.projectors()[fidx[fi]].label.clone()));
                        fi += 1;
                    }
                }
            }
            let (amplitude, residual) = split_component(comp, residual_layout.is_empty());
            let weight = amplitude.norm_sqr();
            if weight < PRUNE_WEIGHT {
                pruned_mass += weight;
                pruned_count += 1;
                continue;
            }
            branches.push(Branch { label: BranchLabel(label), amplitude, weight, residual });
        }
    }
    Ok(BranchSet {
        layout: psi.layout().to_vec(),
        bases,
        residual_layout,
        branches,
        pruned_mass,
        pruned_count,
        provenance: Provenance::default(),
    })
}

fn unflatten(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
    out
}

/// Amplitude (carrying the phase) and normalized, phase-canonical residual.
fn split_component(comp: StateVector, scalar: bool) -> (C64, Option<StateVector>) {
    if scalar {
        return (comp.amplitudes()[0], None);
    }
    let norm = comp.norm_sqr().sqrt();
    if norm == 0.0 {
        return (C64::new(0.0, 0.0), None);
    }
    let layout = comp.layout().to_vec();
    let mut amps = comp.into_amplitudes();
    let lead = amps.iter().find(|a| a.norm() > ALGEBRA_TOL * norm).copied().unwrap_or(amps[0]);
    canonical_phase(&mut amps);
    amps.iter_mut().for_each(|a| *a /= norm);
    (C64::from_polar(norm, lead.arg()), Some(StateVector::from_raw(layout, amps)))
}

/// Decomposition in an alternative product basis.
pub fn rebase(psi: &StateVector, bases: &[LocalBasis]) -> Result<BranchSet> {
    let choices: Vec<BasisChoice> = bases.iter().cloned().map(BasisChoice::Basis).collect();
    decompose(psi, &choices)
}

/// Merges branches into blocks; `assignment[i]` names the block of branch `i`.
/// A block's amplitude is the norm of its superposition, its residual the
/// normalized superposition over the full layout.
pub fn group(set: &BranchSet, assignment: &[String]) -> Result<BranchSet> {
    if assignment.len() != set.len() {
        return Err(Error::Grouping(format!("{} block names for {} branches", assignment.len(), set.len())));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, b) in assignment.iter().enumerate() {
        if !members.contains_key(b.as_str()) {
            order.push(b);
        }
        members.entry(b).or_default().push(i);
    }
    let mut branches = Vec::with_capacity(order.len());
    for name in order {
        let idx = &members[name];
        let mut acc = set.component(idx[0])?;
        for &i in &idx[1..] {
            acc = acc.add(&set.component(i)?)?;
        }
        let (amplitude, residual) = split_component(acc, false);
        // orthogonal members: the block weight is the sum of member weights
        let weight: f64 = idx.iter().map(|&i| set.branches[i].weight).sum();
        branches.push(Branch {
            label: BranchLabel(vec![("group".into(), name.to_string())]),
            amplitude: C64::new(weight.sqrt(), 0.0),
            weight,
            residual: residual.map(|r| r.scaled(amplitude / amplitude.norm())),
        });
    }
    Ok(BranchSet {
        layout: set.layout.clone(),
        bases: vec![],
        residual_layout: set.layout.clone(),
        branches,
        pruned_mass: set.pruned_mass,
        pruned_count: set.pruned_count,
        provenance: set.provenance.clone(),
    })
}

/// Groups by a key computed from each branch.
pub fn group_by(set: &BranchSet, key: impl Fn(&Branch) -> String) -> Result<BranchSet> {
    let assignment: Vec<String> = set.branches.iter().map(key).collect();
    group(set, &assignment)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub id: usize,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub label: String,
    pub weight: f64,
    pub parents: Vec<TreeEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeStep {
    pub name: String,
    pub branches: Vec<TreeNode>,
}

/// Rounding noise in edge amplitudes is zeroed so renderings stay stable.
fn snap(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        0.0
    } else {
        x
    }
}

/// Layered record of branches with parent links between consecutive layers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldTree {
    pub steps: Vec<TreeStep>,
}

impl WorldTree {
    pub fn new(step: &str, set: &BranchSet) -> Result<Self> {
        let tree = Self { steps: vec![] };
        tree.extend(step, &vec![vec![]; set.len()], set)
    }

    fn next_id(&self) -> usize {
        self.steps.iter().map(|s| s.branches.len()).sum()
    }

    /// Appends a layer. `parents[i]` lists `(parent id, edge amplitude)` for branch `i`.
    pub fn extend(&self, step: &str, parents: &[Vec<(usize, C64)>], set: &BranchSet) -> Result<Self> {
        if parents.len() != set.len() {
            return Err(Error::Tree(format!("{} parent lists for {} branches", parents.len(), set.len())));
        }
        let prev: HashSet<usize> = self.steps.last().map(|s| s.branches.iter().map(|b| b.id).collect()).unwrap_or_default();
        let total = set.total_weight() + set.pruned_mass;
        if (total - 1.0).abs() > BRANCH_TOL {
            return Err(Error::Tree(format!("layer `{step}` carries total weight {total}")));
        }
        let base = self.next_id();
        let mut nodes = Vec::with_capacity(set.len());
        for (i, (b, ps)) in set.branches.iter().zip(parents).enumerate() {
            let mut edges = Vec::with_capacity(ps.len());
            for &(p, a) in ps {
                if !prev.contains(&p) {
                    return Err(Error::Tree(format!("parent {p} of `{}` is not in the previous layer", b.label)));
                }
                edges.push(TreeEdge { id: p, amplitude_re: snap(a.re), amplitude_im: snap(a.im) });
            }
            edges.sort_by_key(|e| e.id);
            nodes.push(TreeNode { id: base + i, label: b.label.to_string(), weight: b.weight, parents: edges });
        }
        let mut steps = self.steps.clone();
        steps.push(TreeStep { name: step.to_string(), branches: nodes });
        Ok(Self { steps })
    }

    /// Appends `next`, linking child `c` to parent `p` with `<c^|U comp_p>`
    /// where `U` is `evolve` and `c^` the normalized child component.
    pub fn link_by_evolution(
        &self,
        step: &str,
        prev: &BranchSet,
        evolve: impl Fn(&StateVector) -> Result<StateVector>,
        next: &BranchSet,
    ) -> Result<Self> {
        let last = self.steps.last().ok_or_else(|| Error::Tree("tree has no layers".into()))?;
        if last.branches.len() != prev.len() {
            return Err(Error::Tree("previous branch set does not match the last layer".into()));
        }
        let evolved = (0..prev.len()).map(|i| evolve(&prev.component(i)?)).collect::<Result<Vec<_>>>()?;
        let mut parents = Vec::with_capacity(next.len());
        for c in 0..next.len() {
            let comp = next.component(c)?;
            let hat = comp.scaled(C64::new(1.0 / comp.norm_sqr().sqrt(), 0.0));
            let mut ps = Vec::new();
            for (p, e) in evolved.iter().enumerate() {
                let a = hat.inner(e)?;
                if a.norm() > ALGEBRA_TOL {
                    ps.push((last.branches[p].id, a));
                }
            }
            parents.push(ps);
        }
        self.extend(step, &parents, next)
    }

    pub fn leaves(&self) -> &[TreeNode] {
        self.steps.last().map(|s| s.branches.as_slice()).unwrap_or(&[])
    }

    /// Nodes fed by more than one parent, as `(layer index, node id)`.
    pub fn interference_nodes(&self) -> Vec<(usize, usize)> {
        let mut out = vec![];
        for (k, s) in self.steps.iter().enumerate() {
            for n in &s.branches {
                if n.parents.len() > 1 {
                    out.push((k, n.id));
                }
            }
        }
        out
    }

    /// Same tree with every number rounded to 12 significant digits.
    pub fn rounded(&self) -> Self {
        let mut t = self.clone();
        for s in &mut t.steps {
            for n in &mut s.branches {
                n.weight = round12(n.weight);
                for e in &mut n.parents {
                    e.amplitude_re = round12(e.amplitude_re);
                    e.amplitude_im = round12(e.amplitude_im);
                }
            }
        }
        t
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::to_value(self.rounded()).expect("tree serializes")).expect("tree serializes")
    }

    /// Graphviz text; one cluster per layer, doubled outline on interference nodes.
    pub fn to_graphviz(&self) -> String {
        let mut out = String::from("digraph worlds {\n  rankdir=TB;\n  node [shape=box];\n");
        for (k, s) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "  subgraph layer_{k} {{\n    rank=same;");
            let mut nodes: Vec<&TreeNode> = s.branches.iter().collect();
            nodes.sort_by_key(|n| n.id);
            for n in nodes {
                let extra = if n.parents.len() > 1 { ", peripheries=2" } else { "" };
                let _ = writeln!(
                    out,
                    "    n{} [label=\"{}\\n{}\\nw={}\"{extra}];",
                    n.id,
                    escape(&s.name),
                    escape(&n.label),
                    format_g(n.weight, 12)
                );
            }
            out.push_str("  }\n");
        }
        let mut edges = vec![];
        for s in &self.steps {
            for n in &s.branches {
                for e in &n.parents {
                    edges.push((e.id, n.id, e.amplitude_re, e.amplitude_im));
                }
            }
        }
        edges.sort_by_key(|e| (e.0, e.1));
        for (p, c, re, im) in edges {
            let _ = writeln!(out, "  n{p} -> n{c} [label=\"{}{}{}i\"];", format_g(re, 12), if im < 0.0 { "" } else { "+" }, format_g(im, 12));
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn q(n: &str) -> Register {
        Register::qubit(n)
    }

    #[test]
    fn product_state_has_one_branch() {
        let s = StateVector::basis(vec![q("a"), q("b")], &["1", "0"]).unwrap();
        let set = decompose(&s, &[BasisChoice::computational(&q("a")), BasisChoice::computational(&q("b"))]).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.branches[0].weight, 1.0);
        assert_eq!(set.pruned_count, 3);
    }

    #[test]
    fn partial_labels_keep_residual() {
        let s = StateVector::normalized(vec![q("a"), q("b")], vec![c(1.0), c(1.0), c(1.0), c(-1.0)]).unwrap();
        let set = decompose(&s, &[BasisChoice::computational(&q("a"))]).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.branches.iter().all(|b| (b.weight - 0.5).abs() < 1e-15));
        assert!(set.reconstruct().unwrap().distance(&s).unwrap() < 1e-15);
        assert!(set.max_overlap().unwrap() < 1e-15);
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let err = LocalBasis::new("a", vec![("x", vec![c(1.0), c(0.0)]), ("y", vec![c(1.0), c(1.0)])]).unwrap_err();
        assert!(matches!(err, Error::Basis(_)));
    }

    #[test]
    fn grouping_adds_weights() {
        let s = StateVector::normalized(vec![q("a"), q("b")], vec![c(1.0), c(1.0), c(1.0), c(1.0)]).unwrap();
        let set = decompose(&s, &[BasisChoice::computational(&q("a")), BasisChoice::computational(&q("b"))]).unwrap();
        let g = group_by(&set, |b| {
            let ones = b.label.0.iter().filter(|(_, l)| l == "1").count();
            ones.to_string()
        })
        .unwrap();
        assert_eq!(g.weights(), vec![0.25, 0.5, 0.25]);
        assert!(g.reconstruct().unwrap().distance(&s).unwrap() < 1e-15);
        let all = group(&set, &vec!["all".to_string(); 4]).unwrap();
        assert_eq!(all.len(), 1);
        assert!((all.branches[0].weight - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dangling_parent_is_tree_error() {
        let s = StateVector::basis(vec![q("a")], &["0"]).unwrap();
        let set = decompose(&s, &[BasisChoice::computational(&q("a"))]).unwrap();
        let t = WorldTree::new("start", &set).unwrap();
        assert!(matches!(t.extend("next", &[vec![(7, c(1.0))]], &set), Err(Error::Tree(_))));
        let t2 = t.extend("next", &[vec![(0, c(1.0))]], &set).unwrap();
        assert_eq!(t2.steps.len(), 2);
        assert!(t.to_graphviz().contains("n0 [label=\"start\\na=0\\nw=1\"]"));
    }
}

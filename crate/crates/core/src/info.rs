//! Joint distributions over finite labelled axes, information and correlation.
//!
//! All quantities are in nats. Cells with probability below `ZERO_PROB` count
//! as exact zeros, so `0 ln 0 = 0`.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO_PROB: f64 = 1e-300;
/// Allowed deviation of a distribution's total probability from 1.
pub const NORM_TOL: f64 = 1e-12;
/// Allowed deviation of a grid density's integral from 1.
pub const DENSITY_NORM_TOL: f64 = 1e-9;

/// `p ln(p / w)` with the zero convention.
pub fn plogp_over(p: f64, w: f64) -> f64 {
    if p < ZERO_PROB {
        0.0
    } else {
        p * (p / w).ln()
    }
}

/// `-sum p ln p`.
pub fn shannon_entropy(ps: &[f64]) -> f64 {
    -ps.iter().map(|&p| plogp_over(p, 1.0)).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub labels: Vec<String>,
}

impl Axis {
    pub fn new<S: Into<String>>(name: impl Into<String>, labels: impl IntoIterator<Item = S>) -> Self {
        Self { name: name.into(), labels: labels.into_iter().map(Into::into).collect() }
    }

    /// Axis labelled `0..n`.
    pub fn indexed(name: impl Into<String>, n: usize) -> Self {
        Self::new(name, (0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Joint distribution `P(x1_i, x2_j, ...)`, row-major over the axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct FiniteDistribution {
    axes: Vec<Axis>,
    probs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measure_weights: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
struct RawDistribution {
    axes: Vec<Axis>,
    probs: Vec<f64>,
    #[serde(default)]
    measure_weights: Option<Vec<Vec<f64>>>,
}

impl TryFrom<RawDistribution> for FiniteDistribution {
    type Error = Error;

    fn try_from(r: RawDistribution) -> Result<Self> {
        FiniteDistribution::new(r.axes, r.probs, r.measure_weights)
    }
}

impl FiniteDistribution {
    pub fn new(axes: Vec<Axis>, probs: Vec<f64>, measure_weights: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let mut names = HashSet::new();
        for a in &axes {
            if a.is_empty() {
                return Err(Error::Axis(format!("axis `{}` has no labels", a.name)));
            }
            if !names.insert(a.name.as_str()) {
                return Err(Error::Axis(format!("axis `{}` appears twice", a.name)));
            }
            let mut seen = HashSet::new();
            if let Some(l) = a.labels.iter().find(|l| !seen.insert(l.as_str())) {
                return Err(Error::Axis(format!("axis `{}` repeats label `{l}`", a.name)));
            }
        }
        let size: usize = axes.iter().map(Axis::len).product();
        if probs.len() != size {
            return Err(Error::Shape(format!("{} probabilities for {size} cells", probs.len())));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::Norm(format!("probability {p} is not a nonnegative number")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::Norm(format!("probabilities sum to {total}")));
        }
        if let Some(ws) = &measure_weights {
            if ws.len() != axes.len() {
                return Err(Error::Shape(format!("{} weight lists for {} axes", ws.len(), axes.len())));
            }
            for (w, a) in ws.iter().zip(&axes) {
                if w.len() != a.len() {
                    return Err(Error::Shape(format!("axis `{}` has {} weights", a.name, w.len())));
                }
                if w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                    return Err(Error::Axis(format!("axis `{}` has a non-positive measure weight", a.name)));
                }
            }
        }
        Ok(Self { axes, probs, measure_weights })
    }

    /// Row-major probabilities over `(x, y)` given as nested rows.
    pub fn from_table(x: Axis, y: Axis, rows: &[Vec<f64>]) -> Result<Self> {
        let probs = rows.iter().flatten().copied().collect();
        Self::new(vec![x, y], probs, None)
    }

    pub fn with_measure_weights(self, weights: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.axes, self.probs, Some(weights))
    }

    pub fn without_measure_weights(self) -> Self {
        Self { measure_weights: None, ..self }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn measure_weights(&self) -> Option<&[Vec<f64>]> {
        self.measure_weights.as_deref()
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::Axis(format!("unknown axis `{name}`")))
    }

    fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    /// Probability of a full label assignment, by label text in axis order.
    pub fn prob(&self, labels: &[&str]) -> Result<f64> {
        if labels.len() != self.axes.len() {
            return Err(Error::Axis(format!("{} labels for {} axes", labels.len(), self.axes.len())));
        }
        let mut flat = 0;
        for (a, l) in self.axes.iter().zip(labels) {
            let i = a
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::Axis(format!("`{l}` is not a label of `{}`", a.name)))?;
            flat = flat * a.len() + i;
        }
        Ok(self.probs[flat])
    }

    fn multi_index(&self, mut flat: usize, dims: &[usize], out: &mut [usize]) {
        for k in (0..dims.len()).rev() {
            out[k] = flat % dims[k];
            flat /= dims[k];
        }
    }

    /// Sum over every axis not in `keep`; kept axes follow the order of `keep`.
    pub fn marginal(&self, keep: &[&str]) -> Result<FiniteDistribution> {
        if keep.is_empty() {
            return Err(Error::Axis("marginal needs at least one axis".into()));
        }
        let idx = keep.iter().map(|k| self.axis_index(k)).collect::<Result<Vec<_>>>()?;
        let mut seen = HashSet::new();
        if !idx.iter().all(|i| seen.insert(*i)) {
            return Err(Error::Axis("marginal lists an axis twice".into()));
        }
        let dims = self.dims();
        let kdims: Vec<usize> = idx.iter().map(|&i| dims[i]).collect();
        let mut out = vec![0.0; kdims.iter().product()];
        let mut mi = vec![0; dims.len()];
        for (flat, p) in self.probs.iter().enumerate() {
            self.multi_index(flat, &dims, &mut mi);
            let t = idx.iter().zip(&kdims).fold(0, |acc, (&i, &d)| acc * d + mi[i]);
            out[t] += p;
        }
        let axes = idx.iter().map(|&i| self.axes[i].clone()).collect();
        let weights = self
            .measure_weights
            .as_ref()
            .map(|w| idx.iter().map(|&i| w[i].clone()).collect());
        renormalized(axes, out, weights)
    }

    /// Distribution of the remaining axes given fixed labels on some axes.
    pub fn conditional(&self, fixed: &[(&str, &str)]) -> Result<FiniteDistribution> {
        let mut fixed_idx = BTreeMap::new();
        for (name, label) in fixed {
            let a = self.axis_index(name)?;
            let l = self.axes[a]
                .labels
                .iter()
                .position(|x| x == label)
                .ok_or_else(|| Error::Axis(format!("`{label}` is not a label of `{name}`")))?;
            if fixed_idx.insert(a, l).is_some() {
                return Err(Error::Axis(format!("axis `{name}` fixed twice")));
            }
        }
        if fixed_idx.len() == self.axes.len() {
            return Err(Error::Axis("conditioning on every axis leaves nothing".into()));
        }
        let rest: Vec<usize> = (0..self.axes.len()).filter(|i| !fixed_idx.contains_key(i)).collect();
        let dims = self.dims();
        let rdims: Vec<usize> = rest.iter().map(|&i| dims[i]).collect();
        let mut out = vec![0.0; rdims.iter().product()];
        let mut mi = vec![0; dims.len()];
        for (flat, p) in self.probs.iter().enumerate() {
            self.multi_index(flat, &dims, &mut mi);
            if fixed_idx.iter().all(|(&a, &l)| mi[a] == l) {
                let t = rest.iter().zip(&rdims).fold(0, |acc, (&i, &d)| acc * d + mi[i]);
                out[t] += p;
            }
        }
        let pf: f64 = out.iter().sum();
        if pf < ZERO_PROB {
            return Err(Error::ConditionOnNull);
        }
        out.iter_mut().for_each(|p| *p /= pf);
        let axes = rest.iter().map(|&i| self.axes[i].clone()).collect();
        let weights = self
            .measure_weights
            .as_ref()
            .map(|w| rest.iter().map(|&i| w[i].clone()).collect());
        renormalized(axes, out, weights)
    }

    /// Information `sum P ln(P / w)`, `w` the product of per-axis measure weights.
    pub fn information(&self) -> f64 {
        let Some(ws) = &self.measure_weights else {
            return self.probs.iter().map(|&p| plogp_over(p, 1.0)).sum();
        };
        let dims = self.dims();
        let mut mi = vec![0; dims.len()];
        self.probs
            .iter()
            .enumerate()
            .map(|(flat, &p)| {
                self.multi_index(flat, &dims, &mut mi);
                let w: f64 = mi.iter().zip(ws).map(|(&i, w)| w[i]).product();
                plogp_over(p, w)
            })
            .sum()
    }

    /// `I_joint - sum I_group` for a partition of the axes into groups.
    pub fn correlation(&self, groups: &[Vec<&str>]) -> Result<f64> {
        if groups.len() < 2 {
            return Err(Error::Grouping("correlation needs at least two groups".into()));
        }
        let mut seen = HashSet::new();
        for g in groups {
            if g.is_empty() {
                return Err(Error::Grouping("empty group".into()));
            }
            for n in g {
                self.axis_index(n).map_err(|_| Error::Grouping(format!("unknown axis `{n}`")))?;
                if !seen.insert(*n) {
                    return Err(Error::Grouping(format!("axis `{n}` is in two groups")));
                }
            }
        }
        if seen.len() != self.axes.len() {
            return Err(Error::Grouping("groups do not cover every axis".into()));
        }
        let parts = groups
            .iter()
            .map(|g| Ok(self.marginal(g)?.information()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.information() - parts.iter().sum::<f64>())
    }

    /// Correlation with every axis in its own group.
    pub fn total_correlation(&self) -> Result<f64> {
        let groups: Vec<Vec<&str>> = self.axes.iter().map(|a| vec![a.name.as_str()]).collect();
        self.correlation(&groups)
    }

    /// Merges labels into blocks; block probabilities and measure weights add.
    pub fn coarsen(&self, partitions: &[(&str, &Partition)]) -> Result<FiniteDistribution> {
        let mut maps: Vec<Option<(Vec<usize>, Vec<String>)>> = vec![None; self.axes.len()];
        for (name, part) in partitions {
            let a = self.axis_index(name)?;
            if maps[a].is_some() {
                return Err(Error::Partition(format!("axis `{name}` partitioned twice")));
            }
            maps[a] = Some(part.block_map(&self.axes[a])?);
        }
        let dims = self.dims();
        let new_axes: Vec<Axis> = self
            .axes
            .iter()
            .zip(&maps)
            .map(|(a, m)| match m {
                Some((_, blocks)) => Axis::new(a.name.clone(), blocks.clone()),
                None => a.clone(),
            })
            .collect();
        let ndims: Vec<usize> = new_axes.iter().map(Axis::len).collect();
        let mut out = vec![0.0; ndims.iter().product()];
        let mut mi = vec![0; dims.len()];
        for (flat, p) in self.probs.iter().enumerate() {
            self.multi_index(flat, &dims, &mut mi);
            let t = mi.iter().zip(&maps).zip(&ndims).fold(0, |acc, ((&i, m), &d)| {
                let j = m.as_ref().map_or(i, |(map, _)| map[i]);
                acc * d + j
            });
            out[t] += p;
        }
        let weights = self.measure_weights.as_ref().map(|ws| {
            ws.iter()
                .zip(&maps)
                .zip(&ndims)
                .map(|((w, m), &d)| match m {
                    Some((map, _)) => {
                        let mut nw = vec![0.0; d];
                        for (i, &j) in map.iter().enumerate() {
                            nw[j] += w[i];
                        }
                        nw
                    }
                    None => w.clone(),
                })
                .collect()
        });
        renormalized(new_axes, out, weights)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distribution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

fn renormalized(axes: Vec<Axis>, mut probs: Vec<f64>, weights: Option<Vec<Vec<f64>>>) -> Result<FiniteDistribution> {
    // sums of a normalized table drift by a few ulps
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    FiniteDistribution::new(axes, probs, weights)
}

/// Map from the labels of one axis onto block labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    map: BTreeMap<String, String>,
}

impl Partition {
    pub fn new<A: Into<String>, B: Into<String>>(pairs: impl IntoIterator<Item = (A, B)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            let a = a.into();
            if map.insert(a.clone(), b.into()).is_some() {
                return Err(Error::Partition(format!("label `{a}` assigned twice")));
            }
        }
        Ok(Self { map })
    }

    /// Everything into one block.
    pub fn merge_all(axis: &Axis, block: &str) -> Self {
        Self { map: axis.labels.iter().map(|l| (l.clone(), block.to_string())).collect() }
    }

    pub fn identity(axis: &Axis) -> Self {
        Self { map: axis.labels.iter().map(|l| (l.clone(), l.clone())).collect() }
    }

    /// Per-label block index plus block names in order of first appearance.
    fn block_map(&self, axis: &Axis) -> Result<(Vec<usize>, Vec<String>)> {
        if let Some(extra) = self.map.keys().find(|k| !axis.labels.contains(k)) {
            return Err(Error::Partition(format!("`{extra}` is not a label of `{}`", axis.name)));
        }
        let mut blocks: Vec<String> = Vec::new();
        let mut idx = Vec::with_capacity(axis.len());
        for l in &axis.labels {
            let b = self
                .map
                .get(l)
                .ok_or_else(|| Error::Partition(format!("label `{l}` of `{}` has no block", axis.name)))?;
            let j = match blocks.iter().position(|x| x == b) {
                Some(j) => j,
                None => {
                    blocks.push(b.clone());
                    blocks.len() - 1
                }
            };
            idx.push(j);
        }
        Ok((idx, blocks))
    }
}

/// Nonnegative density `f(x, y)` sampled on a uniform `nx * ny` grid, row-major in x.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn from_fn(nx: usize, ny: usize, x0: f64, y0: f64, dx: f64, dy: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                values.push(f(x0 + (i as f64 + 0.5) * dx, y0 + (j as f64 + 0.5) * dy));
            }
        }
        Self { nx, ny, dx, dy, values }
    }

    /// Rescales so the grid integral is 1.
    pub fn normalize(mut self) -> Self {
        let s: f64 = self.values.iter().sum::<f64>() * self.dx * self.dy;
        self.values.iter_mut().for_each(|v| *v /= s);
        self
    }
}

/// Correlations `C_1 <= ... <= C_levels` of the density under nested dyadic
/// partitions: level `n` cuts each axis into `2^n` equal blocks.
pub fn continuous_correlation(density: &GridDensity, levels: u32) -> Result<Vec<f64>> {
    let GridDensity { nx, ny, dx, dy, ref values } = *density;
    if values.len() != nx * ny {
        return Err(Error::Shape(format!("{} samples for a {nx}x{ny} grid", values.len())));
    }
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Norm(format!("density value {v} is negative")));
    }
    let total: f64 = values.iter().sum::<f64>() * dx * dy;
    if (total - 1.0).abs() > DENSITY_NORM_TOL {
        return Err(Error::Norm(format!("density integrates to {total}")));
    }
    let blocks = 1usize << levels;
    if nx % blocks != 0 || ny % blocks != 0 {
        return Err(Error::Partition(format!("grid {nx}x{ny} is not divisible into {blocks} blocks per axis")));
    }
    let mut out = Vec::with_capacity(levels as usize);
    for level in 1..=levels {
        let b = 1usize << level;
        let (bx, by) = (nx / b, ny / b);
        let mut cells = vec![0.0; b * b];
        for i in 0..nx {
            for j in 0..ny {
                cells[(i / bx) * b + j / by] += values[i * ny + j] * dx * dy;
            }
        }
        let s: f64 = cells.iter().sum();
        cells.iter_mut().for_each(|c| *c /= s);
        let p = FiniteDistribution::new(vec![Axis::indexed("x", b), Axis::indexed("y", b)], cells, None)?;
        out.push(p.correlation(&[vec!["x"], vec!["y"]])?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn xy(rows: &[Vec<f64>]) -> FiniteDistribution {
        let x = Axis::indexed("x", rows.len());
        let y = Axis::indexed("y", rows[0].len());
        FiniteDistribution::from_table(x, y, rows).unwrap()
    }

    #[test]
    fn marginals() {
        let p = xy(&[vec![0.12, 0.18], vec![0.28, 0.42]]);
        let my = p.marginal(&["y"]).unwrap();
        assert!((my.probs()[0] - 0.4).abs() < 1e-15 && (my.probs()[1] - 0.6).abs() < 1e-15);
        assert!(matches!(p.marginal(&[]), Err(Error::Axis(_))));
    }

    #[test]
    fn conditionals() {
        let p = xy(&[vec![0.1, 0.2], vec![0.3, 0.4]]);
        let c = p.conditional(&[("y", "1")]).unwrap();
        assert!((c.probs()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.probs()[1] - 2.0 / 3.0).abs() < 1e-15);
        let d = xy(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert_eq!(d.conditional(&[("y", "0")]).unwrap().probs(), &[1.0, 0.0]);
        let z = xy(&[vec![0.5, 0.0], vec![0.5, 0.0]]);
        assert_eq!(z.conditional(&[("y", "1")]).unwrap_err(), Error::ConditionOnNull);
    }

    #[test]
    fn information_values() {
        let point = FiniteDistribution::new(vec![Axis::indexed("x", 3)], vec![0.0, 1.0, 0.0], None).unwrap();
        assert_eq!(point.information(), 0.0);
        let u = FiniteDistribution::new(vec![Axis::indexed("x", 4)], vec![0.25; 4], None).unwrap();
        assert!((u.information() + 4f64.ln()).abs() < 1e-15);
        let w = FiniteDistribution::new(vec![Axis::indexed("x", 2)], vec![0.5; 2], Some(vec![vec![2.0, 2.0]])).unwrap();
        assert!((w.information() + 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn correlation_values() {
        let d = xy(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert!((d.correlation(&[vec!["x"], vec!["y"]]).unwrap() - LN_2).abs() < 1e-15);
        assert!(matches!(d.correlation(&[vec!["x", "y"]]), Err(Error::Grouping(_))));
        let mut probs = vec![0.0; 8];
        probs[0] = 0.5;
        probs[7] = 0.5;
        let ghz = FiniteDistribution::new(
            vec![Axis::indexed("x", 2), Axis::indexed("y", 2), Axis::indexed("z", 2)],
            probs,
            None,
        )
        .unwrap();
        assert!((ghz.total_correlation().unwrap() - 2.0 * LN_2).abs() < 1e-15);
    }

    #[test]
    fn coarsening_merges_blocks() {
        let p = xy(&[vec![0.1, 0.2], vec![0.3, 0.4]]);
        let all = Partition::merge_all(&p.axes()[0], "*");
        let c = p.coarsen(&[("x", &all)]).unwrap();
        assert_eq!(c.axes()[0].labels, vec!["*"]);
        assert!(c.correlation(&[vec!["x"], vec!["y"]]).unwrap().abs() < 1e-15);
        let id = Partition::identity(&p.axes()[1]);
        assert_eq!(p.coarsen(&[("y", &id)]).unwrap(), p);
        let partial = Partition::new([("0", "a")]).unwrap();
        assert!(matches!(p.coarsen(&[("x", &partial)]), Err(Error::Partition(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = xy(&[vec![0.1, 0.2], vec![0.3, 0.4]]).with_measure_weights(vec![vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let back = FiniteDistribution::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!(FiniteDistribution::from_json(r#"{"axes":[{"name":"x","labels":["a"]}],"probs":[0.5]}"#).is_err());
    }

    #[test]
    fn non_normalized_density() {
        let g = GridDensity { nx: 2, ny: 2, dx: 1.0, dy: 1.0, values: vec![0.5; 4] };
        assert!(matches!(continuous_correlation(&g, 1), Err(Error::Norm(_))));
    }
}

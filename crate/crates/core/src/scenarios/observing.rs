//! Reports for repeated spin observations and the two-observer cases.

use serde_json::json;

use crate::branching::LocalBasis;
use crate::numfmt::rational;
use crate::observers::dense::DenseObserverUniverse;
use crate::observers::{entangled_pair, family_of, fourier_basis, multi_observer_case, repeated_spin_run, symbol_names, system, CaseConfig, CaseReport};
use crate::quantum::ProjectorFamily;
use crate::report::{num, nums, BranchRow, ScenarioReport};
use crate::tensor::C64;
use crate::{Error, Result};

/// `C(n, m) p^m (1 - p)^(n - m)`.
pub fn binomial_weight(n: usize, m: usize, p: f64) -> f64 {
    binomial(n, m) as f64 * p.powi(m as i32) * (1.0 - p).powi((n - m) as i32)
}

pub fn binomial(n: usize, m: usize) -> u128 {
    (0..m as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

pub fn spins_report(n: usize, a: C64, b: C64) -> Result<ScenarioReport> {
    let run = repeated_spin_run(n, a, b)?;
    let p = a.norm_sqr();
    let halves = (p - 0.5).abs() <= 1e-15;
    let mut per_m = vec![0u128; n + 1];
    for i in 0..run.state.len() {
        let v = run.state.branch(i);
        let ups = v.memories["O"].texts().iter().filter(|t| **t == "0").count();
        per_m[ups] += 1;
    }
    let mut r = ScenarioReport::new("spins");
    r.csv_key = "m".into();
    r.param("n", json!(n)).param("a", json!([num(a.re), num(a.im)])).param("b", json!([num(b.re), num(b.im)]));
    let mut worst: f64 = 0.0;
    for (m, w) in run.grouped.iter().enumerate() {
        worst = worst.max((w - binomial_weight(n, m, p)).abs());
        r.branches.push(if halves {
            BranchRow::exact(m.to_string(), *w, rational(per_m[m], 1u128 << n))
        } else {
            BranchRow::new(m.to_string(), *w)
        });
    }
    r.quantity("branches", json!(run.state.len()))
        .quantity("total_branches", json!(run.total_branches.to_string()))
        .quantity("zero_weight_branches", json!(run.zero_weight_branches.to_string()))
        .quantity("max_binomial_error", num(worst));
    r.assert("binomial_measure", worst <= 1e-12);
    if halves {
        let exact = per_m.iter().enumerate().all(|(m, &k)| k == binomial(n, m));
        r.assert("binomial_counts", exact);
    }
    Ok(r.seal())
}

/// Replays a case with explicit memory registers and returns the largest
/// amplitude difference to the hybrid result.
pub fn dense_oracle_distance(report: &CaseReport, config: &CaseConfig) -> Result<f64> {
    let d = config.amplitudes.len();
    let syms = symbol_names(d);
    let syms: Vec<&str> = syms.iter().map(String::as_str).collect();
    let dense = match report.case {
        1 | 2 => {
            let psi = system("S", &config.amplitudes)?;
            let a = ProjectorFamily::computational(&psi.layout()[0]);
            let (b, b_syms): (ProjectorFamily, Vec<String>) = if report.case == 1 {
                (a.clone(), syms.iter().map(|s| s.to_string()).collect())
            } else {
                let basis = match &config.second_basis {
                    Some(vs) => {
                        let labels = (0..vs.len()).map(|k| format!("b{k}"));
                        LocalBasis::new("S", labels.zip(vs.iter().cloned()).collect())?
                    }
                    None => fourier_basis("S", d)?,
                };
                (family_of(&basis)?, basis.labels().to_vec())
            };
            let b_syms: Vec<&str> = b_syms.iter().map(String::as_str).collect();
            let alph = [("O1", syms.as_slice()), ("O2", b_syms.as_slice())];
            let u = DenseObserverUniverse::new(psi, &alph, 1)?.observe("S", &a, "O1", &syms)?.observe("S", &b, "O2", &b_syms)?;
            (u, alph.map(|(o, a)| (o, a.iter().map(|s| s.to_string()).collect::<Vec<String>>())))
        }
        3 => {
            let psi = entangled_pair(&config.amplitudes)?;
            let f1 = ProjectorFamily::computational(&psi.layout()[0]);
            let f2 = ProjectorFamily::computational(&psi.layout()[1]);
            let alph = [("O1", syms.as_slice()), ("O2", syms.as_slice())];
            let u = DenseObserverUniverse::new(psi, &alph, 1)?.observe("S1", &f1, "O1", &syms)?.observe("S2", &f2, "O2", &syms)?;
            (u, alph.map(|(o, a)| (o, a.iter().map(|s| s.to_string()).collect::<Vec<String>>())))
        }
        c => return Err(Error::Config(format!("case must be 1, 2 or 3, got {c}"))),
    };
    let (universe, alph) = dense;
    let owned: Vec<(&str, Vec<&str>)> = alph.iter().map(|(o, a)| (*o, a.iter().map(String::as_str).collect())).collect();
    let alph: Vec<(&str, &[&str])> = owned.iter().map(|(o, a)| (*o, a.as_slice())).collect();
    report.state.to_dense(&alph, 1)?.distance(universe.state())
}

pub fn observers_report(case: u8, config: &CaseConfig) -> Result<ScenarioReport> {
    let rep = multi_observer_case(case, config)?;
    let mut r = ScenarioReport::new("observers");
    r.param("case", json!(case));
    let re: Vec<f64> = config.amplitudes.iter().map(|a| a.re).collect();
    let im: Vec<f64> = config.amplitudes.iter().map(|a| a.im).collect();
    r.param("amplitudes_re", nums(&re)).param("amplitudes_im", nums(&im));
    for i in 0..rep.state.len() {
        let v = rep.state.branch(i);
        let label: Vec<String> = v.memories.iter().map(|(o, m)| format!("{o}={}", m.texts().join(" "))).collect();
        r.branches.push(BranchRow::new(label.join(","), v.weight));
    }
    for (k, v) in &rep.quantities {
        r.quantity(k, num(*v));
    }
    r.assertions.extend(rep.assertions.iter().cloned());
    let oracle = dense_oracle_distance(&rep, config)?;
    r.quantity("dense_oracle_distance", num(oracle));
    r.assert("dense_oracle", oracle <= 1e-10);
    Ok(r.seal())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spins_two() {
        let h = C64::new(0.5f64.sqrt(), 0.0);
        let r = spins_report(2, h, h).unwrap();
        assert!(r.passed());
        let q: Vec<_> = r.branches.iter().map(|b| b.weight_rational.clone().unwrap()).collect();
        assert_eq!(q, vec!["1/4", "1/2", "1/4"]);
        assert_eq!(r.to_csv(), "m,weight,weight_rational\r\n0,0.25,1/4\r\n1,0.5,1/2\r\n2,0.25,1/4\r\n");
    }

    #[test]
    fn observer_cases_match_dense() {
        let amps = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        for case in 1..=3 {
            let r = observers_report(case, &CaseConfig { amplitudes: amps.clone(), second_basis: None }).unwrap();
            assert!(r.passed(), "case {case}: {:?}", r.failed_assertions());
        }
    }
}

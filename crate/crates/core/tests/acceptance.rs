//! Acceptance gate: one pass/fail line per criterion.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::PathBuf;
use std::time::Instant;

use worldsim::cli::{execute, load_config, parse_config};
use worldsim::observers::{multi_observer_case, repeated_spin_run, CaseConfig};
use worldsim::quantum::{canonical_correlation, info_uncertainty, uncertainty_bound};
use worldsim::scenarios::mzi::{closed_form_final, general_world_weights, pi_detector_weights};
use worldsim::scenarios::observing::binomial;
use worldsim::scenarios::{
    mirror_overlap, mzi_run, observers_report, stern_gerlach_run, von_neumann_run, MirrorMode, MziParams, PointerParams, Profile,
    SternGerlachParams,
};
use worldsim::tensor::{Register, StateVector, C64};
use worldsim::verify::{verify, SUITES};

type Outcome = worldsim::Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

fn sorted_weights(run: &worldsim::scenarios::MziRun) -> Vec<f64> {
    let mut w = run.worlds.weights();
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

fn suite(name: &str) -> worldsim::Result<(bool, String)> {
    let r = verify(name, 42)?;
    Ok((r.passed(), format!("{name}: {} trials, {} failures", r.trials, r.failures.len())))
}

fn c1() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = vec![];
    for theta in [0.0, PI / 3.0, PI / 2.0, PI] {
        let run = mzi_run(&MziParams::new(theta, MirrorMode::PI))?;
        let (h, v) = pi_detector_weights(theta);
        let want = ((theta / 2.0).cos().powi(2), (theta / 2.0).sin().powi(2));
        let err = (run.detector_weights.0 - want.0).abs().max((run.detector_weights.1 - want.1).abs());
        ok &= err <= 1e-12 && (h - want.0).abs() <= 1e-12 && (v - want.1).abs() <= 1e-12;
        if theta == 0.0 {
            ok &= run.worlds.len() == 1;
        }
        notes.push(format!("theta={theta:.4} err={err:.1e} worlds={}", run.worlds.len()));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 1.0;
    Ok((ok, format!("{}; {secs:.3}s", notes.join(", "))))
}

fn c2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for k in 0..16 {
        let theta = 2.0 * PI * k as f64 / 16.0;
        for (mode, dp) in [(MirrorMode::PS, false), (MirrorMode::PI, true), (MirrorMode::General { alpha: 0.6 }, true)] {
            let run = mzi_run(&MziParams { theta, mode, dp_detector: dp })?;
            ok &= run.worlds.len() == 4;
            for w in run.worlds.weights() {
                worst = worst.max((w - 0.25).abs());
            }
        }
    }
    ok &= worst <= 1e-12;
    Ok((ok, format!("16 theta x (PS, DP) -> 4 worlds, max |w - 1/4| = {worst:.1e}")))
}

fn c3() -> Outcome {
    let theta = PI / 3.0;
    let run = mzi_run(&MziParams::new(theta, MirrorMode::General { alpha: 0.6 }))?;
    let total = run.worlds.total_weight();
    let recon = run.worlds.reconstruct()?.distance(run.final_state())?;
    let closed = closed_form_final(0.6, theta)?.distance_up_to_phase(run.final_state())?;
    let overlap = run.worlds.max_overlap()?;
    let mut ok = run.worlds.len() == 7 && (total - 1.0).abs() <= 1e-10 && recon <= 1e-10 && closed <= 1e-10 && overlap <= 1e-10;

    let pi = sorted_weights(&mzi_run(&MziParams::new(theta, MirrorMode::PI))?);
    let ps = sorted_weights(&mzi_run(&MziParams::new(theta, MirrorMode::PS))?);
    let mut sweep_err: f64 = 0.0;
    let mut limit_err: f64 = 0.0;
    for i in 0..=10 {
        let alpha = i as f64 / 10.0;
        let r = mzi_run(&MziParams::new(theta, MirrorMode::General { alpha }))?;
        let mut got = sorted_weights(&r);
        let mut want: Vec<f64> = general_world_weights(alpha, theta).into_iter().filter(|w| *w > 1e-12).collect();
        want.sort_by(|a, b| b.total_cmp(a));
        got.resize(want.len().max(got.len()), 0.0);
        want.resize(got.len(), 0.0);
        sweep_err = sweep_err.max(got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        if 0 < i && i < 10 {
            ok &= r.worlds.len() == 7;
        }
        let limit = match i {
            0 => Some(&ps),
            10 => Some(&pi),
            _ => None,
        };
        if let Some(l) = limit {
            ok &= got.len() == l.len();
            limit_err = limit_err.max(got.iter().zip(l).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }
    ok &= sweep_err <= 1e-12 && limit_err <= 1e-12;
    Ok((
        ok,
        format!(
            "7 branches, |sum-1|={:.1e}, recon={recon:.1e}, closed form={closed:.1e}, overlap={overlap:.1e}; 11-alpha sweep err={sweep_err:.1e}, PI/PS limit err={limit_err:.1e}",
            (total - 1.0).abs()
        ),
    ))
}

/// `int |psi|^2 cos(k x) dx / int |psi|^2 dx` for `psi ~ exp(-x^2 / (2 a^2))`, trapezoid rule.
fn overlap_quadrature(a: f64, k: f64) -> f64 {
    let n = 20_000;
    let (lo, hi) = (-14.0 * a, 14.0 * a);
    let h = (hi - lo) / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        let x = lo + i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let p = (-x * x / (a * a)).exp();
        num += w * p * (k * x).cos();
        den += w * p;
    }
    num / den
}

fn c4() -> Outcome {
    let mut worst: f64 = 0.0;
    for (a, k) in [(1.0, 0.5), (0.3, 2.0), (2.0, 1.0), (1.5, 0.1), (0.7, 3.0)] {
        worst = worst.max((mirror_overlap(a, k)? - overlap_quadrature(a, k)).abs());
    }
    Ok((worst <= 1e-10, format!("5 (a,k) pairs, max |closed form - quadrature| = {worst:.1e}")))
}

fn c5() -> Outcome {
    let start = Instant::now();
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let report = worldsim::scenarios::spins_report(10, h, h)?;
    let exact = report
        .branches
        .iter()
        .enumerate()
        .all(|(m, b)| b.weight_rational.as_deref() == Some(reduced(binomial(10, m), 1024).as_str()));
    let p: f64 = 0.3;
    let run = repeated_spin_run(10, C64::new(p.sqrt(), 0.0), C64::new((1.0 - p).sqrt(), 0.0))?;
    let err = run
        .grouped
        .iter()
        .enumerate()
        .map(|(m, w)| (w - worldsim::scenarios::observing::binomial_weight(10, m, p)).abs())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Ok((exact && err <= 1e-12 && secs < 1.0, format!("C(10,m)/1024 exact={exact}, |a|^2=0.3 err={err:.1e}; {secs:.3}s")))
}

fn reduced(n: u128, d: u128) -> String {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    let g = gcd(n, d).max(1);
    if d / g == 1 { format!("{}", n / g) } else { format!("{}/{}", n / g, d / g) }
}

fn c6() -> Outcome {
    let z = C64::new(0.0, 0.0);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let bell = StateVector::new(vec![Register::qubit("A"), Register::qubit("B")], vec![h, z, z, h])?;
    let c = canonical_correlation(&bell, &["A"])?;
    let (ok, note) = suite("schmidt")?;
    let err = (c - 2f64.ln()).abs();
    Ok((ok && err <= 1e-10, format!("Bell |C - ln 2| = {err:.1e}; {note}")))
}

fn c7() -> Outcome {
    let start = Instant::now();
    let (ok, note) = suite("donald")?;
    let secs = start.elapsed().as_secs_f64();
    Ok((ok && secs < 30.0, format!("{note}; {secs:.3}s")))
}

fn c8() -> Outcome {
    let reg = Register::centered_grid("x", 4096, 1.0 / 64.0)?;
    let xs = reg.coordinates().expect("grid register");
    let psi = StateVector::from_fn(reg, |i| C64::new((-xs[i] * xs[i] / 2.0).exp(), 0.0))?;
    let u = info_uncertainty(&psi)?;
    let err = (u.sum() - uncertainty_bound()).abs();
    let (ok, note) = suite("uncertainty")?;
    Ok((ok && err <= 1e-3, format!("unit Gaussian |I_x + I_k + 1 + ln pi| = {err:.1e}; {note}")))
}

fn c9() -> Outcome {
    let (q, r) = PointerParams::grids(8, 0.0, 1.0, 64, 1.0)?;
    let p = PointerParams { q, r, phi: Profile::Uniform, eta: Profile::Delta { cell: 0 }, times: vec![1.0, 2.0, 3.0] };
    let run = von_neumann_run(&p)?;
    let i0 = run.info_q[0];
    let c0 = run.correlation[0].abs();
    let c_err = run.correlation[1..].iter().map(|c| (c + i0).abs()).fold(0.0, f64::max);
    let i_drift = run.info_q.iter().map(|i| (i - i0).abs()).fold(0.0, f64::max);
    let ln8 = (i0 + 8f64.ln()).abs();
    let ok = c0 <= 1e-10 && c_err <= 1e-10 && i_drift <= 1e-9 && ln8 <= 1e-10;
    Ok((ok, format!("C(0)={c0:.1e}, |C(t)+I_q(0)|={c_err:.1e}, I_q drift={i_drift:.1e}, |I_q(0)+ln 8|={ln8:.1e}")))
}

fn c10() -> Outcome {
    let cfg = CaseConfig { amplitudes: vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)], second_basis: None };
    let mut ok = true;
    let mut notes = vec![];
    let required: [&[&str]; 3] = [&["memories_agree", "no_second_split"], &["branch_count", "weights"], &["order_swap", "no_signalling"]];
    for case in 1..=3u8 {
        let r = multi_observer_case(case, &cfg)?;
        for name in required[case as usize - 1] {
            let pass = r.assertions.iter().any(|a| a.name == *name && a.pass);
            ok &= pass;
            notes.push(format!("case {case} {name}={pass}"));
        }
        ok &= r.assertions.iter().all(|a| a.pass);
        if case == 2 {
            let mut w = r.state.weights();
            w.sort_by(f64::total_cmp);
            let want = [0.18, 0.18, 0.32, 0.32];
            ok &= w.len() == 4 && w.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-12);
        }
    }
    Ok((ok, notes.join(", ")))
}

fn c11() -> Outcome {
    let (u_ok, u_note) = suite("unitary")?;
    let (p_ok, p_note) = suite("process1")?;
    let run = stern_gerlach_run(&SternGerlachParams::default())?;
    let f = run.recombined_fidelity.unwrap_or(0.0);
    Ok((u_ok && p_ok && f >= 1.0 - 1e-10, format!("{u_note}; {p_note}; Stern-Gerlach recombination fidelity 1-{:.1e}", 1.0 - f)))
}

fn c12() -> Outcome {
    let (ok, note) = suite("hybrid")?;
    let mut worst: f64 = 0.0;
    let mut all = ok;
    for amps in [vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)], vec![C64::new(0.5, 0.0), C64::new(0.5, 0.5), C64::new(0.5, -0.0)]] {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<C64> = amps.iter().map(|a| a / norm).collect();
        for case in 1..=3 {
            let r = observers_report(case, &CaseConfig { amplitudes: amps.clone(), second_basis: None })?;
            all &= r.passed();
            worst = worst.max(r.quantities["dense_oracle_distance"].as_f64().unwrap_or(f64::INFINITY));
        }
    }
    Ok((all && worst <= 1e-10, format!("{note}; dense oracle max distance {worst:.1e}")))
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn full_run() -> worldsim::Result<Vec<(String, String)>> {
    let mut out = vec![];
    for s in SUITES {
        out.push((format!("verify {s}"), verify(s, 42)?.to_json()));
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .map_err(|e| worldsim::Error::Config(e.to_string()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    paths.sort();
    for p in paths {
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        let text = std::fs::read_to_string(&p).map_err(|e| worldsim::Error::Config(e.to_string()))?;
        let mut table = parse_config(&name, &text).map_err(|e| worldsim::Error::Config(e.message))?;
        table.insert("seed".into(), toml::Value::Integer(42));
        let cfg = load_config(table).map_err(|e| worldsim::Error::Config(e.message))?;
        let r = execute(&cfg).map_err(|e| worldsim::Error::Config(e.message))?;
        if !r.passed {
            return Err(worldsim::Error::Config(format!("{name}: assertions failed")));
        }
        out.push((name, r.text));
    }
    Ok(out)
}

fn c13() -> Outcome {
    let a = full_run()?;
    let b = full_run()?;
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let bytes: usize = a.iter().map(|(_, t)| t.len()).sum();
    Ok((a.len() == b.len() && differing.is_empty(), format!("{} reports, {bytes} bytes, differing: {differing:?}", a.len())))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("MZI PI detector weights", c1),
        ("MZI PS and DP four worlds", c2),
        ("MZI general seven worlds", c3),
        ("mirror overlap quadrature", c4),
        ("binomial measures", c5),
        ("canonical correlation", c6),
        ("Donald inequality fuzz", c7),
        ("entropic uncertainty", c8),
        ("von Neumann pointer", c9),
        ("observer cases", c10),
        ("reversibility", c11),
        ("hybrid vs dense oracle", c12),
        ("determinism", c13),
    ];
    let mut failed = vec![];
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        println!("criterion {:2} {} {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 13 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

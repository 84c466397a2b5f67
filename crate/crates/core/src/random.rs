//! Seeded generators for states, unitaries, densities and observables.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::quantum::ProjectorFamily;
use crate::tensor::{layout_dim, DensityMatrix, Register, StateVector, C64};

pub type TrialRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed of trial `trial` under suite seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed.wrapping_add(trial))
}

pub fn gaussian_c<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) / 2f64.sqrt()
}

pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian_c(rng))
}

/// Uniformly distributed pure state over `layout`.
pub fn random_state<R: Rng>(rng: &mut R, layout: Vec<Register>) -> StateVector {
    let amps = (0..layout_dim(&layout)).map(|_| gaussian_c(rng)).collect();
    StateVector::normalized(layout, amps).expect("Gaussian vector is nonzero")
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R` removed.
pub fn haar_unitary<R: Rng>(rng: &mut R, d: usize) -> DMatrix<C64> {
    let qr = ginibre(rng, d, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= ph;
    }
    q
}

/// Random mixed state of the given rank (clamped to the dimension).
pub fn random_density<R: Rng>(rng: &mut R, registers: Vec<Register>, rank: usize) -> DensityMatrix {
    let d = layout_dim(&registers);
    let w = ginibre(rng, d, rank.clamp(1, d));
    let m = &w * w.adjoint();
    let tr = m.trace();
    DensityMatrix::new(registers, m / tr).expect("Wishart matrix is a valid density")
}

/// Observable with `blocks` eigenspaces of random sizes in a Haar-random basis.
pub fn random_family<R: Rng>(rng: &mut R, registers: &[&str], d: usize, blocks: usize) -> ProjectorFamily {
    let blocks = blocks.clamp(1, d);
    let u = haar_unitary(rng, d);
    let mut cols: Vec<usize> = (0..d).collect();
    cols.shuffle(rng);
    // every block gets one column, the rest are scattered at random
    let mut owner: Vec<usize> = (0..d).map(|i| if i < blocks { i } else { rng.gen_range(0..blocks) }).collect();
    owner.shuffle(rng);
    let ps = (0..blocks)
        .map(|b| {
            let mut m = DMatrix::zeros(d, d);
            for (i, &c) in cols.iter().enumerate() {
                if owner[i] == b {
                    let v = u.column(c);
                    m += v * v.adjoint();
                }
            }
            (format!("e{b}"), b as f64, m)
        })
        .collect();
    ProjectorFamily::from_projectors(registers, ps).expect("columns of a unitary give a projector family")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::unitarity_defect;

    #[test]
    fn haar_is_unitary() {
        let mut r = rng(7);
        for d in 1..6 {
            assert!(unitarity_defect(&haar_unitary(&mut r, d)) < 1e-12);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_state(&mut rng(3), vec![Register::qubit("q")]);
        let b = random_state(&mut rng(3), vec![Register::qubit("q")]);
        assert_eq!(a, b);
        assert_ne!(trial_seed(42, 0), trial_seed(42, 1));
    }

    #[test]
    fn random_family_is_complete() {
        let f = random_family(&mut rng(1), &["q"], 5, 3);
        assert_eq!(f.len(), 3);
        assert_eq!(f.projectors().iter().map(|p| p.multiplicity).sum::<usize>(), 5);
    }
}

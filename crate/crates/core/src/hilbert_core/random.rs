use ndarray::{Array1, Array2};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, MeasurementBasis, PureState};
use crate::error::{Error, Result};
use crate::C64;

/// Deterministic generator for stream `stream` of master seed `seed`.
///
/// Streams of the same seed are independent, so parallel workers can each
/// own one and results do not depend on scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state on `n` qubits.
pub fn haar_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    let d = 1usize << n;
    let amps = Array1::from_shape_fn(d, |_| complex_gaussian(rng));
    PureState::normalized(n, amps)
}

/// Tensor product of independent Haar-random qubits.
pub fn random_product_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    let qubits: Vec<[C64; 2]> = (0..n)
        .map(|_| {
            let (a, b) = (complex_gaussian(rng), complex_gaussian(rng));
            let s = 1.0 / (a.norm_sqr() + b.norm_sqr()).sqrt();
            [a * s, b * s]
        })
        .collect();
    let amps = Array1::from_shape_fn(1usize << n, |x| {
        qubits
            .iter()
            .enumerate()
            .fold(C64::new(1.0, 0.0), |acc, (i, q)| acc * q[(x >> i) & 1])
    });
    PureState::normalized(n, amps)
}

/// Haar-random `d x d` unitary (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Array2<C64> {
    let mut q = Array2::from_shape_fn((d, d), |_| complex_gaussian(rng));
    // Gram-Schmidt with positive norms already fixes the QR phases
    for k in 0..d {
        for j in 0..k {
            let proj: C64 = (0..d).map(|i| q[[i, j]].conj() * q[[i, k]]).sum();
            for i in 0..d {
                let v = q[[i, j]];
                q[[i, k]] -= proj * v;
            }
        }
        let nrm = (0..d).map(|i| q[[i, k]].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..d {
            q[[i, k]] /= nrm;
        }
    }
    q
}

/// `count` independent Born-rule outcomes of measuring `rho` in `basis`.
pub fn born_sample<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    basis: &MeasurementBasis,
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let p = basis.probabilities(rho.matrix())?;
    sample_outcomes(&p, count, rng)
}

pub fn sample_outcomes<R: Rng + ?Sized>(p: &[f64], count: usize, rng: &mut R) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(p)
        .map_err(|e| Error::InvalidArgument(format!("bad outcome distribution: {e}")))?;
    Ok((0..count).map(|_| dist.sample(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert_core::linalg::{dagger, max_abs};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(7, 3).gen();
        let b: u64 = stream_rng(7, 3).gen();
        let c: u64 = stream_rng(7, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = stream_rng(1, 0);
        let u = haar_unitary(8, &mut rng);
        let g = dagger(&u.view()).dot(&u);
        assert!(max_abs(&(g - Array2::<C64>::eye(8))) < 1e-12);
    }

    #[test]
    fn born_frequencies_follow_probabilities() {
        let mut rng = stream_rng(2, 0);
        let psi = PureState::new(
            1,
            Array1::from(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]),
        )
        .unwrap();
        let out = born_sample(&psi.density(), &MeasurementBasis::Computational, 20000, &mut rng).unwrap();
        let ones = out.iter().filter(|&&k| k == 1).count() as f64 / 20000.0;
        assert!((ones - 0.64).abs() < 0.02);
    }
}

//! Seeded generators for test instances and multi-start perturbations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hermitian::{CMatrix, HermitianMatrix};
use crate::moment::DensityMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(normal(rng), normal(rng))
}

/// GUE-like Hermitian matrix `(G + G*)/2` with standard complex normal `G`.
pub fn hermitian<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
    HermitianMatrix::new((&g + g.adjoint()).scale(0.5)).expect("symmetrized input is Hermitian")
}

pub fn real_symmetric<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| normal(rng));
    HermitianMatrix::from_real(&(&g + g.transpose()).scale(0.5)).expect("symmetric input")
}

/// `G G*` for an `n × rank` complex Gaussian `G`.
pub fn psd<R: Rng>(n: usize, rank: usize, rng: &mut R) -> HermitianMatrix {
    let g = CMatrix::from_fn(n, rank, |_, _| complex_normal(rng));
    HermitianMatrix::new(&g * g.adjoint()).expect("Gram matrix is Hermitian")
}

/// Uniformly distributed complex unit vector.
pub fn unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Random density matrix of full rank `s`.
pub fn density<R: Rng>(s: usize, rng: &mut R) -> DensityMatrix {
    let g = CMatrix::from_fn(s, s, |_, _| complex_normal(rng));
    let m = &g * g.adjoint();
    let tr: f64 = (0..s).map(|i| m[(i, i)].re).sum();
    DensityMatrix::new(m.scale(1.0 / tr)).expect("normalized Gram matrix")
}

/// Complex unit vector whose squared moduli are each at most `1/2`.
pub fn spread_unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    assert!(n >= 2);
    if n == 2 {
        // rejection would never terminate: both weights must be exactly 1/2
        return (0..2).map(|_| Complex64::from_polar(0.5_f64.sqrt(), rng.random_range(0.0..std::f64::consts::TAU))).collect();
    }
    loop {
        let v = unit_vector(n, rng);
        if v.iter().all(|z| z.norm_sqr() <= 0.5) {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_vectors_in_every_dimension() {
        let mut rng = seeded(3);
        for n in 2..8 {
            let v = spread_unit_vector(n, &mut rng);
            let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(v.iter().all(|z| z.norm_sqr() <= 0.5 + 1e-12));
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a = hermitian(3, &mut seeded(11));
        let b = hermitian(3, &mut seeded(11));
        assert_eq!(a, b);
    }
}

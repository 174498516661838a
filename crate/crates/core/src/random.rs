//! Seeded random matrices.
//!
//! Every random routine takes an explicit generator. [`stream_rng`] derives
//! independent streams from one root seed by counter, which is how restart
//! loops and batch checks stay reproducible.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::{ComplexMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for sub-stream `stream` of the root `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| gaussian_complex(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = ginibre(n, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// `U diag(values) U†` for a Haar-random `U`.
pub fn random_with_spectrum<R: Rng + ?Sized>(factors: &[usize], values: &[f64], rng: &mut R) -> ComplexMatrix {
    let n: usize = factors.iter().product();
    assert_eq!(values.len(), n, "spectrum length must match dimension");
    let u = haar_unitary(n, rng);
    let mut scaled = u.clone();
    for (k, &v) in values.iter().enumerate() {
        for i in 0..n {
            scaled[(i, k)] *= v;
        }
    }
    let data = &scaled * u.adjoint();
    ComplexMatrix::new(factors.to_vec(), data)
        .expect("factor product matches")
        .hermitian_part()
}

/// Hermitian matrix `(G + G†)/2` with Ginibre `G`.
pub fn random_hermitian<R: Rng + ?Sized>(factors: &[usize], rng: &mut R) -> ComplexMatrix {
    let n: usize = factors.iter().product();
    ComplexMatrix::new(factors.to_vec(), ginibre(n, rng))
        .expect("factor product matches")
        .hermitian_part()
}

/// Random density operator `G G† / tr[G G†]` (Hilbert-Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(factors: &[usize], rng: &mut R) -> ComplexMatrix {
    let n: usize = factors.iter().product();
    let g = ginibre(n, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    ComplexMatrix::new(factors.to_vec(), w / C64::new(tr, 0.0))
        .expect("factor product matches")
        .hermitian_part()
}

/// Random pure state `|ψ⟩⟨ψ|`.
pub fn random_pure<R: Rng + ?Sized>(factors: &[usize], rng: &mut R) -> ComplexMatrix {
    let n: usize = factors.iter().product();
    let psi: Vec<C64> = (0..n).map(|_| gaussian_complex(rng)).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi: Vec<C64> = psi.into_iter().map(|z| z / norm).collect();
    ComplexMatrix::outer(factors, &psi).expect("vector length matches")
}

/// Random probability vector of length `n` with entries bounded away from 0.
pub fn random_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = seeded_rng(3);
        let u = haar_unitary(5, &mut rng);
        let err = (&u * u.adjoint() - DMatrix::<C64>::identity(5, 5)).camax();
        assert!(err < 1e-13);
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = stream_rng(7, 0).random();
        let b: u64 = stream_rng(7, 1).random();
        let a2: u64 = stream_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }

    #[test]
    fn random_density_is_state() {
        let mut rng = seeded_rng(11);
        let rho = random_density(&[3, 3], &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-13);
        assert!(rho.min_eigenvalue().unwrap() > -1e-13);
    }

    #[test]
    fn prescribed_spectrum() {
        let mut rng = seeded_rng(1);
        let m = random_with_spectrum(&[4], &[-1.0, -0.5, 0.25, 1.0], &mut rng);
        let ev = m.eigenvalues().unwrap();
        for (a, b) in ev.iter().zip([-1.0, -0.5, 0.25, 1.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}

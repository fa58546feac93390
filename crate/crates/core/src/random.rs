//! Seeded random matrix ensembles.
//!
//! All draws come from `ChaCha8Rng`. Trial `i` of a run seeded with `s` uses
//! the stream `ChaCha8Rng::seed_from_u64(s)` advanced to stream id `i`, so any
//! single trial can be reproduced without replaying the ones before it.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMat;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn complex_gaussian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// GUE-style Hermitian matrix `(A + A*)/2` with unit-variance complex Gaussian `A`.
pub fn gue<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let a = complex_gaussian(rng, n);
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Haar-distributed unitary: QR of a complex Gaussian with the phases of
/// `diag(R)` pushed back into `Q`.
pub fn haar_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let a = complex_gaussian(rng, n);
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let m = d.norm();
        if m > 0.0 {
            let phase = d / m;
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Hermitian matrix with prescribed spectrum in a Haar-random eigenbasis.
pub fn with_spectrum<R: Rng>(rng: &mut R, spectrum: &[f64]) -> CMat {
    let n = spectrum.len();
    let u = haar_unitary(rng, n);
    let d = CMat::from_diagonal(&DVector::from_iterator(
        n,
        spectrum.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    let h = &u * d * u.adjoint();
    (&h + h.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Spectrum of `n_low` points uniform in `low` and `n - n_low` uniform in `high`.
pub fn gapped_spectrum<R: Rng>(
    rng: &mut R,
    n: usize,
    n_low: usize,
    low: (f64, f64),
    high: (f64, f64),
) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = if i < n_low { low } else { high };
            a + (b - a) * rng.random::<f64>()
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_defect, unitary_defect};

    #[test]
    fn ensembles_have_their_symmetry() {
        let mut rng = trial_rng(7, 3);
        assert!(hermitian_defect(&gue(&mut rng, 9)) < 1e-15);
        assert!(unitary_defect(&haar_unitary(&mut rng, 9)) < 1e-13);
    }

    #[test]
    fn streams_are_reproducible() {
        let a = gue(&mut trial_rng(1, 5), 4);
        let b = gue(&mut trial_rng(1, 5), 4);
        let c = gue(&mut trial_rng(1, 6), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

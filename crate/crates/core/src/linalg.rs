//! Dense complex linear algebra shared by the matrix and plane-wave models.
//!
//! Everything is built on `nalgebra::DMatrix<Complex64>`. The Hermitian
//! eigensolver is nalgebra's implicit-shift QR; this module only adds ascending
//! ordering, a deterministic eigenvector gauge and residual diagnostics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{input_err, Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `AB - BA`.
pub fn commutator(a: &CMat, b: &CMat) -> Result<CMat> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(input_err!(
            "commutator needs equal square shapes, got {:?} and {:?}",
            a.shape(),
            b.shape()
        ));
    }
    Ok(a * b - b * a)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `‖A - A*‖_F / max(‖A‖_F, tiny)`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    frobenius(&(a - a.adjoint())) / scale
}

/// `‖A A* - I‖_F`.
pub fn unitary_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    frobenius(&(a * a.adjoint() - CMat::identity(n, n)))
}

/// Eigenpairs of a Hermitian matrix, ascending.
///
/// Column `j` of `vectors` is the eigenvector for `values[j]`. Each column is
/// rotated so that its largest-modulus entry (lowest index on ties) is real and
/// positive, which fixes the phase freedom. Inside degenerate clusters the
/// basis is whatever the solver produced after a stable sort; identities are
/// basis independent, per-vector quantities are not.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> CVec {
        self.vectors.column(j).into_owned()
    }

    /// Largest `‖A v - λ v‖` over all pairs.
    pub fn max_residual(&self, a: &CMat) -> f64 {
        let av = a * &self.vectors;
        (0..self.dim())
            .map(|j| (av.column(j) - self.vectors.column(j) * Complex64::new(self.values[j], 0.0)).norm())
            .fold(0.0, f64::max)
    }

    /// `‖V* V - I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let g = self.vectors.adjoint() * &self.vectors - CMat::identity(n, n);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral projector onto the given eigenvector indices.
    pub fn projector(&self, indices: &[usize]) -> CMat {
        let n = self.vectors.nrows();
        let mut p = CMat::zeros(n, n);
        for &j in indices {
            let v = self.vectors.column(j);
            p += &v * v.adjoint();
        }
        p
    }
}

/// Diagonalize a Hermitian matrix.
pub fn eigh(a: &CMat) -> Result<Eigensystem> {
    if !a.is_square() {
        return Err(input_err!("eigh needs a square matrix, got {:?}", a.shape()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Eigensystem {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        });
    }
    let defect = hermitian_defect(a);
    if defect > 1e-12 {
        return Err(input_err!("matrix is not Hermitian (relative defect {defect:.3e})"));
    }
    let sym = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let scale = frobenius(&sym);
    let eig = sym
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 50 * n.max(10))
        .ok_or_else(|| {
            Error::Numerical(format!(
                "Hermitian eigensolver did not converge (dim {n}, Frobenius norm {scale:.3e}, \
                 max |diag| {:.3e})",
                sym.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max)
            ))
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let norm = col.norm();
        col /= Complex64::new(norm, 0.0);
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(Eigensystem { values, vectors })
}

fn fix_phase(v: &mut CVec) {
    let mut best = 0;
    let mut best_mod = -1.0;
    for (i, z) in v.iter().enumerate() {
        // prefer the lowest index among entries equal up to rounding
        if z.norm() > best_mod * (1.0 + 1e-12) {
            best = i;
            best_mod = z.norm();
        }
    }
    if best_mod > 0.0 {
        let phase = v[best].conj() / best_mod;
        *v *= phase;
    }
}

/// `⟨u, v⟩ = Σ conj(u_i) v_i`.
pub fn inner(u: &CVec, v: &CVec) -> Complex64 {
    u.dotc(v)
}

/// Relative residual used throughout: `|lhs - rhs| / max(1, |lhs|, |rhs|)`.
pub fn relative_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs())
}

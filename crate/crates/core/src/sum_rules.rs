//! Transition weights `w_{kj}` for `G = e^{-iq·x}` and the sum rules they obey.
//!
//! The weights come from overlaps of shifted coefficient vectors, so they never
//! touch the commutator formulas; the sum rules compare them against closed
//! forms in `|q|` and `‖q·∇φ_j‖²`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::report::IdentityResidualReport;
use crate::torus::{kinetic_terms, norm_sq, SpectrumResult};

/// Eigenvectors with more than this mass near the box faces are not interior.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-12;
pub const ROW_SUM_TOLERANCE: f64 = 1e-8;
pub const M1_TOLERANCE: f64 = 1e-7;
pub const M2_TOLERANCE: f64 = 1e-6;
pub const PERID_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    /// Integer dual-lattice vector `m`; the physical vector is `Q m`.
    pub m: Vec<i64>,
    pub q: Vec<f64>,
    /// `entries[(k, j)] = w_{kj}`
    pub entries: DMatrix<f64>,
    /// Eigenvector indices whose coupling through `G` and `H` stays inside
    /// the basis.
    pub interior_set: Vec<usize>,
    pub boundary_mass: Vec<f64>,
}

impl OverlapMatrix {
    pub fn q_sq(&self) -> f64 {
        norm_sq(&self.q)
    }
    pub fn is_interior(&self, j: usize) -> bool {
        self.interior_set.binary_search(&j).is_ok()
    }
    pub fn row_sum(&self, k: usize) -> f64 {
        self.entries.row(k).sum()
    }
    pub fn column_sum(&self, j: usize) -> f64 {
        self.entries.column(j).sum()
    }
    pub fn symmetry_defect(&self) -> f64 {
        (&self.entries - self.entries.transpose()).amax()
    }
    /// Largest deviation of interior row or column sums from 1.
    pub fn stochastic_defect(&self) -> f64 {
        self.interior_set
            .iter()
            .map(|&j| (self.row_sum(j) - 1.0).abs().max((self.column_sum(j) - 1.0).abs()))
            .fold(0.0, f64::max)
    }
}

fn negate(m: &[i64]) -> Vec<i64> {
    m.iter().map(|x| -x).collect()
}

/// `w_{kj} = ½(|⟨e^{-iq·x}φ_j, φ_k⟩|² + |⟨e^{iq·x}φ_j, φ_k⟩|²)`.
pub fn overlap_matrix(spec: &SpectrumResult, m: &[i64]) -> Result<OverlapMatrix> {
    let d = spec.geometry().d();
    if m.len() != d || m.iter().all(|&x| x == 0) {
        return Err(input_err!("q must be a nonzero integer vector of length {d}, got {m:?}"));
    }
    let v = &spec.vectors;
    let basis = &spec.basis;
    let s = v.adjoint() * basis.shift_coefficients(v, m);
    let t = v.adjoint() * basis.shift_coefficients(v, &negate(m));
    let n = spec.len();
    let entries = DMatrix::from_fn(n, n, |k, j| 0.5 * (s[(k, j)].norm_sqr() + t[(k, j)].norm_sqr()));

    let kmax = spec.model.potential.max_harmonic(d);
    let margin: Vec<i64> = kmax.iter().zip(m).map(|(k, x)| k + x.abs()).collect();
    let shell: Vec<bool> = basis.modes().iter().map(|n| !basis.is_interior(n, &margin)).collect();
    let boundary_mass: Vec<f64> = (0..n)
        .map(|j| {
            v.column(j)
                .iter()
                .zip(&shell)
                .filter(|(_, &s)| s)
                .map(|(c, _)| c.norm_sqr())
                .sum()
        })
        .collect();
    let interior_set: Vec<usize> = (0..n).filter(|&j| boundary_mass[j] <= BOUNDARY_MASS_LIMIT).collect();
    if interior_set.is_empty() {
        return Err(input_err!(
            "no eigenvector stays clear of the basis boundary for q = {m:?}; increase the cutoff"
        ));
    }
    Ok(OverlapMatrix {
        m: m.to_vec(),
        q: spec.geometry().dual_vector(m),
        entries,
        interior_set,
        boundary_mass,
    })
}

/// `‖q·∇φ_j‖² = Σ |c_n|² (q·p_n)²`
pub fn directional_kinetic(spec: &SpectrumResult, q: &[f64], j: usize) -> f64 {
    let geom = spec.geometry();
    spec.basis
        .modes()
        .iter()
        .zip(spec.vectors.column(j).iter())
        .map(|(n, c)| {
            let p = geom.momentum(n, spec.k());
            let qp: f64 = q.iter().zip(&p).map(|(a, b)| a * b).sum();
            c.norm_sqr() * qp * qp
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub j: usize,
    pub eigenvalue: f64,
    /// `Σ_k (λ_k - λ_j) w_{kj}`, target `α|q|²`.
    pub m1: f64,
    pub m1_target: f64,
    /// `Σ_k λ_k w_{kj} - α|q|²`, target `λ_j`.
    pub m1a: f64,
    pub m2_lhs: f64,
    /// `α²(|q|⁴ + 4‖q·∇φ_j‖²)`
    pub m2_rhs: f64,
    pub row_sum: f64,
    pub pass: bool,
}

pub fn moment_sum_rules(w: &OverlapMatrix, spec: &SpectrumResult, j: usize) -> Result<MomentReport> {
    if !w.is_interior(j) {
        return Err(input_err!(
            "index {j} is not interior for q = {:?} (boundary mass {:.3e})",
            w.m,
            w.boundary_mass.get(j).copied().unwrap_or(f64::NAN)
        ));
    }
    let alpha = spec.alpha();
    let lam = &spec.eigenvalues;
    let col = w.entries.column(j);
    let q2 = w.q_sq();
    let m1: f64 = col.iter().zip(lam).map(|(wk, lk)| (lk - lam[j]) * wk).sum();
    let m1_target = alpha * q2;
    let m1a = col.iter().zip(lam).map(|(wk, lk)| lk * wk).sum::<f64>() - m1_target;
    let m2_lhs: f64 = col.iter().zip(lam).map(|(wk, lk)| (lk - lam[j]).powi(2) * wk).sum();
    let m2_rhs = alpha * alpha * (q2 * q2 + 4.0 * directional_kinetic(spec, &w.q, j));
    let row_sum = w.column_sum(j);
    let scale1 = m1_target.max(1.0);
    let pass = (m1 - m1_target).abs() <= M1_TOLERANCE * scale1
        && (m1a - lam[j]).abs() <= M1_TOLERANCE * scale1.max(lam[j].abs())
        && (m2_lhs - m2_rhs).abs() <= M2_TOLERANCE * m2_rhs.max(1.0)
        && (row_sum - 1.0).abs() <= ROW_SUM_TOLERANCE;
    Ok(MomentReport {
        j,
        eigenvalue: lam[j],
        m1,
        m1_target,
        m1a,
        m2_lhs,
        m2_rhs,
        row_sum,
        pass,
    })
}

/// Moment checks for every interior index, in index order.
pub fn moment_table(w: &OverlapMatrix, spec: &SpectrumResult) -> Result<Vec<MomentReport>> {
    w.interior_set.par_iter().map(|&j| moment_sum_rules(w, spec, j)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerIdReport {
    pub n: usize,
    pub z: f64,
    pub identity: IdentityResidualReport,
    /// `z` lies in `[λ_N, λ_{N+1}]`.
    pub z_in_gap: bool,
    /// The double sum is `≤ 0` (only asserted when `z_in_gap`).
    pub rhs_nonpositive: bool,
}

impl PerIdReport {
    pub fn pass(&self) -> bool {
        self.identity.pass && (!self.z_in_gap || self.rhs_nonpositive)
    }
}

/// Left and right sides of the periodic master identity for `J = {λ_1..λ_N}`
/// (zero-based indices `0..n`).
pub fn perid_residual(spec: &SpectrumResult, m: &[i64], n: usize, z: f64) -> Result<PerIdReport> {
    let w = overlap_matrix(spec, m)?;
    if n == 0 || n >= spec.len() {
        return Err(input_err!("N = {n} must lie in 1..{}", spec.len()));
    }
    if let Some(j) = (0..n).find(|&j| !w.is_interior(j)) {
        return Err(input_err!("eigenvector {j} of J is not resolved by the basis for q = {m:?}"));
    }
    let alpha = spec.alpha();
    let lam = &spec.eigenvalues;
    let q2 = w.q_sq();
    let mut lhs = 0.0;
    for j in 0..n {
        let s = z - lam[j];
        let gk = directional_kinetic(spec, &w.q, j);
        lhs += alpha * q2 * s * s - s * alpha * alpha * (q2 * q2 + 4.0 * gk);
    }
    let mut rhs = 0.0;
    for j in 0..n {
        for k in n..spec.len() {
            rhs += (z - lam[j]) * (z - lam[k]) * (lam[k] - lam[j]) * w.entries[(k, j)];
        }
    }
    let z_in_gap = z >= lam[n - 1] && z <= lam[n];
    let scale = 1e-12 * rhs.abs().max(1.0);
    Ok(PerIdReport {
        n,
        z,
        identity: IdentityResidualReport::equality("periodic-master-identity", lhs, rhs, PERID_TOLERANCE),
        z_in_gap,
        rhs_nonpositive: rhs <= scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticSplit {
    pub j: usize,
    /// `Σ_ℓ ‖∂_ℓ φ_j‖²` recovered from the second moments along each axis.
    pub from_sum_rules: f64,
    /// `T_j` computed directly.
    pub direct: f64,
}

/// Recover `T_j` from the second-moment sum rules for `q = q_ℓ ê_ℓ`.
pub fn kinetic_from_sum_rules(spec: &SpectrumResult, j: usize) -> Result<KineticSplit> {
    let d = spec.geometry().d();
    let alpha = spec.alpha();
    let mut total = 0.0;
    for l in 0..d {
        let mut m = vec![0; d];
        m[l] = 1;
        let w = overlap_matrix(spec, &m)?;
        let r = moment_sum_rules(&w, spec, j)?;
        let ql2 = w.q_sq();
        total += (r.m2_lhs / (alpha * alpha) - ql2 * ql2) / (4.0 * ql2);
    }
    Ok(KineticSplit {
        j,
        from_sum_rules: total,
        direct: kinetic_terms(spec, j)?.t,
    })
}

/// `w` is unchanged when every eigenvector is multiplied by a phase.
pub fn with_rephased_vectors(spec: &SpectrumResult, phases: &[f64]) -> SpectrumResult {
    let mut out = spec.clone();
    for (j, th) in phases.iter().enumerate().take(out.len()) {
        let f = Complex64::from_polar(1.0, *th);
        for c in out.vectors.column_mut(j).iter_mut() {
            *c *= f;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{PotentialSpec, TorusGeometry, TorusModel};

    fn free_1d(n: usize) -> SpectrumResult {
        TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::zero(), 1.0)
            .with_half_width(n)
            .solve()
            .unwrap()
    }

    fn mathieu() -> SpectrumResult {
        TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::cosine(1, 1.0), 1.0)
            .with_half_width(20)
            .solve()
            .unwrap()
    }

    #[test]
    fn free_weights_are_shift_structured() {
        let s = free_1d(6);
        let w = overlap_matrix(&s, &[1]).unwrap();
        // eigenvector j = 0 is the constant mode; it couples to e^{±ix}
        let couplings: Vec<f64> = (0..s.len()).filter(|&k| w.entries[(k, 0)] > 1e-14).map(|k| s.eigenvalues[k]).collect();
        assert_eq!(couplings.len(), 2);
        assert!(couplings.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert!(w.entries.iter().all(|&x| x >= 0.0));
        assert_eq!(w.symmetry_defect(), 0.0);
    }

    #[test]
    fn free_moments_closed_form() {
        let s = free_1d(8);
        let w = overlap_matrix(&s, &[1]).unwrap();
        for r in moment_table(&w, &s).unwrap() {
            let n2 = r.eigenvalue;
            assert!((r.m1 - 1.0).abs() < 1e-12, "{r:?}");
            assert!((r.m2_lhs - (1.0 + 4.0 * n2)).abs() < 1e-10, "{r:?}");
            assert!(r.pass);
        }
        let wneg = overlap_matrix(&s, &[-1]).unwrap();
        assert_eq!((&w.entries - &wneg.entries).amax(), 0.0);
    }

    #[test]
    fn mathieu_rows_and_moments() {
        let s = mathieu();
        let w = overlap_matrix(&s, &[1]).unwrap();
        assert!(w.interior_set.len() >= 10);
        assert!(w.stochastic_defect() <= 1e-8);
        for r in moment_table(&w, &s).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn perid_free_and_mathieu() {
        let s = free_1d(8);
        let lam = &s.eigenvalues;
        let r = perid_residual(&s, &[1], 3, 2.5).unwrap();
        assert!(r.pass() && r.z_in_gap, "{r:?}");
        let r = perid_residual(&s, &[1], 3, lam[2]).unwrap();
        assert!(r.rhs_nonpositive);
        let s = mathieu();
        let lam = &s.eigenvalues;
        let r = perid_residual(&s, &[1], 4, 0.5 * (lam[3] + lam[4])).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(r.identity.relative_residual <= 1e-5);
    }

    #[test]
    fn kinetic_split_matches_direct() {
        let s = TorusModel::new(
            TorusGeometry::new(vec![2.0 * std::f64::consts::PI, 4.0]).unwrap(),
            PotentialSpec::cosine(2, 0.8),
            1.0,
        )
        .with_half_width(8)
        .solve()
        .unwrap();
        for j in 0..4 {
            let k = kinetic_from_sum_rules(&s, j).unwrap();
            assert!((k.from_sum_rules - k.direct).abs() <= 1e-7 * k.direct.max(1.0), "{k:?}");
        }
    }

    #[test]
    fn phase_invariance_is_exact() {
        let s = mathieu();
        let phases: Vec<f64> = (0..s.len()).map(|j| 0.37 * j as f64).collect();
        let t = with_rephased_vectors(&s, &phases);
        let a = overlap_matrix(&s, &[1]).unwrap();
        let b = overlap_matrix(&t, &[1]).unwrap();
        assert!((&a.entries - &b.entries).amax() <= 1e-15);
    }

    #[test]
    fn rejects_boundary_and_zero_q() {
        let s = free_1d(3);
        assert!(overlap_matrix(&s, &[0]).is_err());
        let w = overlap_matrix(&s, &[1]).unwrap();
        let last = s.len() - 1;
        assert!(moment_sum_rules(&w, &s, last).is_err());
    }
}

//! Round spheres `S^d_r ⊂ ℝ^{d+1}`: exact Laplace-Beltrami spectra as a test
//! bed for the bounded-mean-curvature results.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bounds::{lambda_next_bound, reilly_bound, SpectrumPrefix};
use crate::constants::{l_classical, unit_sphere_area_exact};
use crate::error::{input_err, Result};
use crate::lattice::Rational;
use crate::report::BoundReport;
use crate::riesz::{monotone_ratio_curve, riesz_mean, CurveParams, MonotoneCurve};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    pub d: usize,
    pub r: f64,
    /// Highest spherical-harmonic degree kept.
    pub levels: usize,
}

impl SphereSpec {
    pub fn new(d: usize, r: f64, levels: usize) -> Result<Self> {
        if d == 0 || !(r > 0.0) || !r.is_finite() || levels == 0 {
            return Err(input_err!("need d ≥ 1, r > 0, levels ≥ 1; got d = {d}, r = {r}, levels = {levels}"));
        }
        Ok(SphereSpec { d, r, levels })
    }
    /// Mean curvature `d/r`.
    pub fn h(&self) -> f64 {
        self.d as f64 / self.r
    }
    pub fn volume(&self) -> Result<f64> {
        Ok(unit_sphere_area_exact(self.d)?.value() * self.r.powi(self.d as i32))
    }
    /// `l(l+d-1)/r²`
    pub fn level_eigenvalue(&self, l: usize) -> f64 {
        (l * (l + self.d - 1)) as f64 / (self.r * self.r)
    }
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of degree-`l` spherical harmonics on `S^d`.
pub fn harmonic_multiplicity(d: usize, l: usize) -> u128 {
    let (d, l) = (d as u128, l as u128);
    binom(l + d, d) - if l >= 2 { binom(l + d - 2, d) } else { 0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSpectrum {
    pub spec: SphereSpec,
    /// `(λ_l, multiplicity)` for `l = 0..=levels`.
    pub levels: Vec<(f64, u128)>,
    /// Flattened with multiplicity, ascending.
    pub eigenvalues: Vec<f64>,
}

impl SphereSpectrum {
    /// First eigenvalue left out by the truncation.
    pub fn truncation(&self) -> f64 {
        self.spec.level_eigenvalue(self.spec.levels + 1)
    }
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub fn sphere_spectrum(spec: SphereSpec) -> Result<SphereSpectrum> {
    let levels: Vec<(f64, u128)> = (0..=spec.levels)
        .map(|l| (spec.level_eigenvalue(l), harmonic_multiplicity(spec.d, l)))
        .collect();
    let total: u128 = levels.iter().map(|l| l.1).sum();
    if total > 20_000_000 {
        return Err(crate::error::Error::Capacity(format!("{total} eigenvalues requested")));
    }
    let eigenvalues = levels
        .iter()
        .flat_map(|&(v, m)| std::iter::repeat_n(v, m as usize))
        .collect();
    Ok(SphereSpectrum {
        spec,
        levels,
        eigenvalues,
    })
}

/// `(4/d) Σ_{j≤N} (z-λ_j)(λ_j + h²/4) - R₂(z) ≥ 0` for `z ∈ [λ_N, λ_{N+1}]`.
pub fn geom_inequality_slack(s: &SphereSpectrum, n: usize, z: f64, tolerance: f64) -> Result<BoundReport> {
    if n == 0 || n >= s.len() {
        return Err(input_err!("N = {n} must lie in 1..{}", s.len()));
    }
    let (lo, hi) = (s.eigenvalues[n - 1], s.eigenvalues[n]);
    if z < lo || z > hi {
        return Err(input_err!("z = {z} outside [λ_N, λ_(N+1)] = [{lo}, {hi}]"));
    }
    let d = s.spec.d as f64;
    let h2 = s.spec.h().powi(2);
    let bound: f64 = 4.0 / d * s.eigenvalues[..n].iter().map(|l| (z - l) * (l + h2 / 4.0)).sum::<f64>();
    let r2 = riesz_mean(&s.eigenvalues, 2.0, z);
    Ok(BoundReport::new(
        "geometric-inequality",
        format!("d={} r={} N={n} z={z}", s.spec.d, s.spec.r),
        bound,
        r2,
        tolerance * bound.abs().max(r2).max(1.0),
    ))
}

/// Deterministic `(N, z)` samples: `N` cycles through `1..=n_max` and `z`
/// sweeps the gap `[λ_N, λ_{N+1}]`, endpoints included.
pub fn geom_inequality_samples(s: &SphereSpectrum, n_max: usize, count: usize, tolerance: f64) -> Result<Vec<BoundReport>> {
    if n_max == 0 || n_max >= s.len() {
        return Err(input_err!("N_max = {n_max} must lie in 1..{}", s.len()));
    }
    (0..count)
        .map(|i| {
            let n = 1 + i % n_max;
            let t = ((i / n_max) % 5) as f64 / 4.0;
            let (lo, hi) = (s.eigenvalues[n - 1], s.eigenvalues[n]);
            geom_inequality_slack(s, n, lo + t * (hi - lo), tolerance)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReillyRecord {
    pub n: usize,
    pub lambda_next: f64,
    pub reilly: BoundReport,
    /// `(1+4/d)λ̄_N + h²/d`
    pub weaker: BoundReport,
    /// Largest zero of the quadratic polynomial bound.
    pub quadratic: BoundReport,
    /// `bound/λ_{N+1}`
    pub quality: f64,
    /// The quadratic and weaker bounds decided in exact arithmetic. Many
    /// sphere cases are equalities, where the float slack can land a few
    /// ulps below zero.
    pub quadratic_exact: bool,
    pub weaker_exact: bool,
}

impl ReillyRecord {
    pub fn pass(&self) -> bool {
        self.reilly.pass && self.weaker.pass && self.quadratic.pass && self.quadratic_exact && self.weaker_exact
    }
}

/// Exact verdicts `(quadratic, weaker)` for `λ_{N+1}` on `S^d`. Both sides
/// scale as `r⁻²`, so the unit sphere decides every radius. There `λ_j` are
/// the integers `l(l+d-1)`, `g = h²/d = d` and `V = 0`.
fn exact_next_verdicts(s: &SphereSpectrum, n: usize) -> (bool, bool) {
    let d = s.spec.d as i128;
    let unit: Vec<i128> = s
        .levels
        .iter()
        .enumerate()
        .flat_map(|(l, &(_, m))| {
            let l = l as i128;
            std::iter::repeat_n(l * (l + d - 1), m as usize)
        })
        .take(n + 1)
        .collect();
    let nq = Rational::from_integer(n as i128);
    let mean = Rational::from_integer(unit[..n].iter().sum::<i128>()) / nq;
    let mean_sq = Rational::from_integer(unit[..n].iter().map(|x| x * x).sum::<i128>()) / nq;
    let k = Rational::from_integer(1) + Rational::new(4, d);
    let g = Rational::from_integer(d);
    let b = (k + 1) * mean + g;
    let c = k * mean_sq + g * mean;
    let x = Rational::from_integer(unit[n]);
    // x ≤ B/2 + √(B²/4 - C)  ⇔  x ≤ B/2  or  x² - Bx + C ≤ 0
    let quadratic = x * 2 <= b || x * x - b * x + c <= Rational::zero();
    let weaker = x <= k * mean + g;
    (quadratic, weaker)
}

pub fn reilly_sphere_check(s: &SphereSpectrum, n_max: usize, tolerance: f64) -> Result<Vec<ReillyRecord>> {
    if n_max == 0 || n_max >= s.len() {
        return Err(input_err!("N_max = {n_max} must lie in 1..{}", s.len()));
    }
    let h = s.spec.h();
    let d = s.spec.d;
    let prefix = SpectrumPrefix::new(s.eigenvalues[..=n_max].to_vec(), d, h * h / d as f64, h * h / 4.0)?;
    (1..=n_max)
        .map(|n| {
            let actual = s.eigenvalues[n];
            let reilly = reilly_bound(n, d, h, Some(actual), tolerance)?;
            let next = lambda_next_bound(&prefix, n, tolerance)?;
            let (quadratic_exact, weaker_exact) = exact_next_verdicts(s, n);
            Ok(ReillyRecord {
                n,
                lambda_next: actual,
                quality: reilly.bound_value / actual,
                reilly,
                weaker: next.weaker,
                quadratic: next.strong,
                quadratic_exact,
                weaker_exact,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereWeyl {
    pub lambda: f64,
    pub count: f64,
    pub weyl: f64,
    pub ratio: f64,
}

/// `N(λ)/(L^cl_{0,d}·Vol·λ^{d/2})` at the top computed level, counting
/// eigenvalues `≤ λ`.
pub fn sphere_weyl_ratio(s: &SphereSpectrum) -> Result<SphereWeyl> {
    let lambda = s.spec.level_eigenvalue(s.spec.levels);
    let count = s.eigenvalues.iter().filter(|&&l| l <= lambda).count() as f64;
    let weyl = l_classical(0.0, s.spec.d)? * s.spec.volume()? * lambda.powf(s.spec.d as f64 / 2.0);
    Ok(SphereWeyl {
        lambda,
        count,
        weyl,
        ratio: count / weyl,
    })
}

/// Monotone ratio with `τ = h²/4` and ceiling `L^cl_{2,d}·Vol(S^d_r)`.
pub fn sphere_monotone_curve(s: &SphereSpectrum, z_grid: &[f64], tolerance: f64) -> Result<MonotoneCurve> {
    let mut p = CurveParams::new(s.spec.h().powi(2) / 4.0, s.spec.d);
    p.volume = Some(s.spec.volume()?);
    p.truncation = Some(s.truncation());
    p.tolerance = tolerance;
    monotone_ratio_curve(&s.eigenvalues, z_grid, p)
}

//! Riesz means `R_σ(z) = Σ (z - λ_j)₊^σ`, the monotone ratio
//! `R_σ(z)/(z+τ)^{σ+d/2}` and the Legendre-transform bound on partial sums.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{z0, SpectrumPrefix};
use crate::constants::l_classical;
use crate::error::{input_err, Result};
use crate::report::BoundReport;

/// Relative drop between neighbouring grid points tolerated as round-off.
pub const MONOTONE_TOLERANCE: f64 = 1e-10;
/// Fraction of the truncation energy up to which a computed spectrum is
/// trusted to give exact Riesz means.
pub const TRUNCATION_FRACTION: f64 = 0.8;

/// `Σ_{λ_j < z} (z - λ_j)^σ`; for `σ = 0` the number of eigenvalues strictly
/// below `z`.
pub fn riesz_mean(eigenvalues: &[f64], sigma: f64, z: f64) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l < z)
        .map(|&l| if sigma == 0.0 { 1.0 } else { (z - l).powf(sigma) })
        .sum()
}

/// `(R₀, R₁, R₂)` in one pass.
pub fn riesz_triple(eigenvalues: &[f64], z: f64) -> (f64, f64, f64) {
    eigenvalues
        .iter()
        .filter(|&&l| l < z)
        .fold((0.0, 0.0, 0.0), |(a, b, c), &l| {
            let s = z - l;
            (a + 1.0, b + s, c + s * s)
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub z: f64,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r_sigma: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub z_left: f64,
    pub z_right: f64,
    pub relative_drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCurve {
    pub sigma: f64,
    pub tau: f64,
    pub d: usize,
    pub points: Vec<CurvePoint>,
    /// `L^cl_{σ,d}·Vol(M)` when a volume was supplied.
    pub ceiling: Option<f64>,
    /// Largest `z` at which the truncated spectrum is trusted.
    pub valid_up_to: f64,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
    pub ceiling_excess: Option<f64>,
}

impl MonotoneCurve {
    pub fn monotone(&self) -> bool {
        self.violations.is_empty()
    }
    pub fn within_ceiling(&self) -> bool {
        self.ceiling_excess.is_none_or(|e| e <= self.tolerance)
    }
    pub fn pass(&self) -> bool {
        self.monotone() && self.within_ceiling()
    }
    pub fn max_ratio(&self) -> f64 {
        self.trusted().map(|p| p.ratio).fold(0.0, f64::max)
    }
    fn trusted(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(move |p| p.z <= self.valid_up_to)
    }
}

/// Inputs of [`monotone_ratio_curve`] besides the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveParams {
    pub sigma: f64,
    pub tau: f64,
    pub d: usize,
    /// Volume of the manifold, enabling the ceiling check.
    pub volume: Option<f64>,
    /// Energy above which eigenvalues are missing from the input, if any.
    pub truncation: Option<f64>,
    pub tolerance: f64,
}

impl CurveParams {
    pub fn new(tau: f64, d: usize) -> Self {
        CurveParams {
            sigma: 2.0,
            tau,
            d,
            volume: None,
            truncation: None,
            tolerance: MONOTONE_TOLERANCE,
        }
    }
}

pub fn monotone_ratio_curve(eigenvalues: &[f64], z_grid: &[f64], params: CurveParams) -> Result<MonotoneCurve> {
    let CurveParams {
        sigma,
        tau,
        d,
        volume,
        truncation,
        tolerance,
    } = params;
    if z_grid.is_empty() {
        return Err(input_err!("empty z grid"));
    }
    if z_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(input_err!("z grid must be strictly ascending"));
    }
    if d == 0 || !(sigma >= 0.0) {
        return Err(input_err!("need d ≥ 1 and σ ≥ 0"));
    }
    if let Some(bad) = z_grid.iter().find(|&&z| z + tau <= 0.0) {
        return Err(input_err!("z + τ = {} ≤ 0 at z = {bad}; the ratio is undefined there", bad + tau));
    }
    let power = sigma + d as f64 / 2.0;
    let points: Vec<CurvePoint> = z_grid
        .par_iter()
        .map(|&z| {
            let (r0, r1, r2) = riesz_triple(eigenvalues, z);
            let r_sigma = riesz_mean(eigenvalues, sigma, z);
            CurvePoint {
                z,
                r0,
                r1,
                r2,
                r_sigma,
                ratio: r_sigma / (z + tau).powf(power),
            }
        })
        .collect();
    let valid_up_to = truncation.map_or(f64::INFINITY, |t| TRUNCATION_FRACTION * t);
    let trusted: Vec<&CurvePoint> = points.iter().filter(|p| p.z <= valid_up_to).collect();
    let violations = trusted
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let drop = (w[0].ratio - w[1].ratio) / w[0].ratio.max(f64::MIN_POSITIVE);
            (drop > tolerance).then(|| Violation {
                index: i,
                z_left: w[0].z,
                z_right: w[1].z,
                relative_drop: drop,
            })
        })
        .collect();
    let ceiling = match volume {
        Some(v) => Some(l_classical(sigma, d)? * v),
        None => None,
    };
    let ceiling_excess = ceiling.map(|c| {
        let m = trusted.iter().map(|p| p.ratio).fold(0.0, f64::max);
        (m - c) / c
    });
    Ok(MonotoneCurve {
        sigma,
        tau,
        d,
        points,
        ceiling,
        valid_up_to,
        tolerance,
        violations,
        ceiling_excess,
    })
}

/// Upper bound on `Σ_{k ≤ [w]} μ_k + (w-[w]) μ_{[w]+1}` with `μ = λ + τ`:
/// `z⁰_n/((1+2/d) n^{2/d}) · w^{1+2/d}` for real `w ≥ n`.
pub fn legendre_check(prefix: &SpectrumPrefix, n: usize, w: f64, tolerance: f64) -> Result<BoundReport> {
    if !(w >= n as f64) {
        return Err(input_err!("w = {w} must be ≥ n = {n}"));
    }
    let whole = w.floor() as usize;
    let frac = w - whole as f64;
    let needed = if frac > 0.0 { whole + 1 } else { whole };
    if needed > prefix.len() {
        return Err(input_err!("need {needed} eigenvalues, prefix has {}", prefix.len()));
    }
    let d = prefix.d as f64;
    let (_, z0n) = z0(prefix, n)?;
    let mu = prefix.shifted(needed);
    let mut actual: f64 = mu[..whole].iter().sum();
    if frac > 0.0 {
        actual += frac * mu[whole];
    }
    let bound = z0n / ((1.0 + 2.0 / d) * (n as f64).powf(2.0 / d)) * w.powf(1.0 + 2.0 / d);
    Ok(BoundReport::new(
        "legendre-partial-sum",
        format!("n={n} w={w} d={} tau={}", prefix.d, prefix.tau),
        bound,
        actual,
        tolerance * bound.abs().max(1.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::z0_and_ratio_bounds;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn free_2d(max: i64) -> Vec<f64> {
        let mut v: Vec<f64> = (-max..=max)
            .flat_map(|m| (-max..=max).map(move |n| (m * m + n * n) as f64))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn direct_sums() {
        let e = [0.0, 1.0, 1.0];
        assert_eq!(riesz_mean(&e, 2.0, 2.0), 6.0);
        assert_eq!(riesz_mean(&e, 2.0, -1.0), 0.0);
        assert_eq!(riesz_mean(&e, 0.0, 1.0), 1.0);
        assert_eq!(riesz_mean(&e, 0.0, 1.0 + 1e-12), 3.0);
        assert_eq!(riesz_triple(&e, 2.0), (3.0, 4.0, 6.0));
    }

    #[test]
    fn derivative_of_r2_is_twice_r1() {
        let e = free_2d(15);
        let h = 1e-4;
        let mut checked = 0;
        for i in 0..200 {
            let z = 0.37 + 0.91 * i as f64;
            if e.iter().any(|l| (l - z).abs() < 10.0 * h) {
                continue;
            }
            let fd = (riesz_mean(&e, 2.0, z + h) - riesz_mean(&e, 2.0, z - h)) / (2.0 * h);
            let r1 = riesz_mean(&e, 1.0, z);
            assert!((fd - 2.0 * r1).abs() <= 1e-6 * r1.max(1.0), "z = {z}");
            checked += 1;
            if checked == 100 {
                break;
            }
        }
        assert_eq!(checked, 100);
    }

    #[test]
    fn free_torus_ratio_monotone_under_ceiling() {
        let e = free_2d(16);
        let grid: Vec<f64> = (0..500).map(|i| 0.5 + 199.5 * i as f64 / 499.0).collect();
        let mut p = CurveParams::new(0.5, 2);
        p.volume = Some(4.0 * PI * PI);
        p.truncation = Some(256.0);
        let c = monotone_ratio_curve(&e, &grid, p).unwrap();
        assert!(c.pass(), "{:?} {:?}", c.violations, c.ceiling_excess);
        assert!((c.ceiling.unwrap() - PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn circle_ceiling() {
        let mut e: Vec<f64> = (-40i64..=40).map(|n| (n * n) as f64).collect();
        e.sort_by(f64::total_cmp);
        let grid: Vec<f64> = (1..400).map(|i| i as f64 * 2.5).collect();
        let mut p = CurveParams::new(0.25, 1);
        p.volume = Some(2.0 * PI);
        p.truncation = Some(1600.0);
        let c = monotone_ratio_curve(&e, &grid, p).unwrap();
        assert!((c.ceiling.unwrap() - 16.0 / 15.0).abs() < 1e-14);
        assert!(c.pass());
    }

    #[test]
    fn truncation_guard_and_domain() {
        let e = [1.0];
        let grid = [2.0, 10.0, 100.0];
        let mut p = CurveParams::new(0.0, 2);
        p.truncation = Some(5.0);
        let c = monotone_ratio_curve(&e, &grid, p).unwrap();
        assert_eq!(c.valid_up_to, 4.0);
        assert!(c.monotone());
        p.truncation = None;
        assert!(!monotone_ratio_curve(&e, &grid, p).unwrap().monotone());
        assert!(monotone_ratio_curve(&e, &[-1.0, 1.0], CurveParams::new(0.5, 2)).is_err());
    }

    #[test]
    fn legendre_reduces_to_mean_bound() {
        let e = free_2d(8);
        let p = SpectrumPrefix::new(e[..60].to_vec(), 2, 1.0, 0.5).unwrap();
        for (n, k) in [(1, 1), (5, 5), (5, 12), (10, 40)] {
            let l = legendre_check(&p, n, k as f64, 1e-12).unwrap();
            let m = z0_and_ratio_bounds(&p, n, k, 1e-12).unwrap();
            let scale = k as f64 * (1.0 + 2.0 / 2.0) / (k as f64 / n as f64);
            // k·μ̄_k ≤ k^{1+2/d} z⁰/((1+2/d) n^{2/d}) is the mean bound times k/(1+2/d)
            assert!((l.slack - m.mean_bound.slack * k as f64 / 2.0).abs() < 1e-9 * scale.max(l.bound_value));
            assert!(l.pass);
        }
        assert!(legendre_check(&p, 5, 12.5, 1e-12).unwrap().pass);
        assert!(legendre_check(&p, 5, 4.0, 1e-12).is_err());
        let sphere = SpectrumPrefix::new(vec![0.0, 2.0, 2.0, 2.0], 2, 4.0, 0.0).unwrap();
        let r = legendre_check(&sphere, 1, 1.0, 1e-12).unwrap();
        assert_eq!((r.bound_value, r.actual_value), (0.0, Some(0.0)));
    }

    proptest! {
        #[test]
        fn shift_reduction_is_exact(
            mut e in proptest::collection::vec(0.0f64..50.0, 1..30),
            tau in 0.0f64..3.0,
            z in 0.1f64..80.0,
            d in 1usize..4,
        ) {
            e.sort_by(f64::total_cmp);
            let shifted: Vec<f64> = e.iter().map(|l| l + tau).collect();
            let a = monotone_ratio_curve(&e, &[z], CurveParams::new(tau, d)).unwrap();
            let b = monotone_ratio_curve(&shifted, &[z + tau], CurveParams::new(0.0, d)).unwrap();
            let (x, y) = (a.points[0].ratio, b.points[0].ratio);
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
        }

        #[test]
        fn riesz_means_monotone_and_convex(
            e in proptest::collection::vec(-10.0f64..10.0, 1..20),
            z in -12.0f64..12.0,
            h in 0.01f64..2.0,
            sigma in prop_oneof![Just(1.0), Just(2.0), Just(3.0)],
        ) {
            let (a, b, c) = (riesz_mean(&e, sigma, z - h), riesz_mean(&e, sigma, z), riesz_mean(&e, sigma, z + h));
            prop_assert!(a <= b + 1e-12 && b <= c + 1e-12);
            prop_assert!(a + c - 2.0 * b >= -1e-9 * c.max(1.0));
        }
    }
}

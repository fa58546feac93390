//! Lieb-Thirring bounds for `α(-Δ) + V` on a flat torus: the monotone
//! `α`-scan, the sharp bound with classical constant, the semiclassical
//! limit and the band-averaged form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::l_classical;
use crate::error::{input_err, Error, Result};
use crate::report::BoundReport;
use crate::riesz::riesz_mean;
use crate::torus::{PotentialSpec, SpectrumResult, TorusGeometry, TorusModel};

/// Relative tolerance for the monotone scan.
pub const SCAN_TOLERANCE: f64 = 1e-8;
/// Relative convergence target of the phase-space integral.
pub const QUADRATURE_TOLERANCE: f64 = 1e-7;
const QUADRATURE_MAX_POINTS: usize = 1 << 22;
/// Relative drift between two box sizes tolerated in the semiclassical check.
pub const CUTOFF_DRIFT_TOLERANCE: f64 = 1e-6;

/// Box half-width so that the largest free energy `α|Qn|²` retained is at
/// least four times the energy window `e_max - inf V` above the bottom.
pub fn half_width_for(model: &TorusModel, alpha: f64, e_max: f64) -> usize {
    let geom = &model.geometry;
    let q_min = geom.dual_basis().into_iter().fold(f64::INFINITY, f64::min);
    let window = (e_max - model.potential.inf_v(geom)).max(0.0) / alpha;
    let harmonic = model.potential.max_harmonic(geom.d()).into_iter().max().unwrap_or(0) as usize;
    let k = (2.0 * window.sqrt() / q_min).ceil() as usize;
    k + 2 * harmonic + 2
}

/// Spectrum at coupling `α`, exact for Riesz means at energies `≤ e_max`.
pub fn spectrum_at(model: &TorusModel, alpha: f64, e_max: f64) -> Result<SpectrumResult> {
    if !(alpha > 0.0) {
        return Err(input_err!("α must be positive, got {alpha}"));
    }
    let n = half_width_for(model, alpha, e_max);
    model.clone().with_alpha(alpha).with_half_width(n).solve()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub value: f64,
    pub points_per_axis: Vec<usize>,
    pub last_relative_change: f64,
}

/// `∫_M (V(x) - e)₋^p dx` by the trapezoid rule on uniform grids, doubled
/// from eight points per harmonic until successive values agree.
pub fn negative_part_integral(pot: &PotentialSpec, geom: &TorusGeometry, e: f64, p: f64) -> Result<QuadratureInfo> {
    let d = geom.d();
    let vol = geom.volume();
    let mut points: Vec<usize> = pot
        .max_harmonic(d)
        .iter()
        .map(|&k| (8 * k.max(1) as usize).max(16))
        .collect();
    let eval = |pts: &[usize]| {
        let s = pot.sample(geom, pts);
        let n = s.len() as f64;
        vol * s.iter().map(|v| (e - v).max(0.0).powf(p)).sum::<f64>() / n
    };
    let mut prev = eval(&points);
    loop {
        for x in points.iter_mut() {
            *x *= 2;
        }
        let next = eval(&points);
        let change = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
        if next == prev || change <= QUADRATURE_TOLERANCE {
            return Ok(QuadratureInfo {
                value: next,
                points_per_axis: points,
                last_relative_change: if next == prev { 0.0 } else { change },
            });
        }
        if points.iter().product::<usize>() * (1 << d) > QUADRATURE_MAX_POINTS {
            return Err(Error::Numerical(format!(
                "phase-space integral not converged: relative change {change:.3e} on grid {points:?}"
            )));
        }
        prev = next;
    }
}

/// `L^cl_{σ,d} ∫ (V - e)₋^{σ+d/2}`
pub fn classical_integral(model: &TorusModel, e: f64, sigma: f64) -> Result<(f64, QuadratureInfo)> {
    let d = model.geometry.d();
    let q = negative_part_integral(&model.potential, &model.geometry, e, sigma + d as f64 / 2.0)?;
    Ok((l_classical(sigma, d)? * q.value, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub alpha: f64,
    /// Evaluation energy `z - s·α·gd/4`.
    pub energy: f64,
    pub r_sigma: f64,
    /// `α^{d/2} R_σ(energy)`
    pub value: f64,
    pub half_width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanViolation {
    pub alpha_small: f64,
    pub alpha_large: f64,
    pub relative_rise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaScan {
    pub z: f64,
    pub sigma: f64,
    pub d: usize,
    /// `gd/4`
    pub shift_rate: f64,
    /// Multiplier on the shift rate, `1` for the theorem.
    pub shift_factor: f64,
    /// Sorted by decreasing `α`.
    pub points: Vec<ScanPoint>,
    /// `L^cl ∫(V - z)₋^{σ+d/2}`, the `α → 0` limit.
    pub rhs_limit: Option<f64>,
    pub tolerance: f64,
    pub violations: Vec<ScanViolation>,
    pub limit_excess: Option<f64>,
}

impl AlphaScan {
    pub fn monotone(&self) -> bool {
        self.violations.is_empty()
    }
    pub fn pass(&self) -> bool {
        self.monotone() && self.limit_excess.is_none_or(|e| e <= self.tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub shift_factor: f64,
    pub tolerance: f64,
    pub with_limit: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            shift_factor: 1.0,
            tolerance: SCAN_TOLERANCE,
            with_limit: true,
        }
    }
}

/// `α ↦ α^{d/2} R_σ(z - s·α·gd/4)` over the grid, checked to be
/// nonincreasing in `α`.
pub fn lt_monotone_scan(model: &TorusModel, z: f64, sigma: f64, alphas: &[f64], opts: ScanOptions) -> Result<AlphaScan> {
    if alphas.is_empty() {
        return Err(input_err!("empty α grid"));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(input_err!("α must be positive, got {a}"));
    }
    if !(sigma >= 0.0) {
        return Err(input_err!("σ must be nonnegative"));
    }
    let geom = &model.geometry;
    let d = geom.d();
    let rate = geom.shift_rate();
    let half_d = d as f64 / 2.0;
    let mut points: Vec<ScanPoint> = alphas
        .par_iter()
        .map(|&alpha| {
            let energy = z - opts.shift_factor * rate * alpha;
            let spec = spectrum_at(model, alpha, energy)?;
            let r_sigma = riesz_mean(&spec.eigenvalues, sigma, energy);
            Ok(ScanPoint {
                alpha,
                energy,
                r_sigma,
                value: alpha.powf(half_d) * r_sigma,
                half_width: spec.model.half_widths[0],
            })
        })
        .collect::<Result<_>>()?;
    points.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    let violations = points
        .windows(2)
        .filter_map(|w| {
            // w[0] has the larger α and must not exceed w[1]
            let rise = (w[0].value - w[1].value) / w[1].value.max(f64::MIN_POSITIVE);
            (w[0].value > w[1].value && rise > opts.tolerance).then(|| ScanViolation {
                alpha_small: w[1].alpha,
                alpha_large: w[0].alpha,
                relative_rise: rise,
            })
        })
        .collect();
    let rhs_limit = if opts.with_limit {
        Some(classical_integral(model, z, sigma)?.0)
    } else {
        None
    };
    let limit_excess = rhs_limit.map(|l| {
        let m = points.iter().map(|p| p.value).fold(0.0, f64::max);
        (m - l) / l.max(f64::MIN_POSITIVE)
    });
    Ok(AlphaScan {
        z,
        sigma,
        d,
        shift_rate: rate,
        shift_factor: opts.shift_factor,
        points,
        rhs_limit,
        tolerance: opts.tolerance,
        violations,
        limit_excess: limit_excess.map(|e| if e.is_nan() { 0.0 } else { e }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtBound {
    pub alpha: f64,
    pub z: f64,
    pub sigma: f64,
    /// `R_σ(z)` at coupling `α`.
    pub lhs: f64,
    /// `α^{-d/2} L^cl ∫ (V - (z + α gd/4))₋^{σ+d/2}`
    pub rhs: f64,
    pub quadrature: QuadratureInfo,
    pub report: BoundReport,
}

pub fn lt_rhs_and_slack(model: &TorusModel, z: f64, alpha: f64, sigma: f64, tolerance: f64) -> Result<LtBound> {
    let spec = spectrum_at(model, alpha, z)?;
    lt_bound_for(&spec, z, sigma, tolerance)
}

fn lt_bound_for(spec: &SpectrumResult, z: f64, sigma: f64, tolerance: f64) -> Result<LtBound> {
    let alpha = spec.alpha();
    let d = spec.geometry().d();
    let lhs = riesz_mean(&spec.eigenvalues, sigma, z);
    let (c, quadrature) = classical_integral(&spec.model, z + spec.geometry().shift_rate() * alpha, sigma)?;
    let rhs = alpha.powf(-(d as f64) / 2.0) * c;
    let report = BoundReport::new(
        "lieb-thirring",
        format!("alpha={alpha} z={z} sigma={sigma}"),
        rhs,
        lhs,
        tolerance * rhs.abs().max(1.0),
    );
    Ok(LtBound {
        alpha,
        z,
        sigma,
        lhs,
        rhs,
        quadrature,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalPoint {
    pub alpha: f64,
    /// `α^{d/2} R_σ(z)`
    pub value: f64,
    /// `value - limit`
    pub gap: f64,
    pub relative_gap: f64,
    pub cutoff_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalReport {
    pub z: f64,
    pub sigma: f64,
    pub limit: f64,
    pub points: Vec<SemiclassicalPoint>,
    pub gap_monotone: bool,
    pub final_relative_gap: f64,
    pub threshold: f64,
}

impl SemiclassicalReport {
    pub fn pass(&self) -> bool {
        self.gap_monotone && self.final_relative_gap <= self.threshold
    }
}

/// `α^{d/2} R_σ(z) → L^cl ∫ (V - z)₋^{σ+d/2}` along a decreasing sequence.
pub fn semiclassical_limit_check(
    model: &TorusModel,
    z: f64,
    sigma: f64,
    alphas: &[f64],
    threshold: f64,
) -> Result<SemiclassicalReport> {
    if alphas.is_empty() || alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(input_err!("α sequence must be nonempty and strictly decreasing"));
    }
    let (limit, _) = classical_integral(model, z, sigma)?;
    let d = model.geometry.d() as f64;
    let points: Vec<SemiclassicalPoint> = alphas
        .par_iter()
        .map(|&alpha| {
            let spec = spectrum_at(model, alpha, z)?;
            let r = riesz_mean(&spec.eigenvalues, sigma, z);
            let wider = model
                .clone()
                .with_alpha(alpha)
                .with_half_width(spec.model.half_widths[0] * 5 / 4 + 1)
                .solve()?;
            let r_wide = riesz_mean(&wider.eigenvalues, sigma, z);
            let drift = (r_wide - r).abs() / r_wide.abs().max(f64::MIN_POSITIVE);
            if drift > CUTOFF_DRIFT_TOLERANCE {
                return Err(Error::Numerical(format!(
                    "R_σ changes by {drift:.3e} when the box grows at α = {alpha}; cutoff insufficient"
                )));
            }
            let value = alpha.powf(d / 2.0) * r;
            Ok(SemiclassicalPoint {
                alpha,
                value,
                gap: value - limit,
                relative_gap: (value - limit).abs() / limit.abs().max(f64::MIN_POSITIVE),
                cutoff_drift: drift,
            })
        })
        .collect::<Result<_>>()?;
    let gap_monotone = points.windows(2).all(|w| w[1].gap.abs() <= w[0].gap.abs());
    let final_relative_gap = points.last().map_or(f64::NAN, |p| p.relative_gap);
    Ok(SemiclassicalReport {
        z,
        sigma,
        limit,
        points,
        gap_monotone,
        final_relative_gap,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandAverageReport {
    pub alpha: f64,
    pub z: f64,
    pub sigma: f64,
    pub k_points: usize,
    pub bands: usize,
    /// Band averages `⟨λ_j⟩` in sorted-index order.
    pub band_means: Vec<f64>,
    /// Index pairs `(j, j+1)` that touch at some `k`.
    pub crossings: Vec<usize>,
    /// `Σ (z - ⟨λ_j⟩)₊^σ ≤ avg_k Σ (z - λ_j(k))₊^σ`
    pub convexity: BoundReport,
    /// `Σ (z - ⟨λ_j⟩)₊^σ ≤ α^{-d/2} L^cl ∫(V - (z + α gd/4))₋^{σ+d/2}`
    pub combined: BoundReport,
    /// Worst per-`k` slack of the Lieb-Thirring bound.
    pub worst_pointwise_slack: f64,
}

impl BandAverageReport {
    pub fn pass(&self) -> bool {
        self.convexity.pass && self.combined.pass && self.worst_pointwise_slack >= -self.combined.tolerance
    }
}

/// Uniform grid of `m^d` quasimomenta in the Brillouin cell, containing 0.
pub fn quasimomentum_grid(geom: &TorusGeometry, m: usize) -> Vec<Vec<f64>> {
    let q = geom.dual_basis();
    let d = geom.d();
    let total = m.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|l| {
                    let i = idx % m;
                    idx /= m;
                    let k = q[l] * i as f64 / m as f64;
                    if k >= q[l] / 2.0 {
                        k - q[l]
                    } else {
                        k
                    }
                })
                .collect()
        })
        .collect()
}

/// Band-averaged Lieb-Thirring bound; bands are tracked by sorted index.
pub fn band_average_check(
    model: &TorusModel,
    z: f64,
    alpha: f64,
    sigma: f64,
    k_per_axis: usize,
    tolerance: f64,
) -> Result<BandAverageReport> {
    if k_per_axis == 0 {
        return Err(input_err!("need at least one k point per axis"));
    }
    let ks = quasimomentum_grid(&model.geometry, k_per_axis);
    // the box must hold every state below z at every k
    let e_max = z + model.geometry.shift_rate() * alpha;
    let n = half_width_for(model, alpha, e_max) + 1;
    let spectra: Vec<Vec<f64>> = ks
        .par_iter()
        .map(|k| {
            model
                .clone()
                .with_alpha(alpha)
                .with_half_width(n)
                .with_k(k.clone())
                .solve()
                .map(|s| s.eigenvalues)
        })
        .collect::<Result<_>>()?;
    let bands = spectra
        .iter()
        .map(|e| e.iter().filter(|&&l| l < z).count())
        .max()
        .unwrap_or(0)
        .max(1);
    let nk = ks.len() as f64;
    let band_means: Vec<f64> = (0..bands)
        .map(|j| spectra.iter().map(|e| e[j]).sum::<f64>() / nk)
        .collect();
    let crossings: Vec<usize> = (0..bands.saturating_sub(1))
        .filter(|&j| {
            spectra
                .iter()
                .any(|e| (e[j + 1] - e[j]).abs() <= 1e-8 * e[j].abs().max(1.0))
        })
        .collect();
    let averaged = riesz_mean(&band_means, sigma, z);
    let per_k: Vec<f64> = spectra.iter().map(|e| riesz_mean(&e[..bands], sigma, z)).collect();
    let mean_of_lhs = per_k.iter().sum::<f64>() / nk;
    let d = model.geometry.d() as f64;
    let (c, _) = classical_integral(model, e_max, sigma)?;
    let rhs = alpha.powf(-d / 2.0) * c;
    let tol = tolerance * rhs.abs().max(1.0);
    let inputs = format!("alpha={alpha} z={z} sigma={sigma} k_points={}", ks.len());
    let worst = per_k.iter().map(|l| rhs - l).fold(f64::INFINITY, f64::min);
    Ok(BandAverageReport {
        alpha,
        z,
        sigma,
        k_points: ks.len(),
        bands,
        band_means,
        crossings,
        convexity: BoundReport::new(
            "band-convexity",
            inputs.clone(),
            mean_of_lhs,
            averaged,
            tolerance * mean_of_lhs.abs().max(1.0),
        ),
        combined: BoundReport::new("band-average-lieb-thirring", inputs, rhs, averaged, tol),
        worst_pointwise_slack: worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicCheck {
    pub checks: usize,
    /// Most negative `U(α_s, z + gd/4(α-α_s)) - U(α, z)`, relative.
    pub worst_relative_slack: f64,
    pub tolerance: f64,
}

impl CharacteristicCheck {
    pub fn pass(&self) -> bool {
        self.worst_relative_slack >= -self.tolerance
    }
}

/// `U(α, z) ≤ U(α_s, z + (gd/4)(α - α_s))` for all grid pairs `α ≥ α_s`,
/// where `U(α, z) = α^{d/2} R_σ(z)` at coupling `α`.
pub fn characteristic_check(
    model: &TorusModel,
    alphas: &[f64],
    zs: &[f64],
    sigma: f64,
    tolerance: f64,
) -> Result<CharacteristicCheck> {
    if alphas.is_empty() || zs.is_empty() {
        return Err(input_err!("empty α or z grid"));
    }
    let rate = model.geometry.shift_rate();
    let a_max = alphas.iter().copied().fold(0.0, f64::max);
    let z_max = zs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + rate * a_max;
    let spectra: Vec<(f64, Vec<f64>)> = alphas
        .par_iter()
        .map(|&a| spectrum_at(model, a, z_max).map(|s| (a, s.eigenvalues)))
        .collect::<Result<_>>()?;
    let half_d = model.geometry.d() as f64 / 2.0;
    let u = |a: f64, e: &[f64], z: f64| a.powf(half_d) * riesz_mean(e, sigma, z);
    let mut worst = f64::INFINITY;
    let mut checks = 0;
    for (a, ea) in &spectra {
        for (s, es) in &spectra {
            if s > a {
                continue;
            }
            for &z in zs {
                let lhs = u(*a, ea, z);
                let rhs = u(*s, es, z + rate * (a - s));
                worst = worst.min((rhs - lhs) / rhs.abs().max(lhs.abs()).max(f64::MIN_POSITIVE));
                checks += 1;
            }
        }
    }
    Ok(CharacteristicCheck {
        checks,
        worst_relative_slack: worst,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn constant_1d(gamma: f64) -> TorusModel {
        TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::constant(1, -gamma), 1.0)
    }

    fn mathieu() -> TorusModel {
        TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::cosine(1, 1.0), 1.0)
    }

    /// `√α Σ_n (z - α/4 - (αn² - γ))₊²`
    fn closed_form_scan(alpha: f64, gamma: f64, z: f64) -> f64 {
        let e = z - alpha / 4.0 + gamma;
        let nmax = (e.max(0.0) / alpha).sqrt() as i64 + 1;
        alpha.sqrt()
            * (-nmax..=nmax)
                .map(|n| (e - alpha * (n * n) as f64).max(0.0).powi(2))
                .sum::<f64>()
    }

    #[test]
    fn constant_potential_scan_matches_closed_form() {
        let alphas: Vec<f64> = (0..12).map(|i| 0.7f64.powi(i)).collect();
        let s = lt_monotone_scan(&constant_1d(2.0), 0.5, 2.0, &alphas, ScanOptions::default()).unwrap();
        assert!(s.pass(), "{s:?}");
        for p in &s.points {
            let want = closed_form_scan(p.alpha, 2.0, 0.5);
            assert!((p.value - want).abs() <= 1e-10 * want.max(1.0), "α = {}: {} vs {want}", p.alpha, p.value);
        }
        let limit = 16.0 / 15.0 * 2.5f64.powf(2.5);
        assert!((s.rhs_limit.unwrap() - limit).abs() < 1e-10 * limit);
    }

    #[test]
    fn below_spectrum_is_zero() {
        let free = TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::zero(), 1.0);
        let s = lt_monotone_scan(&free, -1.0, 2.0, &[1.0, 0.5], ScanOptions::default()).unwrap();
        assert!(s.points.iter().all(|p| p.value == 0.0));
        assert!(s.pass());
        assert!(lt_monotone_scan(&free, 0.0, 2.0, &[1.0, 0.0], ScanOptions::default()).is_err());
    }

    #[test]
    fn mathieu_scan_monotone() {
        let s = lt_monotone_scan(&mathieu(), 3.0, 2.0, &[1.0, 0.5, 0.25, 0.1], ScanOptions::default()).unwrap();
        assert!(s.pass(), "{s:?}");
    }

    #[test]
    fn sharp_bound_constant_potential() {
        let m = constant_1d(1.0);
        for alpha in [0.05, 0.3, 1.0, 5.0] {
            let b = lt_rhs_and_slack(&m, 0.0, alpha, 2.0, 1e-10).unwrap();
            let x = 1.0 / alpha;
            let want_rhs = alpha * alpha * 16.0 / 15.0 * (x + 0.25).powf(2.5);
            assert!((b.rhs - want_rhs).abs() < 1e-10 * want_rhs);
            assert!(b.report.pass);
        }
        let deep = lt_rhs_and_slack(&m, -5.0, 1.0, 2.0, 1e-10).unwrap();
        assert_eq!((deep.lhs, deep.rhs), (0.0, 0.0));
    }

    #[test]
    fn mathieu_bound_and_quadrature() {
        let b = lt_rhs_and_slack(&mathieu(), 2.0, 0.5, 2.0, 1e-10).unwrap();
        assert!(b.report.pass, "{b:?}");
        assert!(b.quadrature.last_relative_change <= QUADRATURE_TOLERANCE);
    }

    #[test]
    fn free_semiclassical_limit() {
        let free = TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::zero(), 1.0);
        let (c, _) = classical_integral(&free, 2.0, 2.0).unwrap();
        assert!((c - 16.0 / 15.0 * 2f64.powf(2.5)).abs() < 1e-12 * c);
        let r = semiclassical_limit_check(&free, 1.0, 2.0, &[1.0, 0.25, 1.0 / 16.0], 0.05).unwrap();
        assert!(r.final_relative_gap < 0.05, "{r:?}");
        let below = semiclassical_limit_check(&constant_1d(-1.0), 0.5, 2.0, &[1.0, 0.5], 0.05).unwrap();
        assert_eq!(below.limit, 0.0);
        assert!(below.points.iter().all(|p| p.value == 0.0));
    }

    #[test]
    fn band_average_mathieu_and_single_point() {
        let r = band_average_check(&mathieu(), 3.0, 1.0, 2.0, 16, 1e-8).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(r.convexity.slack >= 0.0);
        let one = band_average_check(&mathieu(), 3.0, 1.0, 2.0, 1, 1e-8).unwrap();
        let direct = lt_rhs_and_slack(&mathieu(), 3.0, 1.0, 2.0, 1e-8).unwrap();
        assert!((one.combined.actual_value.unwrap() - direct.lhs).abs() < 1e-9 * direct.lhs);
        assert!((one.combined.bound_value - direct.rhs).abs() < 1e-9 * direct.rhs);
    }

    #[test]
    fn free_bands_convexity() {
        let free = TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::zero(), 1.0);
        let r = band_average_check(&free, 5.0, 1.0, 2.0, 8, 1e-10).unwrap();
        assert!(r.pass());
        assert!(r.convexity.slack > 0.0);
    }

    #[test]
    fn alpha_covariance() {
        let geom = TorusGeometry::standard(1).unwrap();
        let base = PotentialSpec::cosine(1, 1.0);
        for c in [0.5, 3.0] {
            let scaled: BTreeMap<Vec<i64>, _> = base.coefficients().iter().map(|(m, v)| (m.clone(), v / c)).collect();
            let a = TorusModel::new(geom.clone(), base.clone(), c).with_half_width(30).solve().unwrap();
            let b = TorusModel::new(geom.clone(), PotentialSpec::new(scaled).unwrap(), 1.0)
                .with_half_width(30)
                .solve()
                .unwrap();
            for j in 0..10 {
                assert!((a.eigenvalues[j] - c * b.eigenvalues[j]).abs() <= 1e-9 * a.eigenvalues[j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn characteristic_inequality_mathieu() {
        let alphas = [1.0, 0.8, 0.6, 0.4, 0.25];
        let zs: Vec<f64> = (0..8).map(|i| -1.0 + 0.75 * i as f64).collect();
        let r = characteristic_check(&mathieu(), &alphas, &zs, 2.0, 1e-8).unwrap();
        assert_eq!(r.checks, 15 * 8);
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn reduced_shift_breaks_monotonicity() {
        let gamma = 1.0;
        let alphas: Vec<f64> = (0..400).map(|i| gamma / (3.5 + i as f64 / 399.0)).collect();
        let opts = ScanOptions {
            shift_factor: 0.95,
            with_limit: false,
            ..ScanOptions::default()
        };
        let s = lt_monotone_scan(&constant_1d(gamma), 0.0, 2.0, &alphas, opts).unwrap();
        assert!(!s.monotone());
        assert!(s.violations.iter().all(|v| (3.5..=4.5).contains(&(gamma / v.alpha_small))));
        let full = lt_monotone_scan(&constant_1d(gamma), 0.0, 2.0, &alphas, ScanOptions::default()).unwrap();
        assert!(full.monotone());
    }
}

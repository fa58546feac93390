//! Closed-form eigenvalue bounds: the quadratic-polynomial bounds on
//! `λ_{N+1}`, the mean-ratio bounds built on the largest zero `z⁰_n`, the
//! difference inequality, and the Reilly-type bound.
//!
//! Indices in this module are counts: `n` means the first `n` eigenvalues.

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::report::BoundReport;
use crate::torus::SpectrumResult;

/// Default relative tolerance for bound slacks.
pub const BOUND_TOLERANCE: f64 = 1e-10;

/// Leading eigenvalues with the means the bounds are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPrefix {
    /// Ascending `λ_1, …, λ_K`; any count `n ≤ K` may be queried.
    pub eigenvalues: Vec<f64>,
    /// Potential expectations `V_j`, aligned with `eigenvalues`.
    pub potential: Option<Vec<f64>>,
    pub d: usize,
    pub g: f64,
    pub tau: f64,
}

fn mean<I: Iterator<Item = f64>>(it: I, n: usize) -> f64 {
    it.sum::<f64>() / n as f64
}

impl SpectrumPrefix {
    pub fn new(eigenvalues: Vec<f64>, d: usize, g: f64, tau: f64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(input_err!("prefix must contain at least one eigenvalue"));
        }
        if d == 0 {
            return Err(input_err!("dimension must be positive"));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) || eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(input_err!("eigenvalues must be finite and ascending"));
        }
        if !(g >= 0.0) || !tau.is_finite() {
            return Err(input_err!("need g ≥ 0 and finite τ, got g = {g}, τ = {tau}"));
        }
        Ok(SpectrumPrefix {
            eigenvalues,
            potential: None,
            d,
            g,
            tau,
        })
    }

    pub fn with_potential(mut self, v: Vec<f64>) -> Result<Self> {
        if v.len() != self.eigenvalues.len() {
            return Err(input_err!(
                "{} potential values for {} eigenvalues",
                v.len(),
                self.eigenvalues.len()
            ));
        }
        self.potential = Some(v);
        Ok(self)
    }

    /// Prefix of a torus spectrum in the units of `-Δ + V/α`: eigenvalues and
    /// `V_j` divided by `α`, `g` from the geometry, `τ = gd/4 - inf V/α`.
    ///
    /// Bounding `Σ(z-λ_j)V_j` from below by `inf V·R₁` is what turns the
    /// difference inequality into a monotone ratio, so the shift uses the
    /// infimum; with `sup V` the ratio fails to be monotone already for
    /// `V = cos x`.
    pub fn from_torus(spec: &SpectrumResult, count: usize) -> Result<Self> {
        if count == 0 || count > spec.len() {
            return Err(input_err!("prefix length {count} outside 1..={}", spec.len()));
        }
        let alpha = spec.alpha();
        let geom = spec.geometry();
        let pot = &spec.model.potential;
        let t = spec.kinetic_all();
        let eig: Vec<f64> = spec.eigenvalues[..count].iter().map(|l| l / alpha).collect();
        let v: Vec<f64> = (0..count).map(|j| eig[j] - t[j]).collect();
        let tau = geom.shift_rate() - pot.inf_v_lower(geom) / alpha;
        SpectrumPrefix::new(eig, geom.d(), geom.g(), tau)?.with_potential(v)
    }

    /// Multiply eigenvalues, potential values, `g` and `τ` by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        SpectrumPrefix {
            eigenvalues: self.eigenvalues.iter().map(|x| x * c).collect(),
            potential: self.potential.as_ref().map(|v| v.iter().map(|x| x * c).collect()),
            d: self.d,
            g: self.g * c,
            tau: self.tau * c,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.len() {
            return Err(input_err!("N = {n} outside 1..={}", self.len()));
        }
        Ok(())
    }

    fn df(&self) -> f64 {
        self.d as f64
    }

    /// `λ̄_n`
    pub fn mean(&self, n: usize) -> f64 {
        mean(self.eigenvalues[..n].iter().copied(), n)
    }
    /// Mean of squares over the first `n`.
    pub fn mean_sq(&self, n: usize) -> f64 {
        mean(self.eigenvalues[..n].iter().map(|x| x * x), n)
    }
    /// `V̄_n`, zero without potential data.
    pub fn v_mean(&self, n: usize) -> f64 {
        self.potential.as_ref().map_or(0.0, |v| mean(v[..n].iter().copied(), n))
    }
    /// Mean of `λ_j V_j` over the first `n`.
    pub fn lv_mean(&self, n: usize) -> f64 {
        self.potential.as_ref().map_or(0.0, |v| {
            mean(self.eigenvalues[..n].iter().zip(&v[..n]).map(|(l, v)| l * v), n)
        })
    }
    /// `min_{j ≤ n} V_j`, zero without potential data.
    pub fn v_min(&self, n: usize) -> f64 {
        self.potential
            .as_ref()
            .map_or(0.0, |v| v[..n].iter().copied().fold(f64::INFINITY, f64::min))
    }
    /// Shifted eigenvalues `μ_j = λ_j + τ`.
    pub fn shifted(&self, n: usize) -> Vec<f64> {
        self.eigenvalues[..n].iter().map(|l| l + self.tau).collect()
    }

    /// Cauchy-Schwarz on the stored means.
    pub fn check_invariants(&self) -> Result<()> {
        for n in 1..=self.len() {
            let m = self.mean(n);
            if self.mean_sq(n) < m * m - 1e-12 * m * m.max(1.0) {
                return Err(Error::Inconsistency(format!("mean of squares below squared mean at N = {n}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadPolyVariant {
    /// `z² - Bz + C` with potential means.
    QuadPoly2,
    /// `Σ (ζ-μ_j)(ζ-(1+4/d)μ_j)` at `ζ = z + τ` in the shifted frame.
    P2n,
    /// `Σ (z-λ_j)(z-(1+4/d)λ_j-g)`, the free-Laplacian gap polynomial.
    Gap1d,
}

/// Coefficients `(B, C)` of the monic quadratic `z² - Bz + C`.
pub fn quadpoly2_coefficients(p: &SpectrumPrefix, n: usize) -> Result<(f64, f64)> {
    p.check_n(n)?;
    if p.potential.is_none() {
        return Err(input_err!("the quadratic bound needs potential means V_j"));
    }
    let d = p.df();
    let b = (2.0 + 4.0 / d) * p.mean(n) + p.g - 4.0 / d * p.v_mean(n);
    let c = (1.0 + 4.0 / d) * p.mean_sq(n) + p.g * p.mean(n) - 4.0 / d * p.lv_mean(n);
    Ok((b, c))
}

pub fn quad_poly_values(p: &SpectrumPrefix, n: usize, z: f64, variant: QuadPolyVariant) -> Result<f64> {
    p.check_n(n)?;
    let k = 1.0 + 4.0 / p.df();
    Ok(match variant {
        QuadPolyVariant::QuadPoly2 => {
            let (b, c) = quadpoly2_coefficients(p, n)?;
            z * z - b * z + c
        }
        QuadPolyVariant::P2n => {
            let zeta = z + p.tau;
            p.shifted(n).iter().map(|m| (zeta - m) * (zeta - k * m)).sum()
        }
        QuadPolyVariant::Gap1d => p.eigenvalues[..n]
            .iter()
            .map(|l| (z - l) * (z - k * l - p.g))
            .sum(),
    })
}

/// `P_{2,N}(z) ≤ N(z-λ_N)(z-λ_{N+1})` for `z ∈ [λ_N, λ_{N+1}]`.
pub fn gap1d_slack(p: &SpectrumPrefix, n: usize, z: f64, tolerance: f64) -> Result<BoundReport> {
    if n >= p.len() {
        return Err(input_err!("need λ_(N+1): prefix has {} values, N = {n}", p.len()));
    }
    let (lo, hi) = (p.eigenvalues[n - 1], p.eigenvalues[n]);
    if z < lo || z > hi {
        return Err(input_err!("z = {z} outside [λ_N, λ_(N+1)] = [{lo}, {hi}]"));
    }
    let lhs = quad_poly_values(p, n, z, QuadPolyVariant::Gap1d)?;
    let rhs = n as f64 * (z - lo) * (z - hi);
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    Ok(BoundReport::new(
        "gap-polynomial",
        format!("N={n} z={z} d={} g={}", p.d, p.g),
        rhs,
        lhs,
        tolerance * scale,
    ))
}

/// Discriminant of the gap polynomial, `((d+2)/d λ̄ + g/2)² - (d+4)/d·mean(λ²) - gλ̄`.
pub fn gap1d_discriminant(p: &SpectrumPrefix, n: usize) -> Result<f64> {
    p.check_n(n)?;
    let d = p.df();
    let c = (d + 2.0) / d * p.mean(n) + p.g / 2.0;
    Ok(c * c - (d + 4.0) / d * p.mean_sq(n) - p.g * p.mean(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaNextReport {
    pub n: usize,
    /// Reduced discriminant `B²/4 - C` of the quadratic with potential means.
    pub disc_frak: f64,
    /// Largest zero `B/2 + √(B²/4 - C)`.
    pub strong: BoundReport,
    /// `(1+4/d)(λ̄_N - v) + g + v` with `v = min_{j≤N} V_j`.
    pub weaker: BoundReport,
    /// `(1+2/d)λ̄_N + (g - V̄_N)/2 + √𝔇_N`, evaluated as printed; it agrees
    /// with `strong` when `V̄_N = 0` and is reported for comparison only.
    pub printed_center_value: f64,
}

impl LambdaNextReport {
    pub fn pass(&self) -> bool {
        self.strong.pass && self.weaker.pass
    }
}

fn check_disc(name: &str, value: f64, scale: f64) -> Result<f64> {
    if value < -1e-12 * scale.max(1.0) {
        return Err(Error::Inconsistency(format!(
            "{name} = {value:.6e} is negative; the eigenvalue data cannot come from a genuine spectrum"
        )));
    }
    Ok(value.max(0.0))
}

/// Bounds on `λ_{N+1}` from the first `n` eigenvalues. When the prefix holds
/// `λ_{N+1}`, the slacks are against it; otherwise they are `+∞`-free
/// reports without an actual value.
pub fn lambda_next_bound(p: &SpectrumPrefix, n: usize, tolerance: f64) -> Result<LambdaNextReport> {
    p.check_n(n)?;
    let pv = if p.potential.is_some() {
        p.clone()
    } else {
        p.clone().with_potential(vec![0.0; p.len()])?
    };
    let d = p.df();
    let (b, c) = quadpoly2_coefficients(&pv, n)?;
    let disc = b * b / 4.0 - c;
    let root = check_disc("𝔇_N", disc, b * b / 4.0)?.sqrt();
    let strong_value = b / 2.0 + root;
    let v = pv.v_min(n);
    let weaker_value = (1.0 + 4.0 / d) * (pv.mean(n) - v) + p.g + v;
    let printed = (1.0 + 2.0 / d) * pv.mean(n) + (p.g - pv.v_mean(n)) / 2.0 + root;
    let actual = p.eigenvalues.get(n).copied();
    let inputs = format!("N={n} d={} g={}", p.d, p.g);
    let report = |name: &str, bound: f64| {
        let tol = tolerance * bound.abs().max(1.0);
        match actual {
            Some(a) => BoundReport::new(name, inputs.clone(), bound, a, tol),
            None => BoundReport::with_slack(name, inputs.clone(), bound, None, 0.0, tol),
        }
    };
    Ok(LambdaNextReport {
        n,
        disc_frak: disc,
        strong: report("lambda-next", strong_value),
        weaker: report("lambda-next-weaker", weaker_value),
        printed_center_value: printed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Z0Report {
    pub n: usize,
    pub k: usize,
    /// `D_n` in the shifted frame.
    pub disc_d: f64,
    /// Largest zero of `P_{2,n}` in the shifted frame.
    pub z0: f64,
    /// `(d+4)/d·(λ̄_n + τ)`
    pub z0_upper: f64,
    /// `(d+2)/d·(λ̄_n + τ)`
    pub z0_lower: f64,
    /// `(d+2)/d·(λ̄_k+τ) ≤ (k/n)^{2/d} z⁰_n`
    pub mean_bound: BoundReport,
    /// `(λ̄_k+τ)/(λ̄_n+τ) ≤ (d+4)/(d+2)·(k/n)^{2/d}`, when `λ̄_n + τ > 0`.
    pub ratio_bound: Option<BoundReport>,
}

impl Z0Report {
    pub fn pass(&self) -> bool {
        self.mean_bound.pass && self.ratio_bound.as_ref().is_none_or(|r| r.pass)
    }
}

/// `D_n = (1+2/d)²·μ̄² - (1+4/d)·mean(μ²)` with `μ = λ + τ`, and `z⁰_n`.
pub fn z0(p: &SpectrumPrefix, n: usize) -> Result<(f64, f64)> {
    p.check_n(n)?;
    let d = p.df();
    let mu = p.shifted(n);
    // the Legendre argument runs over z + τ > 0 and needs a nonnegative shifted spectrum
    if let Some(bad) = mu.iter().find(|&&x| x < 0.0) {
        return Err(Error::Precondition(format!(
            "λ_1 + τ = {bad} is negative; the mean bounds need a nonnegative shifted spectrum"
        )));
    }
    let m = mean(mu.iter().copied(), n);
    let m2 = mean(mu.iter().map(|x| x * x), n);
    let a = (1.0 + 2.0 / d) * m;
    let disc = a * a - (1.0 + 4.0 / d) * m2;
    let root = check_disc("D_n", disc, a * a)?.sqrt();
    Ok((disc, a + root))
}

pub fn z0_and_ratio_bounds(p: &SpectrumPrefix, n: usize, k: usize, tolerance: f64) -> Result<Z0Report> {
    p.check_n(n)?;
    p.check_n(k)?;
    if k < n {
        return Err(input_err!("need k ≥ n, got k = {k}, n = {n}"));
    }
    let d = p.df();
    let (disc_d, z0v) = z0(p, n)?;
    let mn = p.mean(n) + p.tau;
    let mk = p.mean(k) + p.tau;
    let growth = (k as f64 / n as f64).powf(2.0 / d);
    let inputs = format!("n={n} k={k} d={} tau={}", p.d, p.tau);
    let bound8 = growth * z0v;
    let actual8 = (d + 2.0) / d * mk;
    let mean_bound = BoundReport::new(
        "mean-growth",
        inputs.clone(),
        bound8,
        actual8,
        tolerance * bound8.abs().max(1.0),
    );
    let ratio_bound = (mn > 0.0).then(|| {
        let bound9 = (d + 4.0) / (d + 2.0) * growth;
        BoundReport::new("mean-ratio", inputs, bound9, mk / mn, tolerance * bound9.max(1.0))
    });
    Ok(Z0Report {
        n,
        k,
        disc_d,
        z0: z0v,
        z0_upper: (d + 4.0) / d * mn,
        z0_lower: (d + 2.0) / d * mn,
        mean_bound,
        ratio_bound,
    })
}

/// `g R₁(z) + (4/d) Σ_{j≤N} (z-λ_j) T_j - R₂(z) ≥ 0` for `z ∈ [λ_N, λ_{N+1}]`,
/// in the `α`-scaled form `αg R₁ + (4/d)Σ(z-λ_j)αT_j - R₂`.
pub fn difference_inequality_slack(spec: &SpectrumResult, n: usize, z: f64, tolerance: f64) -> Result<BoundReport> {
    if n == 0 || n >= spec.len() {
        return Err(input_err!("N = {n} must lie in 1..{}", spec.len()));
    }
    let lam = &spec.eigenvalues;
    let (lo, hi) = (lam[n - 1], lam[n]);
    let eps = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    if z < lo - eps || z > hi + eps {
        return Err(input_err!("z = {z} outside [λ_N, λ_(N+1)] = [{lo}, {hi}]"));
    }
    let alpha = spec.alpha();
    let geom = spec.geometry();
    let d = geom.d() as f64;
    let t = spec.kinetic_all();
    let (mut r1, mut r2, mut kin) = (0.0, 0.0, 0.0);
    for j in 0..n {
        let s = z - lam[j];
        r1 += s;
        r2 += s * s;
        kin += s * alpha * t[j];
    }
    let bound = alpha * geom.g() * r1 + 4.0 / d * kin;
    let scale = bound.abs().max(r2).max(1.0);
    Ok(BoundReport::new(
        "difference-inequality",
        format!("N={n} z={z} alpha={alpha}"),
        bound,
        r2,
        tolerance * scale,
    ))
}

/// `((d+4)²/(d(d+2))·N^{2/d} - 4/d)·h²/d`
pub fn reilly_bound_value(n: usize, d: usize, h_inf: f64) -> Result<f64> {
    if n == 0 || d == 0 || !(h_inf > 0.0) {
        return Err(input_err!("need N ≥ 1, d ≥ 1, h > 0; got N = {n}, d = {d}, h = {h_inf}"));
    }
    let df = d as f64;
    Ok(((df + 4.0).powi(2) / (df * (df + 2.0)) * (n as f64).powf(2.0 / df) - 4.0 / df) * h_inf * h_inf / df)
}

/// Reilly-type bound on `λ_{N+1}`, compared with `actual` when given.
pub fn reilly_bound(n: usize, d: usize, h_inf: f64, actual: Option<f64>, tolerance: f64) -> Result<BoundReport> {
    let b = reilly_bound_value(n, d, h_inf)?;
    let inputs = format!("N={n} d={d} h={h_inf}");
    let tol = tolerance * b.abs().max(1.0);
    Ok(match actual {
        Some(a) => BoundReport::new("reilly", inputs, b, a, tol),
        None => BoundReport::with_slack("reilly", inputs, b, None, 0.0, tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn free_2d_spectrum(count: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (-12i64..=12)
            .flat_map(|m| (-12i64..=12).map(move |n| (m * m + n * n) as f64))
            .collect();
        v.sort_by(f64::total_cmp);
        v.truncate(count);
        v
    }

    #[test]
    fn quadpoly2_single_eigenvalue() {
        let p = SpectrumPrefix::new(vec![1.0, 5.0], 1, 0.0, 0.0).unwrap().with_potential(vec![0.0, 0.0]).unwrap();
        for z in [0.0, 1.0, 3.0, 5.0] {
            let v = quad_poly_values(&p, 1, z, QuadPolyVariant::QuadPoly2).unwrap();
            assert!((v - (z * z - 6.0 * z + 5.0)).abs() < 1e-14);
        }
        let r = lambda_next_bound(&p, 1, 1e-12).unwrap();
        assert_eq!(r.strong.bound_value, 5.0);
        assert_eq!(r.strong.slack, 0.0);
        assert_eq!(r.weaker.bound_value, 5.0);
    }

    #[test]
    fn p2n_largest_zero_at_n1() {
        let p = SpectrumPrefix::new(vec![2.0], 2, 0.0, 0.0).unwrap();
        assert_eq!(quad_poly_values(&p, 1, 6.0, QuadPolyVariant::P2n).unwrap(), 0.0);
        let (disc, z) = z0(&p, 1).unwrap();
        assert!((disc - 4.0 * 4.0 / 4.0).abs() < 1e-14);
        assert!((z - 6.0).abs() < 1e-14);
    }

    #[test]
    fn gap_polynomial_free_1d() {
        let p = SpectrumPrefix::new(vec![0.0, 1.0, 1.0, 4.0, 4.0], 1, 1.0, 0.25).unwrap();
        let r = gap1d_slack(&p, 3, 2.5, 1e-12).unwrap();
        assert!(r.pass && r.slack.abs() < 1e-12, "{r:?}");
        assert!((gap1d_discriminant(&p, 3).unwrap() - 2.25).abs() < 1e-14);
    }

    #[test]
    fn free_2d_lambda_next() {
        let eig = free_2d_spectrum(120);
        let p = SpectrumPrefix::new(eig, 2, 1.0, 0.5).unwrap();
        for n in 1..=100 {
            let r = lambda_next_bound(&p, n, BOUND_TOLERANCE).unwrap();
            assert!(r.pass(), "N = {n}: {r:?}");
            assert!(r.weaker.bound_value >= r.strong.bound_value - 1e-12);
        }
    }

    #[test]
    fn weaker_dominates_on_random_prefixes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..10_000 {
            let n = rng.random_range(1..12);
            let d = rng.random_range(1..4);
            let mut e: Vec<f64> = (0..n).map(|_| 10.0 * rng.random::<f64>()).collect();
            e.sort_by(f64::total_cmp);
            let p = SpectrumPrefix::new(e, d, rng.random::<f64>(), 0.0).unwrap();
            // widely spread random data violates 𝔇 ≥ 0 and is rejected
            match lambda_next_bound(&p, n, 0.0) {
                Ok(r) => {
                    checked += 1;
                    assert!(r.weaker.bound_value >= r.strong.bound_value - 1e-12 * r.strong.bound_value.abs().max(1.0));
                }
                Err(e) => assert!(matches!(e, Error::Inconsistency(_))),
            }
        }
        assert!(checked > 1000, "only {checked} admissible prefixes");
    }

    #[test]
    fn negative_discriminant_is_an_error() {
        // V_j wildly inconsistent with any spectrum
        let p = SpectrumPrefix::new(vec![0.0, 10.0], 1, 0.0, 0.0).unwrap().with_potential(vec![15.0, 0.0]).unwrap();
        assert!(matches!(lambda_next_bound(&p, 2, 1e-10), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn z0_bracket_and_mean_bounds() {
        let eig = free_2d_spectrum(40);
        let p = SpectrumPrefix::new(eig, 2, 1.0, 0.5).unwrap();
        let r = z0_and_ratio_bounds(&p, 1, 30, BOUND_TOLERANCE).unwrap();
        assert!(r.pass(), "{r:?}");
        for n in 1..=30 {
            let r = z0_and_ratio_bounds(&p, n, n, BOUND_TOLERANCE).unwrap();
            assert!(r.z0_lower <= r.z0 + 1e-12 && r.z0 <= r.z0_upper + 1e-12);
            assert!(r.mean_bound.slack >= -1e-12);
        }
        let single = SpectrumPrefix::new(vec![3.0], 2, 0.0, 0.0).unwrap();
        let (d1, z1) = z0(&single, 1).unwrap();
        assert!((d1 - 9.0).abs() < 1e-13 && (z1 - 9.0).abs() < 1e-13);
        let below = SpectrumPrefix::new(vec![1.0, 2.0], 2, 0.0, -1.5).unwrap();
        assert!(matches!(z0(&below, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn scaling_covariance() {
        let eig = free_2d_spectrum(30);
        let v: Vec<f64> = (0..30).map(|j| 0.1 * (j as f64).sin()).collect();
        let p = SpectrumPrefix::new(eig, 2, 1.0, 0.5).unwrap().with_potential(v).unwrap();
        let a = lambda_next_bound(&p, 10, 1e-10).unwrap();
        let (da, za) = z0(&p, 10).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let q = p.scaled(c);
            let b = lambda_next_bound(&q, 10, 1e-10).unwrap();
            let (db, zb) = z0(&q, 10).unwrap();
            assert!((b.strong.bound_value - c * a.strong.bound_value).abs() < 1e-11 * c * a.strong.bound_value);
            assert!((b.disc_frak - c * c * a.disc_frak).abs() < 1e-10 * c * c * a.disc_frak.abs().max(1.0));
            assert!((zb - c * za).abs() < 1e-11 * c * za);
            assert!((db - c * c * da).abs() < 1e-10 * c * c * da.abs().max(1.0));
        }
    }

    #[test]
    fn reilly_examples() {
        assert!((reilly_bound_value(1, 2, 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((reilly_bound_value(1, 1, 1.0).unwrap() - 13.0 / 3.0).abs() < 1e-14);
        assert!((reilly_bound_value(3, 1, 1.0).unwrap() - 71.0).abs() < 1e-12);
        assert!(reilly_bound(1, 2, 2.0, Some(2.0), 1e-12).unwrap().pass);
        assert!(reilly_bound_value(0, 2, 1.0).is_err());
    }
}

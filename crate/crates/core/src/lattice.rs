//! Exact lattice backend for flat tori with integral diagonal forms
//! `Σ a_ℓ m_ℓ²`: point counts, spectra with multiplicity, Riesz means by two
//! independent routes, the circle-problem bounds and the 1D gap example.

use std::f64::consts::PI;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{gap1d_discriminant, SpectrumPrefix};
use crate::constants::weyl_constant;
use crate::error::{input_err, Error, Result};
use crate::torus::TorusGeometry;

pub type Rational = Ratio<i128>;

/// Largest `x` accepted by the counting routines.
pub const MAX_COUNT_ARGUMENT: u64 = 1 << 40;
/// Largest number of lattice points materialized as a spectrum.
pub const MAX_SPECTRUM_POINTS: u64 = 50_000_000;
/// Largest argument for which a full count table is built.
pub const MAX_TABLE_ARGUMENT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalForm {
    coeffs: Vec<u64>,
}

impl DiagonalForm {
    pub fn new(coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.contains(&0) {
            return Err(input_err!("form needs at least one positive coefficient"));
        }
        Ok(DiagonalForm { coeffs })
    }

    /// `m₁² + … + m_d²`
    pub fn sum_of_squares(d: usize) -> Result<Self> {
        Self::new(vec![1; d])
    }

    /// The form `Σ q_ℓ² m_ℓ²` of a torus whose squared dual lengths are
    /// integers.
    pub fn from_geometry(geom: &TorusGeometry) -> Result<Self> {
        let coeffs = geom
            .dual_basis()
            .iter()
            .map(|q| {
                let a = q * q;
                let r = a.round();
                if r >= 1.0 && (a - r).abs() <= 1e-9 * r {
                    Ok(r as u64)
                } else {
                    Err(input_err!("q² = {a} is not a positive integer; exact counting needs an integral form"))
                }
            })
            .collect::<Result<_>>()?;
        Self::new(coeffs)
    }

    pub fn d(&self) -> usize {
        self.coeffs.len()
    }
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }
    /// Torus volume `Π 2π/√a_ℓ`.
    pub fn volume(&self) -> f64 {
        self.coeffs.iter().map(|&a| 2.0 * PI / (a as f64).sqrt()).product()
    }
}

/// Points with `a m² ≤ x` on one axis.
fn axis_count(a: u64, x: u64) -> u64 {
    2 * (x / a).isqrt() + 1
}

fn count_le(coeffs: &[u64], x: u64) -> u64 {
    match coeffs {
        [] => 1,
        [a] => axis_count(*a, x),
        [a, rest @ ..] => {
            let top = (x / a).isqrt();
            (0..=top)
                .map(|m| {
                    let c = count_le(rest, x - a * m * m);
                    if m == 0 {
                        c
                    } else {
                        2 * c
                    }
                })
                .sum()
        }
    }
}

/// `#{m ∈ ℤ^d : Σ a_ℓ m_ℓ² ≤ x}`, exact, row by row with integer square roots.
pub fn lattice_count(x: f64, form: &DiagonalForm) -> Result<u64> {
    if !(x >= 0.0) {
        return Err(input_err!("count argument must be nonnegative, got {x}"));
    }
    if x > MAX_COUNT_ARGUMENT as f64 {
        return Err(Error::Capacity(format!("count argument {x} exceeds {MAX_COUNT_ARGUMENT}")));
    }
    let xi = x.floor() as u64;
    let c = form.coeffs();
    let rows: f64 = c[..c.len() - 1].iter().map(|&a| 2.0 * (xi as f64 / a as f64).sqrt() + 1.0).product();
    if rows > 1e9 {
        return Err(Error::Capacity(format!("enumeration needs about {rows:.2e} rows")));
    }
    if c.len() == 1 {
        return Ok(axis_count(c[0], xi));
    }
    let top = (xi / c[0]).isqrt();
    Ok((0..=top)
        .into_par_iter()
        .map(|m| {
            let k = count_le(&c[1..], xi - c[0] * m * m);
            if m == 0 {
                k
            } else {
                2 * k
            }
        })
        .sum())
}

/// Form values `≤ x_max` with multiplicities, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpectrum {
    pub form: DiagonalForm,
    pub x_max: u64,
    pub levels: Vec<(u64, u64)>,
}

fn enumerate(coeffs: &[u64], budget: u64, partial: u64, out: &mut Vec<u64>) {
    match coeffs {
        [] => out.push(partial),
        [a, rest @ ..] => {
            let top = (budget / a).isqrt();
            for m in 0..=top {
                let v = a * m * m;
                let times = if m == 0 { 1 } else { 2 };
                for _ in 0..times {
                    enumerate(rest, budget - v, partial + v, out);
                }
            }
        }
    }
}

impl LatticeSpectrum {
    pub fn new(form: DiagonalForm, x_max: u64) -> Result<Self> {
        let total = lattice_count(x_max as f64, &form)?;
        if total > MAX_SPECTRUM_POINTS {
            return Err(Error::Capacity(format!(
                "{total} lattice points below {x_max} exceed the limit {MAX_SPECTRUM_POINTS}"
            )));
        }
        let mut values = Vec::with_capacity(total as usize);
        enumerate(form.coeffs(), x_max, 0, &mut values);
        values.sort_unstable();
        let mut levels: Vec<(u64, u64)> = Vec::new();
        for v in values {
            match levels.last_mut() {
                Some((last, m)) if *last == v => *m += 1,
                _ => levels.push((v, 1)),
            }
        }
        Ok(LatticeSpectrum { form, x_max, levels })
    }

    pub fn total(&self) -> u64 {
        self.levels.iter().map(|l| l.1).sum()
    }

    /// Eigenvalues with multiplicity, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.levels
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v as f64, m as usize))
            .collect()
    }

    /// `n`-th eigenvalue counted with multiplicity (1-based).
    pub fn nth(&self, n: u64) -> Option<u64> {
        let mut seen = 0;
        for &(v, m) in &self.levels {
            seen += m;
            if seen >= n {
                return Some(v);
            }
        }
        None
    }
}

/// `R(k)` for every integer `0 ≤ k ≤ x_max`, from [`lattice_count`].
#[derive(Debug, Clone, PartialEq)]
pub struct CountingTable {
    pub x_max: u64,
    pub counts: Vec<u64>,
    /// `Σ_{j<k} R(j)` and `Σ_{j<k} (2j+1)R(j)`.
    prefix: Vec<(i128, i128)>,
}

impl CountingTable {
    pub fn new(form: &DiagonalForm, x_max: u64) -> Result<Self> {
        if x_max > MAX_TABLE_ARGUMENT {
            return Err(Error::Capacity(format!("count table up to {x_max} exceeds {MAX_TABLE_ARGUMENT}")));
        }
        let counts: Vec<u64> = (0..=x_max)
            .into_par_iter()
            .map(|k| lattice_count(k as f64, form))
            .collect::<Result<_>>()?;
        let mut prefix = Vec::with_capacity(counts.len() + 1);
        let (mut a, mut b) = (0i128, 0i128);
        prefix.push((a, b));
        for (k, &c) in counts.iter().enumerate() {
            a += c as i128;
            b += (2 * k as i128 + 1) * c as i128;
            prefix.push((a, b));
        }
        Ok(CountingTable { x_max, counts, prefix })
    }

    /// `∫₀^x R(t) dt` (σ = 1) or `2∫₀^x (x-t) R(t) dt` (σ = 2), integrating
    /// the step function exactly over unit intervals.
    pub fn integral(&self, x: Rational, sigma: u32) -> Result<Rational> {
        if x <= Rational::zero() {
            return Ok(Rational::zero());
        }
        let whole = x.floor().to_integer();
        if whole as u64 > self.x_max {
            return Err(input_err!("x = {x} beyond the table limit {}", self.x_max));
        }
        let (s0, s1) = self.prefix[whole as usize];
        let frac = x - Rational::from_integer(whole);
        let last = Rational::from_integer(self.counts[whole as usize] as i128);
        Ok(match sigma {
            1 => Rational::from_integer(s0) + last * frac,
            // Σ_{k<⌊x⌋} R(k)·(2x - 2k - 1) + R(⌊x⌋)·frac²
            2 => x * 2 * s0 - s1 + last * frac * frac,
            _ => return Err(input_err!("σ must be 1 or 2, got {sigma}")),
        })
    }
}

/// `Σ mult·(x - v)₊^σ` over the enumerated levels, exactly.
pub fn riesz_direct(spec: &LatticeSpectrum, x: Rational, sigma: u32) -> Result<Rational> {
    if !(1..=2).contains(&sigma) {
        return Err(input_err!("σ must be 1 or 2, got {sigma}"));
    }
    if x > Rational::from_integer(spec.x_max as i128) {
        return Err(input_err!("x = {x} beyond the enumerated window {}", spec.x_max));
    }
    let (mut s0, mut s1, mut s2) = (0i128, 0i128, 0i128);
    for &(v, m) in spec.levels.iter().take_while(|l| Rational::from_integer(l.0 as i128) < x) {
        let (v, m) = (v as i128, m as i128);
        s0 += m;
        s1 += m * v;
        s2 += m * v * v;
    }
    Ok(if sigma == 1 {
        x * s0 - s1
    } else {
        x * x * s0 - x * 2 * s1 + s2
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszCountReport {
    pub x: f64,
    pub sigma: u32,
    pub direct: f64,
    pub via_integral: f64,
    /// Exact rational equality of the two routes.
    pub exact_match: bool,
    /// `(R₂(x) - (π/3)x³)/2`, two-dimensional sum of squares only.
    pub delta2: Option<f64>,
}

fn to_f64(q: Rational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    use num_traits::Float;
    if !x.is_finite() {
        return Err(input_err!("non-finite value {x}"));
    }
    let (mantissa, exp, sign) = Float::integer_decode(x);
    let m = sign as i128 * mantissa as i128;
    if exp >= 0 {
        if exp > 60 {
            return Err(Error::Capacity(format!("{x} too large for exact rational arithmetic")));
        }
        Ok(Rational::from_integer(m << exp))
    } else if -exp <= 120 {
        Ok(Rational::new(m, 1i128 << (-exp)))
    } else {
        Err(Error::Capacity(format!("{x} too small for exact rational arithmetic")))
    }
}

pub fn riesz_from_counting(spec: &LatticeSpectrum, table: &CountingTable, x: Rational, sigma: u32) -> Result<RieszCountReport> {
    let direct = riesz_direct(spec, x, sigma)?;
    let via = table.integral(x, sigma)?;
    let xf = to_f64(x);
    let circle = spec.form.coeffs() == [1, 1];
    Ok(RieszCountReport {
        x: xf,
        sigma,
        direct: to_f64(direct),
        via_integral: to_f64(via),
        exact_match: direct == via,
        delta2: (sigma == 2 && circle).then(|| (to_f64(direct) - PI / 3.0 * xf.powi(3)) / 2.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleRecord {
    pub x: f64,
    /// `R(x)`, points with `m² + n² ≤ x`.
    pub count: u64,
    pub r2_direct: f64,
    pub r2_integral: f64,
    pub exact_match: bool,
    pub delta2: f64,
    /// `(π/3)(x+½)³`
    pub r2_bound: f64,
    pub r2_slack: f64,
    /// `(π/48)(12x²+6x+1)`
    pub delta2_bound: f64,
    pub delta2_slack: f64,
    /// `|(π/48)(12x²+6x+1) - ((π/3)(x+½)³ - (π/3)x³)/2|`, relative.
    pub consistency: f64,
}

impl CircleRecord {
    pub fn pass(&self, tolerance: f64) -> bool {
        self.exact_match
            && self.r2_slack >= -tolerance * self.r2_bound
            && self.delta2_slack >= -tolerance * self.delta2_bound
            && self.consistency <= 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleReport {
    pub records: Vec<CircleRecord>,
    /// `max |Δ₂(x)|/x^{5/4}` over grid points with `x ≥ 1`, recorded only.
    pub max_delta2_scaled: f64,
    pub tolerance: f64,
}

impl CircleReport {
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass(self.tolerance))
    }
}

/// Circle-problem bounds at `x_i = i·x_max/points`, `i = 1..=points`.
pub fn circle_bound_check(x_max: u64, points: usize, tolerance: f64) -> Result<CircleReport> {
    if points == 0 {
        return Err(input_err!("need at least one grid point"));
    }
    let form = DiagonalForm::sum_of_squares(2)?;
    let spec = LatticeSpectrum::new(form.clone(), x_max)?;
    let table = CountingTable::new(&form, x_max)?;
    let records: Vec<CircleRecord> = (1..=points)
        .into_par_iter()
        .map(|i| {
            let x = Rational::new(i as i128 * x_max as i128, points as i128);
            let r = riesz_from_counting(&spec, &table, x, 2)?;
            let xf = r.x;
            let delta2 = r.delta2.unwrap_or(f64::NAN);
            let r2_bound = PI / 3.0 * (xf + 0.5).powi(3);
            let delta2_bound = PI / 48.0 * (12.0 * xf * xf + 6.0 * xf + 1.0);
            let alt = (PI / 3.0 * (xf + 0.5).powi(3) - PI / 3.0 * xf.powi(3)) / 2.0;
            Ok(CircleRecord {
                x: xf,
                count: table.counts[x.floor().to_integer() as usize],
                r2_direct: r.direct,
                r2_integral: r.via_integral,
                exact_match: r.exact_match,
                delta2,
                r2_bound,
                r2_slack: r2_bound - r.direct,
                delta2_bound,
                delta2_slack: delta2_bound - delta2,
                consistency: (delta2_bound - alt).abs() / delta2_bound,
            })
        })
        .collect::<Result<_>>()?;
    let max_delta2_scaled = records
        .iter()
        .filter(|r| r.x >= 1.0)
        .map(|r| r.delta2.abs() / r.x.powf(1.25))
        .fold(0.0, f64::max);
    Ok(CircleReport {
        records,
        max_delta2_scaled,
        tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapExampleReport {
    /// `N = 2n + 1`
    pub n_count: usize,
    pub g: f64,
    pub lambda_n: f64,
    pub lambda_next: f64,
    /// Discriminant of the gap polynomial.
    pub disc: f64,
    /// `((λ_{N+1} - λ_N)/2)²`
    pub gap_square: f64,
    /// `disc == gap_square` in exact arithmetic.
    pub exact_equal: bool,
    /// `g²N²/4`
    pub convention_value: f64,
    pub matches_convention: bool,
    /// `π²N²` as printed alongside the example; reported, not asserted.
    pub printed_value: f64,
    /// `Σ(z-λ_j)(z-5λ_j-g)` and `N(z-λ_N)(z-λ_{N+1})` have equal coefficients.
    pub polynomials_coincide: bool,
    /// Floating-point discriminant from the bounds module, error relative to
    /// the center squared. The discriminant is a difference of terms of that
    /// size, so this is the scale at which doubles resolve it.
    pub float_route_error: f64,
    /// `2R₁(z)(z+g/4) - (5/2)R₂(z)` vanishes at every eigenvalue `g m²`,
    /// `1 ≤ m ≤ n+1`: the ratio `R₂(z)/(z+g/4)^{5/2}` is critical there.
    pub critical_at_eigenvalues: bool,
    /// The same numerator at `z = λ_{N+1}` with the shift `0.95·g/4`.
    pub reduced_shift_numerator: f64,
    /// Relative decrease of `R₂(z)/(z+0.95g/4)^{5/2}` just above `λ_{N+1}`.
    pub reduced_shift_drop: f64,
    /// Whether the predicted drop is large enough to be seen in doubles.
    /// It shrinks like N⁻⁴, so for large N only the exact numerator decides.
    pub drop_resolvable: bool,
}

const DROP_RESOLUTION: f64 = 1e-13;

impl GapExampleReport {
    pub fn pass(&self) -> bool {
        self.exact_equal
            && self.matches_convention
            && self.polynomials_coincide
            && self.float_route_error <= 1e-10
            && self.critical_at_eigenvalues
            && self.reduced_shift_numerator < 0.0
            && (!self.drop_resolvable || self.reduced_shift_drop > 0.0)
    }
}

/// The free 1D operator with `λ_j = g j²`, `j ∈ ℤ`, at an odd count `N`.
pub fn one_d_gap_example(n_count: usize, g: Rational) -> Result<GapExampleReport> {
    if n_count % 2 == 0 {
        return Err(input_err!("N = {n_count} must be odd"));
    }
    if g <= Rational::zero() {
        return Err(input_err!("g must be positive"));
    }
    let n = (n_count / 2) as i128;
    let nq = Rational::from_integer(n_count as i128);
    // λ_1..λ_N are g·j² for |j| ≤ n
    let sum_j2: i128 = (1..=n).map(|j| 2 * j * j).sum();
    let sum_j4: i128 = (1..=n).map(|j| 2 * j * j * j * j).sum();
    let mean = g * sum_j2 / nq;
    let mean_sq = g * g * sum_j4 / nq;
    let center = mean * 3 + g / 2;
    let disc = center * center - mean_sq * 5 - g * mean;
    let lambda_n = g * (n * n);
    let lambda_next = g * ((n + 1) * (n + 1));
    let half_gap = (lambda_next - lambda_n) / 2;
    let gap_square = half_gap * half_gap;
    let convention = g * g * nq * nq / 4;

    // N z² - (6Σλ + Ng) z + Σ(5λ² + gλ)  vs  N z² - N(λ_N+λ_{N+1}) z + N λ_N λ_{N+1}
    let b_left = g * sum_j2 * 6 + g * nq;
    let c_left = g * g * sum_j4 * 5 + g * g * sum_j2;
    let polynomials_coincide = b_left == nq * (lambda_n + lambda_next) && c_left == nq * lambda_n * lambda_next;

    let riesz = |m: i128, s: Rational| {
        // eigenvalues below z = g m² are g j² with |j| < m
        let z = g * (m * m);
        let (mut r1, mut r2) = (Rational::zero(), Rational::zero());
        for j in -(m - 1)..=(m - 1) {
            let t = z - g * (j * j);
            r1 += t;
            r2 += t * t;
        }
        (r1 * 2 * (z + s) - r2 * 5 / 2, r1, r2)
    };
    let s = g / 4;
    let critical_at_eigenvalues = (1..=n + 1).all(|m| riesz(m, s).0.is_zero());
    let s_reduced = s * 19 / 20;
    let (num_reduced, _, r2_reduced) = riesz(n + 1, s_reduced);

    let evals: Vec<f64> = {
        let gf = to_f64(g);
        let mut v: Vec<f64> = (-(n + 2)..=(n + 2)).map(|j| gf * (j * j) as f64).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let zf = to_f64(lambda_next);
    let sf = to_f64(s_reduced);
    let ratio = |z: f64| crate::riesz::riesz_mean(&evals, 2.0, z) / (z + sf).powf(2.5);
    let h = 1e-4 * to_f64(g);
    let reduced_shift_drop = (ratio(zf) - ratio(zf + h)) / ratio(zf);
    // first-order size of that drop: h·|numerator|/(R₂(z)(z+s'))
    let predicted_drop = h * to_f64(-num_reduced / (r2_reduced * (lambda_next + s_reduced)));

    let prefix = SpectrumPrefix::new(evals.clone(), 1, to_f64(g), to_f64(s))?;
    let disc_float = gap1d_discriminant(&prefix, n_count)?;
    let df = to_f64(disc);
    Ok(GapExampleReport {
        n_count,
        g: to_f64(g),
        lambda_n: to_f64(lambda_n),
        lambda_next: zf,
        disc: df,
        gap_square: to_f64(gap_square),
        exact_equal: disc == gap_square,
        convention_value: to_f64(convention),
        matches_convention: disc == convention,
        printed_value: PI * PI * (n_count as f64).powi(2),
        polynomials_coincide,
        float_route_error: (disc_float - df).abs() / to_f64(center * center).max(1.0),
        critical_at_eigenvalues,
        reduced_shift_numerator: to_f64(num_reduced),
        reduced_shift_drop,
        drop_resolvable: predicted_drop > DROP_RESOLUTION,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub n: u64,
    pub lambda_n: f64,
    /// `λ_n (n/|Ω|)^{-2/d}`
    pub scaled: f64,
    pub c_d: f64,
    pub relative_error: f64,
}

/// Smallest form value `x` with `R(x) ≥ n`, by bisection on exact counts.
pub fn nth_value(form: &DiagonalForm, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(input_err!("eigenvalue index is 1-based"));
    }
    let (mut lo, mut hi) = (0u64, 1u64);
    while lattice_count(hi as f64, form)? < n {
        lo = hi;
        hi *= 2;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if lattice_count(mid as f64, form)? >= n {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

pub fn weyl_check(form: &DiagonalForm, n: u64) -> Result<WeylReport> {
    let lambda = nth_value(form, n)? as f64;
    let d = form.d() as f64;
    let scaled = lambda * (n as f64 / form.volume()).powf(-2.0 / d);
    let c_d = weyl_constant(form.d())?;
    Ok(WeylReport {
        n,
        lambda_n: lambda,
        scaled,
        c_d,
        relative_error: (scaled - c_d).abs() / c_d,
    })
}

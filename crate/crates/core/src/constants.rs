//! Classical phase-space constants with exact half-integer Gamma values.
//!
//! Every quantity here has the form `r·π^{p/2}` with `r` rational, so the
//! Gamma ratios are carried exactly and only the final value is rounded.

use std::f64::consts::PI;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

/// `rational · π^{half_pi_power/2}`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiRational {
    pub rational: Ratio<i128>,
    pub half_pi_power: i32,
}

impl PiRational {
    pub fn new(rational: Ratio<i128>, half_pi_power: i32) -> Self {
        PiRational {
            rational,
            half_pi_power,
        }
    }

    pub fn one() -> Self {
        Self::new(Ratio::one(), 0)
    }

    pub fn value(&self) -> f64 {
        let r = self.rational.numer().to_f64().unwrap_or(f64::NAN)
            / self.rational.denom().to_f64().unwrap_or(f64::NAN);
        r * PI.sqrt().powi(self.half_pi_power)
    }

    pub fn mul(self, o: Self) -> Result<Self> {
        let num = checked(self.rational.numer().checked_mul(*o.rational.numer()))?;
        let den = checked(self.rational.denom().checked_mul(*o.rational.denom()))?;
        Ok(Self::new(Ratio::new(num, den), self.half_pi_power + o.half_pi_power))
    }

    pub fn recip(self) -> Result<Self> {
        if self.rational.is_zero() {
            return Err(input_err!("reciprocal of zero"));
        }
        Ok(Self::new(self.rational.recip(), -self.half_pi_power))
    }

    pub fn div(self, o: Self) -> Result<Self> {
        self.mul(o.recip()?)
    }
}

fn checked(x: Option<i128>) -> Result<i128> {
    x.ok_or_else(|| Error::Capacity("exact Gamma value exceeds 128-bit range".into()))
}

/// `Γ(k/2)` for a positive integer `k`, by recursion from `Γ(1) = 1` and
/// `Γ(1/2) = √π`.
pub fn gamma_half(k: u32) -> Result<PiRational> {
    if k == 0 {
        return Err(input_err!("Γ has a pole at 0"));
    }
    let (mut g, mut arg2) = if k % 2 == 0 {
        (PiRational::one(), 2u32)
    } else {
        (PiRational::new(Ratio::one(), 1), 1u32)
    };
    // Γ(x + 1) = x Γ(x), with x = arg2/2
    while arg2 < k {
        g = g.mul(PiRational::new(Ratio::new(arg2 as i128, 2), 0))?;
        arg2 += 2;
    }
    Ok(g)
}

/// `2σ` as an integer, or an error when σ is not a nonnegative half-integer.
pub fn twice_half_integer(sigma: f64) -> Result<u32> {
    let t = 2.0 * sigma;
    if !(sigma >= 0.0) || (t - t.round()).abs() > 1e-12 || t > 60.0 {
        return Err(input_err!(
            "σ = {sigma} must be a nonnegative integer or half-integer (≤ 30)"
        ));
    }
    Ok(t.round() as u32)
}

/// `L^cl_{σ,d} = (4π)^{-d/2} Γ(σ+1)/Γ(σ+d/2+1)`, exactly.
pub fn l_classical_exact(sigma: f64, d: usize) -> Result<PiRational> {
    if d == 0 {
        return Err(input_err!("dimension must be positive"));
    }
    let s2 = twice_half_integer(sigma)?;
    let num = gamma_half(s2 + 2)?;
    let den = gamma_half(s2 + d as u32 + 2)?;
    let prefactor = PiRational::new(Ratio::new(1, 1i128 << d), -(d as i32));
    prefactor.mul(num.div(den)?)
}

pub fn l_classical(sigma: f64, d: usize) -> Result<f64> {
    Ok(l_classical_exact(sigma, d)?.value())
}

/// Volume of the unit ball in `ℝ^d`, `π^{d/2}/Γ(d/2 + 1)`.
pub fn unit_ball_volume_exact(d: usize) -> Result<PiRational> {
    PiRational::new(Ratio::one(), d as i32).div(gamma_half(d as u32 + 2)?)
}

/// Surface of the unit sphere `S^d ⊂ ℝ^{d+1}`, `2π^{(d+1)/2}/Γ((d+1)/2)`.
pub fn unit_sphere_area_exact(d: usize) -> Result<PiRational> {
    PiRational::new(Ratio::from_integer(2), d as i32 + 1).div(gamma_half(d as u32 + 1)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConstants {
    pub sigma: f64,
    pub d: usize,
    pub l_cl: f64,
    /// Weyl constant `4π²·|B_d|^{-2/d}` (unit-ball normalization).
    pub c_d: f64,
    /// The same expression with the sphere surface `|S^d|` in place of the
    /// ball volume, kept for comparison.
    pub c_d_sphere_form: f64,
    pub vol_unit_ball: f64,
    pub vol_unit_sphere: f64,
}

pub fn classical_constants(sigma: f64, d: usize) -> Result<ClassicalConstants> {
    let l_cl = l_classical(sigma, d)?;
    let vol_unit_ball = unit_ball_volume_exact(d)?.value();
    let vol_unit_sphere = unit_sphere_area_exact(d)?.value();
    let e = -2.0 / d as f64;
    Ok(ClassicalConstants {
        sigma,
        d,
        l_cl,
        c_d: 4.0 * PI * PI * vol_unit_ball.powf(e),
        c_d_sphere_form: 4.0 * PI * PI * vol_unit_sphere.powf(e),
        vol_unit_ball,
        vol_unit_sphere,
    })
}

/// `4π²·|B_d|^{-2/d}`
pub fn weyl_constant(d: usize) -> Result<f64> {
    Ok(classical_constants(0.0, d)?.c_d)
}

//! Exact finite-dimensional checks of the commutator trace identities.
//!
//! A [`HermitianMatrixModel`] is a Hermitian `H` together with an auxiliary
//! operator `G`. On such a model every trace identity is a finite sum, so both
//! sides can be evaluated independently and compared to rounding error. The
//! left sides are always built from commutator matrices; the right sides from
//! eigenvector overlaps or the off-diagonal blocks `A = (1-P)GP`,
//! `B = PG(1-P)`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::linalg::{
    commutator, eigh, frobenius, hermitian_defect, trace, unitary_defect, CMat, Eigensystem,
};
use crate::quad::adaptive_simpson;
use crate::random;
use crate::report::IdentityResidualReport;

/// Default relative tolerance for exact identities at dimension ≤ 16.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Symmetry invariants of a model are checked to this relative accuracy.
pub const MODEL_TOLERANCE: f64 = 1e-13;
/// Threshold projectors refuse a cut closer than this to an eigenvalue.
pub const THRESHOLD_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GKind {
    General,
    Unitary,
    SelfAdjoint,
}

impl std::fmt::Display for GKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GKind::General => "general",
            GKind::Unitary => "unitary",
            GKind::SelfAdjoint => "self-adjoint",
        })
    }
}

/// Hermitian `H`, auxiliary `G` and the eigendecomposition of `H`.
#[derive(Debug, Clone)]
pub struct HermitianMatrixModel {
    h: CMat,
    g: CMat,
    kind: GKind,
    eig: Eigensystem,
}

impl HermitianMatrixModel {
    pub fn new(h: CMat, g: CMat, kind: GKind) -> Result<Self> {
        if !h.is_square() || h.nrows() == 0 {
            return Err(input_err!("H must be square and nonempty, got {:?}", h.shape()));
        }
        if g.shape() != h.shape() {
            return Err(input_err!(
                "G has shape {:?}, H has shape {:?}",
                g.shape(),
                h.shape()
            ));
        }
        let dh = hermitian_defect(&h);
        if dh > MODEL_TOLERANCE {
            return Err(input_err!("H is not Hermitian (relative defect {dh:.3e})"));
        }
        match kind {
            GKind::Unitary => {
                let du = unitary_defect(&g);
                if du > MODEL_TOLERANCE * (h.nrows() as f64).max(1.0) {
                    return Err(input_err!("G is not unitary (defect {du:.3e})"));
                }
            }
            GKind::SelfAdjoint => {
                let ds = hermitian_defect(&g);
                if ds > MODEL_TOLERANCE {
                    return Err(input_err!("G is not self-adjoint (relative defect {ds:.3e})"));
                }
            }
            GKind::General => {}
        }
        let eig = eigh(&h)?;
        Ok(HermitianMatrixModel { h, g, kind, eig })
    }

    /// Random model: GUE `H`, and `G` drawn from the ensemble matching `kind`.
    pub fn random<R: Rng>(rng: &mut R, dim: usize, kind: GKind) -> Result<Self> {
        let h = random::gue(rng, dim);
        let g = random_g(rng, dim, kind);
        Self::new(h, g, kind)
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }
    pub fn h(&self) -> &CMat {
        &self.h
    }
    pub fn g(&self) -> &CMat {
        &self.g
    }
    pub fn kind(&self) -> GKind {
        self.kind
    }
    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eig
    }

    /// Same `G`, `H ↦ H + c·I`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        let n = self.dim();
        let h = &self.h + CMat::identity(n, n) * Complex64::new(c, 0.0);
        Self::new(h, self.g.clone(), self.kind)
    }
}

pub fn random_g<R: Rng>(rng: &mut R, dim: usize, kind: GKind) -> CMat {
    match kind {
        GKind::General => random::complex_gaussian(rng, dim),
        GKind::Unitary => random::haar_unitary(rng, dim),
        GKind::SelfAdjoint => random::gue(rng, dim),
    }
}

/// Selects a spectral projector of `H`. Indices are zero-based positions in
/// the ascending spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectorSpec {
    Indices(Vec<usize>),
    /// All eigenvalues strictly below the threshold.
    Threshold(f64),
}

impl ProjectorSpec {
    pub fn lowest(m: usize) -> Self {
        ProjectorSpec::Indices((0..m).collect())
    }

    /// Resolve to a sorted index list against a concrete spectrum.
    pub fn resolve(&self, eig: &Eigensystem) -> Result<Vec<usize>> {
        let n = eig.dim();
        match self {
            ProjectorSpec::Indices(ix) => {
                if ix.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(input_err!("projector indices must be strictly increasing"));
                }
                if let Some(&bad) = ix.iter().find(|&&j| j >= n) {
                    return Err(input_err!("projector index {bad} out of range 0..{n}"));
                }
                Ok(ix.clone())
            }
            ProjectorSpec::Threshold(z) => {
                if let Some(l) = eig
                    .values
                    .iter()
                    .find(|&&l| (l - z).abs() < THRESHOLD_SEPARATION)
                {
                    return Err(input_err!(
                        "threshold {z} is within {THRESHOLD_SEPARATION:e} of eigenvalue {l}"
                    ));
                }
                Ok((0..n).filter(|&j| eig.values[j] < *z).collect())
            }
        }
    }
}

fn cscale(m: &CMat, x: f64) -> CMat {
    m * Complex64::new(x, 0.0)
}

/// Commutator products shared by several identities.
struct Commutators {
    hg: CMat,
    hgs: CMat,
    /// `G*[H,G] + G[H,G*]`
    first: CMat,
    /// `[H,G*][H,G] + [H,G][H,G*]`
    second: CMat,
}

impl Commutators {
    fn new(model: &HermitianMatrixModel) -> Self {
        let gs = model.g.adjoint();
        let hg = &model.h * &model.g - &model.g * &model.h;
        let hgs = &model.h * &gs - &gs * &model.h;
        let first = &gs * &hg + &model.g * &hgs;
        let second = &hgs * &hg + &hg * &hgs;
        Commutators {
            hg,
            hgs,
            first,
            second,
        }
    }
}

/// `z·I - H`
fn z_minus(h: &CMat, z: f64) -> CMat {
    let n = h.nrows();
    CMat::identity(n, n) * Complex64::new(z, 0.0) - h
}

/// Off-diagonal blocks `A = (1-P)GP`, `B = PG(1-P)`.
fn blocks(g: &CMat, p: &CMat) -> (CMat, CMat) {
    let n = g.nrows();
    let q = CMat::identity(n, n) - p;
    (&q * g * p, p * g * &q)
}

/// Unshifted trace identity: `tr(H²·first·P) − tr(H·second·P)` against
/// `tr(HA*H²A − HAH²A*) + tr(HBH²B* − HB*H²B)`.
pub fn trace_identity_residual(
    model: &HermitianMatrixModel,
    projector: &ProjectorSpec,
    tolerance: f64,
) -> Result<IdentityResidualReport> {
    let idx = projector.resolve(&model.eig)?;
    let p = model.eig.projector(&idx);
    let c = Commutators::new(model);
    let h = &model.h;
    let h2 = h * h;
    let lhs = trace(&(&h2 * &c.first * &p)) - trace(&(h * &c.second * &p));
    let (a, b) = blocks(&model.g, &p);
    let (ad, bd) = (a.adjoint(), b.adjoint());
    let rhs = trace(&(h * &ad * &h2 * &a - h * &a * &h2 * &ad))
        + trace(&(h * &b * &h2 * &bd - h * &bd * &h2 * &b));
    Ok(IdentityResidualReport::equality(
        "trace-identity",
        lhs.re,
        rhs.re,
        tolerance,
    ))
}

/// Shifted trace identity at spectral parameter `z` (the unshifted identity is
/// the case `z = 0` up to the sign conventions of `z - H`).
pub fn shifted_trace_residual(
    model: &HermitianMatrixModel,
    projector: &ProjectorSpec,
    z: f64,
    tolerance: f64,
) -> Result<IdentityResidualReport> {
    let idx = projector.resolve(&model.eig)?;
    let p = model.eig.projector(&idx);
    let c = Commutators::new(model);
    let zh = z_minus(&model.h, z);
    let zh2 = &zh * &zh;
    let lhs = trace(&(&zh2 * &c.first * &p)) + trace(&(&zh * &c.second * &p));
    let (a, b) = blocks(&model.g, &p);
    let (ad, bd) = (a.adjoint(), b.adjoint());
    let rhs = trace(&(&zh * &a * &zh2 * &ad - &zh * &ad * &zh2 * &a))
        + trace(&(&zh * &bd * &zh2 * &b - &zh * &b * &zh2 * &bd));
    Ok(IdentityResidualReport::equality(
        "shifted-trace-identity",
        lhs.re,
        rhs.re,
        tolerance,
    ))
}

/// Results of the eigenbasis form of the trace identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSumRuleReport {
    /// Second-commutator form against the double overlap sum.
    pub second_commutator_form: IdentityResidualReport,
    /// Only for unitary `G`: the `H_U = U*[H,U]` form against the overlap sum.
    pub unitary_form: Option<IdentityResidualReport>,
    /// Only for unitary `G`: the conjugated-Hamiltonian bracketing against the
    /// `H_U` form.
    pub conjugated_form: Option<IdentityResidualReport>,
    /// Only for self-adjoint `G`: the single-commutator specialization against
    /// the general form.
    pub self_adjoint_form: Option<IdentityResidualReport>,
}

impl DiscreteSumRuleReport {
    pub fn all(&self) -> impl Iterator<Item = &IdentityResidualReport> {
        std::iter::once(&self.second_commutator_form)
            .chain(self.unitary_form.iter())
            .chain(self.conjugated_form.iter())
            .chain(self.self_adjoint_form.iter())
    }

    pub fn pass(&self) -> bool {
        self.all().all(|r| r.pass)
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.all().map(|r| r.relative_residual).fold(0.0, f64::max)
    }
}

/// `⟨M φ_j, φ_j⟩` for every eigenvector.
fn expectations(m: &CMat, phi: &CMat) -> Vec<f64> {
    let mp = m * phi;
    (0..phi.ncols())
        .map(|j| phi.column(j).dotc(&mp.column(j)).re)
        .collect()
}

/// `‖M φ_j‖²` for every eigenvector.
fn norms_sq(m: &CMat, phi: &CMat) -> Vec<f64> {
    let mp = m * phi;
    (0..phi.ncols()).map(|j| mp.column(j).norm_squared()).collect()
}

/// Eigenbasis form of the shifted identity for an index set `J`.
pub fn discrete_sum_rule_residual(
    model: &HermitianMatrixModel,
    j_set: &[usize],
    z: f64,
    tolerance: f64,
) -> Result<DiscreteSumRuleReport> {
    let n = model.dim();
    if j_set.is_empty() {
        return Err(input_err!("index set J must be nonempty"));
    }
    let j_set = ProjectorSpec::Indices(j_set.to_vec()).resolve(&model.eig)?;
    let in_j: Vec<bool> = (0..n).map(|k| j_set.contains(&k)).collect();
    let lam = &model.eig.values;
    let phi = &model.eig.vectors;
    let g = &model.g;
    let gs = g.adjoint();

    // right side: overlaps only
    let s = phi.adjoint() * g * phi; // s[(k, j)] = ⟨G φ_j, φ_k⟩ up to conjugation
    let overlap = |j: usize, k: usize| s[(k, j)].norm_sqr() + s[(j, k)].norm_sqr();
    let mut rhs = 0.0;
    for &j in &j_set {
        for k in (0..n).filter(|&k| !in_j[k]) {
            rhs += (z - lam[j]) * (z - lam[k]) * (lam[k] - lam[j]) * overlap(j, k);
        }
    }

    // left side: second commutators
    let c = Commutators::new(model);
    let gsg = commutator(&gs, &c.hg)?;
    let ggs = commutator(g, &c.hgs)?;
    let e2 = expectations(&(&gsg + &ggs), phi);
    let n1 = norms_sq(&c.hg, phi);
    let n2 = norms_sq(&c.hgs, phi);
    let lhs: f64 = j_set
        .iter()
        .map(|&j| {
            let w = z - lam[j];
            0.5 * w * w * e2[j] - w * (n1[j] + n2[j])
        })
        .sum();
    let second_commutator_form =
        IdentityResidualReport::equality("sum-rule-second-commutator", lhs, rhs, tolerance);

    let (unitary_form, conjugated_form) = if model.kind == GKind::Unitary {
        let u = g;
        let ud = &gs;
        let uhu = ud * &model.h * u; // U* H U
        let uhud = u * &model.h * ud; // U H U*
        let h_u = &uhu - &model.h;
        let h_us = &uhud - &model.h;
        let eu = expectations(&(&h_u + &h_us), phi);
        let nu = norms_sq(&h_u, phi);
        let nus = norms_sq(&h_us, phi);
        let lhs_u3: f64 = j_set
            .iter()
            .map(|&j| {
                let w = z - lam[j];
                w * w * eu[j] - w * (nu[j] + nus[j])
            })
            .sum();

        // bracketing with conjugated Hamiltonians; every factor recomputed from
        // matrices rather than eigenvalues
        let zh = z_minus(&model.h, z);
        let n_zh = norms_sq(&zh, phi);
        let e_zh = expectations(&zh, phi);
        let two_z = CMat::identity(n, n) * Complex64::new(2.0 * z, 0.0);
        let e_mid = expectations(&(two_z - &uhud - &uhu), phi);
        let n_a = norms_sq(&z_minus(&uhud, z), phi);
        let n_b = norms_sq(&z_minus(&uhu, z), phi);
        let lhs_u4: f64 = j_set
            .iter()
            .map(|&j| n_zh[j] * e_mid[j] - e_zh[j] * (n_a[j] + n_b[j]))
            .sum();
        (
            Some(IdentityResidualReport::equality(
                "sum-rule-unitary",
                lhs_u3,
                rhs,
                tolerance,
            )),
            Some(IdentityResidualReport::equality(
                "sum-rule-conjugated",
                lhs_u4,
                lhs_u3,
                tolerance,
            )),
        )
    } else {
        (None, None)
    };

    let self_adjoint_form = if model.kind == GKind::SelfAdjoint {
        // G = G*: both commutator terms coincide
        let e = expectations(&gsg, phi);
        let lhs_sa: f64 = j_set
            .iter()
            .map(|&j| {
                let w = z - lam[j];
                w * w * e[j] - 2.0 * w * n1[j]
            })
            .sum();
        Some(IdentityResidualReport::equality(
            "sum-rule-self-adjoint",
            lhs_sa,
            lhs,
            tolerance,
        ))
    } else {
        None
    };

    Ok(DiscreteSumRuleReport {
        second_commutator_form,
        unitary_form,
        conjugated_form,
        self_adjoint_form,
    })
}

/// Matrix identity
/// `G*[H,G] + G[H,G*] = ½[G*,[H,G]] + ½[G,[H,G*]] + ½[H, GG* + G*G]`,
/// residual measured as a Frobenius norm relative to the larger side.
pub fn second_commutator_identity_residual(
    model: &HermitianMatrixModel,
    tolerance: f64,
) -> Result<IdentityResidualReport> {
    let g = &model.g;
    let gs = g.adjoint();
    let h = &model.h;
    let hg = commutator(h, g)?;
    let hgs = commutator(h, &gs)?;
    let lhs = &gs * &hg + g * &hgs;
    let rhs = cscale(
        &(commutator(&gs, &hg)? + commutator(g, &hgs)? + commutator(h, &(g * &gs + &gs * g))?),
        0.5,
    );
    let diff = frobenius(&(&lhs - &rhs));
    let scale = frobenius(&lhs).max(frobenius(&rhs));
    Ok(IdentityResidualReport::from_norm(
        "second-commutator-identity",
        diff,
        scale,
        tolerance,
    ))
}

/// Gap inequality: for `HP ≤ λ < Λ ≤ H(1-P)` and `z ∈ [λ, Λ]`, the shifted
/// trace expression is at most `tr(first·P)(z-λ)(z-Λ)`.
pub fn gap_slack(
    model: &HermitianMatrixModel,
    projector: &ProjectorSpec,
    lambda_cap: f64,
    lambda_floor: f64,
    z: f64,
    tolerance: f64,
) -> Result<IdentityResidualReport> {
    let idx = projector.resolve(&model.eig)?;
    let lam = &model.eig.values;
    let eps = 1e-12 * lam.iter().fold(1f64, |m, l| m.max(l.abs()));
    if lambda_cap >= lambda_floor {
        return Err(Error::Precondition(format!(
            "need lambda_cap < lambda_floor, got {lambda_cap} ≥ {lambda_floor}"
        )));
    }
    for (j, &l) in lam.iter().enumerate() {
        let inside = idx.contains(&j);
        if inside && l > lambda_cap + eps {
            return Err(Error::Precondition(format!(
                "eigenvalue {l} under P exceeds lambda_cap {lambda_cap}"
            )));
        }
        if !inside && l < lambda_floor - eps {
            return Err(Error::Precondition(format!(
                "eigenvalue {l} under 1-P is below lambda_floor {lambda_floor}"
            )));
        }
    }
    if z < lambda_cap - eps || z > lambda_floor + eps {
        return Err(Error::Precondition(format!(
            "z = {z} outside [{lambda_cap}, {lambda_floor}]"
        )));
    }
    let p = model.eig.projector(&idx);
    let c = Commutators::new(model);
    let zh = z_minus(&model.h, z);
    let lhs = trace(&(&zh * &zh * &c.first * &p)) + trace(&(&zh * &c.second * &p));
    let rhs = trace(&(&c.first * &p)) * (z - lambda_cap) * (z - lambda_floor);
    Ok(IdentityResidualReport::at_most(
        "gap-inequality",
        lhs.re,
        rhs.re,
        tolerance,
    ))
}

/// Outcome of the `f(t) = t^σ` gap inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FGapReport {
    pub sigma: f64,
    /// `lhs ≤ 0` report; slack is `-lhs`.
    pub inequality: IdentityResidualReport,
    /// Worst relative error of `f(s) = ½∫(s-t)₊² f'''(t) dt` over `s = z - λ_j > 0`.
    pub representation_error: f64,
}

impl FGapReport {
    pub fn pass(&self) -> bool {
        self.inequality.pass && self.representation_error <= 1e-6
    }
}

/// `½∫₀^s (s-t)² f'''(t) dt` for `f(t) = t^σ`, by adaptive quadrature after the
/// substitution `t = s·u²` (which removes the endpoint singularity of
/// `t^{σ-3}` for non-integer σ).
pub fn power_representation_quadrature(sigma: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let c3 = sigma * (sigma - 1.0) * (sigma - 2.0);
    let integrand = |u: f64| {
        let t = s * u * u;
        let w = s - t;
        w * w * c3 * t.powf(sigma - 3.0) * 2.0 * s * u
    };
    let scale = s.powf(sigma).max(f64::MIN_POSITIVE);
    0.5 * adaptive_simpson(&integrand, 0.0, 1.0, 1e-12 * scale)
}

/// `tr(f((z-H)₊)·first) + ½tr(f'((z-H)₊)·second) ≤ 0` for `f(t) = t^σ`, σ ≥ 3.
pub fn f_gap_slack(
    model: &HermitianMatrixModel,
    z: f64,
    sigma: f64,
    tolerance: f64,
) -> Result<FGapReport> {
    if !(sigma >= 3.0) {
        return Err(input_err!(
            "f(t) = t^σ needs σ ≥ 3 so that f(0) = f'(0) = f''(0) = 0, got σ = {sigma}"
        ));
    }
    let below = ProjectorSpec::Threshold(z).resolve(&model.eig)?;
    let lam = &model.eig.values;
    let phi = &model.eig.vectors;
    let n = model.dim();
    let mut f_diag = vec![0.0; n];
    let mut fp_diag = vec![0.0; n];
    let mut rep_err: f64 = 0.0;
    for &j in &below {
        let s = z - lam[j];
        f_diag[j] = s.powf(sigma);
        fp_diag[j] = sigma * s.powf(sigma - 1.0);
        let q = power_representation_quadrature(sigma, s);
        rep_err = rep_err.max((q - f_diag[j]).abs() / f_diag[j].abs().max(f64::MIN_POSITIVE));
    }
    let spectral = |d: &[f64]| {
        let dm = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            d.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        phi * dm * phi.adjoint()
    };
    let c = Commutators::new(model);
    let lhs = trace(&(spectral(&f_diag) * &c.first)) + trace(&(spectral(&fp_diag) * &c.second)) * 0.5;
    Ok(FGapReport {
        sigma,
        inequality: IdentityResidualReport::at_most("f-gap-inequality", lhs.re, 0.0, tolerance),
        representation_error: rep_err,
    })
}

/// Tolerance for identities at a given dimension: the default up to 16,
/// growing linearly with `dim × κ` beyond, where κ is the caller's condition
/// estimate.
pub fn scaled_tolerance(dim: usize, condition: f64) -> f64 {
    if dim <= 16 {
        DEFAULT_TOLERANCE
    } else {
        DEFAULT_TOLERANCE * (dim as f64 / 16.0) * condition.max(1.0)
    }
}

/// One randomized verification trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub dim: usize,
    pub kind: GKind,
    pub z: f64,
    pub projector_rank: usize,
    pub checks: Vec<IdentityResidualReport>,
    pub f_gap_representation_error: f64,
    pub max_relative_residual: f64,
    pub pass: bool,
}

/// Parameters of a batch of randomized trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub seed: u64,
    pub trials: u64,
    /// Fixed dimension, or `None` to cycle through 2..=12.
    pub dim: Option<usize>,
    /// Fixed kind, or `None` to cycle through all three.
    pub kind: Option<GKind>,
    pub tolerance: f64,
    pub f_sigma: f64,
}

impl TrialPlan {
    fn dim_for(&self, trial: u64) -> usize {
        self.dim.unwrap_or(2 + (trial % 11) as usize)
    }
    fn kind_for(&self, trial: u64) -> GKind {
        self.kind.unwrap_or(match trial % 3 {
            0 => GKind::General,
            1 => GKind::Unitary,
            _ => GKind::SelfAdjoint,
        })
    }
}

/// Run one trial: a random model checked against every identity, and a gapped
/// model with the same `G` checked against both gap inequalities.
pub fn run_trial(plan: &TrialPlan, trial: u64) -> Result<TrialRecord> {
    let dim = plan.dim_for(trial);
    if dim < 2 {
        return Err(input_err!("trials need dimension ≥ 2, got {dim}"));
    }
    let kind = plan.kind_for(trial);
    let tol = plan.tolerance;
    let mut rng = random::trial_rng(plan.seed, trial);
    let model = HermitianMatrixModel::random(&mut rng, dim, kind)?;
    let lam = &model.eigensystem().values;
    let (lo, hi) = (lam[0], lam[dim - 1]);
    let z = lo - 1.0 + (hi - lo + 2.0) * rng.random::<f64>();
    let rank = rng.random_range(1..dim);
    let proj = ProjectorSpec::lowest(rank);

    let mut checks = vec![
        trace_identity_residual(&model, &proj, tol)?,
        shifted_trace_residual(&model, &proj, z, tol)?,
        second_commutator_identity_residual(&model, tol)?,
    ];
    let mut subset: Vec<usize> = (0..dim).filter(|_| rng.random::<bool>()).collect();
    if subset.is_empty() {
        subset.push(rng.random_range(0..dim));
    }
    checks.extend(discrete_sum_rule_residual(&model, &subset, z, tol)?.all().cloned());

    // gapped companion: spectrum split into [0,1] ∪ [2,3]
    let spec = random::gapped_spectrum(&mut rng, dim, rank, (0.0, 1.0), (2.0, 3.0));
    let gapped = HermitianMatrixModel::new(random::with_spectrum(&mut rng, &spec), model.g().clone(), kind)?;
    let gl = &gapped.eigensystem().values;
    let (cap, floor) = (gl[rank - 1], gl[rank]);
    let zg = cap + (floor - cap) * (0.01 + 0.98 * rng.random::<f64>());
    checks.push(gap_slack(&gapped, &proj, cap, floor, zg, tol)?);
    let fg = f_gap_slack(&gapped, zg, plan.f_sigma, tol)?;
    checks.push(fg.inequality.clone());

    let max_relative_residual = checks
        .iter()
        .map(|r| match r.relation {
            crate::report::Relation::Equal => r.relative_residual,
            crate::report::Relation::AtMost => (r.residual / 1f64.max(r.lhs.abs()).max(r.rhs.abs())).max(0.0),
        })
        .fold(0.0, f64::max);
    let pass = checks.iter().all(|r| r.pass) && fg.representation_error <= 1e-6;
    Ok(TrialRecord {
        trial,
        dim,
        kind,
        z,
        projector_rank: rank,
        checks,
        f_gap_representation_error: fg.representation_error,
        max_relative_residual,
        pass,
    })
}

/// All trials of a plan, in parallel, collected in trial order.
pub fn run_trials(plan: &TrialPlan) -> Result<Vec<TrialRecord>> {
    (0..plan.trials)
        .into_par_iter()
        .map(|t| run_trial(plan, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::trial_rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| c(x))))
    }

    #[test]
    fn commuting_model_gives_zero_on_both_sides() {
        let m = HermitianMatrixModel::new(diag(&[0.3, 1.0, 2.5, 4.0]), diag(&[2.0, -1.0, 0.5, 3.0]), GKind::SelfAdjoint)
            .unwrap();
        for z in [-1.0, 0.7, 3.3] {
            let r = shifted_trace_residual(&m, &ProjectorSpec::lowest(2), z, 1e-12).unwrap();
            assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn random_shifted_identity_dim8() {
        let mut rng = trial_rng(11, 0);
        let m = HermitianMatrixModel::random(&mut rng, 8, GKind::General).unwrap();
        let r = shifted_trace_residual(&m, &ProjectorSpec::lowest(3), 0.7, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.lhs.abs() > 1e-3, "identity should be nontrivial");
    }

    #[test]
    fn unshifted_identity_matches_shifted_at_zero() {
        let mut rng = trial_rng(12, 0);
        let m = HermitianMatrixModel::random(&mut rng, 6, GKind::Unitary).unwrap();
        let a = trace_identity_residual(&m, &ProjectorSpec::lowest(2), 1e-10).unwrap();
        let b = shifted_trace_residual(&m, &ProjectorSpec::lowest(2), 0.0, 1e-10).unwrap();
        assert!(a.pass && b.pass);
        assert!((a.lhs - b.lhs).abs() <= 1e-10 * a.lhs.abs().max(1.0));
    }

    /// Discrete analogue of the momentum-space integral operator: kinetic
    /// diagonal plus a circulant convolution, commuted with the cyclic shift.
    #[test]
    fn circulant_model_with_cyclic_shift() {
        let n = 9;
        let kinetic = |p: f64| (p * p + 1.0).sqrt() - 1.0;
        let conv = [0.0, -0.4, 0.15, 0.05];
        let h = CMat::from_fn(n, n, |i, j| {
            let d = (i as i64 - j as i64).rem_euclid(n as i64) as usize;
            let d = d.min(n - d);
            let v = if d < conv.len() { conv[d] } else { 0.0 };
            let t = if i == j { kinetic(i as f64 - 4.0) } else { 0.0 };
            c(t + v)
        });
        let u = CMat::from_fn(n, n, |i, j| if i == (j + 1) % n { c(1.0) } else { c(0.0) });
        let m = HermitianMatrixModel::new(h, u, GKind::Unitary).unwrap();
        for z in [-0.5, 0.8, 2.0] {
            let r = shifted_trace_residual(&m, &ProjectorSpec::Threshold(z + 1e-3), z, 1e-10);
            if let Ok(r) = r {
                assert!(r.pass, "{r:?}");
            }
            let ds = discrete_sum_rule_residual(&m, &[0, 1, 2], z, 1e-10).unwrap();
            assert!(ds.pass(), "{ds:?}");
        }
    }

    #[test]
    fn identity_g_gives_zero_sum_rule() {
        let mut rng = trial_rng(3, 0);
        let h = random::gue(&mut rng, 5);
        let m = HermitianMatrixModel::new(h, CMat::identity(5, 5), GKind::Unitary).unwrap();
        let r = discrete_sum_rule_residual(&m, &[0, 1], 0.2, 1e-10).unwrap();
        assert!(r.second_commutator_form.lhs.abs() < 1e-12);
        assert!(r.second_commutator_form.rhs.abs() < 1e-12);
    }

    #[test]
    fn unitary_sum_rule_forms_agree() {
        let mut rng = trial_rng(5, 0);
        let m = HermitianMatrixModel::random(&mut rng, 10, GKind::Unitary).unwrap();
        let lam = &m.eigensystem().values;
        let z = 0.5 * (lam[3] + lam[4]);
        let r = discrete_sum_rule_residual(&m, &[0, 1, 2, 3], z, 1e-10).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(r.unitary_form.is_some() && r.conjugated_form.is_some());
    }

    #[test]
    fn full_index_set_has_empty_complement() {
        let mut rng = trial_rng(6, 0);
        let m = HermitianMatrixModel::random(&mut rng, 6, GKind::SelfAdjoint).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let r = discrete_sum_rule_residual(&m, &all, 0.3, 1e-10).unwrap();
        assert_eq!(r.second_commutator_form.rhs, 0.0);
        assert!(r.second_commutator_form.relative_residual <= 1e-10, "{r:?}");
        assert!(r.self_adjoint_form.unwrap().pass);
    }

    #[test]
    fn sum_rule_rejects_bad_index_sets() {
        let mut rng = trial_rng(6, 1);
        let m = HermitianMatrixModel::random(&mut rng, 4, GKind::General).unwrap();
        assert!(discrete_sum_rule_residual(&m, &[], 0.0, 1e-10).is_err());
        assert!(discrete_sum_rule_residual(&m, &[1, 7], 0.0, 1e-10).is_err());
    }

    #[test]
    fn second_commutator_identity_cases() {
        let diag_u = diag(&[1.0, -1.0, 1.0]);
        let m = HermitianMatrixModel::new(diag(&[0.0, 1.0, 2.0]), diag_u, GKind::Unitary).unwrap();
        let r = second_commutator_identity_residual(&m, 1e-12).unwrap();
        assert_eq!(r.residual, 0.0);
        for kind in [GKind::General, GKind::SelfAdjoint] {
            let mut rng = trial_rng(8, kind as u64);
            let m = HermitianMatrixModel::random(&mut rng, 6, kind).unwrap();
            let r = second_commutator_identity_residual(&m, 1e-12).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn gap_two_by_two() {
        let h = diag(&[0.0, 1.0]);
        let g = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let m = HermitianMatrixModel::new(h, g, GKind::SelfAdjoint).unwrap();
        let p = ProjectorSpec::lowest(1);
        let r = gap_slack(&m, &p, 0.0, 1.0, 0.5, 1e-10).unwrap();
        assert!(r.pass && r.slack() >= -1e-14, "{r:?}");
        // boundary z = lambda_cap with the lone eigenvalue sitting exactly there
        let r = gap_slack(&m, &p, 0.0, 1.0, 0.0, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn gap_random_samples() {
        let mut rng = trial_rng(21, 0);
        let spec = random::gapped_spectrum(&mut rng, 12, 5, (0.0, 1.0), (2.0, 3.0));
        let h = random::with_spectrum(&mut rng, &spec);
        let g = random::complex_gaussian(&mut rng, 12);
        let m = HermitianMatrixModel::new(h, g, GKind::General).unwrap();
        let p = ProjectorSpec::lowest(5);
        for i in 0..20 {
            let z = 1.0 + i as f64 / 19.0;
            let r = gap_slack(&m, &p, 1.0, 2.0, z, 1e-10).unwrap();
            assert!(r.pass, "z = {z}: {r:?}");
        }
    }

    #[test]
    fn gap_precondition_is_enforced() {
        let h = diag(&[0.0, 1.0, 2.0]);
        let g = CMat::identity(3, 3);
        let m = HermitianMatrixModel::new(h, g, GKind::Unitary).unwrap();
        let p = ProjectorSpec::lowest(1);
        assert!(matches!(gap_slack(&m, &p, 0.5, 1.5, 1.0, 1e-10), Err(Error::Precondition(_))));
        assert!(matches!(gap_slack(&m, &p, 0.0, 1.0, 1.5, 1e-10), Err(Error::Precondition(_))));
        assert!(matches!(gap_slack(&m, &p, 1.0, 0.5, 0.7, 1e-10), Err(Error::Precondition(_))));
    }

    #[test]
    fn power_representation() {
        // σ = 3: f''' ≡ 6 and the integral is a polynomial identity
        for s in [0.1, 1.0, 2.7] {
            let q = power_representation_quadrature(3.0, s);
            assert!((q - s.powi(3)).abs() <= 1e-12 * s.powi(3).max(1.0));
        }
        for sigma in [3.5, 4.0, 5.25] {
            let q = power_representation_quadrature(sigma, 1.3);
            assert!((q / 1.3f64.powf(sigma) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn f_gap_cases() {
        let mut rng = trial_rng(30, 0);
        let spec = random::gapped_spectrum(&mut rng, 10, 4, (0.0, 1.0), (2.0, 3.0));
        let h = random::with_spectrum(&mut rng, &spec);
        let g = random::complex_gaussian(&mut rng, 10);
        let m = HermitianMatrixModel::new(h, g, GKind::General).unwrap();
        let r = f_gap_slack(&m, 1.5, 3.0, 1e-10).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(matches!(f_gap_slack(&m, 1.5, 2.0, 1e-10), Err(Error::Input(_))));
    }

    #[test]
    fn threshold_projector_refuses_ties() {
        let m = HermitianMatrixModel::new(diag(&[0.0, 1.0]), CMat::identity(2, 2), GKind::Unitary).unwrap();
        assert!(ProjectorSpec::Threshold(1.0).resolve(m.eigensystem()).is_err());
        assert_eq!(ProjectorSpec::Threshold(0.5).resolve(m.eigensystem()).unwrap(), vec![0]);
    }

    #[test]
    fn model_validation() {
        let bad_u = diag(&[2.0, 1.0]);
        assert!(HermitianMatrixModel::new(diag(&[0.0, 1.0]), bad_u, GKind::Unitary).is_err());
        let non_herm = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(HermitianMatrixModel::new(non_herm.clone(), CMat::identity(2, 2), GKind::General).is_err());
        assert!(HermitianMatrixModel::new(diag(&[0.0, 1.0]), non_herm, GKind::SelfAdjoint).is_err());
    }

    #[test]
    fn trial_is_deterministic() {
        let plan = TrialPlan { seed: 42, trials: 4, dim: Some(8), kind: None, tolerance: 1e-10, f_sigma: 3.0 };
        let a = run_trials(&plan).unwrap();
        let b = run_trials(&plan).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|t| t.pass), "{a:#?}");
    }
}

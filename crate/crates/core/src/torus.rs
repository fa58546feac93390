//! Plane-wave discretization of `H_α = -αΔ + V` on a rectangular torus with
//! quasimomentum `k`.
//!
//! Modes are `e_n(x) = e^{i p_n·x}/√|Ω|` with `p_n = Q n + k`, `Q = diag(2π/L_ℓ)`,
//! over the symmetric integer box `|n_ℓ| ≤ N_ℓ` in lexicographic order.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::linalg::{eigh, CMat};
use crate::report::IdentityResidualReport;

/// Largest accepted magnitude of a harmonic index component.
pub const MAX_HARMONIC: i64 = 1 << 20;
/// Relative width of an eigenvalue cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

/// Default box half-width per axis by dimension.
pub fn default_half_width(d: usize) -> usize {
    match d {
        1 => 20,
        2 => 12,
        _ => 6,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometryConfig", into = "GeometryConfig")]
pub struct TorusGeometry {
    lengths: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub d: usize,
    pub lengths: Vec<f64>,
}

impl TryFrom<GeometryConfig> for TorusGeometry {
    type Error = Error;
    fn try_from(c: GeometryConfig) -> Result<Self> {
        if c.lengths.len() != c.d {
            return Err(input_err!(
                "geometry.d = {} but {} lengths given",
                c.d,
                c.lengths.len()
            ));
        }
        TorusGeometry::new(c.lengths)
    }
}

impl From<TorusGeometry> for GeometryConfig {
    fn from(g: TorusGeometry) -> Self {
        GeometryConfig {
            d: g.d(),
            lengths: g.lengths,
        }
    }
}

impl TorusGeometry {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&lengths.len()) {
            return Err(input_err!("torus dimension must be 1, 2 or 3, got {}", lengths.len()));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(input_err!("side lengths must be finite and positive, got {l}"));
        }
        Ok(TorusGeometry { lengths })
    }

    /// `[0, 2π]^d`
    pub fn standard(d: usize) -> Result<Self> {
        Self::new(vec![2.0 * PI; d])
    }

    pub fn d(&self) -> usize {
        self.lengths.len()
    }
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }
    /// `q_ℓ = 2π/L_ℓ`
    pub fn dual_basis(&self) -> Vec<f64> {
        self.lengths.iter().map(|l| 2.0 * PI / l).collect()
    }
    /// `g = (1/d) Σ q_ℓ²`
    pub fn g(&self) -> f64 {
        self.dual_basis().iter().map(|q| q * q).sum::<f64>() / self.d() as f64
    }
    /// `gd/4`, the rate of the universal shift.
    pub fn shift_rate(&self) -> f64 {
        self.g() * self.d() as f64 / 4.0
    }
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }
    /// Physical vector `Q m` of an integer dual-lattice vector.
    pub fn dual_vector(&self, m: &[i64]) -> Vec<f64> {
        self.dual_basis().iter().zip(m).map(|(q, &mi)| q * mi as f64).collect()
    }
    /// `p_n = Q n + k`
    pub fn momentum(&self, n: &[i64], k: &[f64]) -> Vec<f64> {
        self.dual_basis()
            .iter()
            .zip(n)
            .zip(k)
            .map(|((q, &ni), ki)| q * ni as f64 + ki)
            .collect()
    }

    /// Rejects `k` outside the cell `[-q_ℓ/2, q_ℓ/2)`.
    pub fn check_quasimomentum(&self, k: &[f64]) -> Result<()> {
        if k.len() != self.d() {
            return Err(input_err!("quasimomentum has {} components, expected {}", k.len(), self.d()));
        }
        for (l, (ki, q)) in k.iter().zip(self.dual_basis()).enumerate() {
            if !(ki.is_finite() && *ki >= -q / 2.0 && *ki < q / 2.0) {
                return Err(input_err!(
                    "k[{l}] = {ki} outside the Brillouin cell [{}, {})",
                    -q / 2.0,
                    q / 2.0
                ));
            }
        }
        Ok(())
    }
}

/// Finite trigonometric polynomial `V(x) = Σ V̂(m) e^{i (Qm)·x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(try_from = "PotentialConfig", into = "PotentialConfig")]
pub struct PotentialSpec {
    coefficients: BTreeMap<Vec<i64>, Complex64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default)]
    pub fourier: Vec<FourierTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub n: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl TryFrom<PotentialConfig> for PotentialSpec {
    type Error = Error;
    fn try_from(c: PotentialConfig) -> Result<Self> {
        let mut map = BTreeMap::new();
        for t in c.fourier {
            if map.insert(t.n.clone(), Complex64::new(t.re, t.im)).is_some() {
                return Err(input_err!("duplicate Fourier coefficient for n = {:?}", t.n));
            }
        }
        PotentialSpec::new(map)
    }
}

impl From<PotentialSpec> for PotentialConfig {
    fn from(p: PotentialSpec) -> Self {
        PotentialConfig {
            fourier: p
                .coefficients
                .into_iter()
                .map(|(n, c)| FourierTerm { n, re: c.re, im: c.im })
                .collect(),
        }
    }
}

impl PotentialSpec {
    pub fn new(coefficients: BTreeMap<Vec<i64>, Complex64>) -> Result<Self> {
        let mut dims = coefficients.keys().map(Vec::len);
        if let Some(d) = dims.next() {
            if dims.any(|e| e != d) {
                return Err(input_err!("Fourier indices have mixed dimensions"));
            }
        }
        let scale = coefficients.values().map(|c| c.norm()).fold(0.0, f64::max);
        for (m, c) in &coefficients {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(input_err!("non-finite coefficient at {m:?}"));
            }
            if m.iter().any(|x| x.abs() > MAX_HARMONIC) {
                return Err(input_err!(
                    "harmonic {m:?} outside the representable range |n| ≤ {MAX_HARMONIC}"
                ));
            }
            let neg: Vec<i64> = m.iter().map(|x| -x).collect();
            let partner = coefficients.get(&neg).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > 1e-12 * scale.max(1.0) {
                return Err(input_err!(
                    "V̂({neg:?}) = {partner} is not the conjugate of V̂({m:?}) = {c}; V must be real"
                ));
            }
        }
        Ok(PotentialSpec { coefficients })
    }

    pub fn zero() -> Self {
        PotentialSpec::default()
    }

    /// `V ≡ c`
    pub fn constant(d: usize, c: f64) -> Self {
        let mut m = BTreeMap::new();
        if c != 0.0 {
            m.insert(vec![0; d], Complex64::new(c, 0.0));
        }
        PotentialSpec { coefficients: m }
    }

    /// `V(x) = 2a·cos(q₁ x₁)` on a torus of dimension `d`.
    pub fn cosine(d: usize, a: f64) -> Self {
        let mut e = vec![0; d];
        e[0] = 1;
        let ne: Vec<i64> = e.iter().map(|x| -x).collect();
        let mut m = BTreeMap::new();
        m.insert(e, Complex64::new(a, 0.0));
        m.insert(ne, Complex64::new(a, 0.0));
        PotentialSpec { coefficients: m }
    }

    pub fn coefficients(&self) -> &BTreeMap<Vec<i64>, Complex64> {
        &self.coefficients
    }

    pub fn check_dimension(&self, d: usize) -> Result<()> {
        match self.coefficients.keys().next() {
            Some(m) if m.len() != d => Err(input_err!(
                "potential harmonics have dimension {}, geometry has {d}",
                m.len()
            )),
            _ => Ok(()),
        }
    }

    /// Highest harmonic per axis, `K_ℓ = max |m_ℓ|`.
    pub fn max_harmonic(&self, d: usize) -> Vec<i64> {
        let mut k = vec![0; d];
        for m in self.coefficients.keys() {
            for (kl, ml) in k.iter_mut().zip(m) {
                *kl = (*kl).max(ml.abs());
            }
        }
        k
    }

    /// Mean value `V̂(0)`.
    pub fn mean(&self) -> f64 {
        self.coefficients
            .iter()
            .find(|(m, _)| m.iter().all(|&x| x == 0))
            .map_or(0.0, |(_, c)| c.re)
    }

    pub fn evaluate(&self, geom: &TorusGeometry, x: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .map(|(m, c)| {
                let phase: f64 = geom.dual_vector(m).iter().zip(x).map(|(a, b)| a * b).sum();
                (c * Complex64::from_polar(1.0, phase)).re
            })
            .sum()
    }

    /// Values on the uniform grid with `points[ℓ]` nodes per axis.
    pub fn sample(&self, geom: &TorusGeometry, points: &[usize]) -> Vec<f64> {
        let d = geom.d();
        let total: usize = points.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        for _ in 0..total {
            for l in 0..d {
                x[l] = geom.lengths()[l] * idx[l] as f64 / points[l] as f64;
            }
            out.push(self.evaluate(geom, &x));
            for l in (0..d).rev() {
                idx[l] += 1;
                if idx[l] < points[l] {
                    break;
                }
                idx[l] = 0;
            }
        }
        out
    }

    fn grid_points(&self, d: usize, factor: usize) -> Vec<usize> {
        self.max_harmonic(d)
            .iter()
            .map(|&k| (factor * k.max(1) as usize).max(32))
            .collect()
    }

    /// Largest value over the 4× and 8× sample grids.
    pub fn sup_v(&self, geom: &TorusGeometry) -> f64 {
        [4, 8]
            .iter()
            .flat_map(|&f| self.sample(geom, &self.grid_points(geom.d(), f)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest value over the 4× and 8× sample grids.
    pub fn inf_v(&self, geom: &TorusGeometry) -> f64 {
        [4, 8]
            .iter()
            .flat_map(|&f| self.sample(geom, &self.grid_points(geom.d(), f)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Certified lower bound on `inf V`: the 8× grid minimum minus the
    /// second-order Taylor error at the nearest node, never below
    /// `V̂(0) - Σ_{m≠0} |V̂(m)|`.
    pub fn inf_v_lower(&self, geom: &TorusGeometry) -> f64 {
        let d = geom.d();
        let points = self.grid_points(d, 8);
        let sampled = self.sample(geom, &points).into_iter().fold(f64::INFINITY, f64::min);
        let hessian: f64 = self
            .coefficients
            .iter()
            .map(|(m, c)| c.norm() * norm_sq(&geom.dual_vector(m)))
            .sum();
        let offset_sq: f64 = geom
            .lengths()
            .iter()
            .zip(&points)
            .map(|(l, &p)| (0.5 * l / p as f64).powi(2))
            .sum();
        let crude = 2.0 * self.mean() - self.coefficient_bound();
        (sampled - 0.5 * hessian * offset_sq).max(crude)
    }

    /// Rigorous upper bound `V̂(0) + Σ_{m≠0} |V̂(m)|`.
    pub fn coefficient_bound(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|(m, c)| if m.iter().all(|&x| x == 0) { c.re } else { c.norm() })
            .sum()
    }
}

/// Integer modes of the symmetric box `|n_ℓ| ≤ N_ℓ`, lexicographic.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveBasis {
    half_widths: Vec<usize>,
    modes: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
}

impl PlaneWaveBasis {
    pub fn new(half_widths: Vec<usize>) -> Result<Self> {
        if !(1..=3).contains(&half_widths.len()) {
            return Err(input_err!("basis dimension must be 1, 2 or 3"));
        }
        let count = half_widths
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(2 * n + 1))
            .filter(|&c| c <= 20_000)
            .ok_or_else(|| Error::Capacity(format!("basis box {half_widths:?} too large for dense solves")))?;
        let mut modes = Vec::with_capacity(count);
        let mut cur: Vec<i64> = half_widths.iter().map(|&n| -(n as i64)).collect();
        for _ in 0..count {
            modes.push(cur.clone());
            for l in (0..cur.len()).rev() {
                cur[l] += 1;
                if cur[l] <= half_widths[l] as i64 {
                    break;
                }
                cur[l] = -(half_widths[l] as i64);
            }
        }
        let index = modes.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Ok(PlaneWaveBasis {
            half_widths,
            modes,
            index,
        })
    }

    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; d])
    }

    pub fn d(&self) -> usize {
        self.half_widths.len()
    }
    pub fn len(&self) -> usize {
        self.modes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
    pub fn half_widths(&self) -> &[usize] {
        &self.half_widths
    }
    pub fn modes(&self) -> &[Vec<i64>] {
        &self.modes
    }
    pub fn index_of(&self, n: &[i64]) -> Option<usize> {
        self.index.get(n).copied()
    }

    /// Is `n` at least `margin[ℓ]` away from the box faces on every axis?
    pub fn is_interior(&self, n: &[i64], margin: &[i64]) -> bool {
        n.iter()
            .zip(&self.half_widths)
            .zip(margin)
            .all(|((x, &w), m)| x.abs() + m <= w as i64)
    }

    /// Largest kinetic energy `α|p_n|²` in the basis, the energy cutoff.
    pub fn energy_cutoff(&self, geom: &TorusGeometry, alpha: f64, k: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|n| alpha * norm_sq(&geom.momentum(n, k)))
            .fold(0.0, f64::max)
    }

    /// Shift `e_n ↦ e_{n-m}` applied to the columns of `v` (coefficients that
    /// leave the box are dropped).
    pub fn shift_coefficients(&self, v: &CMat, m: &[i64]) -> CMat {
        let mut out = CMat::zeros(v.nrows(), v.ncols());
        for (i, n) in self.modes.iter().enumerate() {
            let target: Vec<i64> = n.iter().zip(m).map(|(a, b)| a - b).collect();
            if let Some(t) = self.index_of(&target) {
                out.row_mut(t).copy_from(&v.row(i));
            }
        }
        out
    }
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Matrix of the multiplication operator `V` in the basis.
pub fn potential_matrix(pot: &PotentialSpec, basis: &PlaneWaveBasis) -> CMat {
    let n = basis.len();
    let mut v = CMat::zeros(n, n);
    for (i, ni) in basis.modes().iter().enumerate() {
        for (m, c) in pot.coefficients() {
            let nj: Vec<i64> = ni.iter().zip(m).map(|(a, b)| a - b).collect();
            if let Some(j) = basis.index_of(&nj) {
                v[(i, j)] += c;
            }
        }
    }
    v
}

/// `H[n, m] = α|p_n|² δ_{nm} + V̂(n - m)`.
pub fn assemble_hamiltonian(
    geom: &TorusGeometry,
    pot: &PotentialSpec,
    alpha: f64,
    k: &[f64],
    basis: &PlaneWaveBasis,
) -> Result<CMat> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(input_err!("alpha must be positive, got {alpha}"));
    }
    if basis.d() != geom.d() {
        return Err(input_err!("basis dimension {} ≠ geometry dimension {}", basis.d(), geom.d()));
    }
    geom.check_quasimomentum(k)?;
    pot.check_dimension(geom.d())?;
    let mut h = potential_matrix(pot, basis);
    for (i, n) in basis.modes().iter().enumerate() {
        h[(i, i)] += alpha * norm_sq(&geom.momentum(n, k));
    }
    Ok(h)
}

/// Full description of one discretized operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusModel {
    pub geometry: TorusGeometry,
    pub potential: PotentialSpec,
    pub alpha: f64,
    pub k: Vec<f64>,
    pub half_widths: Vec<usize>,
}

impl TorusModel {
    /// Model at `k = 0` with the default box for the dimension.
    pub fn new(geometry: TorusGeometry, potential: PotentialSpec, alpha: f64) -> Self {
        let d = geometry.d();
        TorusModel {
            geometry,
            potential,
            alpha,
            k: vec![0.0; d],
            half_widths: vec![default_half_width(d); d],
        }
    }

    pub fn with_half_width(mut self, n: usize) -> Self {
        self.half_widths = vec![n; self.geometry.d()];
        self
    }
    pub fn with_k(mut self, k: Vec<f64>) -> Self {
        self.k = k;
        self
    }
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn solve(&self) -> Result<SpectrumResult> {
        let basis = Arc::new(PlaneWaveBasis::new(self.half_widths.clone())?);
        let h = assemble_hamiltonian(&self.geometry, &self.potential, self.alpha, &self.k, &basis)?;
        solve_spectrum(h, self.clone(), basis)
    }
}

/// Eigenpairs of a discretized operator together with its description.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Column `j` holds the plane-wave coefficients of `φ_j`.
    pub vectors: CMat,
    pub model: TorusModel,
    pub basis: Arc<PlaneWaveBasis>,
    pub hamiltonian: CMat,
    pub energy_cutoff: f64,
}

impl SpectrumResult {
    pub fn alpha(&self) -> f64 {
        self.model.alpha
    }
    pub fn k(&self) -> &[f64] {
        &self.model.k
    }
    pub fn geometry(&self) -> &TorusGeometry {
        &self.model.geometry
    }
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
    /// `|p_n|²` per basis mode.
    pub fn momenta_sq(&self) -> Vec<f64> {
        self.basis
            .modes()
            .iter()
            .map(|n| norm_sq(&self.geometry().momentum(n, self.k())))
            .collect()
    }
    /// `‖∇φ_j‖²` for every eigenvector.
    pub fn kinetic_all(&self) -> Vec<f64> {
        let p2 = self.momenta_sq();
        (0..self.len())
            .map(|j| {
                self.vectors
                    .column(j)
                    .iter()
                    .zip(&p2)
                    .map(|(c, p)| c.norm_sqr() * p)
                    .sum()
            })
            .collect()
    }
}

/// Diagonalize and validate against the eigenpair residual and
/// orthonormality contracts.
pub fn solve_spectrum(h: CMat, model: TorusModel, basis: Arc<PlaneWaveBasis>) -> Result<SpectrumResult> {
    let eig = eigh(&h)?;
    let energy_cutoff = basis.energy_cutoff(&model.geometry, model.alpha, &model.k);
    let hv = &h * &eig.vectors;
    for (j, &l) in eig.values.iter().enumerate() {
        let r = (hv.column(j) - eig.vectors.column(j) * Complex64::new(l, 0.0)).norm();
        if r > 1e-8 * (l.abs() + energy_cutoff) {
            return Err(Error::Numerical(format!(
                "eigenpair {j} residual {r:.3e} exceeds 1e-8·(|λ|+cutoff) (λ = {l}, cutoff = {energy_cutoff})"
            )));
        }
    }
    let ortho = eig.orthonormality_defect();
    if ortho > 1e-10 {
        return Err(Error::Numerical(format!("eigenvectors not orthonormal (defect {ortho:.3e})")));
    }
    Ok(SpectrumResult {
        eigenvalues: eig.values,
        vectors: eig.vectors,
        model,
        basis,
        hamiltonian: h,
        energy_cutoff,
    })
}

/// Kinetic and potential energy of one eigenfunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticTerms {
    pub index: usize,
    pub eigenvalue: f64,
    /// `T_j = ‖∇φ_j‖²`
    pub t: f64,
    /// `V_j = ⟨φ_j, V φ_j⟩`
    pub v: f64,
    /// `|λ_j - αT_j - V_j|`
    pub identity_residual: f64,
    /// `|T_j - ∂λ_j/∂α|` by central differences; `None` at a crossing.
    pub fh_residual: Option<f64>,
    pub delta: f64,
    pub cluster: bool,
    pub crossing: bool,
}

/// `T_j`, `V_j`, and the Feynman-Hellman derivative check for eigenpair `j`.
pub fn kinetic_terms(spec: &SpectrumResult, j: usize) -> Result<KineticTerms> {
    let n = spec.len();
    if j >= n {
        return Err(input_err!("index {j} outside computed spectrum 0..{n}"));
    }
    let alpha = spec.alpha();
    let lam = &spec.eigenvalues;
    let t_all = spec.kinetic_all();
    let phi = spec.vectors.column(j);
    let vmat = potential_matrix(&spec.model.potential, &spec.basis);
    let v = phi.dotc(&(&vmat * phi)).re;
    let t = t_all[j];
    let identity_residual = (lam[j] - alpha * t - v).abs();

    let delta = 1e-4 * alpha;
    let scale = lam[j].abs().max(1.0);
    let neighbors = [j.checked_sub(1), (j + 1 < n).then_some(j + 1)];
    let mut cluster = false;
    let mut crossing = false;
    for nb in neighbors.into_iter().flatten() {
        let gap = (lam[nb] - lam[j]).abs();
        if gap <= CLUSTER_TOLERANCE * scale {
            cluster = true;
        } else if gap <= 2.0 * delta * (t_all[nb] - t_all[j]).abs() {
            crossing = true;
        }
    }
    let fh_residual = if crossing {
        None
    } else {
        let at = |a: f64| -> Result<f64> {
            let m = spec.model.clone().with_alpha(a);
            let h = assemble_hamiltonian(&m.geometry, &m.potential, a, &m.k, &spec.basis)?;
            Ok(eigh(&h)?.values[j])
        };
        let deriv = (at(alpha + delta)? - at(alpha - delta)?) / (2.0 * delta);
        Some((t - deriv).abs())
    };
    Ok(KineticTerms {
        index: j,
        eigenvalue: lam[j],
        t,
        v,
        identity_residual,
        fh_residual,
        delta,
        cluster,
        crossing,
    })
}

/// Outcome of the explicit commutator formulas on interior modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorCheck {
    pub q: Vec<i64>,
    pub interior_modes: usize,
    /// `[H,G] e_n = α(|q|² + 2i q·∇) e_{n-m}`
    pub first: IdentityResidualReport,
    /// `[G*,[H,G]] = 2α|q|²`
    pub second: IdentityResidualReport,
}

impl CommutatorCheck {
    pub fn pass(&self) -> bool {
        self.first.pass && self.second.pass
    }
}

/// Column `n` of `[H, G]` for `G = e^{-iq·x}`, `q = Q m`, computed from the
/// stored (truncated) Hamiltonian.
fn commutator_column(spec: &SpectrumResult, m: &[i64], n: &[i64]) -> Option<DVector<Complex64>> {
    let basis = &spec.basis;
    let h = &spec.hamiltonian;
    let shifted: Vec<i64> = n.iter().zip(m).map(|(a, b)| a - b).collect();
    let i_n = basis.index_of(n)?;
    let i_s = basis.index_of(&shifted)?;
    // H G e_n = H e_{n-m}
    let mut col: DVector<Complex64> = h.column(i_s).into_owned();
    // G H e_n: entry at r moves to r - m
    for (r, mode) in basis.modes().iter().enumerate() {
        let c = h[(r, i_n)];
        if c == Complex64::default() {
            continue;
        }
        let t: Vec<i64> = mode.iter().zip(m).map(|(a, b)| a - b).collect();
        if let Some(ti) = basis.index_of(&t) {
            col[ti] -= c;
        }
    }
    Some(col)
}

/// Check the closed forms of `[H,G]` and `[G*,[H,G]]` on modes far enough
/// from the box faces that truncation does not enter.
pub fn commutator_representation_check(
    spec: &SpectrumResult,
    m: &[i64],
    tolerance: f64,
) -> Result<CommutatorCheck> {
    let geom = spec.geometry();
    let d = geom.d();
    if m.len() != d || m.iter().all(|&x| x == 0) {
        return Err(input_err!("q must be a nonzero integer vector of length {d}, got {m:?}"));
    }
    let alpha = spec.alpha();
    let q = geom.dual_vector(m);
    let q2 = norm_sq(&q);
    let kmax = spec.model.potential.max_harmonic(d);
    let margin: Vec<i64> = kmax.iter().zip(m).map(|(k, x)| k + 2 * x.abs()).collect();
    let interior: Vec<&Vec<i64>> = spec
        .basis
        .modes()
        .iter()
        .filter(|n| spec.basis.is_interior(n, &margin))
        .collect();
    if interior.is_empty() {
        return Err(input_err!(
            "no interior modes for q = {m:?} with margin {margin:?}; increase the cutoff"
        ));
    }
    let i = Complex64::i();
    let mut err1: f64 = 0.0;
    let mut scale1: f64 = 0.0;
    let mut err2: f64 = 0.0;
    let target2 = 2.0 * alpha * q2;
    for n in &interior {
        let p = geom.momentum(n, spec.k());
        // ∇ e^{ip·x} = i p e^{ip·x}
        let grad_q: Complex64 = i * dot(&q, &p);
        let mult = (q2 + 2.0 * i * grad_q) * alpha;
        let col = commutator_column(spec, m, n).expect("interior mode");
        let shifted: Vec<i64> = n.iter().zip(m).map(|(a, b)| a - b).collect();
        let is = spec.basis.index_of(&shifted).expect("interior mode");
        let mut expected = DVector::zeros(col.len());
        expected[is] = mult;
        err1 = err1.max((&col - &expected).norm());
        scale1 = scale1.max(mult.norm());

        // [G*, C] e_n = G* C e_n - C e_{n+m}
        let plus: Vec<i64> = n.iter().zip(m).map(|(a, b)| a + b).collect();
        let c_plus = commutator_column(spec, m, &plus).expect("interior mode");
        let mut second = spec.basis.shift_coefficients(
            &CMat::from_column_slice(col.len(), 1, col.as_slice()),
            &m.iter().map(|x| -x).collect::<Vec<_>>(),
        );
        second.column_mut(0).axpy(Complex64::new(-1.0, 0.0), &c_plus, Complex64::new(1.0, 0.0));
        let i_n = spec.basis.index_of(n).expect("mode in basis");
        second[(i_n, 0)] -= target2;
        err2 = err2.max(second.norm());
    }
    Ok(CommutatorCheck {
        q: m.to_vec(),
        interior_modes: interior.len(),
        first: IdentityResidualReport::from_norm("first-commutator", err1, scale1, tolerance),
        second: IdentityResidualReport::from_norm("second-commutator", err2, target2, tolerance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_1d(n: usize) -> SpectrumResult {
        TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::zero(), 1.0)
            .with_half_width(n)
            .solve()
            .unwrap()
    }

    fn mathieu(n: usize) -> TorusModel {
        TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::cosine(1, 1.0), 1.0)
            .with_half_width(n)
    }

    #[test]
    fn geometry_invariants() {
        let g = TorusGeometry::new(vec![1.0, 3.0]).unwrap();
        for (q, l) in g.dual_basis().iter().zip(g.lengths()) {
            assert!((q * l - 2.0 * PI).abs() < 1e-15);
        }
        assert!(g.g() > 0.0);
        assert!(TorusGeometry::new(vec![1.0, -1.0]).is_err());
        assert!(TorusGeometry::new(vec![]).is_err());
    }

    #[test]
    fn free_hamiltonian_is_diagonal_squares() {
        let g = TorusGeometry::standard(1).unwrap();
        let b = PlaneWaveBasis::uniform(1, 3).unwrap();
        let h = assemble_hamiltonian(&g, &PotentialSpec::zero(), 1.0, &[0.0], &b).unwrap();
        for (i, n) in b.modes().iter().enumerate() {
            assert!((h[(i, i)].re - (n[0] * n[0]) as f64).abs() < 1e-12);
        }
        assert_eq!(h.iter().filter(|c| c.norm() > 0.0).count(), 6);
    }

    #[test]
    fn mathieu_hamiltonian_is_tridiagonal() {
        let g = TorusGeometry::standard(1).unwrap();
        let b = PlaneWaveBasis::uniform(1, 4).unwrap();
        let h = assemble_hamiltonian(&g, &PotentialSpec::cosine(1, 1.0), 1.0, &[0.0], &b).unwrap();
        for i in 0..9usize {
            for j in 0..9 {
                let want = if i == j {
                    ((i as f64) - 4.0).powi(2)
                } else if i.abs_diff(j) == 1 {
                    1.0
                } else {
                    0.0
                };
                assert!((h[(i, j)].re - want).abs() < 1e-14 && h[(i, j)].im == 0.0);
            }
        }
    }

    #[test]
    fn free_spectra_match_lattice_values() {
        let s = free_1d(5);
        let want = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0];
        for (a, b) in s.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let s2 = TorusModel::new(TorusGeometry::standard(2).unwrap(), PotentialSpec::zero(), 1.0)
            .with_half_width(3)
            .solve()
            .unwrap();
        let mut lattice: Vec<f64> = (-3i64..=3)
            .flat_map(|m| (-3i64..=3).map(move |n| (m * m + n * n) as f64))
            .collect();
        lattice.sort_by(f64::total_cmp);
        for (a, b) in s2.eigenvalues.iter().zip(&lattice) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn free_spectrum_with_quasimomentum() {
        let alpha = 0.7;
        let k = 0.3;
        let s = TorusModel::new(TorusGeometry::standard(1).unwrap(), PotentialSpec::zero(), alpha)
            .with_half_width(6)
            .with_k(vec![k])
            .solve()
            .unwrap();
        let mut want: Vec<f64> = (-6i64..=6).map(|n| alpha * (n as f64 + k).powi(2)).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in s.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn quasimomentum_cell_is_enforced() {
        let g = TorusGeometry::standard(1).unwrap();
        assert!(g.check_quasimomentum(&[0.5]).is_err());
        assert!(g.check_quasimomentum(&[-0.5]).is_ok());
    }

    #[test]
    fn mathieu_converges_under_refinement() {
        let coarse = mathieu(20).solve().unwrap();
        let fine = mathieu(40).solve().unwrap();
        assert!((coarse.eigenvalues[0] - fine.eigenvalues[0]).abs() < 1e-8);
    }

    #[test]
    fn eigenvalues_decrease_under_refinement() {
        let runs: Vec<Vec<f64>> = [4, 6, 9]
            .iter()
            .map(|&n| {
                TorusModel::new(TorusGeometry::standard(2).unwrap(), PotentialSpec::cosine(2, 1.5), 1.0)
                    .with_half_width(n)
                    .solve()
                    .unwrap()
                    .eigenvalues
            })
            .collect();
        for w in runs.windows(2) {
            for j in 0..10 {
                assert!(w[1][j] <= w[0][j] + 1e-10, "j = {j}: {} > {}", w[1][j], w[0][j]);
            }
        }
    }

    #[test]
    fn time_reversal_symmetry() {
        let m = mathieu(12).with_k(vec![0.21]);
        let a = m.solve().unwrap();
        let b = m.clone().with_k(vec![-0.21]).solve().unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn kinetic_terms_free_and_mathieu() {
        let s = free_1d(8);
        for j in 0..5 {
            let kt = kinetic_terms(&s, j).unwrap();
            assert!((kt.t - kt.eigenvalue).abs() < 1e-10);
            assert!(kt.v.abs() < 1e-12);
            assert!(kt.fh_residual.unwrap() <= 1e-6, "{kt:?}");
        }
        let s = mathieu(20).solve().unwrap();
        let kt = kinetic_terms(&s, 0).unwrap();
        assert!(kt.identity_residual <= 1e-9);
        assert!(kt.fh_residual.unwrap() < 1e-6, "{kt:?}");
    }

    #[test]
    fn commutator_closed_forms() {
        let s = free_1d(8);
        let c = commutator_representation_check(&s, &[1], 1e-10).unwrap();
        assert!(c.pass(), "{c:?}");
        let s = mathieu(10).with_k(vec![0.2]).solve().unwrap();
        let c = commutator_representation_check(&s, &[2], 1e-10).unwrap();
        assert!(c.pass(), "{c:?}");
        let s2 = TorusModel::new(TorusGeometry::new(vec![2.0 * PI, 3.0]).unwrap(), PotentialSpec::cosine(2, 0.5), 1.3)
            .with_half_width(5)
            .solve()
            .unwrap();
        let c = commutator_representation_check(&s2, &[1, 0], 1e-10).unwrap();
        assert!(c.pass(), "{c:?}");
        assert!(commutator_representation_check(&free_1d(1), &[1], 1e-10).is_err());
        assert!(commutator_representation_check(&free_1d(4), &[0], 1e-10).is_err());
    }

    #[test]
    fn free_commutator_multiplier_by_hand() {
        // [H,G] e^{inx} = (1 - 2n) e^{i(n-1)x} for q = 1, α = 1
        let s = free_1d(6);
        for n in -3i64..=3 {
            let col = commutator_column(&s, &[1], &[n]).unwrap();
            let t = s.basis.index_of(&[n - 1]).unwrap();
            assert!((col[t] - Complex64::new((1 - 2 * n) as f64, 0.0)).norm() < 1e-12);
            assert!(col.norm() - col[t].norm() < 1e-12);
        }
    }

    #[test]
    fn potential_validation_and_sampling() {
        let mut m = BTreeMap::new();
        m.insert(vec![1], Complex64::new(1.0, 0.5));
        assert!(PotentialSpec::new(m.clone()).is_err());
        m.insert(vec![-1], Complex64::new(1.0, -0.5));
        let p = PotentialSpec::new(m).unwrap();
        let g = TorusGeometry::standard(1).unwrap();
        let sup = p.sup_v(&g);
        assert!(sup <= p.coefficient_bound() + 1e-12);
        assert!((sup - 2.0 * 1.25f64.sqrt()).abs() < 0.05, "sup = {sup}");
        let lower = p.inf_v_lower(&g);
        assert!(lower <= p.inf_v(&g) && lower >= -p.coefficient_bound() - 1e-12);
        assert!((lower + 2.0 * 1.25f64.sqrt()).abs() < 0.05, "inf = {lower}");
        let c = PotentialSpec::cosine(1, 1.0);
        assert_eq!(c.inf_v_lower(&g), -2.0);
        let cfg: PotentialSpec = serde_json::from_str(r#"{"fourier":[{"n":[1],"re":1.0},{"n":[-1],"re":1.0}]}"#).unwrap();
        assert_eq!(cfg, PotentialSpec::cosine(1, 1.0));
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"fourier":[],"extra":1}"#).is_err());
    }

    #[test]
    fn basis_is_lexicographic_and_negation_closed() {
        let b = PlaneWaveBasis::new(vec![1, 2]).unwrap();
        assert_eq!(b.modes()[0], vec![-1, -2]);
        assert_eq!(b.modes()[1], vec![-1, -1]);
        assert!(b.modes().windows(2).all(|w| w[0] < w[1]));
        for n in b.modes() {
            let neg: Vec<i64> = n.iter().map(|x| -x).collect();
            assert!(b.index_of(&neg).is_some());
        }
    }
}

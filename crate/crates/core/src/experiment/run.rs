use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::{
    BoundCheck, BoundsParams, CircleParams, Experiment, ExperimentConfig, IdentitiesParams, LtParams, RieszParams,
    SphereCheck, SphereParams, SumRulesParams, TorusParams,
};
use super::{Cell, CheckRecord, RunReport, Table};
use crate::bounds::{
    difference_inequality_slack, gap1d_slack, lambda_next_bound, z0_and_ratio_bounds, SpectrumPrefix,
};
use crate::error::{Error, Result};
use crate::lattice::{circle_bound_check, DiagonalForm, LatticeSpectrum};
use crate::lieb_thirring::{lt_monotone_scan, lt_rhs_and_slack, ScanOptions};
use crate::matrix_oracle::{run_trials, TrialPlan};
use crate::report::IdentityResidualReport;
use crate::riesz::{legendre_check, monotone_ratio_curve, CurveParams, TRUNCATION_FRACTION};
use crate::sphere::{
    geom_inequality_samples, reilly_sphere_check, sphere_monotone_curve, sphere_spectrum, sphere_weyl_ratio,
    SphereSpec,
};
use crate::sum_rules::{moment_table, overlap_matrix, perid_residual};
use crate::torus::{kinetic_terms, potential_matrix, commutator_representation_check};

/// Everything a runner produces besides the bookkeeping fields.
#[derive(Default)]
struct Outcome {
    parameters: BTreeMap<String, String>,
    observations: BTreeMap<String, f64>,
    records: Vec<CheckRecord>,
    table: Table,
}

impl Outcome {
    fn param(&mut self, k: &str, v: impl ToString) {
        self.parameters.insert(k.to_string(), v.to_string());
    }
}

/// Execute one experiment. Check failures land in the report; only
/// malformed input and numerical breakdown are errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    super::config::validate(cfg)?;
    let tol = cfg.tolerance;
    let out = match &cfg.experiment {
        Experiment::Identities(p) => identities(cfg.seed, p, tol.unwrap_or(crate::matrix_oracle::DEFAULT_TOLERANCE)),
        Experiment::Torus(p) => torus(p, tol.unwrap_or(1e-9)),
        Experiment::SumRules(p) => sum_rules(p),
        Experiment::Bounds(p) => bounds(p, tol.unwrap_or(1e-8)),
        Experiment::Riesz(p) => riesz(p, tol.unwrap_or(crate::riesz::MONOTONE_TOLERANCE)),
        Experiment::Lt(p) => lt(p, tol.unwrap_or(crate::lieb_thirring::SCAN_TOLERANCE)),
        Experiment::Circle(p) => circle(p, tol.unwrap_or(1e-12)),
        Experiment::Sphere(p) => sphere(p, tol.unwrap_or(1e-10)),
    }
    .map_err(|e| e.context(format!("{} experiment", cfg.experiment.kind())))?;
    Ok(RunReport::assemble(cfg, out.parameters, out.observations, out.records, out.table))
}

fn identities(seed: u64, p: &IdentitiesParams, tol: f64) -> Result<Outcome> {
    let plan = TrialPlan {
        seed,
        trials: p.trials,
        dim: p.dim,
        kind: p.g_kind,
        tolerance: tol,
        f_sigma: p.f_sigma,
    };
    let trials = run_trials(&plan)?;
    let mut o = Outcome {
        table: Table::new(&["trial", "dim", "kind", "projector_rank", "max_relative_residual", "pass"]),
        ..Default::default()
    };
    o.param("tolerance", tol);
    let mut worst: f64 = 0.0;
    for t in &trials {
        worst = worst.max(t.max_relative_residual);
        o.table.push(vec![
            Cell::Int(t.trial as i64),
            Cell::int(t.dim),
            Cell::text(t.kind.to_string()),
            Cell::int(t.projector_rank),
            Cell::num(t.max_relative_residual),
            Cell::Bool(t.pass),
        ]);
        let inputs = format!("trial={} dim={} kind={}", t.trial, t.dim, t.kind);
        o.records.extend(t.checks.iter().map(|c| CheckRecord::from_identity(c, inputs.clone())));
        o.records.push(CheckRecord::new(
            "power-representation",
            inputs,
            t.f_gap_representation_error,
            1e-6,
            1e-6 - t.f_gap_representation_error,
            t.f_gap_representation_error <= 1e-6,
        ));
    }
    o.observations.insert("max_relative_residual".into(), worst);
    Ok(o)
}

fn torus(p: &TorusParams, tol: f64) -> Result<Outcome> {
    let spec = p.model.to_model()?.solve()?;
    let count = p.count.unwrap_or(spec.len()).min(spec.len());
    let alpha = spec.alpha();
    let t = spec.kinetic_all();
    let vmat = potential_matrix(&spec.model.potential, &spec.basis);
    let mut o = Outcome {
        table: Table::new(&["index", "eigenvalue", "T_j", "V_j", "identity_residual"]),
        ..Default::default()
    };
    o.param("half_widths", format!("{:?}", spec.model.half_widths));
    o.param("basis_size", spec.len());
    o.param("energy_cutoff", spec.energy_cutoff);
    for j in 0..count {
        let phi = spec.vectors.column(j);
        let v = phi.dotc(&(&vmat * phi)).re;
        let lam = spec.eigenvalues[j];
        let split = alpha * t[j] + v;
        o.table.push(vec![
            Cell::int(j),
            Cell::num(lam),
            Cell::num(t[j]),
            Cell::num(v),
            Cell::num((lam - split).abs()),
        ]);
        o.records
            .push(CheckRecord::from_identity(&IdentityResidualReport::equality("energy-split", lam, split, tol), format!("j={j}")));
    }
    // derivative in α equals T_j away from crossings
    for j in 0..count.min(4) {
        let k = kinetic_terms(&spec, j)?;
        if let Some(r) = k.fh_residual {
            let bound = 1e-6 * k.t.max(1.0);
            o.records.push(CheckRecord::new("feynman-hellmann", format!("j={j}"), r, bound, bound - r, r <= bound));
        }
    }
    for axis in 0..spec.geometry().d() {
        let mut m = vec![0i64; spec.geometry().d()];
        m[axis] = 1;
        let c = commutator_representation_check(&spec, &m, tol)?;
        let inputs = format!("q={m:?} interior_modes={}", c.interior_modes);
        o.records.push(CheckRecord::from_identity(&c.first, inputs.clone()));
        o.records.push(CheckRecord::from_identity(&c.second, inputs));
    }
    Ok(o)
}

fn gap_midpoint(eig: &[f64], n: usize) -> f64 {
    0.5 * (eig[n - 1] + eig[n])
}

fn sum_rules(p: &SumRulesParams) -> Result<Outcome> {
    let spec = p.model.to_model()?.solve()?;
    if p.n >= spec.len() {
        return Err(Error::Config(format!("N = {} needs more than {} computed eigenvalues", p.n, spec.len())));
    }
    let z = p.z.unwrap_or_else(|| gap_midpoint(&spec.eigenvalues, p.n));
    let w = overlap_matrix(&spec, &p.q)?;
    let moments = moment_table(&w, &spec)?;
    let mut o = Outcome {
        table: Table::new(&["j", "eigenvalue", "m1", "m1_target", "m1a", "m2_lhs", "m2_rhs", "row_sum", "pass"]),
        ..Default::default()
    };
    o.param("z", z);
    o.param("interior_count", w.interior_set.len());
    o.observations.insert("symmetry_defect".into(), w.symmetry_defect());
    for m in &moments {
        o.table.push(vec![
            Cell::int(m.j),
            Cell::num(m.eigenvalue),
            Cell::num(m.m1),
            Cell::num(m.m1_target),
            Cell::num(m.m1a),
            Cell::num(m.m2_lhs),
            Cell::num(m.m2_rhs),
            Cell::num(m.row_sum),
            Cell::Bool(m.pass),
        ]);
        o.records.push(CheckRecord::new(
            "moment-sum-rules",
            format!("j={}", m.j),
            m.m2_lhs,
            m.m2_rhs,
            m.m2_rhs - m.m2_lhs,
            m.pass,
        ));
    }
    let r = perid_residual(&spec, &p.q, p.n, z)?;
    let inputs = format!("N={} z={z} q={:?}", p.n, p.q);
    o.records.push(CheckRecord::from_identity(&r.identity, inputs.clone()));
    if r.z_in_gap {
        o.records.push(CheckRecord::new(
            "periodic-identity-sign",
            inputs,
            r.identity.rhs,
            0.0,
            -r.identity.rhs,
            r.rhs_nonpositive,
        ));
    }
    Ok(o)
}

/// A refuted nonnegativity is a failed check, not a crash. An unmet
/// precondition means the bound does not apply and yields no record.
fn inconsistency_record(name: &str, inputs: String, e: Error) -> Result<Option<CheckRecord>> {
    match e {
        Error::Precondition(_) => Ok(None),
        Error::Inconsistency(_) => Ok(Some(CheckRecord {
            name: name.into(),
            inputs: format!("{inputs} ({e})"),
            value: None,
            bound: None,
            slack: None,
            pass: false,
        })),
        other => Err(other),
    }
}

fn bounds(p: &BoundsParams, tol: f64) -> Result<Outcome> {
    let spec = p.model.to_model()?.solve()?;
    if p.n_max + 1 > spec.len() {
        return Err(Error::Config(format!(
            "n_max = {} needs {} eigenvalues; the basis has {}",
            p.n_max,
            p.n_max + 1,
            spec.len()
        )));
    }
    let prefix = SpectrumPrefix::from_torus(&spec, p.n_max + 1)?;
    let free = p.model.potential.coefficients().values().all(|c| c.norm() == 0.0);
    let mut o = Outcome {
        table: Table::new(&["bound_name", "N", "bound", "actual", "slack", "pass"]),
        ..Default::default()
    };
    o.param("tau", prefix.tau);
    o.param("g", prefix.g);
    o.param("units", "eigenvalues divided by alpha");
    let rows: Vec<Vec<CheckRecord>> = (p.n_min..=p.n_max)
        .into_par_iter()
        .map(|n| {
            let mut recs = Vec::new();
            let mid = gap_midpoint(&prefix.eigenvalues, n);
            for check in &p.checks {
                match check {
                    BoundCheck::LambdaNext => match lambda_next_bound(&prefix, n, tol) {
                        Ok(r) => {
                            recs.push((&r.strong).into());
                            recs.push((&r.weaker).into());
                        }
                        Err(e) => recs.extend(inconsistency_record("lambda-next", format!("N={n}"), e)?),
                    },
                    BoundCheck::MeanRatio => match z0_and_ratio_bounds(&prefix, 1, n, tol) {
                        Ok(r) => {
                            recs.push((&r.mean_bound).into());
                            recs.extend(r.ratio_bound.as_ref().map(CheckRecord::from));
                        }
                        Err(e) => recs.extend(inconsistency_record("mean-growth", format!("N={n}"), e)?),
                    },
                    BoundCheck::Difference => {
                        let z = gap_midpoint(&spec.eigenvalues, n);
                        recs.push((&difference_inequality_slack(&spec, n, z, tol)?).into());
                    }
                    BoundCheck::GapPolynomial if free => recs.push((&gap1d_slack(&prefix, n, mid, tol)?).into()),
                    BoundCheck::GapPolynomial => {}
                    BoundCheck::Legendre => match legendre_check(&prefix, n, n as f64 + 0.5, tol) {
                        Ok(r) => recs.push((&r).into()),
                        Err(e) => recs.extend(inconsistency_record("legendre", format!("N={n}"), e)?),
                    },
                }
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    for (n, recs) in (p.n_min..).zip(rows) {
        for r in recs {
            o.table.push(vec![
                Cell::text(r.name.clone()),
                Cell::int(n),
                Cell::opt(r.bound),
                Cell::opt(r.value),
                Cell::opt(r.slack),
                Cell::Bool(r.pass),
            ]);
            o.records.push(r);
        }
    }
    Ok(o)
}

fn riesz(p: &RieszParams, tol: f64) -> Result<Outcome> {
    let model = p.model.to_model()?;
    let geom = &model.geometry;
    let alpha = model.alpha;
    let d = geom.d();
    let tau = p.tau.unwrap_or(alpha * geom.shift_rate() - model.potential.inf_v_lower(geom));
    let grid = p.z.points()?;
    let z_max = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut o = Outcome::default();
    let free = model.potential.coefficients().values().all(|c| c.norm() == 0.0)
        && model.k.iter().all(|&k| k == 0.0);
    let exact_form = if free { DiagonalForm::from_geometry(geom).ok() } else { None };
    let (eigs, truncation) = match exact_form {
        Some(form) => {
            // every form value up to x_max, so nothing below α(x_max + 1) is missing
            let x_max = ((z_max / alpha).max(0.0) / TRUNCATION_FRACTION).ceil() as u64 + 1;
            let spectrum = LatticeSpectrum::new(form, x_max)?;
            o.param("spectrum", format!("exact lattice values up to {x_max}"));
            let e: Vec<f64> = spectrum.eigenvalues().into_iter().map(|x| alpha * x).collect();
            (e, alpha * (x_max + 1) as f64)
        }
        None => {
            let spec = model.solve()?;
            let k_min = spec.model.half_widths.iter().copied().min().unwrap_or(0) as f64;
            let q_min = geom.dual_basis().into_iter().fold(f64::INFINITY, f64::min);
            o.param("spectrum", format!("plane waves, half widths {:?}", spec.model.half_widths));
            let t = alpha * (k_min * q_min).powi(2) + model.potential.inf_v(geom);
            (spec.eigenvalues, t)
        }
    };
    o.param("tau", tau);
    o.param("truncation", truncation);
    let curve = monotone_ratio_curve(
        &eigs,
        &grid,
        CurveParams {
            sigma: p.sigma,
            tau,
            d,
            volume: Some(geom.volume() * alpha.powf(-(d as f64) / 2.0)),
            truncation: Some(truncation),
            tolerance: tol,
        },
    )?;
    o.param("valid_up_to", curve.valid_up_to);
    o.table = Table::new(&["z", "R0", "R1", "R2", "ratio", "ceiling"]);
    for pt in &curve.points {
        o.table
            .push(vec![Cell::num(pt.z), Cell::num(pt.r0), Cell::num(pt.r1), Cell::num(pt.r2), Cell::num(pt.ratio), Cell::opt(curve.ceiling)]);
    }
    let worst = curve.violations.iter().map(|v| v.relative_drop).fold(0.0, f64::max);
    o.records.push(CheckRecord::new(
        "ratio-monotone",
        format!("sigma={} tau={tau} points={}", p.sigma, grid.len()),
        worst,
        tol,
        tol - worst,
        curve.monotone(),
    ));
    if let (Some(c), Some(ex)) = (curve.ceiling, curve.ceiling_excess) {
        o.records.push(CheckRecord::new(
            "ratio-ceiling",
            format!("sigma={}", p.sigma),
            curve.max_ratio(),
            c,
            -ex * c,
            ex <= tol,
        ));
    }
    o.observations.insert("max_ratio".into(), curve.max_ratio());
    Ok(o)
}

fn lt(p: &LtParams, tol: f64) -> Result<Outcome> {
    let model = p.model.to_model()?;
    let alphas = p.alpha.points()?;
    let bounds: Vec<_> = alphas
        .par_iter()
        .map(|&a| lt_rhs_and_slack(&model, p.z, a, p.sigma, tol))
        .collect::<Result<_>>()?;
    let scan = lt_monotone_scan(
        &model,
        p.z,
        p.sigma,
        &alphas,
        ScanOptions {
            shift_factor: p.shift_factor,
            tolerance: tol,
            with_limit: true,
        },
    )?;
    let mut o = Outcome {
        table: Table::new(&["alpha", "lhs", "rhs", "slack", "monotone_ok", "scan_value"]),
        ..Default::default()
    };
    o.param("shift_factor", p.shift_factor);
    for b in &bounds {
        let ok = !scan.violations.iter().any(|v| v.alpha_small == b.alpha || v.alpha_large == b.alpha);
        let value = scan.points.iter().find(|s| s.alpha == b.alpha).map(|s| s.value);
        o.table.push(vec![
            Cell::num(b.alpha),
            Cell::num(b.lhs),
            Cell::num(b.rhs),
            Cell::num(b.report.slack),
            Cell::Bool(ok),
            Cell::opt(value),
        ]);
        o.records.push((&b.report).into());
    }
    let worst = scan.violations.iter().map(|v| v.relative_rise).fold(0.0, f64::max);
    o.records.push(CheckRecord::new(
        "scaled-riesz-monotone",
        format!("z={} sigma={} shift_factor={}", p.z, p.sigma, p.shift_factor),
        worst,
        tol,
        tol - worst,
        scan.monotone(),
    ));
    if let (Some(l), Some(ex)) = (scan.rhs_limit, scan.limit_excess) {
        o.observations.insert("classical_limit".into(), l);
        o.records.push(CheckRecord::new(
            "below-classical-limit",
            format!("z={} sigma={}", p.z, p.sigma),
            scan.points.iter().map(|s| s.value).fold(0.0, f64::max),
            l,
            -ex * l,
            ex <= tol,
        ));
    }
    Ok(o)
}

fn circle(p: &CircleParams, tol: f64) -> Result<Outcome> {
    let rep = circle_bound_check(p.x_max, p.grid, tol)?;
    let mut o = Outcome {
        table: Table::new(&["x", "R", "R2_direct", "R2_integral", "delta2", "bound_slack", "delta2_slack", "exact_match"]),
        ..Default::default()
    };
    for r in &rep.records {
        o.table.push(vec![
            Cell::num(r.x),
            Cell::Int(r.count as i64),
            Cell::num(r.r2_direct),
            Cell::num(r.r2_integral),
            Cell::num(r.delta2),
            Cell::num(r.r2_slack),
            Cell::num(r.delta2_slack),
            Cell::Bool(r.exact_match),
        ]);
        let inputs = format!("x={}", r.x);
        o.records.push(CheckRecord::new(
            "riesz-routes-agree",
            inputs.clone(),
            r.r2_direct,
            r.r2_integral,
            r.r2_integral - r.r2_direct,
            r.exact_match,
        ));
        o.records.push(CheckRecord::new(
            "r2-upper",
            inputs.clone(),
            r.r2_direct,
            r.r2_bound,
            r.r2_slack,
            r.r2_slack >= -tol * r.r2_bound,
        ));
        o.records.push(CheckRecord::new(
            "delta2-upper",
            inputs,
            r.delta2,
            r.delta2_bound,
            r.delta2_slack,
            r.delta2_slack >= -tol * r.delta2_bound && r.consistency <= 1e-12,
        ));
    }
    o.observations.insert("max_delta2_scaled".into(), rep.max_delta2_scaled);
    Ok(o)
}

fn sphere(p: &SphereParams, tol: f64) -> Result<Outcome> {
    let s = sphere_spectrum(SphereSpec::new(p.d, p.r, p.levels)?)?;
    if p.n_max >= s.len() {
        return Err(Error::Config(format!(
            "n_max = {} needs more than the {} eigenvalues of {} levels",
            p.n_max,
            s.len(),
            p.levels
        )));
    }
    let mut o = Outcome {
        table: Table::new(&["check", "N", "z", "bound", "actual", "slack", "pass"]),
        ..Default::default()
    };
    o.param("eigenvalues", s.len());
    let push = |o: &mut Outcome, check: &str, n: Option<usize>, z: Option<f64>, r: CheckRecord| {
        o.table.push(vec![
            Cell::text(check),
            n.map_or(Cell::Empty, Cell::int),
            Cell::opt(z),
            Cell::opt(r.bound),
            Cell::opt(r.value),
            Cell::opt(r.slack),
            Cell::Bool(r.pass),
        ]);
        o.records.push(r);
    };
    for check in &p.checks {
        match check {
            SphereCheck::Reilly => {
                for r in reilly_sphere_check(&s, p.n_max, tol)? {
                    for (b, exact) in [(&r.reilly, true), (&r.weaker, r.weaker_exact), (&r.quadratic, r.quadratic_exact)] {
                        let mut rec: CheckRecord = b.into();
                        rec.pass &= exact;
                        push(&mut o, &b.bound_name, Some(r.n), None, rec);
                    }
                }
            }
            SphereCheck::Geom => {
                let reps = geom_inequality_samples(&s, p.n_max, p.geom_samples, tol)?;
                for (i, b) in reps.iter().enumerate() {
                    let n = 1 + i % p.n_max;
                    let z = b.inputs.rsplit("z=").next().and_then(|t| t.parse().ok());
                    push(&mut o, "geometric-inequality", Some(n), z, b.into());
                }
            }
            SphereCheck::Monotone => {
                let top = TRUNCATION_FRACTION * s.truncation();
                let grid: Vec<f64> = (1..=200).map(|i| top * i as f64 / 200.0).collect();
                let curve = sphere_monotone_curve(&s, &grid, tol)?;
                let worst = curve.violations.iter().map(|v| v.relative_drop).fold(0.0, f64::max);
                push(
                    &mut o,
                    "ratio-monotone",
                    None,
                    None,
                    CheckRecord::new("ratio-monotone", format!("tau={}", curve.tau), worst, tol, tol - worst, curve.monotone()),
                );
                if let (Some(c), Some(ex)) = (curve.ceiling, curve.ceiling_excess) {
                    push(
                        &mut o,
                        "ratio-ceiling",
                        None,
                        None,
                        CheckRecord::new("ratio-ceiling", format!("tau={}", curve.tau), curve.max_ratio(), c, -ex * c, ex <= tol),
                    );
                }
            }
        }
    }
    let w = sphere_weyl_ratio(&s)?;
    o.observations.insert("weyl_ratio".into(), w.ratio);
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{emit_to_vec, parse_config, Format};

    fn run(text: &str) -> RunReport {
        run_experiment(&parse_config(text).unwrap()).unwrap()
    }

    #[test]
    fn deterministic_bytes() {
        let text = r#"{"seed": 7, "experiment": {"kind": "identities", "trials": 12}}"#;
        let a = emit_to_vec(&run(text), Format::Json).unwrap();
        let b = emit_to_vec(&run(text), Format::Json).unwrap();
        assert_eq!(a, b);
        let c = emit_to_vec(&run(r#"{"seed": 8, "experiment": {"kind": "identities", "trials": 12}}"#), Format::Json).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn every_kind_runs_green() {
        let model = r#""model": {"geometry": {"d": 1, "lengths": [6.283185307179586]}, "potential": {"fourier": [{"n": [1], "re": 0.5}, {"n": [-1], "re": 0.5}]}, "cutoff": 24}"#;
        let free2 = r#""model": {"geometry": {"d": 2, "lengths": [6.283185307179586, 6.283185307179586]}}"#;
        let cases = [
            r#"{"experiment": {"kind": "identities", "trials": 9}}"#.to_string(),
            format!(r#"{{"experiment": {{"kind": "torus", {model}, "count": 6}}}}"#),
            format!(r#"{{"experiment": {{"kind": "sum-rules", {model}, "q": [1], "N": 3}}}}"#),
            format!(r#"{{"experiment": {{"kind": "bounds", {model}, "n_max": 8}}}}"#),
            format!(r#"{{"experiment": {{"kind": "riesz", {free2}, "z": {{"start": 0.5, "stop": 60, "count": 50}}}}}}"#),
            format!(r#"{{"experiment": {{"kind": "riesz", {model}, "z": {{"start": 1.0, "stop": 60, "count": 50}}}}}}"#),
            format!(r#"{{"experiment": {{"kind": "lt", {model}, "z": 1.0, "alpha": {{"start": 0.1, "stop": 1.0, "count": 5}}}}}}"#),
            r#"{"experiment": {"kind": "circle", "x_max": 200, "grid": 40}}"#.to_string(),
            r#"{"experiment": {"kind": "sphere", "d": 2, "levels": 20, "n_max": 30, "geom_samples": 40}}"#.to_string(),
        ];
        for text in &cases {
            let r = run(text);
            let bad: Vec<_> = r.records.iter().filter(|c| !c.pass).collect();
            assert!(r.pass(), "{text}: {bad:#?}");
            assert!(r.summary.total > 0, "{text}");
            assert!(!r.table.rows.is_empty(), "{text}");
        }
    }

    #[test]
    fn shift_with_supremum_is_not_monotone() {
        // V = cos x: inf V = -1, sup V = 1, gd/4 = 1/4
        let model = r#""model": {"geometry": {"d": 1, "lengths": [6.283185307179586]}, "potential": {"fourier": [{"n": [1], "re": 0.5}, {"n": [-1], "re": 0.5}]}, "cutoff": 24}"#;
        let with = |tau: &str| {
            run(&format!(
                r#"{{"experiment": {{"kind": "riesz", {model}, {tau} "z": {{"start": 0.0, "stop": 40, "count": 400}}}}}}"#
            ))
        };
        let auto = with("");
        assert_eq!(auto.parameters["tau"], "1.25");
        assert!(auto.pass());
        let sup = run(&format!(
            r#"{{"experiment": {{"kind": "riesz", {model}, "tau": -0.75, "z": {{"start": 0.8, "stop": 40, "count": 400}}}}}}"#
        ));
        assert!(sup.records.iter().any(|c| c.name == "ratio-monotone" && !c.pass));
    }

    #[test]
    fn reduced_lt_shift_is_reported_not_raised() {
        let text = r#"{"experiment": {"kind": "lt", "model": {"geometry": {"d": 1, "lengths": [6.283185307179586]}}, "z": 4.0, "shift_factor": 0.95, "alpha": {"start": 0.888888888888889, "stop": 1.142857142857143, "count": 200}}}"#;
        let r = run(text);
        assert!(!r.pass());
        assert!(r.records.iter().any(|c| c.name == "scaled-riesz-monotone" && !c.pass));
    }
}

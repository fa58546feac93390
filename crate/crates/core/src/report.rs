//! Residual and slack records produced by every check.

use serde::{Deserialize, Serialize};

/// Which relation a residual report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `lhs = rhs`
    Equal,
    /// `lhs ≤ rhs`
    AtMost,
}

/// Both sides of an identity (or inequality) evaluated independently.
///
/// `relative_residual = |lhs - rhs| / max(1, |lhs|, |rhs|)`. For
/// [`Relation::Equal`] the check passes when that is at most `tolerance`; for
/// [`Relation::AtMost`] only an excess of `lhs` over `rhs` counts against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidualReport {
    pub name: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityResidualReport {
    pub fn equality(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::build(name.into(), Relation::Equal, lhs, rhs, tolerance)
    }

    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::build(name.into(), Relation::AtMost, lhs, rhs, tolerance)
    }

    /// Equality check on a precomputed nonnegative residual norm (e.g. a
    /// Frobenius norm of a matrix difference) against a scale.
    pub fn from_norm(name: impl Into<String>, residual: f64, scale: f64, tolerance: f64) -> Self {
        let rel = residual / scale.max(1.0);
        IdentityResidualReport {
            name: name.into(),
            relation: Relation::Equal,
            lhs: residual,
            rhs: 0.0,
            residual,
            relative_residual: rel,
            tolerance,
            pass: rel <= tolerance,
        }
    }

    fn build(name: String, relation: Relation, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = lhs - rhs;
        let scale = 1f64.max(lhs.abs()).max(rhs.abs());
        let relative_residual = residual.abs() / scale;
        let pass = match relation {
            Relation::Equal => relative_residual <= tolerance,
            Relation::AtMost => residual / scale <= tolerance,
        };
        IdentityResidualReport {
            name,
            relation,
            lhs,
            rhs,
            residual,
            relative_residual,
            tolerance,
            pass,
        }
    }

    /// `rhs - lhs`, meaningful for inequalities.
    pub fn slack(&self) -> f64 {
        -self.residual
    }
}

/// An evaluated upper bound `actual ≤ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    /// Short human-readable digest of the inputs (N, z, d, ...).
    pub inputs: String,
    pub bound_value: f64,
    pub actual_value: Option<f64>,
    /// `bound - actual`, or the inequality-specific slack when there is no
    /// single actual value.
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(
        name: impl Into<String>,
        inputs: impl Into<String>,
        bound: f64,
        actual: f64,
        tolerance: f64,
    ) -> Self {
        Self::with_slack(name, inputs, bound, Some(actual), bound - actual, tolerance)
    }

    /// Pass iff `slack ≥ -tolerance`.
    pub fn with_slack(
        name: impl Into<String>,
        inputs: impl Into<String>,
        bound: f64,
        actual: Option<f64>,
        slack: f64,
        tolerance: f64,
    ) -> Self {
        BoundReport {
            bound_name: name.into(),
            inputs: inputs.into(),
            bound_value: bound,
            actual_value: actual,
            slack,
            tolerance,
            pass: slack >= -tolerance,
        }
    }
}

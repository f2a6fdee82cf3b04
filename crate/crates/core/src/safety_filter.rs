//! Minimum-deviation projection onto a single affine constraint.
//!
//! `min ½‖u − u_nom‖²  s.t.  aᵀu ≤ b` has the closed-form solution
//! `u = u_nom − max(0, aᵀu_nom − b)/‖a‖² · a`.

use crate::error::{Error, Result};

/// `|a|` (or `‖a‖`) below this is treated as zero.
pub const ZERO_ROW: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct FilterResult<U = f64> {
    pub u_safe: U,
    pub u_nominal: U,
    /// Constraint binding: `u_safe` differs from `u_nominal`.
    pub active: bool,
    /// `b − aᵀu_safe`.
    pub slack: f64,
}

/// Optional box bounds on a scalar input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn filter_scalar(u_nom: f64, a: f64, b: f64) -> Result<FilterResult> {
    if !(u_nom.is_finite() && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "filter inputs must be finite: u_nom = {u_nom}, a = {a}, b = {b}"
        )));
    }
    if a.abs() < ZERO_ROW {
        if b < 0.0 {
            return Err(Error::Infeasible { a, b });
        }
        return Ok(FilterResult {
            u_safe: u_nom,
            u_nominal: u_nom,
            active: false,
            slack: b - a * u_nom,
        });
    }
    if a * u_nom <= b {
        return Ok(FilterResult {
            u_safe: u_nom,
            u_nominal: u_nom,
            active: false,
            slack: b - a * u_nom,
        });
    }
    let u = b / a;
    Ok(FilterResult {
        u_safe: u,
        u_nominal: u_nom,
        active: true,
        slack: b - a * u,
    })
}

/// Scalar projection with additional box bounds.
///
/// The feasible set is the interval `{a·u ≤ b} ∩ [lower, upper]`; the result
/// is `u_nom` clamped to it. An empty interval is reported as infeasible.
/// Forward invariance is only guaranteed while the barrier constraint alone
/// decides the input, so bounds tighter than the required pressure void it.
pub fn filter_scalar_bounded(u_nom: f64, a: f64, b: f64, bounds: InputBounds) -> Result<FilterResult> {
    if bounds.lower.is_nan() || bounds.upper.is_nan() || bounds.lower > bounds.upper {
        return Err(Error::Domain(format!(
            "input bounds are inverted: [{}, {}]",
            bounds.lower, bounds.upper
        )));
    }
    let unbounded = filter_scalar(u_nom, a, b)?;
    let (mut lo, mut hi) = (bounds.lower, bounds.upper);
    if a.abs() >= ZERO_ROW {
        if a > 0.0 {
            hi = hi.min(b / a);
        } else {
            lo = lo.max(b / a);
        }
    }
    if lo > hi {
        return Err(Error::Infeasible { a, b });
    }
    let u = u_nom.clamp(lo, hi);
    Ok(FilterResult {
        u_safe: u,
        u_nominal: u_nom,
        active: u != u_nom || unbounded.active,
        slack: b - a * u,
    })
}

/// Projection for a vector input `u ∈ ℝ^q`.
pub fn filter_general(u_nom: &[f64], a: &[f64], b: f64) -> Result<FilterResult<Vec<f64>>> {
    if u_nom.len() != a.len() {
        return Err(Error::Domain(format!(
            "dimension mismatch: u_nom has {} entries, a has {}",
            u_nom.len(),
            a.len()
        )));
    }
    if !(b.is_finite() && u_nom.iter().chain(a).all(|v| v.is_finite())) {
        return Err(Error::Domain("filter inputs must be finite".into()));
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let norm_sq = dot(a, a);
    let excess = dot(a, u_nom) - b;
    if norm_sq.sqrt() < ZERO_ROW {
        if b < 0.0 {
            return Err(Error::Infeasible { a: norm_sq.sqrt(), b });
        }
        return Ok(FilterResult {
            u_safe: u_nom.to_vec(),
            u_nominal: u_nom.to_vec(),
            active: false,
            slack: -excess,
        });
    }
    if excess <= 0.0 {
        return Ok(FilterResult {
            u_safe: u_nom.to_vec(),
            u_nominal: u_nom.to_vec(),
            active: false,
            slack: -excess,
        });
    }
    let step = excess / norm_sq;
    let u_safe: Vec<f64> = u_nom.iter().zip(a).map(|(u, ai)| u - step * ai).collect();
    let slack = b - dot(a, &u_safe);
    Ok(FilterResult {
        u_safe,
        u_nominal: u_nom.to_vec(),
        active: true,
        slack,
    })
}

//! Double-exponential (tanh-sinh) quadrature on the unit interval.
//!
//! The integrand receives both `u` and `1 - u` so quantile functions with an
//! integrable singularity at 1 can be evaluated from the complement without
//! cancellation.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const T_MAX: f64 = 4.0;
const MAX_LEVEL: usize = 14;

/// `∫₀¹ f(u, 1-u) du`, refined until successive levels agree to `rel_tol`.
pub fn integrate_unit<F>(f: F, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let node = |t: f64| -> Option<f64> {
        let s = PI * t.sinh();
        let lower = 1.0 / (1.0 + s.exp());
        let upper = 1.0 / (1.0 + (-s).exp());
        if lower <= 0.0 || upper <= 0.0 {
            return None;
        }
        let (u, c) = (upper, lower);
        let w = u * c * PI * t.cosh();
        let v = f(u, c);
        if !v.is_finite() {
            return Some(f64::NAN);
        }
        Some(w * v)
    };

    let mut h = 0.5;
    let mut acc = node(0.0).unwrap_or(0.0);
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        acc += node(t).unwrap_or(0.0) + node(-t).unwrap_or(0.0);
        k += 1;
    }
    let mut estimate = acc * h;
    if estimate.is_nan() {
        return Err(Error::NonIntegrable("integrand is not finite".into()));
    }

    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            acc += node(t).unwrap_or(0.0) + node(-t).unwrap_or(0.0);
            k += 2;
        }
        let next = acc * h;
        if next.is_nan() {
            return Err(Error::NonIntegrable("integrand is not finite".into()));
        }
        let converged = (next - estimate).abs() <= rel_tol * next.abs().max(1e-300);
        estimate = next;
        if converged && level >= 3 {
            return Ok(estimate);
        }
    }
    Err(Error::NonIntegrable(format!(
        "no convergence to {rel_tol:e} after {MAX_LEVEL} refinements"
    )))
}

/// `∫ₐᵇ f(y, b - y) dy`.
pub fn integrate<F>(a: f64, b: f64, f: F, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    if b == a {
        return Ok(0.0);
    }
    let width = b - a;
    Ok(width * integrate_unit(|u, c| f(a + width * u, width * c), rel_tol)?)
}

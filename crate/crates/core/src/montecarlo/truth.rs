//! Population values of the indices for the built-in laws.
//!
//! Closed forms are used where they exist; everything else integrates the
//! quantile function with double-exponential quadrature.

use super::dist::{DistributionSpec, Marginal};
use crate::error::{Error, Result};
use crate::indices::{GpiConfig, GpiFamily};
use crate::normal;
use crate::quadrature::{integrate, integrate_unit};

const REL_TOL: f64 = 1e-12;

/// Population Gini index of a built-in law.
pub fn true_gini(spec: &DistributionSpec) -> Result<f64> {
    spec.validate()?;
    Ok(match *spec {
        DistributionSpec::Exponential { .. } => 0.5,
        DistributionSpec::Uniform { a, b } => (b - a) / (3.0 * (a + b)),
        DistributionSpec::Lognormal { scale, .. } => {
            2.0 * normal::cdf(scale / std::f64::consts::SQRT_2) - 1.0
        }
        DistributionSpec::Pareto { alpha, .. } => 1.0 / (2.0 * alpha - 1.0),
    })
}

/// `(1/μ) ∫₀¹ F⁻¹(u) (2u − 1) du` by quadrature.
pub fn true_gini_quadrature(law: &dyn Marginal) -> Result<f64> {
    let mu = law.mean();
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::NonIntegrable(format!(
            "mean {mu} is not finite and positive"
        )));
    }
    let v = integrate_unit(|p, q| law.quantile(p, q) * (p - q), REL_TOL)?;
    Ok(v / mu)
}

/// `∫₀¹ u F⁻¹(u) du`, the population counterpart of `Aₙ`.
pub fn true_a(law: &dyn Marginal) -> Result<f64> {
    integrate_unit(|p, q| p * law.quantile(p, q), REL_TOL)
}

/// Population GPI for the preset families.
///
/// FGT is `E[d((Z − X)/Z) 1(X < Z)]`; Kakwani of order `κ` (Sen is `κ = 1`)
/// is `(κ + 1) ∫₀ᴴ (1 − u/H)^κ d((Z − F⁻¹(u))/Z) du` with `H = F(Z)`.
pub fn true_gpi(law: &dyn Marginal, cfg: &GpiConfig) -> Result<f64> {
    let z = cfg.poverty_line;
    let head = law.cdf(z);
    if head <= 0.0 {
        return Ok(0.0);
    }
    let dep = |p: f64, q: f64| {
        let x = law.quantile(p, q);
        (cfg.deprivation)(((z - x) / z).clamp(0.0, 1.0))
    };
    let kappa = match cfg.family {
        GpiFamily::Fgt { .. } => return integrate(0.0, head, |p, _| dep(p, 1.0 - p), REL_TOL),
        GpiFamily::Sen => 1.0,
        GpiFamily::Kakwani { kappa } => kappa,
        GpiFamily::Custom => {
            return Err(Error::BadParameters(
                "no population form is available for a custom GPI".into(),
            ))
        }
    };
    let v = integrate(
        0.0,
        head,
        |p, rest| (rest / head).powf(kappa) * dep(p, 1.0 - p),
        REL_TOL,
    )?;
    Ok((kappa + 1.0) * v)
}

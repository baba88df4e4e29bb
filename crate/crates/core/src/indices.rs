//! Point estimators: the empirical Gini index in L-statistic form, the
//! weighted order-statistic mean `Aₙ`, the generalized poverty index (GPI)
//! and closed-form poverty-index oracles.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;
use crate::sample::EmpiricalDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GiniEstimate {
    pub value: f64,
    pub a_statistic: f64,
    pub mean: f64,
    pub n: usize,
}

/// `Aₙ = (1/n) Σⱼ (j/n) Xⱼ,ₙ`.
pub fn a_statistic(dist: &EmpiricalDistribution) -> f64 {
    let n = dist.len() as f64;
    numeric::sum(
        dist.values()
            .iter()
            .enumerate()
            .map(|(i, &x)| (i + 1) as f64 / n * x),
    ) / n
}

/// Empirical Gini index `2Aₙ/μₙ − 1 − 1/n`.
///
/// Equal incomes short-circuit to exactly 0 so the identity holds without
/// round-off for constant samples.
pub fn gini_point(dist: &EmpiricalDistribution) -> Result<GiniEstimate> {
    let mean = dist.mean();
    if mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    let n = dist.len();
    let a = a_statistic(dist);
    let value = if dist.is_degenerate() {
        0.0
    } else {
        2.0 * a / mean - 1.0 - 1.0 / n as f64
    };
    Ok(GiniEstimate {
        value,
        a_statistic: a,
        mean,
        n,
    })
}

pub type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type DeprivationFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Scale `A(Q, n, Z)`.
pub type ScaleFn = Arc<dyn Fn(usize, usize, f64) -> f64 + Send + Sync>;

/// Per-observation influence function `g` and quantile-domain function `ν`
/// of a GPI's linear representation.
#[derive(Clone)]
pub struct Residual {
    pub g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub nu: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Residual { .. }")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GpiFamily {
    Fgt { alpha: f64 },
    Sen,
    Kakwani { kappa: f64 },
    Custom,
}

/// A fully specified GPI: poverty line, weight, deprivation, scale and the
/// four affine rank coefficients.
#[derive(Clone)]
pub struct GpiConfig {
    pub poverty_line: f64,
    pub weight: WeightFn,
    pub deprivation: DeprivationFn,
    pub scale: ScaleFn,
    pub mu: [f64; 4],
    pub residual: Option<Residual>,
    pub family: GpiFamily,
    pub label: String,
    pub warnings: Vec<String>,
}

impl fmt::Debug for GpiConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GpiConfig")
            .field("label", &self.label)
            .field("poverty_line", &self.poverty_line)
            .field("mu", &self.mu)
            .field("family", &self.family)
            .field("has_residual", &self.residual.is_some())
            .finish()
    }
}

fn check_line(z: f64) -> Result<()> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::OutOfRange {
            what: "poverty line",
            value: z,
        });
    }
    Ok(())
}

fn fgt_residual(z: f64, alpha: f64) -> Residual {
    Residual {
        g: Arc::new(move |x| {
            if x < z {
                ((z - x) / z).powf(alpha)
            } else {
                0.0
            }
        }),
        nu: Arc::new(|_| 0.0),
    }
}

impl GpiConfig {
    /// Foster-Greer-Thorbecke index of order `alpha`.
    pub fn fgt(poverty_line: f64, alpha: f64) -> Result<Self> {
        check_line(poverty_line)?;
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::OutOfRange {
                what: "FGT alpha",
                value: alpha,
            });
        }
        Self::finish(GpiConfig {
            poverty_line,
            weight: Arc::new(|_| 1.0),
            deprivation: Arc::new(move |y: f64| y.powf(alpha)),
            scale: Arc::new(|_, n, _| n as f64),
            mu: [0.0; 4],
            residual: Some(fgt_residual(poverty_line, alpha)),
            family: GpiFamily::Fgt { alpha },
            label: format!("fgt:{alpha}"),
            warnings: Vec::new(),
        })
    }

    pub fn sen(poverty_line: f64) -> Result<Self> {
        check_line(poverty_line)?;
        Self::finish(GpiConfig {
            poverty_line,
            weight: Arc::new(|t| t),
            deprivation: Arc::new(|y| y),
            scale: Arc::new(|q, n, _| (n as f64) * (n as f64 + 1.0) / (q as f64 + 1.0)),
            mu: [0.0, 1.0, 1.0, 1.0],
            residual: None,
            family: GpiFamily::Sen,
            label: "sen".into(),
            warnings: Vec::new(),
        })
    }

    pub fn kakwani(poverty_line: f64, kappa: f64) -> Result<Self> {
        check_line(poverty_line)?;
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::OutOfRange {
                what: "Kakwani kappa",
                value: kappa,
            });
        }
        let power_sum = move |m: usize| numeric::sum((1..=m).map(|j| (j as f64).powf(kappa)));
        Self::finish(GpiConfig {
            poverty_line,
            weight: Arc::new(move |t: f64| t.powf(kappa)),
            deprivation: Arc::new(|y| y),
            scale: Arc::new(move |q, n, _| {
                if q == 0 {
                    0.0
                } else {
                    q as f64 * power_sum(n) / power_sum(q)
                }
            }),
            mu: [0.0, 1.0, 1.0, 1.0],
            residual: None,
            family: GpiFamily::Kakwani { kappa },
            label: format!("kakwani:{kappa}"),
            warnings: Vec::new(),
        })
    }

    /// Attaches user-supplied residual functions `(g, ν)`.
    pub fn with_residual(mut self, residual: Residual) -> Self {
        self.residual = Some(residual);
        self
    }

    fn finish(mut self) -> Result<Self> {
        let d0 = (self.deprivation)(0.0);
        if !d0.is_finite() {
            return Err(Error::Config(format!(
                "deprivation of `{}` is not finite at 0",
                self.label
            )));
        }
        if d0 != 0.0 {
            self.warnings.push(format!(
                "deprivation of `{}` is {d0} at 0 (expected 0)",
                self.label
            ));
        }
        Ok(self)
    }

    pub fn has_residual(&self) -> bool {
        self.residual.is_some()
    }
}

/// Serializable description of a GPI, resolved against a poverty line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GpiSpec {
    Fgt { alpha: f64 },
    Sen,
    Kakwani { kappa: f64 },
    Custom(CustomGpi),
}

/// JSON-configurable GPI built from parametric weight, deprivation and scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGpi {
    /// `w(t) = t^exponent`.
    pub weight_exponent: f64,
    /// `d(y) = y^exponent`.
    pub deprivation_exponent: f64,
    pub scale: ScaleSpec,
    pub mu: [f64; 4],
    /// Only meaningful for unit weight with `A = n`, where the index is the
    /// sample mean of `1(x < Z) d((Z - x)/Z)`.
    #[serde(default)]
    pub residual: Option<ResidualSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleSpec {
    Constant { value: f64 },
    SampleSize,
    Sen,
    Kakwani { kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSpec {
    DeprivationMean,
}

impl GpiSpec {
    /// Parses the CLI selector forms `fgt:ALPHA`, `sen`, `kakwani:KAPPA`.
    pub fn parse_selector(text: &str) -> Result<Self> {
        let mut parts = text.splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let arg = parts.next();
        let number = |what: &str| -> Result<f64> {
            let raw = arg.ok_or_else(|| Error::Config(format!("`{head}` needs a {what}")))?;
            raw.parse()
                .map_err(|_| Error::Config(format!("bad {what} `{raw}` in `{text}`")))
        };
        match head {
            "fgt" => Ok(GpiSpec::Fgt {
                alpha: number("alpha")?,
            }),
            "sen" if arg.is_none() => Ok(GpiSpec::Sen),
            "kakwani" => Ok(GpiSpec::Kakwani {
                kappa: number("kappa")?,
            }),
            _ => Err(Error::Config(format!("unknown index selector `{text}`"))),
        }
    }

    pub fn build(&self, poverty_line: f64) -> Result<GpiConfig> {
        match self {
            GpiSpec::Fgt { alpha } => GpiConfig::fgt(poverty_line, *alpha),
            GpiSpec::Sen => GpiConfig::sen(poverty_line),
            GpiSpec::Kakwani { kappa } => GpiConfig::kakwani(poverty_line, *kappa),
            GpiSpec::Custom(custom) => custom.build(poverty_line),
        }
    }
}

impl CustomGpi {
    pub fn build(&self, poverty_line: f64) -> Result<GpiConfig> {
        check_line(poverty_line)?;
        let we = self.weight_exponent;
        let de = self.deprivation_exponent;
        if !we.is_finite() || !(de.is_finite() && de >= 0.0) {
            return Err(Error::Config(
                "custom GPI exponents must be finite, deprivation exponent >= 0".into(),
            ));
        }
        if self.mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::Config(
                "custom GPI rank coefficients must be finite".into(),
            ));
        }
        let scale: ScaleFn = match self.scale {
            ScaleSpec::Constant { value } => Arc::new(move |_, _, _| value),
            ScaleSpec::SampleSize => Arc::new(|_, n, _| n as f64),
            ScaleSpec::Sen => Arc::new(|q, n, _| (n as f64) * (n as f64 + 1.0) / (q as f64 + 1.0)),
            ScaleSpec::Kakwani { kappa } => {
                let s = move |m: usize| numeric::sum((1..=m).map(|j| (j as f64).powf(kappa)));
                Arc::new(move |q, n, _| if q == 0 { 0.0 } else { q as f64 * s(n) / s(q) })
            }
        };
        let residual = match self.residual {
            None => None,
            Some(ResidualSpec::DeprivationMean) => {
                if we != 0.0 || self.scale != ScaleSpec::SampleSize {
                    return Err(Error::Config(
                        "deprivation_mean residual requires weight_exponent 0 and sample_size scale"
                            .into(),
                    ));
                }
                Some(fgt_residual(poverty_line, de))
            }
        };
        GpiConfig {
            poverty_line,
            weight: Arc::new(move |t: f64| t.powf(we)),
            deprivation: Arc::new(move |y: f64| y.powf(de)),
            scale,
            mu: self.mu,
            residual,
            family: GpiFamily::Custom,
            label: "custom".into(),
            warnings: Vec::new(),
        }
        .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpiEstimate {
    pub value: f64,
    pub poor_count: usize,
    pub normalizer: f64,
}

/// Number of incomes strictly below `z`.
pub fn poor_count(dist: &EmpiricalDistribution, z: f64) -> usize {
    dist.values().partition_point(|&x| x < z)
}

/// `Jₙ = A(Q,n,Z)/(n B) Σ_{j≤Q} w(μ₁n + μ₂Q − μ₃j + μ₄) d((Z − Xⱼ,ₙ)/Z)`
/// with `B = Σ_{j≤n} w(j)`.
pub fn gpi_point(dist: &EmpiricalDistribution, cfg: &GpiConfig) -> Result<GpiEstimate> {
    if dist.mean() == 0.0 {
        return Err(Error::ZeroMean);
    }
    let n = dist.len();
    let z = cfg.poverty_line;
    let q = poor_count(dist, z);
    let weight = |t: f64| -> Result<f64> {
        let w = (cfg.weight)(t);
        if w.is_finite() {
            Ok(w)
        } else {
            Err(Error::Config(format!(
                "weight of `{}` undefined at {t}",
                cfg.label
            )))
        }
    };
    let mut terms = Vec::with_capacity(n);
    for j in 1..=n {
        terms.push(weight(j as f64)?);
    }
    let normalizer = numeric::sum(terms);
    if normalizer == 0.0 {
        return Err(Error::ZeroNormalizer);
    }
    let [m1, m2, m3, m4] = cfg.mu;
    let (nf, qf) = (n as f64, q as f64);
    let mut terms = Vec::with_capacity(q);
    for (i, &x) in dist.values()[..q].iter().enumerate() {
        let j = (i + 1) as f64;
        let y = ((z - x) / z).clamp(0.0, 1.0);
        terms.push(weight(m1 * nf + m2 * qf - m3 * j + m4)? * (cfg.deprivation)(y));
    }
    let total = numeric::sum(terms);
    let value = if q == 0 {
        0.0
    } else {
        (cfg.scale)(q, n, z) / (nf * normalizer) * total
    };
    Ok(GpiEstimate {
        value,
        poor_count: q,
        normalizer,
    })
}

/// `(1/n) Σ_{X<Z} ((Z − X)/Z)^α`.
pub fn fgt_direct(dist: &EmpiricalDistribution, z: f64, alpha: f64) -> f64 {
    let q = poor_count(dist, z);
    numeric::sum(
        dist.values()[..q]
            .iter()
            .map(|&x| ((z - x) / z).powf(alpha)),
    ) / dist.len() as f64
}

/// `(2/(n(Q+1))) Σ_{j≤Q} (Q − j + 1)(Z − Xⱼ,ₙ)/Z`.
pub fn sen_direct(dist: &EmpiricalDistribution, z: f64) -> f64 {
    let q = poor_count(dist, z);
    let n = dist.len() as f64;
    let s = numeric::sum(
        dist.values()[..q]
            .iter()
            .enumerate()
            .map(|(i, &x)| (q - i) as f64 * (z - x) / z),
    );
    2.0 / (n * (q as f64 + 1.0)) * s
}

/// `(Q / (n Σ_{j≤Q} j^κ)) Σ_{j≤Q} (Q − j + 1)^κ (Z − Xⱼ,ₙ)/Z`.
pub fn kakwani_direct(dist: &EmpiricalDistribution, z: f64, kappa: f64) -> f64 {
    let q = poor_count(dist, z);
    if q == 0 {
        return 0.0;
    }
    let n = dist.len() as f64;
    let norm = numeric::sum((1..=q).map(|j| (j as f64).powf(kappa)));
    let s = numeric::sum(
        dist.values()[..q]
            .iter()
            .enumerate()
            .map(|(i, &x)| ((q - i) as f64).powf(kappa) * (z - x) / z),
    );
    q as f64 / (n * norm) * s
}

//! One-period plug-in variance engine for `Aₙ` and the Gini index.
//!
//! Every integral over `(0, 1)` is evaluated exactly on the `n` sample blocks.
//! A block-constant function `f` has a piecewise-linear tail integral
//! `Φ_f(u) = ∫ᵤ¹ f`, and the Brownian-bridge quadratic form reduces to the
//! variance of `Φ_f(U)` for uniform `U`, which integrates in closed form on
//! each block. That brings the double kernel sum down to `O(k)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::gini_point;
use crate::normal;
use crate::numeric;
use crate::sample::EmpiricalDistribution;

/// Ratio `X_{n,n} / μₙ` above which a bounded-quantile warning is attached.
pub const HEAVY_TAIL_RATIO: f64 = 50.0;

/// Relative round-off allowance for negative variance assemblies.
pub const NEGATIVE_TOLERANCE: f64 = 1e-8;

/// A function that is constant on each of the `k` equal blocks of `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFunction {
    values: Vec<f64>,
    tails: Vec<f64>,
}

impl BlockFunction {
    pub fn new(values: Vec<f64>) -> Self {
        let k = values.len();
        let mut tails = vec![0.0; k + 1];
        // Running sum from the right keeps the tail at 1 exactly zero.
        let mut acc = 0.0;
        for j in (0..k).rev() {
            acc += values[j];
            tails[j] = acc / k as f64;
        }
        Self { values, tails }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Φ_f(j/k)` for `j = 0..=k`.
    pub fn tails(&self) -> &[f64] {
        &self.tails
    }

    /// `Φ_f(u) = ∫ᵤ¹ f(s) ds`.
    pub fn tail_at(&self, u: f64) -> f64 {
        let k = self.len();
        if u <= 0.0 {
            return self.tails[0];
        }
        if u >= 1.0 {
            return 0.0;
        }
        let pos = u * k as f64;
        let j = (pos.floor() as usize).min(k - 1);
        let frac = pos - j as f64;
        self.tails[j + 1] + (1.0 - frac) * self.values[j] / k as f64
    }

    /// `Φ_f((j − 1/2)/k)` for block `j = 1..=k` (0-based index `j - 1`).
    pub fn tail_at_midpoint(&self, block: usize) -> f64 {
        self.tails[block + 1] + self.values[block] / (2.0 * self.len() as f64)
    }

    /// `∫₀¹ s f(s) ds`, which also equals `∫₀¹ Φ_f`.
    pub fn first_moment(&self) -> f64 {
        let k = self.len() as f64;
        numeric::sum(
            self.values
                .iter()
                .enumerate()
                .map(|(j, &f)| f * (2 * j + 1) as f64),
        ) / (2.0 * k * k)
    }

    /// Average of `f` over `[a, b]`.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        (self.tail_at(a) - self.tail_at(b)) / (b - a)
    }
}

/// `∫∫ f(s) g(t) (min(s,t) − s t) ds dt` for two block functions on the same
/// `k` blocks.
pub fn gamma1_blocks(f: &BlockFunction, g: &BlockFunction) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch {
            left: f.len(),
            right: g.len(),
        });
    }
    let k = f.len();
    if k == 0 {
        return Ok(0.0);
    }
    let d = 1.0 / k as f64;
    let (tf, tg) = (f.tails(), g.tails());
    let mf = numeric::sum((0..k).map(|j| tf[j] + tf[j + 1])) * d / 2.0;
    let mg = numeric::sum((0..k).map(|j| tg[j] + tg[j + 1])) * d / 2.0;
    let total = numeric::sum((0..k).map(|j| {
        let (a0, a1) = (tf[j] - mf, tf[j + 1] - mf);
        let (b0, b1) = (tg[j] - mg, tg[j + 1] - mg);
        (a0 * b0 + a1 * b1) / 3.0 + (a0 * b1 + a1 * b0) / 6.0
    }));
    Ok(total * d)
}

/// Exact Brownian-bridge quadratic form for block-constant inputs.
pub fn gamma1_exact(f_blocks: &[f64], g_blocks: &[f64]) -> Result<f64> {
    if f_blocks.len() != g_blocks.len() {
        return Err(Error::LengthMismatch {
            left: f_blocks.len(),
            right: g_blocks.len(),
        });
    }
    gamma1_blocks(
        &BlockFunction::new(f_blocks.to_vec()),
        &BlockFunction::new(g_blocks.to_vec()),
    )
}

/// Plug-in weight for the distribution function inside `h`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `j/n`, the empirical distribution function.
    #[default]
    Ecdf,
    /// `(2j − 1)/(2n)`.
    Midrank,
}

impl Weighting {
    pub fn at(self, j: usize, n: usize) -> f64 {
        match self {
            Weighting::Ecdf => j as f64 / n as f64,
            Weighting::Midrank => (2 * j - 1) as f64 / (2 * n) as f64,
        }
    }
}

/// Derived sequences shared by the one-period variance terms.
#[derive(Debug, Clone)]
pub struct PluginContext {
    pub dist: EmpiricalDistribution,
    /// `Xⱼ,ₙ · w(j)` in sorted order.
    pub h_values: Vec<f64>,
    /// The quantile function as a block function (`Xⱼ,ₙ` on block `j`).
    pub ell: BlockFunction,
    pub a_hat: f64,
    pub mean: f64,
    pub weighting: Weighting,
    /// `Φ_ℓ` at block midpoints.
    phi_mid: Vec<f64>,
}

pub fn build_plugin_context(dist: &EmpiricalDistribution) -> Result<PluginContext> {
    PluginContext::new(dist, Weighting::Ecdf)
}

impl PluginContext {
    pub fn new(dist: &EmpiricalDistribution, weighting: Weighting) -> Result<Self> {
        let n = dist.len();
        if n < 2 {
            return Err(Error::SampleTooSmall { needed: 2, got: n });
        }
        let h_values: Vec<f64> = dist
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x)| x * weighting.at(i + 1, n))
            .collect();
        let a_hat = numeric::mean(&h_values);
        let ell = BlockFunction::new(dist.values().to_vec());
        let phi_mid = (0..n).map(|j| ell.tail_at_midpoint(j)).collect();
        Ok(Self {
            dist: dist.clone(),
            h_values,
            ell,
            a_hat,
            mean: dist.mean(),
            weighting,
            phi_mid,
        })
    }

    /// `I_d`: the sorted incomes.
    pub fn id_values(&self) -> &[f64] {
        self.dist.values()
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    /// `Γ(φ, βℓ) = (1/n) Σ φⱼ Φ_ℓ((j − ½)/n) − P(φ) ∫ s ℓ(s) ds`.
    fn gamma_beta(&self, phi: &[f64]) -> f64 {
        let cross =
            numeric::sum(phi.iter().zip(&self.phi_mid).map(|(a, b)| a * b)) / self.n() as f64;
        cross - numeric::mean(phi) * self.ell.first_moment()
    }
}

pub fn gamma_hh(ctx: &PluginContext) -> f64 {
    numeric::variance(&ctx.h_values)
}

pub fn gamma_hid(ctx: &PluginContext) -> f64 {
    numeric::covariance(&ctx.h_values, ctx.id_values())
}

pub fn var_id(ctx: &PluginContext) -> f64 {
    numeric::variance(ctx.id_values())
}

pub fn gamma_h_beta(ctx: &PluginContext) -> f64 {
    ctx.gamma_beta(&ctx.h_values)
}

pub fn gamma_id_beta(ctx: &PluginContext) -> f64 {
    ctx.gamma_beta(ctx.id_values())
}

/// Which assembled variance a report holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceKind {
    A,
    Gini,
    DeltaGini,
    DeltaGpi,
}

/// An assembled asymptotic variance with its named term ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub kind: VarianceKind,
    pub sigma2: f64,
    pub terms: BTreeMap<String, f64>,
    pub n: usize,
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

impl VarianceReport {
    pub fn term(&self, name: &str) -> f64 {
        self.terms.get(name).copied().unwrap_or(f64::NAN)
    }

    /// Re-assembles the variance from the ledger, before any clamping.
    pub fn recompute(&self) -> f64 {
        let t = |k: &str| self.term(k);
        match self.kind {
            VarianceKind::A => t("gamma_hh") + t("gamma1_ll") + 2.0 * t("gamma_h_beta"),
            VarianceKind::Gini => {
                let (a, mu) = (t("a_hat"), t("mean"));
                let s2a = t("gamma_hh") + t("gamma1_ll") + 2.0 * t("gamma_h_beta");
                4.0 / (mu * mu)
                    * (s2a + a * a / (mu * mu) * t("gamma_id_id")
                        - 2.0 * a / mu * (t("gamma_h_id") + t("gamma_id_beta")))
            }
            VarianceKind::DeltaGini => {
                let beta = t("gamma1_l1_l1") + t("gamma1_l2_l2") - 2.0 * t("gamma2_l1_l2");
                t("fstar_fstar") + t("ftilde_ftilde") + beta
                    - 2.0 * (t("fstar_ftilde") + t("ftilde_beta_l") - t("fstar_beta_l"))
            }
            VarianceKind::DeltaGpi => {
                let beta = t("gamma1_nu1_nu1") - 2.0 * t("gamma2_nu1_nu2") + t("gamma1_nu2_nu2");
                t("fj_fj") + beta + 2.0 * t("fj_beta_nu")
            }
        }
    }

    /// Builds a report from ledger terms, clamping round-off negatives.
    pub(crate) fn assemble(
        kind: VarianceKind,
        terms: BTreeMap<String, f64>,
        n: usize,
        scale: f64,
        mut warnings: Vec<String>,
    ) -> Result<Self> {
        let mut report = Self {
            kind,
            sigma2: 0.0,
            terms,
            n,
            degenerate: false,
            warnings: Vec::new(),
        };
        let raw = report.recompute();
        report.sigma2 = clamp_variance(raw, scale, &mut warnings)?;
        report.warnings = warnings;
        Ok(report)
    }

    pub(crate) fn degenerate(kind: VarianceKind, names: &[&str], n: usize, reason: &str) -> Self {
        Self {
            kind,
            sigma2: 0.0,
            terms: names.iter().map(|k| (k.to_string(), 0.0)).collect(),
            n,
            degenerate: true,
            warnings: vec![reason.to_string()],
        }
    }
}

/// Zero for round-off negatives within `NEGATIVE_TOLERANCE · max(1, scale)`,
/// an error beyond that.
pub(crate) fn clamp_variance(raw: f64, scale: f64, warnings: &mut Vec<String>) -> Result<f64> {
    if raw.is_nan() {
        return Err(Error::NegativeVariance { value: raw });
    }
    if raw >= 0.0 {
        return Ok(raw);
    }
    if raw >= -NEGATIVE_TOLERANCE * scale.max(1.0) {
        warnings.push(format!("variance {raw:e} clamped to 0 (round-off)"));
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance { value: raw })
    }
}

pub(crate) fn tail_warning(dist: &EmpiricalDistribution) -> Option<String> {
    let ratio = dist.max() / dist.mean();
    (ratio > HEAVY_TAIL_RATIO).then(|| {
        format!("largest income is {ratio:.1} times the mean; the bounded-quantile assumption is doubtful")
    })
}

const ONE_PHASE_TERMS: [&str; 8] = [
    "gamma_hh",
    "gamma1_ll",
    "gamma_h_beta",
    "gamma_id_id",
    "gamma_h_id",
    "gamma_id_beta",
    "mean",
    "a_hat",
];

const DEGENERATE_NOTE: &str = "all incomes are equal; the variance is exactly 0";

fn one_phase_terms(ctx: &PluginContext) -> Result<BTreeMap<String, f64>> {
    let values = [
        gamma_hh(ctx),
        gamma1_blocks(&ctx.ell, &ctx.ell)?,
        gamma_h_beta(ctx),
        var_id(ctx),
        gamma_hid(ctx),
        gamma_id_beta(ctx),
        ctx.mean,
        ctx.a_hat,
    ];
    Ok(ONE_PHASE_TERMS
        .iter()
        .zip(values)
        .map(|(k, v)| (k.to_string(), v))
        .collect())
}

fn degenerate_one_phase(ctx: &PluginContext, kind: VarianceKind) -> VarianceReport {
    let mut r = VarianceReport::degenerate(kind, &ONE_PHASE_TERMS, ctx.n(), DEGENERATE_NOTE);
    r.terms.insert("mean".into(), ctx.mean);
    r.terms.insert("a_hat".into(), ctx.a_hat);
    r
}

/// Asymptotic variance of `√n (Aₙ − A)`.
pub fn sigma2_a(ctx: &PluginContext) -> Result<VarianceReport> {
    if ctx.dist.is_degenerate() {
        return Ok(degenerate_one_phase(ctx, VarianceKind::A));
    }
    let terms = one_phase_terms(ctx)?;
    let scale =
        terms["gamma_hh"].abs() + terms["gamma1_ll"].abs() + 2.0 * terms["gamma_h_beta"].abs();
    let warnings = tail_warning(&ctx.dist).into_iter().collect();
    VarianceReport::assemble(VarianceKind::A, terms, ctx.n(), scale, warnings)
}

/// Asymptotic variance of `√n (GIₙ − GI)`.
pub fn sigma2_gi(ctx: &PluginContext) -> Result<VarianceReport> {
    if ctx.mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    if ctx.dist.is_degenerate() {
        return Ok(degenerate_one_phase(ctx, VarianceKind::Gini));
    }
    let terms = one_phase_terms(ctx)?;
    let (a, mu) = (ctx.a_hat, ctx.mean);
    let t = |k: &str| terms[k].abs();
    let scale = 4.0 / (mu * mu)
        * (t("gamma_hh")
            + t("gamma1_ll")
            + 2.0 * t("gamma_h_beta")
            + a * a / (mu * mu) * t("gamma_id_id")
            + 2.0 * a / mu * (t("gamma_h_id") + t("gamma_id_beta")));
    let warnings = tail_warning(&ctx.dist).into_iter().collect();
    VarianceReport::assemble(VarianceKind::Gini, terms, ctx.n(), scale, warnings)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// `estimate ± z_{(1+level)/2} · √(sigma2 / n)`.
    pub fn normal(estimate: f64, sigma2: f64, n: usize, level: f64) -> Result<Self> {
        check_level(level)?;
        let z = normal::quantile_upper((1.0 - level) / 2.0);
        let half = z * (sigma2 / n as f64).sqrt();
        Ok(Self {
            estimate,
            lower: estimate - half,
            upper: estimate + half,
            level,
        })
    }

    fn clipped(mut self, lo: f64, hi: f64) -> Self {
        self.lower = self.lower.clamp(lo, hi);
        self.upper = self.upper.clamp(lo, hi);
        self
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::OutOfRange {
            what: "confidence level",
            value: level,
        });
    }
    Ok(())
}

/// Normal-approximation interval for the Gini index, clipped to `[−1, 1]`.
pub fn gini_ci(dist: &EmpiricalDistribution, level: f64) -> Result<Interval> {
    let ctx = build_plugin_context(dist)?;
    let report = sigma2_gi(&ctx)?;
    gini_ci_from(&ctx, &report, level)
}

pub fn gini_ci_from(ctx: &PluginContext, report: &VarianceReport, level: f64) -> Result<Interval> {
    let g = gini_point(&ctx.dist)?.value;
    Ok(Interval::normal(g, report.sigma2, ctx.n(), level)?.clipped(-1.0, 1.0))
}

/// Lorenz curve points `(j/n, Σ_{i≤j} Xᵢ,ₙ / Σ Xᵢ)`.
pub fn lorenz_points(dist: &EmpiricalDistribution) -> Vec<(f64, f64)> {
    let n = dist.len();
    let total = numeric::sum(dist.values().iter().copied());
    let mut acc = 0.0;
    let mut out: Vec<(f64, f64)> = dist
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            acc += x;
            ((i + 1) as f64 / n as f64, acc / total)
        })
        .collect();
    if let Some(last) = out.last_mut() {
        last.1 = 1.0;
    }
    out
}

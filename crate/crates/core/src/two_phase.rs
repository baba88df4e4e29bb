//! Two-period inference on paired samples: Gini and GPI variations, their
//! copula-dependent plug-in variances, their joint covariance and the
//! pro-poor ratio `R = ΔJ / ΔGI`.
//!
//! Each influence component is stored per household as a period-1 part and a
//! period-2 part. Under the empirical coupling the two parts are evaluated on
//! the same rows; the product coupling drops every cross-period covariance,
//! which is the plug-in under an independence copula.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    check_level, clamp_variance, gamma1_blocks, tail_warning, BlockFunction, Interval,
    VarianceKind, VarianceReport, Weighting,
};
use crate::indices::{gini_point, gpi_point, GiniEstimate, GpiConfig, GpiEstimate};
use crate::numeric;
use crate::sample::{
    empirical_copula, rank, CopulaCdf, EmpiricalCopula, EmpiricalDistribution, Grid, PairedSample,
    ProductCopula,
};

/// How the two periods are joined when taking cross-period expectations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Rows as observed: the empirical copula.
    #[default]
    Empirical,
    /// Periods treated as independent: the product copula.
    Product,
}

/// Integration scheme for the cross-period copula integrals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMode {
    /// Exact integration against the rank-based step copula.
    #[default]
    Exact,
    /// Midpoint grid quadrature with cell-averaged integrands.
    Grid(Grid),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPhaseOptions {
    pub mode: QuadratureMode,
    pub coupling: Coupling,
    pub weighting: Weighting,
}

/// An influence component split into its period-1 and period-2 parts.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFunction {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl RowFunction {
    fn zeros(n: usize) -> Self {
        Self {
            first: vec![0.0; n],
            second: vec![0.0; n],
        }
    }

    pub fn combined(&self) -> Vec<f64> {
        self.first
            .iter()
            .zip(&self.second)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// Quantile-domain component `Φ_{f₂}(V) − Φ_{f₁}(U)` of a linear representation.
#[derive(Debug, Clone)]
struct BetaPart {
    f1: BlockFunction,
    f2: BlockFunction,
    rows: RowFunction,
}

#[derive(Debug, Clone)]
struct GpiSide {
    est1: GpiEstimate,
    est2: GpiEstimate,
    fj: RowFunction,
    beta_nu: BetaPart,
}

#[derive(Debug, Clone)]
pub struct TwoPhaseContext {
    pub paired: PairedSample,
    pub dist1: EmpiricalDistribution,
    pub dist2: EmpiricalDistribution,
    pub copula: EmpiricalCopula,
    pub options: TwoPhaseOptions,
    pub gini1: GiniEstimate,
    pub gini2: GiniEstimate,
    /// `(2/μ₍₂₎) h₂(v) − (2/μ₍₁₎) h₁(u)` per row.
    pub fstar: RowFunction,
    /// `2 (A₍₂₎/μ₍₂₎²) x₂ − 2 (A₍₁₎/μ₍₁₎²) x₁` per row.
    pub ftilde: RowFunction,
    beta_l: BetaPart,
    gpi: Option<GpiSide>,
    /// Copula table on the grid nodes (grid mode only).
    table: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

fn positions(values: &[f64]) -> Vec<usize> {
    rank(values).position
}

// Tail integral at each row's midrank point.
fn rows_at(f: &BlockFunction, pos: &[usize]) -> Vec<f64> {
    pos.iter().map(|&p| f.tail_at_midpoint(p - 1)).collect()
}

fn beta_part(f1: BlockFunction, f2: BlockFunction, pos1: &[usize], pos2: &[usize]) -> BetaPart {
    let first = rows_at(&f1, pos1).into_iter().map(|v| -v).collect();
    let second = rows_at(&f2, pos2);
    BetaPart {
        f1,
        f2,
        rows: RowFunction { first, second },
    }
}

fn midpoint_blocks(n: usize, f: &(dyn Fn(f64) -> f64 + Send + Sync)) -> Vec<f64> {
    (1..=n).map(|j| f((j as f64 - 0.5) / n as f64)).collect()
}

/// Precomputes every per-row and per-block evaluation needed by the
/// two-period variance formulas.
///
/// `gpi` supplies the two periods' index configurations; both must carry
/// residual functions.
pub fn build_two_phase(
    paired: &PairedSample,
    gpi: Option<(&GpiConfig, &GpiConfig)>,
    options: TwoPhaseOptions,
) -> Result<TwoPhaseContext> {
    let n = paired.len();
    if n < 2 {
        return Err(Error::SampleTooSmall { needed: 2, got: n });
    }
    let (dist1, dist2) = paired.margins();
    let gini1 = gini_point(&dist1)?;
    let gini2 = gini_point(&dist2)?;
    let pos1 = positions(paired.first());
    let pos2 = positions(paired.second());
    let mut warnings: Vec<String> = [&dist1, &dist2]
        .iter()
        .enumerate()
        .filter_map(|(i, d)| tail_warning(d).map(|w| format!("period {}: {w}", i + 1)))
        .collect();

    let weight = options.weighting;
    let h = |x: &[f64], pos: &[usize]| -> Vec<f64> {
        x.iter()
            .zip(pos)
            .map(|(&x, &p)| x * weight.at(p, n))
            .collect()
    };
    let (h1, h2) = (h(paired.first(), &pos1), h(paired.second(), &pos2));
    let (a1, a2) = (numeric::mean(&h1), numeric::mean(&h2));
    let (mu1, mu2) = (dist1.mean(), dist2.mean());
    if mu1 == 0.0 || mu2 == 0.0 {
        return Err(Error::ZeroMean);
    }

    let mut fstar = RowFunction {
        first: h1.iter().map(|v| -2.0 / mu1 * v).collect(),
        second: h2.iter().map(|v| 2.0 / mu2 * v).collect(),
    };
    let mut ftilde = RowFunction {
        first: paired
            .first()
            .iter()
            .map(|x| -2.0 * a1 / (mu1 * mu1) * x)
            .collect(),
        second: paired
            .second()
            .iter()
            .map(|x| 2.0 * a2 / (mu2 * mu2) * x)
            .collect(),
    };
    let scaled = |d: &EmpiricalDistribution, mu: f64| {
        BlockFunction::new(d.values().iter().map(|x| 2.0 / mu * x).collect())
    };
    let mut l1 = scaled(&dist1, mu1);
    let mut l2 = scaled(&dist2, mu2);
    // A constant margin has an exactly constant Gini; its influence is zero.
    if dist1.is_degenerate() {
        fstar.first = vec![0.0; n];
        ftilde.first = vec![0.0; n];
        l1 = BlockFunction::new(vec![0.0; n]);
        warnings.push("period 1 incomes are all equal; its Gini influence is 0".into());
    }
    if dist2.is_degenerate() {
        fstar.second = vec![0.0; n];
        ftilde.second = vec![0.0; n];
        l2 = BlockFunction::new(vec![0.0; n]);
        warnings.push("period 2 incomes are all equal; its Gini influence is 0".into());
    }
    let beta_l = beta_part(l1, l2, &pos1, &pos2);

    let gpi = match gpi {
        None => None,
        Some((c1, c2)) => {
            let mut fj = RowFunction::zeros(n);
            let mut nus = Vec::with_capacity(2);
            for (cfg, period) in [(c1, 1), (c2, 2)] {
                let Some(res) = cfg.residual.as_ref() else {
                    return Err(Error::MissingResidualFunctions(cfg.label.clone()));
                };
                if period == 1 {
                    fj.first = paired.first().iter().map(|&x| -(res.g)(x)).collect();
                } else {
                    fj.second = paired.second().iter().map(|&x| (res.g)(x)).collect();
                }
                nus.push(BlockFunction::new(midpoint_blocks(n, res.nu.as_ref())));
                warnings.extend(cfg.warnings.iter().cloned());
            }
            let nu2 = nus.pop().expect("two periods");
            let nu1 = nus.pop().expect("two periods");
            Some(GpiSide {
                est1: gpi_point(&dist1, c1)?,
                est2: gpi_point(&dist2, c2)?,
                fj,
                beta_nu: beta_part(nu1, nu2, &pos1, &pos2),
            })
        }
    };

    let copula = empirical_copula(paired);
    let table = match options.mode {
        QuadratureMode::Exact => None,
        QuadratureMode::Grid(grid) => Some(match options.coupling {
            Coupling::Empirical => copula.grid_table(&grid),
            Coupling::Product => ProductCopula.grid_table(&grid),
        }),
    };

    Ok(TwoPhaseContext {
        paired: paired.clone(),
        dist1,
        dist2,
        copula,
        options,
        gini1,
        gini2,
        fstar,
        ftilde,
        beta_l,
        gpi,
        table,
        warnings,
    })
}

/// `GIₙ(2) − GIₙ(1)`.
pub fn delta_gini(ctx: &TwoPhaseContext) -> f64 {
    ctx.gini2.value - ctx.gini1.value
}

/// `Jₙ(2) − Jₙ(1)`.
pub fn delta_gpi(ctx: &TwoPhaseContext) -> Result<f64> {
    let side = ctx.gpi_side()?;
    Ok(side.est2.value - side.est1.value)
}

/// Sample covariance `(1/n) Σ (fᵢ − f̄)(gᵢ − ḡ)` of per-row evaluations.
pub fn gamma_star(f_rows: &[f64], g_rows: &[f64]) -> Result<f64> {
    if f_rows.len() != g_rows.len() {
        return Err(Error::LengthMismatch {
            left: f_rows.len(),
            right: g_rows.len(),
        });
    }
    Ok(numeric::covariance(f_rows, g_rows))
}

/// `Σₖ Σₗ f(sₖ) g(sₗ) (C(sₖ, sₗ) − sₖ sₗ) / m²` on the midpoint grid.
pub fn gamma2_grid(
    f_nodes: &[f64],
    g_nodes: &[f64],
    copula: &dyn CopulaCdf,
    grid: &Grid,
) -> Result<f64> {
    let table = copula.grid_table(grid);
    gamma2_table(f_nodes, g_nodes, &table, grid)
}

fn gamma2_table(f_nodes: &[f64], g_nodes: &[f64], table: &[f64], grid: &Grid) -> Result<f64> {
    let m = grid.points();
    for len in [f_nodes.len(), g_nodes.len()] {
        if len != m {
            return Err(Error::LengthMismatch {
                left: len,
                right: m,
            });
        }
    }
    let nodes = grid.nodes();
    let mut rows = Vec::with_capacity(m);
    for k in 0..m {
        if f_nodes[k] == 0.0 {
            continue;
        }
        let inner =
            numeric::sum((0..m).map(|l| g_nodes[l] * (table[k * m + l] - nodes[k] * nodes[l])));
        rows.push(f_nodes[k] * inner);
    }
    Ok(numeric::sum(rows) / (m * m) as f64)
}

impl TwoPhaseContext {
    pub fn n(&self) -> usize {
        self.paired.len()
    }

    fn gpi_side(&self) -> Result<&GpiSide> {
        self.gpi
            .as_ref()
            .ok_or_else(|| Error::Config("no GPI configured for this two-period context".into()))
    }

    /// Both periods' GPI point estimates, if configured.
    pub fn gpi_estimates(&self) -> Option<(GpiEstimate, GpiEstimate)> {
        self.gpi.as_ref().map(|s| (s.est1, s.est2))
    }

    /// Block evaluations of `(L₍₁₎, L₍₂₎)`.
    pub fn l_blocks(&self) -> (&[f64], &[f64]) {
        (self.beta_l.f1.values(), self.beta_l.f2.values())
    }

    /// Γ* of two row-level components under the configured coupling.
    pub fn gamma_rows(&self, a: &RowFunction, b: &RowFunction) -> f64 {
        match self.options.coupling {
            Coupling::Empirical => numeric::covariance(&a.combined(), &b.combined()),
            Coupling::Product => {
                numeric::covariance(&a.first, &b.first) + numeric::covariance(&a.second, &b.second)
            }
        }
    }

    // Γ*(a, β) for a row component against a quantile-domain component.
    fn gamma_row_beta(&self, a: &RowFunction, beta: &BetaPart) -> f64 {
        match (self.options.mode, &self.table) {
            (QuadratureMode::Grid(grid), Some(_)) => self.gamma_row_beta_grid(a, beta, &grid),
            _ => self.gamma_rows(a, &beta.rows),
        }
    }

    fn gamma_row_beta_grid(&self, a: &RowFunction, beta: &BetaPart, grid: &Grid) -> f64 {
        let nodes = grid.nodes();
        let m = nodes.len() as f64;
        let cells1 = cell_values(&beta.f1, grid);
        let cells2 = cell_values(&beta.f2, grid);
        let (u, v) = (self.copula.u(), self.copula.v());
        // ∫ B(t) cov(F, 1(W ≤ t)) dt on the grid for one (part, period) pair.
        let indicator = |part: &[f64], obs: &[f64], cells: &[f64]| -> f64 {
            let mean = numeric::mean(part);
            let n = part.len() as f64;
            numeric::sum(nodes.iter().zip(cells).map(|(&s, &b)| {
                let below = obs.iter().filter(|&&w| w <= s).count() as f64 / n;
                let hit = numeric::sum(
                    part.iter()
                        .zip(obs)
                        .filter(|(_, &w)| w <= s)
                        .map(|(&f, _)| f),
                );
                b * (hit / n - mean * below)
            })) / m
        };
        let same = indicator(&a.second, v, &cells2) - indicator(&a.first, u, &cells1);
        match self.options.coupling {
            Coupling::Product => same,
            Coupling::Empirical => {
                same + indicator(&a.first, v, &cells2) - indicator(&a.second, u, &cells1)
            }
        }
    }

    /// Cross-period kernel integral with `f` on period 1 and `g` on period 2.
    fn gamma2(&self, f: &BlockFunction, g: &BlockFunction, rows_f: &[f64], rows_g: &[f64]) -> f64 {
        match (self.options.mode, &self.table) {
            (QuadratureMode::Grid(grid), Some(table)) => {
                gamma2_table(&cell_values(f, &grid), &cell_values(g, &grid), table, &grid)
                    .expect("grid-sized node vectors")
            }
            _ => match self.options.coupling {
                Coupling::Product => 0.0,
                Coupling::Empirical => numeric::covariance(rows_f, rows_g),
            },
        }
    }
}

fn cell_values(f: &BlockFunction, grid: &Grid) -> Vec<f64> {
    let m = grid.points();
    (0..m)
        .map(|k| f.cell_average(k as f64 / m as f64, (k + 1) as f64 / m as f64))
        .collect()
}

fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

/// Asymptotic variance of `√n (ΔGIₙ − ΔGI)`.
pub fn sigma2_delta_gini(ctx: &TwoPhaseContext) -> Result<VarianceReport> {
    let b = &ctx.beta_l;
    let terms = [
        ("fstar_fstar", ctx.gamma_rows(&ctx.fstar, &ctx.fstar)),
        ("ftilde_ftilde", ctx.gamma_rows(&ctx.ftilde, &ctx.ftilde)),
        ("fstar_ftilde", ctx.gamma_rows(&ctx.fstar, &ctx.ftilde)),
        ("fstar_beta_l", ctx.gamma_row_beta(&ctx.fstar, b)),
        ("ftilde_beta_l", ctx.gamma_row_beta(&ctx.ftilde, b)),
        ("gamma1_l1_l1", gamma1_blocks(&b.f1, &b.f1)?),
        ("gamma1_l2_l2", gamma1_blocks(&b.f2, &b.f2)?),
        (
            "gamma2_l1_l2",
            ctx.gamma2(&b.f1, &b.f2, &neg(&b.rows.first), &b.rows.second),
        ),
    ];
    let mut terms: BTreeMap<String, f64> = terms.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let beta = terms["gamma1_l1_l1"] + terms["gamma1_l2_l2"] - 2.0 * terms["gamma2_l1_l2"];
    terms.insert("beta_l_beta_l".into(), beta);
    let scale: f64 = terms.values().map(|v| v.abs()).sum::<f64>() * 2.0;
    VarianceReport::assemble(
        VarianceKind::DeltaGini,
        terms,
        ctx.n(),
        scale,
        ctx.warnings.clone(),
    )
}

/// Asymptotic variance of `√n (ΔJₙ − ΔJ)`.
pub fn sigma2_delta_gpi(ctx: &TwoPhaseContext) -> Result<VarianceReport> {
    let side = ctx.gpi_side()?;
    let nu = &side.beta_nu;
    let terms = [
        ("fj_fj", ctx.gamma_rows(&side.fj, &side.fj)),
        ("fj_beta_nu", ctx.gamma_row_beta(&side.fj, nu)),
        ("gamma1_nu1_nu1", gamma1_blocks(&nu.f1, &nu.f1)?),
        ("gamma1_nu2_nu2", gamma1_blocks(&nu.f2, &nu.f2)?),
        (
            "gamma2_nu1_nu2",
            ctx.gamma2(&nu.f1, &nu.f2, &neg(&nu.rows.first), &nu.rows.second),
        ),
    ];
    let mut terms: BTreeMap<String, f64> = terms.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let beta = terms["gamma1_nu1_nu1"] - 2.0 * terms["gamma2_nu1_nu2"] + terms["gamma1_nu2_nu2"];
    terms.insert("beta_nu_beta_nu".into(), beta);
    let scale: f64 = terms.values().map(|v| v.abs()).sum::<f64>() * 2.0;
    VarianceReport::assemble(
        VarianceKind::DeltaGpi,
        terms,
        ctx.n(),
        scale,
        ctx.warnings.clone(),
    )
}

/// Joint asymptotic covariance of `(ΔJₙ, ΔGIₙ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointCovariance {
    pub sigma2_delta_gini: f64,
    pub sigma2_delta_gpi: f64,
    pub cov: f64,
    pub terms: BTreeMap<String, f64>,
    /// Eigenvalues of `[[σ²_ΔJ, cov], [cov, σ²_ΔGI]]`, ascending.
    pub eigenvalues: [f64; 2],
    pub gini: VarianceReport,
    pub gpi: VarianceReport,
}

impl JointCovariance {
    /// Re-assembles the covariance from the ledger.
    pub fn recompute_cov(&self) -> f64 {
        let t = |k: &str| self.terms.get(k).copied().unwrap_or(f64::NAN);
        let beta =
            t("gamma1_l1_nu1") + t("gamma1_l2_nu2") - t("gamma2_l1_nu2") - t("gamma2_nu1_l2");
        t("fj_fstar") + t("fj_beta_l") - t("fj_ftilde") + t("fstar_beta_nu") + beta
            - t("ftilde_beta_nu")
    }
}

fn sym_eigen(a: f64, b: f64, d: f64) -> [f64; 2] {
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mid - rad, mid + rad]
}

pub fn cov_deltas(ctx: &TwoPhaseContext) -> Result<JointCovariance> {
    let gini = sigma2_delta_gini(ctx)?;
    let gpi = sigma2_delta_gpi(ctx)?;
    let side = ctx.gpi_side()?;
    let (bl, bn) = (&ctx.beta_l, &side.beta_nu);
    let terms = [
        ("fj_fstar", ctx.gamma_rows(&side.fj, &ctx.fstar)),
        ("fj_beta_l", ctx.gamma_row_beta(&side.fj, bl)),
        ("fj_ftilde", ctx.gamma_rows(&side.fj, &ctx.ftilde)),
        ("fstar_beta_nu", ctx.gamma_row_beta(&ctx.fstar, bn)),
        ("ftilde_beta_nu", ctx.gamma_row_beta(&ctx.ftilde, bn)),
        ("gamma1_l1_nu1", gamma1_blocks(&bl.f1, &bn.f1)?),
        ("gamma1_l2_nu2", gamma1_blocks(&bl.f2, &bn.f2)?),
        (
            "gamma2_l1_nu2",
            ctx.gamma2(&bl.f1, &bn.f2, &neg(&bl.rows.first), &bn.rows.second),
        ),
        (
            "gamma2_nu1_l2",
            ctx.gamma2(&bn.f1, &bl.f2, &neg(&bn.rows.first), &bl.rows.second),
        ),
    ];
    let mut terms: BTreeMap<String, f64> = terms.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let beta = terms["gamma1_l1_nu1"] + terms["gamma1_l2_nu2"]
        - terms["gamma2_l1_nu2"]
        - terms["gamma2_nu1_l2"];
    terms.insert("beta_l_beta_nu".into(), beta);
    let mut joint = JointCovariance {
        sigma2_delta_gini: gini.sigma2,
        sigma2_delta_gpi: gpi.sigma2,
        cov: 0.0,
        terms,
        eigenvalues: [0.0; 2],
        gini,
        gpi,
    };
    joint.cov = joint.recompute_cov();
    joint.eigenvalues = sym_eigen(joint.sigma2_delta_gpi, joint.cov, joint.sigma2_delta_gini);
    Ok(joint)
}

/// Delta-method inference for `R = ΔJ / ΔGI`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub r: f64,
    pub delta_gini: f64,
    pub delta_gpi: f64,
    /// `1 / ΔGI`.
    pub a: f64,
    /// `ΔJ / ΔGI²`.
    pub b: f64,
    pub sigma2_r: f64,
    pub ci: Interval,
    pub denom_floor: f64,
    pub joint: JointCovariance,
    pub warnings: Vec<String>,
}

impl RatioReport {
    pub fn recompute(&self) -> f64 {
        let j = &self.joint;
        self.a * self.a * j.sigma2_delta_gpi + self.b * self.b * j.sigma2_delta_gini
            - 2.0 * self.a * self.b * j.cov
    }
}

/// `1e-6 · max(|GIₙ(1)|, |GIₙ(2)|, 1e-3)`.
pub fn denom_floor(ctx: &TwoPhaseContext) -> f64 {
    1e-6 * ctx.gini1.value.abs().max(ctx.gini2.value.abs()).max(1e-3)
}

pub fn ratio_inference(ctx: &TwoPhaseContext, level: f64) -> Result<RatioReport> {
    check_level(level)?;
    let dg = delta_gini(ctx);
    let floor = denom_floor(ctx);
    if dg.abs() <= floor {
        return Err(Error::NearZeroDenominator { delta: dg, floor });
    }
    let dj = delta_gpi(ctx)?;
    let joint = cov_deltas(ctx)?;
    let a = 1.0 / dg;
    let b = dj / (dg * dg);
    let mut report = RatioReport {
        r: dj / dg,
        delta_gini: dg,
        delta_gpi: dj,
        a,
        b,
        sigma2_r: 0.0,
        ci: Interval::normal(0.0, 0.0, 1, level)?,
        denom_floor: floor,
        warnings: joint.gini.warnings.clone(),
        joint,
    };
    let raw = report.recompute();
    let scale = a * a * report.joint.sigma2_delta_gpi
        + b * b * report.joint.sigma2_delta_gini
        + 2.0 * (a * b * report.joint.cov).abs();
    report.sigma2_r = clamp_variance(raw, scale, &mut report.warnings)?;
    report.ci = Interval::normal(report.r, report.sigma2_r, ctx.n(), level)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{build_plugin_context, sigma2_gi};
    use crate::sample::make_distribution;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn paired(rows: &[(f64, f64)]) -> PairedSample {
        PairedSample::new(rows).unwrap()
    }

    fn ctx(rows: &[(f64, f64)]) -> TwoPhaseContext {
        build_two_phase(&paired(rows), None, TwoPhaseOptions::default()).unwrap()
    }

    fn scramble(n: usize, seed: u64) -> Vec<(f64, f64)> {
        // Deterministic pseudo-random positive pairs.
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 + 0.5) / (1u64 << 53) as f64
        };
        (0..n)
            .map(|_| {
                let a = -next().ln();
                let b = 0.5 * a + (-next().ln());
                (a + 0.05, b + 0.05)
            })
            .collect()
    }

    #[test]
    fn identical_columns() {
        let rows: Vec<(f64, f64)> = scramble(300, 3).iter().map(|r| (r.0, r.0)).collect();
        let fgt = GpiConfig::fgt(0.7, 1.0).unwrap();
        let c = build_two_phase(
            &paired(&rows),
            Some((&fgt, &fgt)),
            TwoPhaseOptions::default(),
        )
        .unwrap();
        assert!(c.fstar.combined().iter().all(|v| v.abs() < 1e-12));
        assert_eq!(delta_gini(&c), 0.0);
        assert_eq!(delta_gpi(&c).unwrap(), 0.0);
        assert!(sigma2_delta_gini(&c).unwrap().sigma2 <= 0.01);
        assert!(sigma2_delta_gpi(&c).unwrap().sigma2 < 1e-10);
        assert!(cov_deltas(&c).unwrap().cov.abs() < 0.01);
        assert!(matches!(
            ratio_inference(&c, 0.95),
            Err(Error::NearZeroDenominator { .. })
        ));
    }

    #[test]
    fn comonotone_two_rows_share_l() {
        let c = ctx(&[(1.0, 1.0), (3.0, 3.0)]);
        let (l1, l2) = c.l_blocks();
        assert_eq!(l1, l2);
    }

    #[test]
    fn delta_gini_examples() {
        let c = ctx(&[(1.0, 1.0), (3.0, 2.0)]);
        assert!((delta_gini(&c) + 1.0 / 12.0).abs() < 1e-15);
        let rows: Vec<(f64, f64)> = scramble(50, 9).iter().map(|r| (r.0, 2.0 * r.0)).collect();
        assert_eq!(delta_gini(&ctx(&rows)), 0.0);
    }

    #[test]
    fn gamma_star_examples() {
        assert_eq!(
            gamma_star(&[2.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(),
            0.0
        );
        let ind: Vec<f64> = (1..=10).map(|i| if i <= 5 { 1.0 } else { 0.0 }).collect();
        assert!((gamma_star(&ind, &ind).unwrap() - 0.25).abs() < 1e-15);
        assert!(gamma_star(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn gamma2_grid_examples() {
        let grid = Grid::new(64).unwrap();
        let ones = vec![1.0; 64];
        let rows: Vec<(f64, f64)> = (1..=4000).map(|i| (i as f64, i as f64)).collect();
        let como = empirical_copula(&paired(&rows));
        assert!((gamma2_grid(&ones, &ones, &como, &grid).unwrap() - 1.0 / 12.0).abs() < 0.01);
        assert_eq!(
            gamma2_grid(&vec![0.0; 64], &ones, &como, &grid).unwrap(),
            0.0
        );
        assert_eq!(
            gamma2_grid(&ones, &ones, &ProductCopula, &grid).unwrap(),
            0.0
        );
        assert!(gamma2_grid(&ones[..10], &ones, &como, &grid).is_err());
    }

    #[test]
    fn missing_residual_is_rejected() {
        let sen = GpiConfig::sen(1.0).unwrap();
        let r = build_two_phase(
            &paired(&scramble(20, 1)),
            Some((&sen, &sen)),
            TwoPhaseOptions::default(),
        );
        assert!(matches!(r, Err(Error::MissingResidualFunctions(_))));
    }

    #[test]
    fn product_coupling_factorizes() {
        let rows = scramble(400, 11);
        let p = paired(&rows);
        let opts = TwoPhaseOptions {
            coupling: Coupling::Product,
            ..Default::default()
        };
        let c = build_two_phase(&p, None, opts).unwrap();
        let r = sigma2_delta_gini(&c).unwrap();
        assert!(r.term("gamma2_l1_l2").abs() < 1e-12);
        let (d1, d2) = p.margins();
        let sum = sigma2_gi(&build_plugin_context(&d1).unwrap())
            .unwrap()
            .sigma2
            + sigma2_gi(&build_plugin_context(&d2).unwrap())
                .unwrap()
                .sigma2;
        assert!(
            (r.sigma2 - sum).abs() < 1e-6 * sum.max(1.0),
            "{} vs {sum}",
            r.sigma2
        );

        let grid_opts = TwoPhaseOptions {
            mode: QuadratureMode::Grid(Grid::new(128).unwrap()),
            ..opts
        };
        let g = sigma2_delta_gini(&build_two_phase(&p, None, grid_opts).unwrap()).unwrap();
        assert!(g.term("gamma2_l1_l2").abs() < 1e-12);
    }

    #[test]
    fn grid_mode_tracks_exact_mode() {
        let p = paired(&scramble(3000, 5));
        let fgt = GpiConfig::fgt(0.8, 1.0).unwrap();
        let exact = build_two_phase(&p, Some((&fgt, &fgt)), TwoPhaseOptions::default()).unwrap();
        let grid = build_two_phase(
            &p,
            Some((&fgt, &fgt)),
            TwoPhaseOptions {
                mode: QuadratureMode::Grid(Grid::default()),
                ..Default::default()
            },
        )
        .unwrap();
        let a = cov_deltas(&exact).unwrap();
        let b = cov_deltas(&grid).unwrap();
        for (x, y) in [
            (a.sigma2_delta_gini, b.sigma2_delta_gini),
            (a.sigma2_delta_gpi, b.sigma2_delta_gpi),
        ] {
            assert!((x - y).abs() < 0.05 * x, "{x} vs {y}");
        }
        assert!(
            (a.cov - b.cov).abs() < 0.05 * a.sigma2_delta_gini.sqrt() * a.sigma2_delta_gpi.sqrt()
        );
    }

    #[test]
    fn ratio_with_flat_gpi() {
        // Nobody is poor in either period, so ΔJ = 0 and b vanishes.
        let rows: Vec<(f64, f64)> = scramble(200, 4)
            .iter()
            .map(|r| (r.0 + 1.0, r.1 + 1.0))
            .collect();
        let fgt = GpiConfig::fgt(0.5, 1.0).unwrap();
        let c = build_two_phase(
            &paired(&rows),
            Some((&fgt, &fgt)),
            TwoPhaseOptions::default(),
        )
        .unwrap();
        let r = ratio_inference(&c, 0.95).unwrap();
        assert_eq!((r.r, r.b), (0.0, 0.0));
        assert!((r.sigma2_r - r.a * r.a * r.joint.sigma2_delta_gpi).abs() < 1e-15);
    }

    #[test]
    fn user_residual_with_nonzero_nu() {
        let cfg = GpiConfig::fgt(1.0, 1.0)
            .unwrap()
            .with_residual(crate::indices::Residual {
                g: Arc::new(|x| if x < 1.0 { 1.0 - x } else { 0.0 }),
                nu: Arc::new(|s| s * (1.0 - s)),
            });
        let c = build_two_phase(
            &paired(&scramble(500, 8)),
            Some((&cfg, &cfg)),
            TwoPhaseOptions::default(),
        )
        .unwrap();
        let r = sigma2_delta_gpi(&c).unwrap();
        assert!(r.term("gamma1_nu1_nu1") > 0.0);
        assert!((r.recompute().max(0.0) - r.sigma2).abs() < 1e-12);
        let j = cov_deltas(&c).unwrap();
        assert!(j.eigenvalues[0] >= -1e-8);
    }

    #[test]
    fn degenerate_margin_contributes_nothing() {
        let rows: Vec<(f64, f64)> = scramble(100, 2).iter().map(|r| (2.0, r.1)).collect();
        let c = ctx(&rows);
        let r = sigma2_delta_gini(&c).unwrap();
        let d2 = make_distribution(&rows.iter().map(|r| r.1).collect::<Vec<_>>()).unwrap();
        let one = sigma2_gi(&build_plugin_context(&d2).unwrap())
            .unwrap()
            .sigma2;
        assert!((r.sigma2 - one).abs() < 1e-12 * one.max(1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn swap_negates_and_preserves_variance(seed in 0u64..10_000, n in 3usize..200) {
            let p = paired(&scramble(n, seed));
            let fgt = GpiConfig::fgt(0.9, 1.5).unwrap();
            let a = build_two_phase(&p, Some((&fgt, &fgt)), TwoPhaseOptions::default()).unwrap();
            let b = build_two_phase(&p.swapped(), Some((&fgt, &fgt)), TwoPhaseOptions::default()).unwrap();
            prop_assert_eq!(delta_gini(&a), -delta_gini(&b));
            prop_assert_eq!(delta_gpi(&a).unwrap(), -delta_gpi(&b).unwrap());
            let (ja, jb) = (cov_deltas(&a).unwrap(), cov_deltas(&b).unwrap());
            let tol = |x: f64| 1e-9 * x.abs().max(1.0);
            prop_assert!((ja.sigma2_delta_gini - jb.sigma2_delta_gini).abs() <= tol(ja.sigma2_delta_gini));
            prop_assert!((ja.sigma2_delta_gpi - jb.sigma2_delta_gpi).abs() <= tol(ja.sigma2_delta_gpi));
            prop_assert!((ja.cov - jb.cov).abs() <= tol(ja.cov));
        }

        #[test]
        fn joint_matrix_is_psd_and_ledgers_reconstruct(seed in 0u64..10_000, n in 5usize..400, z in 0.2f64..3.0, alpha in 0.0f64..3.0) {
            let p = paired(&scramble(n, seed));
            let fgt = GpiConfig::fgt(z, alpha).unwrap();
            let c = build_two_phase(&p, Some((&fgt, &fgt)), TwoPhaseOptions::default()).unwrap();
            let j = cov_deltas(&c).unwrap();
            let scale = j.sigma2_delta_gini.max(j.sigma2_delta_gpi).max(1.0);
            prop_assert!(j.eigenvalues[0] >= -1e-8 * scale, "{:?}", j.eigenvalues);
            prop_assert!((j.gini.recompute().max(0.0) - j.sigma2_delta_gini).abs() <= 1e-10 * scale);
            prop_assert!((j.gpi.recompute().max(0.0) - j.sigma2_delta_gpi).abs() <= 1e-10 * scale);
            if let Ok(r) = ratio_inference(&c, 0.9) {
                prop_assert!((r.recompute().max(0.0) - r.sigma2_r).abs() <= 1e-10 * r.sigma2_r.max(1.0));
            }
        }

        #[test]
        fn gamma_star_symmetric_bilinear(f in prop::collection::vec(-5.0f64..5.0, 2..50), a in -2.0f64..2.0) {
            let g: Vec<f64> = f.iter().enumerate().map(|(i, x)| x * x - i as f64).collect();
            let h: Vec<f64> = f.iter().map(|x| x.sin()).collect();
            prop_assert!((gamma_star(&f, &g).unwrap() - gamma_star(&g, &f).unwrap()).abs() < 1e-12);
            let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + y).collect();
            let lhs = gamma_star(&mix, &h).unwrap();
            let rhs = a * gamma_star(&f, &h).unwrap() + gamma_star(&g, &h).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }
    }
}

//! Sample containers: the sorted empirical distribution of one period, paired
//! two-period samples, the rank-based empirical copula, quadrature grids, and
//! the closed-form rectangle integral of the Brownian-bridge kernel
//! `min(s, t) - s t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

/// Sorted positive income sample with its mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
    mean: f64,
}

/// Builds an [`EmpiricalDistribution`], rejecting empty input and any
/// non-positive or non-finite entry (the index reported is the input position).
pub fn make_distribution(values: &[f64]) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::new(values)
}

impl EmpiricalDistribution {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { index });
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveValue { index, value });
            }
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = numeric::mean(&sorted);
        Ok(Self {
            values: sorted,
            mean,
        })
    }

    /// Order statistics `X_{1,n} <= ... <= X_{n,n}`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample mean `μₙ`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `X_{j,n}` with 1-based `j`.
    pub fn order_stat(&self, j: usize) -> f64 {
        self.values[j - 1]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// True when every observation is equal (zero dispersion).
    pub fn is_degenerate(&self) -> bool {
        self.min() == self.max()
    }

    /// `(1/n) #{i : X_i <= x}`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }

    pub(crate) fn count_le(&self, x: f64) -> usize {
        self.values.partition_point(|&v| v <= x)
    }

    /// Left-continuous generalized inverse `inf{x : ecdf(x) >= s}` for `s ∈ (0, 1]`.
    pub fn quantile(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::OutOfRange {
                what: "quantile level",
                value: s,
            });
        }
        Ok(self.values[quantile_index(self.len(), s) - 1])
    }

    /// Every value multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let v: Vec<f64> = self.values.iter().map(|x| x * c).collect();
        Self::new(&v)
    }
}

/// Smallest `k` in `1..=n` with `k / n >= s`, evaluated with the same
/// floating-point division as the ECDF so the two stay Galois-consistent.
fn quantile_index(n: usize, s: f64) -> usize {
    let nf = n as f64;
    let mut k = ((nf * s).ceil() as usize).clamp(1, n);
    while k > 1 && (k - 1) as f64 / nf >= s {
        k -= 1;
    }
    while k < n && (k as f64 / nf) < s {
        k += 1;
    }
    k
}

/// Two-period incomes observed on the same households.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    first: Vec<f64>,
    second: Vec<f64>,
}

impl PairedSample {
    pub fn new(rows: &[(f64, f64)]) -> Result<Self> {
        let (a, b): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();
        Self::from_columns(a, b)
    }

    pub fn from_columns(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: second.len(),
            });
        }
        if first.len() < 2 {
            return Err(Error::SampleTooSmall {
                needed: 2,
                got: first.len(),
            });
        }
        for (index, (&a, &b)) in first.iter().zip(&second).enumerate() {
            for value in [a, b] {
                if !value.is_finite() {
                    return Err(Error::NonFiniteValue { index });
                }
                if value <= 0.0 {
                    return Err(Error::NonPositiveValue { index, value });
                }
            }
        }
        Ok(Self { first, second })
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn first(&self) -> &[f64] {
        &self.first
    }

    pub fn second(&self) -> &[f64] {
        &self.second
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.first.iter().copied().zip(self.second.iter().copied())
    }

    /// Marginal empirical distributions of the two periods.
    pub fn margins(&self) -> (EmpiricalDistribution, EmpiricalDistribution) {
        (
            EmpiricalDistribution::new(&self.first).expect("validated at construction"),
            EmpiricalDistribution::new(&self.second).expect("validated at construction"),
        )
    }

    /// Same households with the two periods exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }
}

/// Ranking of one column: stable sort positions and maximal ranks.
#[derive(Debug, Clone)]
pub(crate) struct Ranking {
    /// 1-based position of each row in the stable ascending sort.
    pub position: Vec<usize>,
    /// `#{k : x_k <= x_i}` for each row.
    pub max_rank: Vec<usize>,
}

pub(crate) fn rank(values: &[f64]) -> Ranking {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut position = vec![0; n];
    for (p, &i) in order.iter().enumerate() {
        position[i] = p + 1;
    }
    let max_rank = values
        .iter()
        .map(|&x| sorted.partition_point(|&v| v <= x))
        .collect();
    Ranking { position, max_rank }
}

/// A bivariate distribution function on the unit square.
pub trait CopulaCdf: Sync {
    fn cdf(&self, s: f64, t: f64) -> f64;

    /// True when `C(s, t) = s t` identically.
    fn is_product(&self) -> bool {
        false
    }

    /// `C(s_k, s_l)` on the grid nodes, row-major with `k` the first-argument index.
    fn grid_table(&self, grid: &Grid) -> Vec<f64> {
        let nodes = grid.nodes();
        let mut out = Vec::with_capacity(nodes.len() * nodes.len());
        for &s in &nodes {
            for &t in &nodes {
                out.push(self.cdf(s, t));
            }
        }
        out
    }
}

/// The independence copula `C(s, t) = s t`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProductCopula;

impl CopulaCdf for ProductCopula {
    fn cdf(&self, s: f64, t: f64) -> f64 {
        s.clamp(0.0, 1.0) * t.clamp(0.0, 1.0)
    }

    fn is_product(&self) -> bool {
        true
    }
}

/// Rank-based copula estimate built from marginal ECDF pseudo-observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCopula {
    u: Vec<f64>,
    v: Vec<f64>,
}

/// Pseudo-observations `(ecdf₁(x1ᵢ), ecdf₂(x2ᵢ))` with maximal ranks for ties.
pub fn empirical_copula(paired: &PairedSample) -> EmpiricalCopula {
    let n = paired.len() as f64;
    let r1 = rank(paired.first());
    let r2 = rank(paired.second());
    EmpiricalCopula {
        u: r1.max_rank.iter().map(|&r| r as f64 / n).collect(),
        v: r2.max_rank.iter().map(|&r| r as f64 / n).collect(),
    }
}

impl EmpiricalCopula {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn pseudo_obs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u.iter().copied().zip(self.v.iter().copied())
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// `(1/n) #{i : uᵢ <= s, vᵢ <= t}`.
    pub fn evaluate(&self, s: f64, t: f64) -> f64 {
        let hits = self
            .u
            .iter()
            .zip(&self.v)
            .filter(|(&u, &v)| u <= s && v <= t)
            .count();
        hits as f64 / self.len() as f64
    }
}

impl CopulaCdf for EmpiricalCopula {
    fn cdf(&self, s: f64, t: f64) -> f64 {
        self.evaluate(s, t)
    }

    // Histogram on grid cells followed by a 2-D prefix sum: O(n + m²).
    fn grid_table(&self, grid: &Grid) -> Vec<f64> {
        let nodes = grid.nodes();
        let m = nodes.len();
        let mut counts = vec![0_u32; m * m];
        for (&u, &v) in self.u.iter().zip(&self.v) {
            let a = nodes.partition_point(|&s| s < u);
            let b = nodes.partition_point(|&t| t < v);
            if a < m && b < m {
                counts[a * m + b] += 1;
            }
        }
        let n = self.len() as f64;
        let mut table = vec![0.0; m * m];
        let mut cum = vec![0_u64; m * m];
        for k in 0..m {
            let mut row = 0_u64;
            for l in 0..m {
                row += counts[k * m + l] as u64;
                let above = if k > 0 { cum[(k - 1) * m + l] } else { 0 };
                cum[k * m + l] = above + row;
                table[k * m + l] = cum[k * m + l] as f64 / n;
            }
        }
        table
    }
}

/// Midpoint grid `s_k = (k - 1/2) / m`, `k = 1..m`, on the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    m: usize,
}

impl Grid {
    pub const DEFAULT_POINTS: usize = 256;

    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange {
                what: "grid points",
                value: 0.0,
            });
        }
        Ok(Self { m })
    }

    pub fn points(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> Vec<f64> {
        let m = self.m as f64;
        (1..=self.m).map(|k| (k as f64 - 0.5) / m).collect()
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            m: Self::DEFAULT_POINTS,
        }
    }
}

// ∫₀ˣ∫₀ʸ min(s, t) dt ds
fn min_corner(x: f64, y: f64) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    lo * lo * hi / 2.0 - lo * lo * lo / 6.0
}

/// Exact `∫ₐᵇ∫꜀ᵈ (min(s, t) - s t) dt ds` for sub-rectangles of the unit square.
pub fn kernel_rect_integral(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    let ok = |lo: f64, hi: f64| (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi;
    if !ok(a, b) {
        return Err(Error::OutOfRange {
            what: "kernel rectangle s-range",
            value: if (0.0..=1.0).contains(&a) { b } else { a },
        });
    }
    if !ok(c, d) {
        return Err(Error::OutOfRange {
            what: "kernel rectangle t-range",
            value: if (0.0..=1.0).contains(&c) { d } else { c },
        });
    }
    // Grouped so that swapping (a, b) with (c, d) only commutes additions.
    let min_part = (min_corner(b, d) + min_corner(a, c)) - (min_corner(a, d) + min_corner(b, c));
    let product_part = (b * b - a * a) * (d * d - c * c) / 4.0;
    Ok(min_part - product_part)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> EmpiricalDistribution {
        make_distribution(v).unwrap()
    }

    #[test]
    fn make_distribution_sorts_and_averages() {
        let d = dist(&[3.0, 1.0, 2.0]);
        assert_eq!(d.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(d.mean(), 2.0);
        let d = dist(&[5.0]);
        assert_eq!((d.len(), d.mean()), (1, 5.0));
    }

    #[test]
    fn make_distribution_rejects_bad_input() {
        assert!(matches!(make_distribution(&[]), Err(Error::EmptySample)));
        assert!(matches!(
            make_distribution(&[1.0, 0.0, 2.0]),
            Err(Error::NonPositiveValue { index: 1, .. })
        ));
        assert!(matches!(
            make_distribution(&[1.0, f64::NAN]),
            Err(Error::NonFiniteValue { index: 1 })
        ));
    }

    #[test]
    fn ecdf_counts() {
        let d = dist(&[1.0, 2.0, 3.0]);
        assert_eq!(d.ecdf(2.0), 2.0 / 3.0);
        assert_eq!(d.ecdf(0.5), 0.0);
        assert_eq!(dist(&[1.0, 1.0, 3.0]).ecdf(1.0), 2.0 / 3.0);
    }

    #[test]
    fn quantile_is_left_continuous_inverse() {
        let d = dist(&[1.0, 3.0]);
        assert_eq!(d.quantile(0.5).unwrap(), 1.0);
        assert_eq!(d.quantile(0.500001).unwrap(), 3.0);
        let single = dist(&[7.0]);
        for s in [1e-9, 0.3, 1.0] {
            assert_eq!(single.quantile(s).unwrap(), 7.0);
        }
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0 + 1e-12).is_err());
    }

    #[test]
    fn quantile_index_survives_rounding() {
        // 10 * 0.7 rounds above 7 in binary floating point.
        let d = dist(&(1..=10).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(d.quantile(0.7).unwrap(), 7.0);
    }

    #[test]
    fn copula_two_point_cases() {
        let c = empirical_copula(&PairedSample::new(&[(1.0, 1.0), (2.0, 2.0)]).unwrap());
        let obs: Vec<_> = c.pseudo_obs().collect();
        assert_eq!(obs, vec![(0.5, 0.5), (1.0, 1.0)]);
        assert_eq!(c.evaluate(0.5, 0.5), 0.5);
        let c = empirical_copula(&PairedSample::new(&[(1.0, 2.0), (2.0, 1.0)]).unwrap());
        assert_eq!(c.evaluate(0.5, 0.5), 0.0);
    }

    #[test]
    fn copula_ties_take_maximal_rank() {
        let c =
            empirical_copula(&PairedSample::new(&[(1.0, 5.0), (1.0, 6.0), (2.0, 7.0)]).unwrap());
        assert_eq!(c.u(), &[2.0 / 3.0, 2.0 / 3.0, 1.0]);
    }

    #[test]
    fn grid_table_matches_direct_evaluation() {
        let rows: Vec<(f64, f64)> = (0..37)
            .map(|i| {
                let a = ((i * 17) % 37) as f64 + 1.0;
                let b = ((i * 5) % 37) as f64 + 1.0;
                (a, b)
            })
            .collect();
        let c = empirical_copula(&PairedSample::new(&rows).unwrap());
        let grid = Grid::new(19).unwrap();
        let fast = c.grid_table(&grid);
        let nodes = grid.nodes();
        for (k, &s) in nodes.iter().enumerate() {
            for (l, &t) in nodes.iter().enumerate() {
                assert_eq!(fast[k * 19 + l], c.evaluate(s, t));
            }
        }
    }

    #[test]
    fn paired_sample_contract() {
        assert!(matches!(
            PairedSample::new(&[(1.0, 1.0)]),
            Err(Error::SampleTooSmall { .. })
        ));
        assert!(PairedSample::new(&[(1.0, 1.0), (0.0, 2.0)]).is_err());
    }

    #[test]
    fn grid_nodes_are_midpoints() {
        let g = Grid::new(4).unwrap();
        assert_eq!(g.nodes(), vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(Grid::default().points(), 256);
    }

    #[test]
    fn kernel_rect_values() {
        // Oracles: scipy dblquad of min(s,t) - st.
        assert!((kernel_rect_integral(0.0, 1.0, 0.0, 1.0).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((kernel_rect_integral(0.0, 0.5, 0.5, 1.0).unwrap() - 0.015625).abs() < 1e-15);
        assert_eq!(kernel_rect_integral(0.3, 0.3, 0.1, 0.9).unwrap(), 0.0);
        assert!(kernel_rect_integral(0.5, 0.2, 0.0, 1.0).is_err());
        assert!(kernel_rect_integral(0.0, 1.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn kernel_rect_matches_midpoint_quadrature() {
        let m = 4096;
        let h = 1.0 / m as f64;
        let mut acc = 0.0;
        for i in 0..m {
            let s = (i as f64 + 0.5) * h;
            for j in 0..m {
                let t = (j as f64 + 0.5) * h;
                acc += s.min(t) - s * t;
            }
        }
        acc *= h * h;
        assert!((acc - kernel_rect_integral(0.0, 1.0, 0.0, 1.0).unwrap()).abs() < 1e-7);
    }
}

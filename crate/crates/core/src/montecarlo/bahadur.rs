//! Uniform empirical and quantile processes and their Bahadur remainder.
//!
//! With `Uₙ` the empirical distribution function and `Vₙ` the empirical
//! quantile function of `n` uniforms, the remainder is
//! `√n (Uₙ(s) − s) + √n (Vₙ(s) − s)`. Both processes are step functions, so
//! the supremum is found exactly by scanning breakpoints and the open
//! intervals between them, where the remainder is linear in `s`.

use serde::{Deserialize, Serialize};

use super::rng::UniformStream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BahadurSup {
    /// `sup |αₙ(s) + √n (Vₙ(s) − s)|`.
    pub remainder: f64,
    /// `sup |αₙ(s)|`.
    pub empirical: f64,
    /// `sup |√n (s − Vₙ(s))|`.
    pub quantile: f64,
}

struct Processes {
    sorted: Vec<f64>,
}

impl Processes {
    fn n(&self) -> usize {
        self.sorted.len()
    }

    fn ecdf(&self, s: f64) -> f64 {
        self.sorted.partition_point(|&u| u <= s) as f64 / self.n() as f64
    }

    fn quantile(&self, s: f64) -> f64 {
        let n = self.n();
        let k = ((s * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[k - 1]
    }
}

/// Exact suprema for a fresh sample of `n` uniforms drawn from `seed`.
pub fn bahadur_sups(n: usize, seed: u64) -> Result<BahadurSup> {
    if n < 10 {
        return Err(Error::SampleTooSmall { needed: 10, got: n });
    }
    let mut stream = UniformStream::new(seed);
    let mut sorted: Vec<f64> = (0..n).map(|_| stream.next_unit().p).collect();
    sorted.sort_by(f64::total_cmp);
    let proc = Processes { sorted };
    let nf = n as f64;

    let mut points: Vec<f64> = proc.sorted.clone();
    points.extend((0..=n).map(|j| j as f64 / nf));
    // The evaluation grid; redundant with the breakpoints but cheap.
    points.extend((0..=4 * n).map(|k| k as f64 / (4 * n) as f64));
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut sup = BahadurSup {
        remainder: 0.0,
        empirical: 0.0,
        quantile: 0.0,
    };
    let mut track = |s: f64, uf: f64, vq: f64| {
        sup.remainder = sup.remainder.max((uf + vq - 2.0 * s).abs());
        sup.empirical = sup.empirical.max((uf - s).abs());
        sup.quantile = sup.quantile.max((s - vq).abs());
    };
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        track(a, proc.ecdf(a), proc.quantile(a));
        // Open interval: both processes are constant, the drift is linear.
        let mid = 0.5 * (a + b);
        let (uf, vq) = (proc.ecdf(mid), proc.quantile(mid));
        track(a, uf, vq);
        track(b, uf, vq);
    }
    let last = *points.last().expect("nonempty");
    track(last, proc.ecdf(last), proc.quantile(last));

    let root = nf.sqrt();
    Ok(BahadurSup {
        remainder: root * sup.remainder,
        empirical: root * sup.empirical,
        quantile: root * sup.quantile,
    })
}

pub fn bahadur_remainder(n: usize, seed: u64) -> Result<f64> {
    Ok(bahadur_sups(n, seed)?.remainder)
}

//! Fixture generators shared by the benchmarks.

use ginifield::montecarlo::{sample_paired, sample_univariate, CopulaSpec, DistributionSpec};
use ginifield::{make_distribution, EmpiricalDistribution, PairedSample};

pub const SIZES: [usize; 3] = [1_000, 10_000, 100_000];

/// Lognormal incomes with a Gini near one half.
pub fn incomes(n: usize, seed: u64) -> EmpiricalDistribution {
    let law = DistributionSpec::Lognormal {
        location: 0.0,
        scale: 0.95,
    };
    make_distribution(&sample_univariate(&law, n, seed).expect("valid law"))
        .expect("positive sample")
}

/// Two dependent periods with modest growth in the second.
pub fn panel(n: usize, seed: u64) -> PairedSample {
    let first = DistributionSpec::Lognormal {
        location: 0.0,
        scale: 0.9,
    };
    let second = DistributionSpec::Lognormal {
        location: 0.1,
        scale: 0.8,
    };
    sample_paired(&CopulaSpec::Gaussian { rho: 0.7 }, &first, &second, n, seed)
        .expect("valid design")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible() {
        assert_eq!(incomes(100, 1), incomes(100, 1));
        assert_eq!(panel(100, 1), panel(100, 1));
        assert_eq!(panel(100, 1).len(), 100);
    }
}

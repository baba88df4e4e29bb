//! Two-period engines against independent oracles.

use ginifield::montecarlo::{sample_paired, sample_univariate, CopulaSpec, DistributionSpec};
use ginifield::numeric::{covariance, median, variance};
use ginifield::two_phase::gamma_star;
use ginifield::{
    build_plugin_context, build_two_phase, cov_deltas, gini_point, gpi_point, make_distribution,
    sigma2_delta_gini, sigma2_delta_gpi, sigma2_gi, GpiConfig, TwoPhaseOptions,
};

const N: usize = 2000;

fn independent(law: DistributionSpec, seed: u64) -> ginifield::PairedSample {
    sample_paired(&CopulaSpec::Independence, &law, &law, N, seed).unwrap()
}

#[test]
fn independence_adds_marginal_variances() {
    let law = DistributionSpec::Lognormal {
        location: 0.0,
        scale: 0.8,
    };
    let gaps: Vec<f64> = (0..20)
        .map(|seed| {
            let p = independent(law, seed);
            let c = build_two_phase(&p, None, TwoPhaseOptions::default()).unwrap();
            let s = sigma2_delta_gini(&c).unwrap().sigma2;
            let (d1, d2) = p.margins();
            let sum = sigma2_gi(&build_plugin_context(&d1).unwrap())
                .unwrap()
                .sigma2
                + sigma2_gi(&build_plugin_context(&d2).unwrap())
                    .unwrap()
                    .sigma2;
            (s - sum).abs() / sum
        })
        .collect();
    assert!(median(&gaps) < 0.15, "median gap {}", median(&gaps));
    assert!(gaps.iter().all(|&g| g < 0.3), "{gaps:?}");
}

#[test]
fn fgt_variance_matches_direct_moments() {
    let law = DistributionSpec::Exponential { rate: 1.0 };
    let z = 0.5;
    let fgt = GpiConfig::fgt(z, 1.0).unwrap();
    let g = |x: f64| if x < z { (z - x) / z } else { 0.0 };
    for seed in 0..10 {
        let p = independent(law, seed);
        let c = build_two_phase(&p, Some((&fgt, &fgt)), TwoPhaseOptions::default()).unwrap();
        let s = sigma2_delta_gpi(&c).unwrap().sigma2;
        let g1: Vec<f64> = p.first().iter().map(|&x| g(x)).collect();
        let g2: Vec<f64> = p.second().iter().map(|&x| g(x)).collect();
        let oracle = variance(&g1) + variance(&g2);
        assert!((s - oracle).abs() < 0.15 * oracle, "{s} vs {oracle}");
    }
}

#[test]
fn covariance_matches_one_phase_simulation() {
    let law = DistributionSpec::Exponential { rate: 1.0 };
    let fgt = GpiConfig::fgt(0.5, 1.0).unwrap();
    let (mut j, mut gi) = (Vec::new(), Vec::new());
    for seed in 0..1000 {
        let d = make_distribution(&sample_univariate(&law, N, 10_000 + seed).unwrap()).unwrap();
        j.push(gpi_point(&d, &fgt).unwrap().value);
        gi.push(gini_point(&d).unwrap().value);
    }
    // Two independent periods contribute equally.
    let oracle = 2.0 * N as f64 * covariance(&j, &gi);
    let plug: Vec<f64> = (0..100)
        .map(|seed| {
            let c = build_two_phase(
                &independent(law, seed),
                Some((&fgt, &fgt)),
                TwoPhaseOptions::default(),
            )
            .unwrap();
            cov_deltas(&c).unwrap().cov
        })
        .collect();
    let m = median(&plug);
    assert!((m - oracle).abs() < 0.2 * oracle.abs(), "{m} vs {oracle}");
}

#[test]
fn gamma_star_of_independent_indicators_is_small() {
    for seed in 0..20 {
        let p = independent(DistributionSpec::Uniform { a: 0.0, b: 1.0 }, seed);
        let f: Vec<f64> = p.first().iter().map(|&u| (u <= 0.5) as u8 as f64).collect();
        let g: Vec<f64> = p
            .second()
            .iter()
            .map(|&v| (v <= 0.3) as u8 as f64)
            .collect();
        assert!(gamma_star(&f, &g).unwrap().abs() < 3.0 / (N as f64).sqrt());
    }
}

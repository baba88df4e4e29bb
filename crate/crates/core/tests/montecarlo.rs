//! Sampler, truth and simulation-study checks for the Monte Carlo harness.

use ginifield::montecarlo::{
    bahadur_sups, coverage_study, sample_paired, sample_univariate, true_gini, validate,
    variance_agreement, CopulaSpec, Design, DistributionSpec, Marginal, PairedDesign,
    SimulationPlan, Target,
};
use ginifield::{gini_point, make_distribution, GpiSpec};

const FAMILIES: [DistributionSpec; 5] = [
    DistributionSpec::Uniform { a: 0.0, b: 1.0 },
    DistributionSpec::Uniform { a: 2.0, b: 5.0 },
    DistributionSpec::Exponential { rate: 1.5 },
    DistributionSpec::Lognormal {
        location: 0.3,
        scale: 0.8,
    },
    DistributionSpec::Pareto {
        alpha: 3.0,
        xm: 2.0,
    },
];

fn ks_distance(mut x: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let p = (a[i] - a[j]) * (b[i] - b[j]);
            s += (p > 0.0) as i64 - (p < 0.0) as i64;
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

#[test]
fn sampler_ks_distance() {
    let n = 100_000;
    let bound = 1.36 / (n as f64).sqrt() * 1.5;
    for (k, law) in FAMILIES.iter().enumerate() {
        let x = sample_univariate(law, n, 100 + k as u64).unwrap();
        let d = ks_distance(x, |v| law.cdf(v));
        assert!(d < bound, "{law}: KS {d} >= {bound}");
    }
}

#[test]
fn sampler_support_and_determinism() {
    let u = sample_univariate(&FAMILIES[0], 10_000, 1).unwrap();
    assert!(u.iter().all(|&v| v > 0.0 && v < 1.0));
    let p = sample_univariate(&FAMILIES[4], 10_000, 1).unwrap();
    assert!(p.iter().all(|&v| v >= 2.0));
    assert_eq!(p, sample_univariate(&FAMILIES[4], 10_000, 1).unwrap());
    assert_ne!(p, sample_univariate(&FAMILIES[4], 10_000, 2).unwrap());
    let bad = DistributionSpec::Pareto {
        alpha: 0.9,
        xm: 1.0,
    };
    assert!(sample_univariate(&bad, 10, 1).is_err());
}

#[test]
fn gini_of_large_samples_matches_truth() {
    for (k, law) in FAMILIES.iter().enumerate() {
        let x = sample_univariate(law, 100_000, 7 + k as u64).unwrap();
        let g = gini_point(&make_distribution(&x).unwrap()).unwrap().value;
        let truth = true_gini(law).unwrap();
        assert!((g - truth).abs() < 0.01, "{law}: {g} vs {truth}");
    }
}

#[test]
fn copula_margins_are_uniform() {
    let n = 20_000;
    let bound = 1.36 / (n as f64).sqrt() * 1.5;
    for cop in [
        CopulaSpec::Independence,
        CopulaSpec::Gaussian { rho: 0.7 },
        CopulaSpec::Gaussian { rho: -0.4 },
        CopulaSpec::Clayton { theta: 2.0 },
    ] {
        let units = cop.sample_units(n, 11).unwrap();
        let u: Vec<f64> = units.iter().map(|(a, _)| a.p).collect();
        let v: Vec<f64> = units.iter().map(|(_, b)| b.p).collect();
        assert!(ks_distance(u, |s| s) < bound, "{cop} first margin");
        assert!(ks_distance(v, |s| s) < bound, "{cop} second margin");
    }
}

#[test]
fn kendall_tau_of_copulas() {
    let n = 5000;
    let e = DistributionSpec::Exponential { rate: 1.0 };
    for (cop, want) in [
        (CopulaSpec::Independence, 0.0),
        (CopulaSpec::Gaussian { rho: 0.0 }, 0.0),
        (CopulaSpec::Clayton { theta: 2.0 }, 0.5),
    ] {
        let s = sample_paired(&cop, &e, &e, n, 21).unwrap();
        let tau = kendall_tau(s.first(), s.second());
        assert!((tau - want).abs() < 0.04, "{cop}: tau {tau}");
        assert!((cop.kendall_tau() - want).abs() < 1e-15);
    }
    // Gaussian: tau = (2/π) asin(ρ).
    let cop = CopulaSpec::Gaussian { rho: 0.7 };
    let s = sample_paired(&cop, &e, &e, n, 22).unwrap();
    let want = 2.0 / std::f64::consts::PI * 0.7f64.asin();
    assert!((kendall_tau(s.first(), s.second()) - want).abs() < 0.04);
}

#[test]
fn bahadur_median_decays() {
    let median = |n: usize| {
        let mut v: Vec<f64> = (0..50)
            .map(|s| bahadur_sups(n, s).unwrap().remainder)
            .collect();
        v.sort_by(f64::total_cmp);
        0.5 * (v[24] + v[25])
    };
    let (a, b) = (median(250), median(4000));
    assert!(a > b, "{a} <= {b}");
}

fn univariate(law: DistributionSpec, target: Target, reps: usize, seed: u64) -> SimulationPlan {
    SimulationPlan::new(2000, reps, seed, Design::Univariate { law }, target)
}

#[test]
fn one_phase_variance_agreement() {
    let cases = [
        (
            DistributionSpec::Exponential { rate: 1.0 },
            Target::Sigma2A,
            0.15,
        ),
        (
            DistributionSpec::Uniform { a: 0.0, b: 1.0 },
            Target::Sigma2A,
            0.15,
        ),
        (
            DistributionSpec::Exponential { rate: 1.0 },
            Target::Sigma2Gi,
            0.15,
        ),
        (
            DistributionSpec::Pareto {
                alpha: 3.0,
                xm: 1.0,
            },
            Target::Sigma2Gi,
            0.20,
        ),
    ];
    for (k, (law, target, tol)) in cases.into_iter().enumerate() {
        let mut plan = univariate(law, target, 1000, 40 + k as u64);
        plan.tolerance = tol;
        let r = variance_agreement(&plan).unwrap();
        assert!(
            r.pass,
            "{law} {target}: plug-in {} vs MC {} (gap {})",
            r.plugin_median, r.mc_estimate, r.relative_gap
        );
    }
}

#[test]
fn coverage_at_several_levels() {
    let e = DistributionSpec::Exponential { rate: 1.0 };
    let r = coverage_study(&univariate(e, Target::CiGi, 1000, 3), 0.5).unwrap();
    let c = r.coverage.unwrap();
    assert!((0.45..=0.55).contains(&c), "level 0.5 coverage {c}");

    let narrow = DistributionSpec::Uniform { a: 0.99, b: 1.01 };
    let r = coverage_study(&univariate(narrow, Target::CiGi, 500, 4), 0.95).unwrap();
    assert!(
        r.coverage.unwrap() >= 0.90,
        "narrow uniform coverage {:?}",
        r.coverage
    );
}

#[test]
fn paired_variance_agreement() {
    let lognormal = DistributionSpec::Lognormal {
        location: 0.0,
        scale: 0.7,
    };
    let mut plan = SimulationPlan::new(
        2000,
        600,
        9,
        Design::Paired {
            design: PairedDesign::Copula {
                copula: CopulaSpec::Gaussian { rho: 0.7 },
                first: lognormal,
                second: DistributionSpec::Lognormal {
                    location: 0.1,
                    scale: 0.5,
                },
            },
        },
        Target::Sigma2DeltaGini,
    );
    plan.tolerance = 0.20;
    let r = variance_agreement(&plan).unwrap();
    assert!(
        r.pass,
        "delta gini: plug-in {} vs MC {}",
        r.plugin_median, r.mc_estimate
    );

    let mut plan = SimulationPlan::new(
        2000,
        600,
        10,
        Design::Paired {
            design: PairedDesign::Copula {
                copula: CopulaSpec::Clayton { theta: 2.0 },
                first: lognormal,
                second: DistributionSpec::Lognormal {
                    location: 0.2,
                    scale: 0.6,
                },
            },
        },
        Target::Sigma2DeltaGpi,
    )
    .with_gpi(GpiSpec::parse_selector("fgt:2").unwrap(), 1.0);
    plan.tolerance = 0.20;
    let r = variance_agreement(&plan).unwrap();
    assert!(
        r.pass,
        "delta fgt2: plug-in {} vs MC {}",
        r.plugin_median, r.mc_estimate
    );
}

#[test]
fn reports_are_reproducible() {
    let plan = univariate(
        DistributionSpec::Exponential { rate: 1.0 },
        Target::CiGi,
        50,
        77,
    );
    let (mut a, rows_a) = validate(&plan).unwrap();
    let (mut b, rows_b) = validate(&plan).unwrap();
    a.runtime_seconds = None;
    b.runtime_seconds = None;
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(rows_a, rows_b);
}

//! Gini and generalized poverty index estimation with plug-in asymptotic
//! variances.
//!
//! The crate covers single-period inference for the Gini index and its
//! weighted-mean statistic, the generalized poverty index family (FGT, Sen,
//! Kakwani and custom members), two-period changes in both indices for
//! paired panels, the ratio of poverty change to inequality change, and a
//! seeded Monte Carlo harness that checks every variance against simulation.
//!
//! ```
//! use ginifield::{gini_ci, make_distribution};
//!
//! let dist = make_distribution(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
//! let ci = gini_ci(&dist, 0.95).unwrap();
//! assert!(ci.lower <= ci.estimate && ci.estimate <= ci.upper);
//! ```

pub mod error;
pub mod field;
pub mod indices;
pub mod io;
pub mod montecarlo;
pub mod normal;
pub mod numeric;
pub mod quadrature;
pub mod sample;
pub mod two_phase;

pub use error::{Error, ErrorClass, Result};
pub use field::{
    build_plugin_context, gini_ci, gini_ci_from, lorenz_points, sigma2_a, sigma2_gi, Interval,
    PluginContext, VarianceKind, VarianceReport, Weighting,
};
pub use indices::{
    a_statistic, gini_point, gpi_point, poor_count, GiniEstimate, GpiConfig, GpiEstimate,
    GpiFamily, GpiSpec,
};
pub use io::{
    parse_income_csv, IncomeData, NonPositivePolicy, ParsedIncome, ReportEnvelope, RunConfig,
};
pub use sample::{
    empirical_copula, make_distribution, CopulaCdf, EmpiricalCopula, EmpiricalDistribution, Grid,
    PairedSample, ProductCopula,
};
pub use two_phase::{
    build_two_phase, cov_deltas, delta_gini, delta_gpi, ratio_inference, sigma2_delta_gini,
    sigma2_delta_gpi, Coupling, JointCovariance, QuadratureMode, RatioReport, TwoPhaseContext,
    TwoPhaseOptions,
};

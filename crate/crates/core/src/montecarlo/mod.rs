//! Seeded samplers, population truths and simulation studies used to check
//! the plug-in variances against Monte Carlo ground truth.

pub mod bahadur;
pub mod dist;
pub mod rng;
pub mod study;
pub mod truth;

pub use bahadur::{bahadur_remainder, bahadur_sups, BahadurSup};
pub use dist::{
    sample_paired, sample_univariate, AffineMarginal, CopulaSpec, DistributionSpec, Marginal,
    PairedDesign,
};
pub use rng::{replicate_seed, splitmix64, UniformStream, Unit};
pub use study::{
    coverage_study, run_replicates, validate, variance_agreement, Design, ReplicateRow,
    SimulationPlan, Target, ValidationReport,
};
pub use truth::{true_a, true_gini, true_gini_quadrature, true_gpi};

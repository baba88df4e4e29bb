//! Subcommand implementations. Each one builds a report envelope or a CSV
//! and hands it back to the dispatcher for writing.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use ginifield::io::Timing;
use ginifield::montecarlo::{
    validate, CopulaSpec, Design, DistributionSpec, PairedDesign, SimulationPlan, Target,
};
use ginifield::{
    build_two_phase, delta_gini, delta_gpi, gini_ci_from, gini_point, gpi_point, lorenz_points,
    parse_income_csv, ratio_inference, sigma2_a, sigma2_delta_gini, sigma2_delta_gpi, sigma2_gi,
    Coupling, EmpiricalDistribution, Error, GpiConfig, GpiSpec, Grid, IncomeData, Interval,
    NonPositivePolicy, PairedSample, ParsedIncome, PluginContext, QuadratureMode, ReportEnvelope,
    Result, RunConfig, TwoPhaseOptions, Weighting,
};

use crate::args::*;

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn policy(p: PolicyArg) -> NonPositivePolicy {
    match p {
        PolicyArg::Reject => NonPositivePolicy::Reject,
        PolicyArg::Drop => NonPositivePolicy::Drop,
    }
}

fn options(engine: &EngineArgs) -> Result<TwoPhaseOptions> {
    let mode = match engine.grid {
        Some(m) => QuadratureMode::Grid(Grid::new(m)?),
        None => QuadratureMode::Exact,
    };
    Ok(TwoPhaseOptions {
        mode,
        coupling: match engine.coupling {
            CouplingArg::Empirical => Coupling::Empirical,
            CouplingArg::Product => Coupling::Product,
        },
        weighting: match engine.weighting {
            WeightingArg::Ecdf => Weighting::Ecdf,
            WeightingArg::Midrank => Weighting::Midrank,
        },
    })
}

fn base_config(input: Option<&InputArgs>, engine: Option<&EngineArgs>) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(input) = input {
        cfg.input = Some(input.input.clone());
        cfg.columns = input.columns.clone();
        cfg.policy = policy(input.policy);
    }
    if let Some(engine) = engine {
        let opts = options(engine)?;
        cfg.level = engine.confidence;
        cfg.coupling = opts.coupling;
        cfg.weighting = opts.weighting;
        if let Some(m) = engine.grid {
            cfg.grid_points = m;
            cfg.quadrature = "grid".into();
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read(input: &InputArgs, want: usize) -> Result<ParsedIncome> {
    if input.columns.len() != want {
        return Err(usage(format!(
            "this command needs {want} column(s), got {}",
            input.columns.len()
        )));
    }
    let cols: Vec<&str> = input.columns.iter().map(String::as_str).collect();
    parse_income_csv(&input.input, &cols, policy(input.policy))
}

fn single(input: &InputArgs) -> Result<(EmpiricalDistribution, Vec<String>)> {
    let parsed = read(input, 1)?;
    match parsed.data {
        IncomeData::Single(d) => Ok((d, parsed.warnings)),
        IncomeData::Paired(_) => unreachable!("one column requested"),
    }
}

fn paired(input: &InputArgs) -> Result<(PairedSample, Vec<String>)> {
    let parsed = read(input, 2)?;
    match parsed.data {
        IncomeData::Paired(p) => Ok((p, parsed.warnings)),
        IncomeData::Single(_) => unreachable!("two columns requested"),
    }
}

/// Parses an index selector, reading `gpi:FILE` as a JSON custom index.
pub fn index_spec(text: &str) -> Result<GpiSpec> {
    match text.strip_prefix("gpi:") {
        Some(path) => {
            let path = Path::new(path);
            let body = std::fs::read_to_string(path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
                _ => Error::Io(e),
            })?;
            let spec: GpiSpec = serde_json::from_str(&body)
                .map_err(|e| usage(format!("custom index in {}: {e}", path.display())))?;
            Ok(spec)
        }
        None => GpiSpec::parse_selector(text),
    }
}

fn index_config(args: &IndexArgs, cfg: &mut RunConfig) -> Result<GpiConfig> {
    cfg.index = Some(args.index.clone());
    cfg.poverty_line = Some(args.poverty_line);
    cfg.validate()?;
    index_spec(&args.index)?.build(args.poverty_line)
}

fn push_warnings(env: &mut ReportEnvelope, more: impl IntoIterator<Item = String>) {
    for w in more {
        if !env.warnings.contains(&w) {
            env.warnings.push(w);
        }
    }
}

fn estimates(env: &mut ReportEnvelope, pairs: &[(&str, f64)]) {
    env.estimates
        .extend(pairs.iter().map(|(k, v)| (k.to_string(), *v)));
}

fn finish(mut env: ReportEnvelope, out: &OutputArgs, start: Instant) -> Result<ReportEnvelope> {
    env.config.output = out.output.clone();
    if !out.deterministic {
        env.timing = Some(Timing {
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(env)
}

pub fn gini(args: &GiniArgs) -> Result<ReportEnvelope> {
    let start = Instant::now();
    let cfg = base_config(Some(&args.input), Some(&args.engine))?;
    let (dist, warnings) = single(&args.input)?;
    let ctx = PluginContext::new(&dist, cfg.weighting)?;
    let point = gini_point(&dist)?;
    let gi = sigma2_gi(&ctx)?;
    let a = sigma2_a(&ctx)?;
    let ci = gini_ci_from(&ctx, &gi, cfg.level)?;

    let mut env = ReportEnvelope::new("gini", cfg);
    estimates(
        &mut env,
        &[
            ("gini", point.value),
            ("a_statistic", point.a_statistic),
            ("mean", point.mean),
            ("n", point.n as f64),
            ("sigma2_GI", gi.sigma2),
            ("sigma2_A", a.sigma2),
            ("std_error", (gi.sigma2 / point.n as f64).sqrt()),
        ],
    );
    env.ledgers.insert("sigma2_GI".into(), gi.terms.clone());
    env.ledgers.insert("sigma2_A".into(), a.terms.clone());
    env.interval = Some(ci);
    push_warnings(&mut env, warnings);
    push_warnings(&mut env, gi.warnings);
    finish(env, &args.output, start)
}

pub fn gpi(args: &GpiArgs) -> Result<ReportEnvelope> {
    let start = Instant::now();
    let mut cfg = base_config(Some(&args.input), None)?;
    let index = index_config(&args.index, &mut cfg)?;
    let (dist, warnings) = single(&args.input)?;
    let est = gpi_point(&dist, &index)?;

    let mut env = ReportEnvelope::new("gpi", cfg);
    estimates(
        &mut env,
        &[
            ("gpi", est.value),
            ("poor_count", est.poor_count as f64),
            ("headcount", est.poor_count as f64 / dist.len() as f64),
            ("normalizer", est.normalizer),
            ("n", dist.len() as f64),
        ],
    );
    push_warnings(&mut env, warnings);
    push_warnings(&mut env, index.warnings.clone());
    finish(env, &args.output, start)
}

pub fn delta_gini_cmd(args: &DeltaGiniArgs) -> Result<ReportEnvelope> {
    let start = Instant::now();
    let cfg = base_config(Some(&args.input), Some(&args.engine))?;
    let (sample, warnings) = paired(&args.input)?;
    let ctx = build_two_phase(&sample, None, options(&args.engine)?)?;
    let dg = delta_gini(&ctx);
    let report = sigma2_delta_gini(&ctx)?;
    let n = sample.len();

    let mut env = ReportEnvelope::new("delta-gini", cfg);
    estimates(
        &mut env,
        &[
            ("delta_gini", dg),
            ("gini_first", ctx.gini1.value),
            ("gini_second", ctx.gini2.value),
            ("sigma2_delta_gini", report.sigma2),
            ("n", n as f64),
        ],
    );
    env.ledgers
        .insert("sigma2_delta_gini".into(), report.terms.clone());
    env.interval = Some(Interval::normal(dg, report.sigma2, n, env.config.level)?);
    push_warnings(&mut env, warnings);
    push_warnings(&mut env, report.warnings);
    finish(env, &args.output, start)
}

pub fn delta_gpi_cmd(args: &PairedGpiArgs) -> Result<ReportEnvelope> {
    let start = Instant::now();
    let mut cfg = base_config(Some(&args.input), Some(&args.engine))?;
    let index = index_config(&args.index, &mut cfg)?;
    let (sample, warnings) = paired(&args.input)?;
    let ctx = build_two_phase(&sample, Some((&index, &index)), options(&args.engine)?)?;
    let dj = delta_gpi(&ctx)?;
    let report = sigma2_delta_gpi(&ctx)?;
    let n = sample.len();
    let (d1, d2) = sample.margins();

    let mut env = ReportEnvelope::new("delta-gpi", cfg);
    estimates(
        &mut env,
        &[
            ("delta_gpi", dj),
            ("gpi_first", gpi_point(&d1, &index)?.value),
            ("gpi_second", gpi_point(&d2, &index)?.value),
            ("sigma2_delta_gpi", report.sigma2),
            ("n", n as f64),
        ],
    );
    env.ledgers
        .insert("sigma2_delta_gpi".into(), report.terms.clone());
    env.interval = Some(Interval::normal(dj, report.sigma2, n, env.config.level)?);
    push_warnings(&mut env, warnings);
    push_warnings(&mut env, index.warnings.clone());
    push_warnings(&mut env, report.warnings);
    finish(env, &args.output, start)
}

pub fn ratio(args: &PairedGpiArgs) -> Result<ReportEnvelope> {
    let start = Instant::now();
    let mut cfg = base_config(Some(&args.input), Some(&args.engine))?;
    let index = index_config(&args.index, &mut cfg)?;
    let (sample, warnings) = paired(&args.input)?;
    let ctx = build_two_phase(&sample, Some((&index, &index)), options(&args.engine)?)?;
    let report = ratio_inference(&ctx, cfg.level)?;
    let joint = &report.joint;

    let mut env = ReportEnvelope::new("ratio", cfg);
    estimates(
        &mut env,
        &[
            ("r", report.r),
            ("delta_gini", report.delta_gini),
            ("delta_gpi", report.delta_gpi),
            ("a", report.a),
            ("b", report.b),
            ("sigma2_R", report.sigma2_r),
            ("sigma2_delta_gini", joint.sigma2_delta_gini),
            ("sigma2_delta_gpi", joint.sigma2_delta_gpi),
            ("cov_delta_gpi_delta_gini", joint.cov),
            ("eigenvalue_min", joint.eigenvalues[0]),
            ("eigenvalue_max", joint.eigenvalues[1]),
            ("denom_floor", report.denom_floor),
            ("n", sample.len() as f64),
        ],
    );
    env.ledgers
        .insert("sigma2_delta_gini".into(), joint.gini.terms.clone());
    env.ledgers
        .insert("sigma2_delta_gpi".into(), joint.gpi.terms.clone());
    env.ledgers
        .insert("cov_delta_gpi_delta_gini".into(), joint.terms.clone());
    env.interval = Some(report.ci);
    push_warnings(&mut env, warnings);
    push_warnings(&mut env, index.warnings.clone());
    push_warnings(&mut env, report.warnings.clone());
    finish(env, &args.output, start)
}

pub fn lorenz(args: &LorenzArgs) -> Result<Vec<u8>> {
    base_config(Some(&args.input), None)?;
    let (dist, _) = single(&args.input)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "lorenz"])?;
    for (p, l) in lorenz_points(&dist) {
        w.write_record([p.to_string(), l.to_string()])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn design(args: &DesignArgs, paired: bool) -> Result<Design> {
    let law: DistributionSpec = args.family.parse()?;
    if let Some(affine) = &args.affine {
        if args.family2.is_some() || args.copula.is_some() {
            return Err(usage("--affine excludes --family2 and --copula"));
        }
        let parts: Vec<&str> = affine.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad number `{s}` in --affine")))
        };
        let [scale, shift] = parts.as_slice() else {
            return Err(usage("--affine takes SCALE:SHIFT"));
        };
        let design = PairedDesign::Affine {
            base: law,
            scale: num(scale)?,
            shift: num(shift)?,
        };
        design.validate()?;
        return Ok(Design::Paired { design });
    }
    if paired || args.family2.is_some() || args.copula.is_some() {
        let second = match &args.family2 {
            Some(f) => f.parse()?,
            None => law,
        };
        let copula = match &args.copula {
            Some(c) => c.parse()?,
            None => CopulaSpec::Independence,
        };
        return Ok(Design::Paired {
            design: PairedDesign::Copula {
                copula,
                first: law,
                second,
            },
        });
    }
    Ok(Design::Univariate { law })
}

pub fn simulate(args: &SimulateArgs) -> Result<Vec<u8>> {
    if args.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    match design(&args.design, false)? {
        Design::Univariate { law } => {
            w.write_record(["income"])?;
            for x in ginifield::montecarlo::sample_univariate(&law, args.n, args.seed)? {
                w.write_record([x.to_string()])?;
            }
        }
        Design::Paired { design } => {
            w.write_record(["y1", "y2"])?;
            for (a, b) in design.sample(args.n, args.seed)?.rows() {
                w.write_record([a.to_string(), b.to_string()])?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub struct Validation {
    pub envelope: ReportEnvelope,
    pub replicates_csv: Option<Vec<u8>>,
}

pub fn validate_cmd(args: &ValidateArgs) -> Result<Validation> {
    let start = Instant::now();
    let target: Target = args.target.parse()?;
    let mut cfg = base_config(None, Some(&args.engine))?;
    let mut plan = SimulationPlan::new(
        args.n,
        args.replicates,
        args.seed,
        design(&args.design, target.is_paired())?,
        target,
    );
    plan.level = args.engine.confidence;
    plan.tolerance = args.tolerance;
    plan.options = options(&args.engine)?;
    match (&args.index, args.poverty_line) {
        (Some(index), Some(z)) => {
            plan = plan.with_gpi(index_spec(index)?, z);
            cfg.index = Some(index.clone());
            cfg.poverty_line = Some(z);
        }
        (None, None) => {}
        _ => return Err(usage("--index and --poverty-line go together")),
    }
    cfg.seed = Some(args.seed);
    cfg.replicates = Some(args.replicates);
    cfg.simulation = Some(plan.clone());
    cfg.validate()?;

    let (mut report, rows) = validate(&plan)?;
    if args.output.deterministic {
        report.runtime_seconds = None;
    }
    let mut env = ReportEnvelope::new("validate", cfg);
    let mut est: BTreeMap<String, f64> = BTreeMap::new();
    est.insert("mc_estimate".into(), report.mc_estimate);
    est.insert("plugin_median".into(), report.plugin_median);
    est.insert("relative_gap".into(), report.relative_gap);
    if let Some(t) = report.truth {
        est.insert("truth".into(), t);
    }
    if let Some(c) = report.coverage {
        est.insert("coverage".into(), c);
    }
    env.estimates = est.into_iter().filter(|(_, v)| v.is_finite()).collect();
    if !report.pass {
        env.warnings
            .push(format!("validation of {target} did not pass"));
    }
    env.validation = Some(report);

    let replicates_csv = match &args.replicates_csv {
        None => None,
        Some(_) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row)?;
            }
            Some(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        }
    };
    Ok(Validation {
        envelope: finish(env, &args.output, start)?,
        replicates_csv,
    })
}

/// Writes `bytes` to `path`, or to `fallback` when no path is given.
pub fn write_to(path: Option<&Path>, bytes: &[u8], fallback: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => fallback.write_all(bytes)?,
    }
    Ok(())
}

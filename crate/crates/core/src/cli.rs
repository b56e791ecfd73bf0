//! Command implementations behind the `suptail` binary.
//!
//! Every command produces CSV through [`write_csv`], with numbers in their
//! shortest round-trip form, and can record a [`RunManifest`] next to its
//! output. Errors carry the process exit code: 2 for usage and config
//! problems, 1 for failures while running.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::bounds::{
    self, bennett_bound, classify_regime, lower_bound_level, threshold_u, threshold_u_bar,
    upper_bound_theorem1, BoundParams, DenseClass,
};
use crate::error::Error;
use crate::montecarlo::{
    compare_with_bounds, estimate_tail, modulus_samples,
    ComparisonRow, EstimateTarget, ExperimentConfig, ResolvedLevel,
};
use crate::poisson::{
    analytic_lower_bound, check_inequality_24, lower_bound_experiment, poisson_tail_experiment,
};
use crate::verify::{run_checks, CheckOutcome, VerifyOptions, CHECKS};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments or config; exit code 2.
    Usage(String),
    /// Failure while running; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Shortest decimal that parses back to the same `f64`. Plain notation in
/// `[1e-5, 1e16)`, scientific outside it.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt_number(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// Writes a header and rows as CSV with `\n` line endings.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(runtime)?;
    for row in rows {
        w.write_record(row).map_err(runtime)?;
    }
    w.flush().map_err(runtime)
}

/// Parses `a,b,c`, `logspace:lo:hi:count` or `linspace:lo:hi:count`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    let bad = |why: &str| CliError::Usage(format!("bad grid {spec:?}: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("{s:?} is not a number")));
    let values = if let Some(rest) = spec
        .strip_prefix("logspace:")
        .map(|r| (r, true))
        .or_else(|| spec.strip_prefix("linspace:").map(|r| (r, false)))
    {
        let (body, log) = rest;
        let parts: Vec<&str> = body.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(bad("expected lo:hi:count"));
        };
        let (lo, hi) = (num(lo)?, num(hi)?);
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| bad("count must be a positive integer"))?;
        if count == 0 {
            return Err(bad("count must be a positive integer"));
        }
        if log && !(lo > 0.0 && hi > 0.0) {
            return Err(bad("logspace needs positive endpoints"));
        }
        let (a, b) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
        (0..count)
            .map(|i| match i {
                0 => lo,
                _ if i == count - 1 => hi,
                _ => {
                    let x = a + (b - a) * i as f64 / (count - 1) as f64;
                    if log {
                        x.exp()
                    } else {
                        x
                    }
                }
            })
            .collect()
    } else {
        spec.split(',').map(num).collect::<CliResult<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad("empty"));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}

/// A grid of sample sizes; logspace values are rounded and duplicates removed.
pub fn parse_n_grid(spec: &str) -> CliResult<Vec<u64>> {
    let mut out: Vec<u64> = Vec::new();
    for x in parse_grid(spec)? {
        let n = x.round();
        if !(n >= 2.0 && n < u64::MAX as f64) {
            return Err(CliError::Usage(format!("sample size {x} must be >= 2")));
        }
        if out.last() != Some(&(n as u64)) {
            out.push(n as u64);
        }
    }
    Ok(out)
}

fn check_sigma2_grid(grid: &[f64]) -> CliResult<()> {
    match grid.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
        Some(s) => Err(CliError::Usage(format!("sigma2 {s} must lie in (0, 1]"))),
        None => Ok(()),
    }
}

/// Record of one run: enough to reproduce the result file byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub master_seed: Option<u64>,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: &impl Serialize,
        master_seed: Option<u64>,
        started_at: String,
    ) -> CliResult<Self> {
        Ok(Self {
            command: command.into(),
            config: serde_json::to_value(config).map_err(runtime)?,
            master_seed,
            version: env!("CARGO_PKG_VERSION").into(),
            started_at,
            finished_at: timestamp(),
        })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(runtime)?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
    }
}

// ---------------------------------------------------------------- bounds

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRequest {
    pub n: Vec<u64>,
    pub sigma2: Vec<f64>,
    #[serde(flatten)]
    pub dims: DenseClass,
    #[serde(rename = "constants")]
    pub params: BoundParams,
}

pub const BOUNDS_HEADER: [&str; 9] = [
    "n",
    "sigma2",
    "regime",
    "u",
    "u_bar",
    "hat_u",
    "two_sqrtn_sigma2",
    "bound_at_u",
    "bennett_at_u",
];

/// One row per `(n, σ²)`, n-major. Bounds are clamped to 1; a bound whose
/// hypotheses fail at `v = u` is left empty.
pub fn bounds_rows(req: &BoundsRequest) -> CliResult<Vec<Vec<String>>> {
    if req.n.is_empty() || req.sigma2.is_empty() {
        return Err(usage("grids must not be empty"));
    }
    check_sigma2_grid(&req.sigma2)?;
    req.params.validate().map_err(usage)?;
    req.dims.validate().map_err(usage)?;
    let mut rows = Vec::new();
    for &n in &req.n {
        for &s2 in &req.sigma2 {
            let regime = classify_regime(n, s2).map_err(usage)?;
            let u = threshold_u(n, s2, &req.dims, &req.params).map_err(runtime)?;
            let u_bar = threshold_u_bar(s2, &req.dims, &req.params).map_err(runtime)?;
            let hat_u = lower_bound_level(n, s2, &req.params).map_err(runtime)?;
            let at_u = upper_bound_theorem1(n, s2, u, &req.dims, &req.params)
                .ok()
                .map(|b| b.min(1.0));
            let bennett = bennett_bound(n, s2, u).ok().map(|b| b.min(1.0));
            rows.push(vec![
                n.to_string(),
                format_number(s2),
                regime.to_string(),
                format_number(u),
                format_number(u_bar),
                format_number(hat_u),
                format_number(2.0 * (n as f64).sqrt() * s2),
                opt_number(at_u),
                opt_number(bennett),
            ]);
        }
    }
    Ok(rows)
}

// -------------------------------------------------------------- simulate

pub const SIMULATE_HEADER: [&str; 12] = [
    "v",
    "hits",
    "reps",
    "p_hat",
    "ci_low",
    "ci_high",
    "bound_thm1",
    "bound_ext",
    "bound_bennett",
    "applicable_thm1",
    "applicable_ext",
    "dominance",
];

#[derive(Deserialize)]
struct ManifestInput {
    config: ExperimentConfig,
}

/// Parses an experiment config, or a run manifest holding one under
/// `"config"`. Errors name the line and column.
pub fn parse_config(text: &str, origin: &str) -> CliResult<ExperimentConfig> {
    let located = |e: serde_json::Error| CliError::Usage(format!("{origin}: {e}"));
    let value: serde_json::Value = serde_json::from_str(text).map_err(located)?;
    let config = if value.get("config").is_some() {
        serde_json::from_str::<ManifestInput>(text).map_err(located)?.config
    } else {
        serde_json::from_str::<ExperimentConfig>(text).map_err(located)?
    };
    Ok(config)
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct SimulateOverrides {
    pub seed: Option<u64>,
    pub reps: Option<u64>,
    pub constants: Option<String>,
}

pub fn apply_overrides(
    mut config: ExperimentConfig,
    overrides: &SimulateOverrides,
) -> CliResult<ExperimentConfig> {
    if let Some(seed) = overrides.seed {
        config.master_seed = seed;
    }
    if let Some(reps) = overrides.reps {
        config.reps = reps;
    }
    if let Some(spec) = &overrides.constants {
        config.params = config.params.with_overrides(spec).map_err(usage)?;
    }
    config.validate().map_err(usage)?;
    Ok(config)
}

/// The config as recorded in a manifest, with resolved levels alongside.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateRecord<'a> {
    #[serde(flatten)]
    pub config: &'a ExperimentConfig,
    pub resolved_levels: Vec<ResolvedLevel>,
}

pub fn simulate(config: &ExperimentConfig) -> CliResult<(Vec<ResolvedLevel>, Vec<ComparisonRow>)> {
    config.validate().map_err(usage)?;
    let levels = config.resolved_levels().map_err(usage)?;
    let estimates = estimate_tail(config).map_err(runtime)?;
    let rows = compare_with_bounds(
        &estimates,
        config.n,
        config.sigma2,
        &config.dims,
        &config.params,
        EstimateTarget::ClassSupremum,
    );
    Ok((levels, rows))
}

pub fn simulate_rows(rows: &[ComparisonRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let e = &r.estimate;
            vec![
                format_number(e.v),
                e.hits.to_string(),
                e.reps.to_string(),
                format_number(e.p_hat),
                format_number(e.ci_low),
                format_number(e.ci_high),
                opt_number(r.theorem1.value),
                opt_number(r.extension.value),
                opt_number(r.bennett.value),
                r.theorem1.applicable.to_string(),
                r.extension.applicable.to_string(),
                r.dominance.to_string(),
            ]
        })
        .collect()
}

// ----------------------------------------------------------- lower-bound

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRequest {
    pub n: u64,
    pub sigma2: f64,
    pub reps: u64,
    pub seed: u64,
    pub delta: f64,
    #[serde(rename = "constants")]
    pub params: BoundParams,
}

pub const LOWER_BOUND_HEADER: [&str; 10] = [
    "quantity", "model", "level", "value", "ci_low", "ci_high", "hits", "reps", "status", "note",
];

/// Rows: the empirical estimate at `û(σ)`, the Poisson estimate at `m*`,
/// the analytic `1 - exp(-T)` and the sufficient-condition margin. Poisson
/// rows are marked `skipped` with the reason when `σ²` lies outside the
/// construction's range.
pub fn lower_bound_rows(req: &LowerBoundRequest) -> CliResult<Vec<Vec<String>>> {
    bounds::classify_regime(req.n, req.sigma2).map_err(usage)?;
    req.params.validate().map_err(usage)?;
    if req.reps == 0 {
        return Err(usage("reps must be >= 1"));
    }
    if !(req.delta > 0.0 && req.delta < 1.0) {
        return Err(usage(format!("delta must lie in (0, 1), got {}", req.delta)));
    }
    let mut rows = Vec::new();
    let est = lower_bound_experiment(req.n, req.sigma2, req.reps, req.seed, &req.params)
        .map_err(runtime)?;
    rows.push(vec![
        "empirical_estimate".into(),
        "empirical".into(),
        format_number(est.v),
        format_number(est.p_hat),
        format_number(est.ci_low),
        format_number(est.ci_high),
        est.hits.to_string(),
        est.reps.to_string(),
        "ok".into(),
        String::new(),
    ]);

    let n = req.n as f64;
    let skipped = |quantity: &str, e: &Error| {
        let mut row = vec![quantity.to_string(), "poisson".to_string()];
        row.extend(std::iter::repeat_n(String::new(), 6));
        row.push("skipped".into());
        row.push(e.to_string());
        row
    };
    match analytic_lower_bound(n, req.sigma2) {
        Err(e) if e.is_not_applicable() => {
            for q in ["poisson_estimate", "analytic_bound", "check24_margin"] {
                rows.push(skipped(q, &e));
            }
        }
        Err(e) => return Err(runtime(e)),
        Ok(bound) => {
            let level = bound.m_star as f64;
            let sim = poisson_tail_experiment(n, req.sigma2, req.reps, req.seed).map_err(runtime)?;
            rows.push(vec![
                "poisson_estimate".into(),
                "poisson".into(),
                format_number(level),
                format_number(sim.p_hat),
                format_number(sim.ci_low),
                format_number(sim.ci_high),
                sim.hits.to_string(),
                sim.reps.to_string(),
                "ok".into(),
                String::new(),
            ]);
            rows.push(vec![
                "analytic_bound".into(),
                "poisson".into(),
                format_number(level),
                format_number(bound.probability),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "ok".into(),
                format!("log T = {}", format_number(bound.log_t)),
            ]);
            let check = check_inequality_24(n, req.sigma2, req.delta).map_err(runtime)?;
            rows.push(vec![
                "check24_margin".into(),
                "poisson".into(),
                format_number(level),
                format_number(check.log_margin),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                if check.holds { "holds" } else { "fails" }.into(),
                format!("delta = {}", format_number(req.delta)),
            ]);
        }
    }
    Ok(rows)
}

// --------------------------------------------------------------- modulus

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusRequest {
    pub n: Vec<u64>,
    pub delta: Vec<f64>,
    pub reps: u64,
    pub seed: u64,
    #[serde(rename = "constants")]
    pub params: BoundParams,
}

pub const MODULUS_HEADER: [&str; 10] = [
    "n", "delta", "reps", "mean", "max", "q50", "q90", "q99", "hat_u", "ratio",
];

/// `C̄ σ √log(2/σ)` with `σ² = δ`.
pub fn modulus_normalizer(delta: f64, params: &BoundParams) -> f64 {
    let sigma = delta.sqrt();
    params.c_bar * sigma * (2.0 / sigma).ln().sqrt()
}

pub fn modulus_rows(req: &ModulusRequest) -> CliResult<Vec<Vec<String>>> {
    if req.n.is_empty() || req.delta.is_empty() {
        return Err(usage("grids must not be empty"));
    }
    if let Some(d) = req.delta.iter().find(|&&d| !(d > 0.0 && d <= 1.0)) {
        return Err(usage(format!("delta {d} must lie in (0, 1]")));
    }
    if req.reps == 0 {
        return Err(usage("reps must be >= 1"));
    }
    req.params.validate().map_err(usage)?;
    let mut rows = Vec::new();
    for &n in &req.n {
        let size = usize::try_from(n).map_err(usage)?;
        let samples = modulus_samples(size, &req.delta, req.reps, req.seed).map_err(runtime)?;
        for (&delta, values) in req.delta.iter().zip(samples) {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut data = Data::new(values);
            let hat_u = modulus_normalizer(delta, &req.params);
            rows.push(vec![
                n.to_string(),
                format_number(delta),
                req.reps.to_string(),
                format_number(mean),
                format_number(max),
                format_number(data.quantile(0.5)),
                format_number(data.quantile(0.9)),
                format_number(data.quantile(0.99)),
                format_number(hat_u),
                format_number(mean / hat_u),
            ]);
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------- verify

/// Runs the invariant suite, printing a table row per check to `out`.
/// Returns the ids of failed checks.
pub fn verify<W: Write>(options: &VerifyOptions, mut out: W) -> CliResult<Vec<&'static str>> {
    if let Some(unknown) = options
        .only
        .iter()
        .find(|o| !CHECKS.iter().any(|(id, _)| id == o))
    {
        return Err(CliError::Usage(format!("unknown check {unknown:?}")));
    }
    writeln!(out, "{:<30} {:<6} {:>9}  detail", "check", "status", "seconds").map_err(runtime)?;
    let mut io_error = None;
    let outcomes = run_checks(options, |c: &CheckOutcome| {
        let line = writeln!(
            out,
            "{:<30} {:<6} {:>9.3}  {}",
            c.id,
            if c.passed { "pass" } else { "FAIL" },
            c.elapsed.as_secs_f64(),
            c.detail
        )
        .and_then(|_| out.flush());
        if let Err(e) = line {
            io_error.get_or_insert(e);
        }
    });
    if let Some(e) = io_error {
        return Err(runtime(e));
    }
    let total: f64 = outcomes.iter().map(|c| c.elapsed.as_secs_f64()).sum();
    let failed: Vec<&'static str> = outcomes.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    writeln!(
        out,
        "{} checks, {} failed, {:.1} s",
        outcomes.len(),
        failed.len(),
        total
    )
    .map_err(runtime)?;
    Ok(failed)
}

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs with `cargo test --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use suptail::bounds::{
    bennett_bound, classify_regime, regime_bc_boundary, threshold_u, u_case_b, u_case_c,
    BoundParams, DenseClass, Regime,
};
use suptail::empirical::{sample_uniform, sup_direct, sup_via_increments};
use suptail::montecarlo::{
    estimate_member_tail, estimate_tail, exact_tail_small_rational, ExperimentConfig, LevelSpec,
};
use suptail::poisson::{
    analytic_lower_bound, check_inequality_24, coupling_experiment, poisson_tail_experiment,
};
use suptail::rng::{experiment, StreamSeed};
use suptail::verify::bennett_levels;
use suptail::GridClassSpec;

const SEED: u64 = 20_240_601;
const BIN: &str = env!("CARGO_BIN_EXE_suptail");

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn config(n: u64, sigma2: f64, levels: &[f64], reps: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n,
        sigma2,
        levels: levels.iter().map(|&v| LevelSpec::Value(v)).collect(),
        reps,
        master_seed: seed,
        params: BoundParams::default(),
        dims: DenseClass::default(),
    }
}

fn identity() -> Outcome {
    let start = Instant::now();
    let mut rng = StreamSeed::new(SEED, experiment::VERIFY, 901).rng();
    let mut worst = 0f64;
    for i in 0..1000u64 {
        let n = rng.random_range(2..=10_000usize);
        let s2 = rng.random_range(1e-3f64.ln()..0.0).exp();
        let path = sample_uniform(n, StreamSeed::new(SEED, experiment::UNIFORM_PATH, 5000 + i))
            .unwrap();
        let spec = GridClassSpec::new(s2, true).unwrap();
        let direct = sup_direct(&path, &spec).unwrap();
        let incr = sup_via_increments(&path, s2).unwrap().value;
        worst = worst.max((direct - incr).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && within(elapsed, 120),
        format!("max |direct - increments| = {worst:e}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn grid_hypotheses() -> Outcome {
    let mut worst_mean = 0f64;
    let mut worst_second = 0f64;
    let mut dominated = true;
    for s2 in logspace(1e-9, 1.0, 50) {
        let spec = GridClassSpec::new(s2, true).unwrap();
        let (mean, second) = spec.member_moments(1).unwrap();
        let s = BigRational::from_float(s2).unwrap();
        let exact = (&s * (BigRational::one() - &s)).to_f64().unwrap();
        worst_mean = worst_mean.max(mean.abs());
        worst_second = worst_second.max((second - exact).abs());
        dominated &= exact <= s2 && second <= s2;
    }
    outcome(
        worst_mean < 1e-14 && worst_second < 1e-14 && dominated,
        format!("max |mean| = {worst_mean:e}, max second-moment error = {worst_second:e}"),
    )
}

fn exact_oracle() -> Outcome {
    let start = Instant::now();
    let exact = exact_tail_small_rational(4, 0.5, 1.0).unwrap();
    let is_eighth = exact == BigRational::new(BigInt::from(1), BigInt::from(8));
    let reps = 100_000;
    let est = estimate_tail(&config(4, 0.5, &[1.0], reps, SEED)).unwrap()[0];
    let z = Normal::standard().inverse_cdf(0.9995);
    let half = z * (0.125f64 * 0.875 / reps as f64).sqrt();
    let elapsed = start.elapsed();
    outcome(
        is_eighth && (est.p_hat - 0.125).abs() <= half && within(elapsed, 60),
        format!(
            "exact = {exact}, p_hat = {} (0.125 +/- {half:.5}), {:.1}s",
            est.p_hat,
            elapsed.as_secs_f64()
        ),
    )
}

fn bennett_dominance() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut total = 0;
    for n in [1_000u64, 10_000] {
        for s2 in [0.25, 0.01] {
            let levels = bennett_levels(n, s2);
            for est in estimate_member_tail(n, s2, &levels, 100_000, SEED).unwrap() {
                let bound = bennett_bound(n, s2, est.v).unwrap();
                total += 1;
                if est.ci_high > bound {
                    failures.push(format!(
                        "n={n} s2={s2} v={:.3}: ci_high {:.2e} > {bound:.2e}",
                        est.v, est.ci_high
                    ));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = if failures.is_empty() {
        format!("{total} points dominated, {:.1}s", elapsed.as_secs_f64())
    } else {
        format!(
            "{}/{total} points with Wilson upper bound above Bennett; first: {}",
            failures.len(),
            failures[0]
        )
    };
    outcome(failures.is_empty() && within(elapsed, 600), detail)
}

fn threshold_sweep() -> Outcome {
    let dims = DenseClass::default();
    let params = BoundParams::default();
    let mut ns: Vec<u64> = logspace(2.0, 1e9, 200).iter().map(|x| x.round() as u64).collect();
    ns.dedup();
    let mut tested = 0;
    let mut below = 0;
    for &n in &ns {
        for s2 in logspace(1e-300, 1.0, 200) {
            if classify_regime(n, s2).unwrap() == Regime::A {
                continue;
            }
            tested += 1;
            if threshold_u(n, s2, &dims, &params).unwrap() < 2.0 * (n as f64).sqrt() * s2 {
                below += 1;
            }
        }
    }
    let mut ratios = Vec::new();
    for n in logspace(1e2, 1e9, 200) {
        let n = n.round() as u64;
        let s2 = regime_bc_boundary(n);
        ratios.push(u_case_b(n, s2, &dims, &params) / u_case_c(n, s2, &dims, &params));
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    outcome(
        below == 0 && lo >= 0.1 && hi <= 10.0,
        format!("{below}/{tested} B/C points below 2 sqrt(n) sigma2; boundary ratio in [{lo:.4}, {hi:.4}]"),
    )
}

fn poisson_lower_bound() -> Outcome {
    let start = Instant::now();
    let n = 1e6f64;
    let s2 = n.ln() / (7.0 * n);
    let check = check_inequality_24(n, s2, 0.1).unwrap();
    let bound = analytic_lower_bound(n, s2).unwrap();
    let sim = poisson_tail_experiment(n, s2, 10_000, SEED).unwrap();
    let elapsed = start.elapsed();
    outcome(
        check.holds
            && bound.probability >= 0.9
            && sim.p_hat >= bound.probability - 3.0 * sim.half_width()
            && within(elapsed, 300),
        format!(
            "condition margin {:.3}, 1 - exp(-T) = {}, p_hat = {} (half-width {:.2e}), {:.1}s",
            check.log_margin,
            bound.probability,
            sim.p_hat,
            sim.half_width(),
            elapsed.as_secs_f64()
        ),
    )
}

fn small_sigma_lower_bound() -> Outcome {
    let n = 100u64;
    let s2 = 1e-300;
    let level = BoundParams::default().c_bar / (n as f64).sqrt();
    let est = estimate_tail(&config(n, s2, &[level], 10_000, SEED)).unwrap()[0];
    outcome(
        est.p_hat == 1.0,
        format!(
            "P(sup >= {level}) estimate {} over {} reps (classified as regime {})",
            est.p_hat,
            est.reps,
            classify_regime(n, s2).unwrap()
        ),
    )
}

fn coupling() -> Outcome {
    let start = Instant::now();
    let summary = coupling_experiment(10_000, &[0.1, 0.01], 10_000, SEED).unwrap();
    let elapsed = start.elapsed();
    outcome(
        summary.eta_fraction() >= 0.99 && summary.dominance_failures == 0 && within(elapsed, 120),
        format!(
            "eta <= n on {:.4} of replications (need 0.99), dominance failures {}, {:.1}s",
            summary.eta_fraction(),
            summary.dominance_failures,
            elapsed.as_secs_f64()
        ),
    )
}

fn run_simulate(dir: &Path, config: &Path, out: &str, threads: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(out);
    let status = Command::new(BIN)
        .args(["simulate", "--config"])
        .arg(config)
        .arg("--out")
        .arg(&out)
        .env("RAYON_NUM_THREADS", threads)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("simulate exited with {status}"));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"n": 2000, "sigma2": 0.01, "levels": ["u_bar", "2*sqrt(n)*sigma2", 0.5, 1.5], "reps": 4000, "seed": 11}"#,
    )
    .unwrap();
    let result = (|| {
        let first = run_simulate(dir.path(), &config, "a.csv", "1")?;
        let manifest = dir.path().join("a.csv.manifest.json");
        let second = run_simulate(dir.path(), &manifest, "b.csv", "4")?;
        let third = run_simulate(dir.path(), &manifest, "c.csv", "4")?;
        Ok::<_, String>((first, second, third))
    })();
    match result {
        Ok((a, b, c)) => outcome(
            a == b && b == c,
            format!("{} bytes, 1-thread and 4-thread runs from the manifest identical: {}", a.len(), a == b && b == c),
        ),
        Err(e) => outcome(false, e),
    }
}

fn verify_command() -> Outcome {
    let start = Instant::now();
    let output = Command::new(BIN).arg("verify").output();
    let elapsed = start.elapsed();
    match output {
        Ok(out) => {
            let stdout = String::from_utf8_lossy(&out.stdout);
            let summary = stdout.lines().last().unwrap_or("").to_string();
            outcome(
                out.status.success() && within(elapsed, 1800),
                format!("{summary}; wall {:.1}s", elapsed.as_secs_f64()),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 identity of direct and increment suprema", identity),
        ("2 grid-class hypotheses", grid_hypotheses),
        ("3 exact oracle equivalence", exact_oracle),
        ("4 Bennett dominance of single-member tails", bennett_dominance),
        ("5 threshold sweep", threshold_sweep),
        ("6 Poisson lower bound", poisson_lower_bound),
        ("7 small-sigma lower bound", small_sigma_lower_bound),
        ("8 Poisson coupling", coupling),
        ("9 determinism of simulate", determinism),
        ("10 verify command", verify_command),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let result = run();
        if !result.passed {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {}",
            if result.passed { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Replicated tail estimation for `P(sup_{f ∈ F_σ} |S_n(f)| ≥ v)`.
//!
//! Replication `r` of an experiment draws from the stream
//! `(master seed, experiment, r)` and contributes integer hit counts, which
//! are summed. The result is therefore independent of how rayon schedules
//! the work.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bounds::{
    self, bennett_bound, threshold_u, threshold_u_bar, BoundParams, DenseClass,
};
use crate::classes::GridClassSpec;
use crate::empirical::{increment_sup, modulus_statistic, sample_uniform};
use crate::error::{Error, Result};
use crate::rng::{experiment, StreamSeed};

/// Confidence level of the intervals attached to every [`TailEstimate`].
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// Largest multinomial state space [`exact_tail_small`] will enumerate.
pub const EXACT_STATE_LIMIT: f64 = 1e7;

const BATCH: u64 = 256;

/// Runs `reps` replications in parallel batches. `score` adds the
/// replication's contribution into a counter vector of length `width`.
pub(crate) fn replicate_counts<F>(reps: u64, width: usize, score: F) -> Result<Vec<u64>>
where
    F: Fn(u64, &mut [u64]) -> Result<()> + Sync,
{
    if reps == 0 {
        return Err(Error::domain("replication count must be >= 1"));
    }
    let batches = reps.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut local = vec![0u64; width];
            for r in b * BATCH..((b + 1) * BATCH).min(reps) {
                score(r, &mut local)?;
            }
            Ok(local)
        })
        .try_reduce(
            || vec![0u64; width],
            |mut acc, part| {
                acc.iter_mut().zip(part).for_each(|(a, p)| *a += p);
                Ok(acc)
            },
        )
}

/// Number of replications for which `event(r)` holds.
pub(crate) fn replicate_hits<F>(reps: u64, event: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    let counts = replicate_counts(reps, 1, |r, acc| {
        if event(r)? {
            acc[0] += 1;
        }
        Ok(())
    })?;
    Ok(counts[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub v: f64,
    pub hits: u64,
    pub reps: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TailEstimate {
    /// Estimate with a 99% Wilson interval.
    pub fn new(v: f64, hits: u64, reps: u64) -> Result<Self> {
        Self::with_confidence(v, hits, reps, DEFAULT_CONFIDENCE)
    }

    pub fn with_confidence(v: f64, hits: u64, reps: u64, confidence: f64) -> Result<Self> {
        let (ci_low, ci_high) = wilson_interval(hits, reps, confidence)?;
        Ok(Self {
            v,
            hits,
            reps,
            p_hat: hits as f64 / reps as f64,
            ci_low,
            ci_high,
        })
    }

    /// Half the interval width.
    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, reps: u64, confidence: f64) -> Result<(f64, f64)> {
    if reps == 0 {
        return Err(Error::domain("replication count must be >= 1"));
    }
    if hits > reps {
        return Err(Error::domain(format!("hits {hits} exceed replications {reps}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let z = standard_normal_quantile(0.5 + confidence / 2.0);
    let n = reps as f64;
    let p = hits as f64 / n;
    let z2n = z * z / n;
    let center = (p + z2n / 2.0) / (1.0 + z2n);
    let half = z / (1.0 + z2n) * (p * (1.0 - p) / n + z2n / (4.0 * n)).sqrt();
    let low = if hits == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let high = if hits == reps {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    Ok((low, high))
}

fn standard_normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// A tail level, either numeric or a named threshold resolved per config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelSpec {
    Value(f64),
    Rule(LevelRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelRule {
    #[serde(rename = "u")]
    U,
    #[serde(rename = "u_bar")]
    UBar,
    #[serde(rename = "hat_u")]
    HatU,
    #[serde(rename = "2*sqrt(n)*sigma2")]
    TwoSqrtNSigma2,
}

impl fmt::Display for LevelRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelRule::U => "u",
            LevelRule::UBar => "u_bar",
            LevelRule::HatU => "hat_u",
            LevelRule::TwoSqrtNSigma2 => "2*sqrt(n)*sigma2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: u64,
    pub sigma2: f64,
    pub levels: Vec<LevelSpec>,
    pub reps: u64,
    #[serde(rename = "seed")]
    pub master_seed: u64,
    #[serde(rename = "constants", default)]
    pub params: BoundParams,
    #[serde(flatten, default)]
    pub dims: DenseClass,
}

/// A level after rule resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedLevel {
    pub spec: LevelSpec,
    pub v: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        bounds::check_n(self.n)?;
        bounds::check_sigma2(self.sigma2)?;
        self.params.validate()?;
        self.dims.validate()?;
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::Config("levels must not be empty".into()));
        }
        if usize::try_from(self.n).is_err() {
            return Err(Error::Config("n does not fit in memory".into()));
        }
        Ok(())
    }

    pub fn resolve_level(&self, spec: &LevelSpec) -> Result<f64> {
        let (n, s2) = (self.n, self.sigma2);
        let v = match spec {
            LevelSpec::Value(v) => *v,
            LevelSpec::Rule(LevelRule::U) => threshold_u(n, s2, &self.dims, &self.params)?,
            LevelSpec::Rule(LevelRule::UBar) => threshold_u_bar(s2, &self.dims, &self.params)?,
            LevelSpec::Rule(LevelRule::HatU) => bounds::lower_bound_level(n, s2, &self.params)?,
            LevelSpec::Rule(LevelRule::TwoSqrtNSigma2) => 2.0 * (n as f64).sqrt() * s2,
        };
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Config(format!("level {spec:?} resolves to {v}")));
        }
        Ok(v)
    }

    /// Resolved levels sorted ascending; a level equal to an earlier one is
    /// dropped so the result is strictly increasing.
    pub fn resolved_levels(&self) -> Result<Vec<ResolvedLevel>> {
        let mut out = self
            .levels
            .iter()
            .map(|spec| {
                Ok(ResolvedLevel {
                    spec: spec.clone(),
                    v: self.resolve_level(spec)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| a.v.total_cmp(&b.v));
        out.dedup_by(|b, a| a.v == b.v);
        Ok(out)
    }
}

/// Estimates `P(sup |S_n(f)| ≥ v)` at every configured level. Each
/// replication computes the supremum once and scores all levels against it,
/// so the estimates are nonincreasing in `v`.
pub fn estimate_tail(config: &ExperimentConfig) -> Result<Vec<TailEstimate>> {
    config.validate()?;
    let levels: Vec<f64> = config.resolved_levels()?.iter().map(|l| l.v).collect();
    let spec = GridClassSpec::new(config.sigma2, true)?;
    let base = StreamSeed::new(config.master_seed, experiment::TAIL_ESTIMATE, 0);
    let n = config.n as usize;
    let hits = replicate_counts(config.reps, levels.len(), |r, acc| {
        let path = sample_uniform(n, base.replication(r))?;
        let sup = increment_sup(path.points(), &spec).value;
        for (slot, &v) in acc.iter_mut().zip(&levels) {
            if sup >= v {
                *slot += 1;
            }
        }
        Ok(())
    })?;
    levels
        .iter()
        .zip(hits)
        .map(|(&v, h)| TailEstimate::new(v, h, config.reps))
        .collect()
}

/// One-sided tails `P(S_n(f_1) ≥ v)` of a single centered member. The cell
/// count of member 1 is drawn directly as Binomial(n, σ²).
pub fn estimate_member_tail(
    n: u64,
    sigma2: f64,
    levels: &[f64],
    reps: u64,
    master_seed: u64,
) -> Result<Vec<TailEstimate>> {
    bounds::check_sigma2(sigma2)?;
    if n == 0 {
        return Err(Error::domain("sample size n must be >= 1"));
    }
    let binomial = Binomial::new(n, sigma2)
        .map_err(|e| Error::domain(format!("binomial({n}, {sigma2}): {e}")))?;
    let root_n = (n as f64).sqrt();
    let expected = n as f64 * sigma2;
    let base = StreamSeed::new(master_seed, experiment::MEMBER_TAIL, 0);
    let hits = replicate_counts(reps, levels.len(), |r, acc| {
        let mut rng = base.replication(r).rng();
        let count = binomial.sample(&mut rng) as f64;
        let s = (count - expected) / root_n;
        for (slot, &v) in acc.iter_mut().zip(levels) {
            if s >= v {
                *slot += 1;
            }
        }
        Ok(())
    })?;
    levels
        .iter()
        .zip(hits)
        .map(|(&v, h)| TailEstimate::new(v, h, reps))
        .collect()
}

fn ratio_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// `C(n + k, k)` in floating point.
fn state_count(n: u64, k: u64) -> f64 {
    let (n, k) = (n as f64, k as f64);
    (statrs::function::gamma::ln_gamma(n + k + 1.0)
        - statrs::function::gamma::ln_gamma(n + 1.0)
        - statrs::function::gamma::ln_gamma(k + 1.0))
    .exp()
}

/// Exact `P(max_j |N_j - nσ²| / √n ≥ v)` as a rational number.
///
/// Enumerates the multinomial cell counts `(N_1, ..., N_k)` with the
/// leftover count taking the rest, in lexicographic order. The float inputs
/// are converted to rationals exactly, so the only approximation is the
/// final conversion in [`exact_tail_small`].
pub fn exact_tail_small_rational(n: u64, sigma2: f64, v: f64) -> Result<BigRational> {
    let spec = GridClassSpec::new(sigma2, true)?;
    if n == 0 {
        return Err(Error::domain("sample size n must be >= 1"));
    }
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::domain(format!("level v must be finite and >= 0, got {v}")));
    }
    let k = spec.k();
    let states = if spec.k_f64() > 1e9 {
        f64::INFINITY
    } else {
        state_count(n, k)
    };
    if states > EXACT_STATE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            states,
            limit: EXACT_STATE_LIMIT,
        });
    }

    let p = ratio_from_f64(sigma2);
    let q = BigRational::one() - p.clone() * BigRational::from_integer(BigInt::from(k));
    let n_rat = BigRational::from_integer(BigInt::from(n));
    let mean = &n_rat * &p;
    let v_rat = ratio_from_f64(v);
    let threshold = &v_rat * &v_rat * &n_rat;
    // hit[c]: a cell holding c points reaches the level on its own
    let hit: Vec<bool> = (0..=n)
        .map(|c| {
            let d = BigRational::from_integer(BigInt::from(c)) - &mean;
            d.clone() * d >= threshold
        })
        .collect();

    let mut factorial = vec![BigUint::one()];
    for i in 1..=n {
        let next = &factorial[(i - 1) as usize] * BigUint::from(i);
        factorial.push(next);
    }
    let leftover_possible = !q.is_zero();

    // Sum of multinomial coefficients of hitting states, per leftover count.
    let mut weight = vec![BigUint::zero(); (n + 1) as usize];
    let k = k as usize;
    let mut counts = vec![0u64; k];
    let mut total = 0u64;
    loop {
        let leftover = n - total;
        if (leftover == 0 || leftover_possible) && counts.iter().any(|&c| hit[c as usize]) {
            let mut denom = factorial[leftover as usize].clone();
            for &c in &counts {
                if c > 1 {
                    denom *= &factorial[c as usize];
                }
            }
            weight[leftover as usize] += &factorial[n as usize] / denom;
        }
        // odometer step over compositions with total <= n
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(combine(&weight, &p, &q, n));
            }
            i -= 1;
            counts[i] += 1;
            total += 1;
            if total <= n {
                break;
            }
            total -= counts[i];
            counts[i] = 0;
        }
    }
}

fn combine(weight: &[BigUint], p: &BigRational, q: &BigRational, n: u64) -> BigRational {
    let mut acc = BigRational::zero();
    for (leftover, w) in weight.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let leftover = leftover as u64;
        let term = BigRational::from_integer(BigInt::from(w.clone()))
            * pow(p, n - leftover)
            * pow(q, leftover);
        acc += term;
    }
    acc
}

fn pow(base: &BigRational, exp: u64) -> BigRational {
    num_traits::pow(base.clone(), exp as usize)
}

/// [`exact_tail_small_rational`] rounded to the nearest `f64`.
pub fn exact_tail_small(n: u64, sigma2: f64, v: f64) -> Result<f64> {
    let exact = exact_tail_small_rational(n, sigma2, v)?;
    exact
        .to_f64()
        .ok_or_else(|| Error::domain("probability not representable"))
}

/// What an estimate's event is about; decides which bounds can dominate it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateTarget {
    /// `P(sup_{f ∈ F} |S_n(f)| ≥ v)`
    ClassSupremum,
    /// `P(S_n(f) ≥ v)` for one member
    SingleMember,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub applicable: bool,
    /// Bound clamped to `[0, 1]`; `None` when it cannot be evaluated.
    pub value: Option<f64>,
    /// Why the bound does not apply.
    pub reason: Option<String>,
}

impl BoundCheck {
    fn from_result(result: Result<f64>) -> Self {
        match result {
            Ok(b) => Self {
                applicable: true,
                value: Some(b.min(1.0)),
                reason: None,
            },
            Err(e) => Self {
                applicable: false,
                value: None,
                reason: Some(e.to_string()),
            },
        }
    }
}

/// Empirical tail against the tightest applicable bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dominance {
    /// The whole confidence interval lies at or below the bound.
    Dominated,
    /// The bound lies inside the interval; too few replications to certify.
    InsufficientResolution,
    /// The interval lies entirely above the bound.
    Violated,
    NotApplicable,
}

impl Dominance {
    pub fn classify(estimate: &TailEstimate, bound: Option<f64>) -> Self {
        match bound {
            None => Dominance::NotApplicable,
            Some(b) if estimate.ci_high <= b => Dominance::Dominated,
            Some(b) if estimate.ci_low > b => Dominance::Violated,
            Some(_) => Dominance::InsufficientResolution,
        }
    }
}

impl fmt::Display for Dominance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dominance::Dominated => "dominated",
            Dominance::InsufficientResolution => "insufficient_resolution",
            Dominance::Violated => "violated",
            Dominance::NotApplicable => "n/a",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub estimate: TailEstimate,
    pub theorem1: BoundCheck,
    pub extension: BoundCheck,
    pub bennett: BoundCheck,
    pub dominance: Dominance,
}

pub fn compare_with_bounds(
    estimates: &[TailEstimate],
    n: u64,
    sigma2: f64,
    dims: &DenseClass,
    params: &BoundParams,
    target: EstimateTarget,
) -> Vec<ComparisonRow> {
    estimates
        .iter()
        .map(|est| {
            let v = est.v;
            let theorem1 =
                BoundCheck::from_result(bounds::upper_bound_theorem1(n, sigma2, v, dims, params));
            let extension = BoundCheck::from_result(bounds::upper_bound_extension(
                n, sigma2, v, dims, params,
            ));
            let mut bennett = BoundCheck::from_result(bennett_bound(n, sigma2, v));
            if target == EstimateTarget::ClassSupremum && bennett.applicable {
                bennett.applicable = false;
                bennett.reason =
                    Some("single-member bound; the estimate is a class supremum".into());
            }
            let tightest = [&theorem1, &extension, &bennett]
                .iter()
                .filter(|b| b.applicable)
                .filter_map(|b| b.value)
                .reduce(f64::min);
            ComparisonRow {
                estimate: *est,
                dominance: Dominance::classify(est, tightest),
                theorem1,
                extension,
                bennett,
            }
        })
        .collect()
}

/// Replicated modulus of continuity of `G_n`. Returns one vector per entry
/// of `deltas`, holding the statistic of replications `0..reps` in order.
/// Every delta is evaluated on the same paths.
pub fn modulus_samples(
    n: usize,
    deltas: &[f64],
    reps: u64,
    master_seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if reps == 0 {
        return Err(Error::domain("replication count must be >= 1"));
    }
    let base = StreamSeed::new(master_seed, experiment::MODULUS, 0);
    let per_rep = (0..reps)
        .into_par_iter()
        .map(|r| {
            let path = sample_uniform(n, base.replication(r))?;
            deltas
                .iter()
                .map(|&d| modulus_statistic(&path, d))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..deltas.len())
        .map(|i| per_rep.iter().map(|row| row[i]).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: u64, sigma2: f64, levels: Vec<LevelSpec>, reps: u64) -> ExperimentConfig {
        ExperimentConfig {
            n,
            sigma2,
            levels,
            reps,
            master_seed: 17,
            params: BoundParams::default(),
            dims: DenseClass::default(),
        }
    }

    #[test]
    fn wilson_boundaries() {
        assert_eq!(wilson_interval(10, 10, 0.99).unwrap().1, 1.0);
        assert_eq!(wilson_interval(0, 10, 0.99).unwrap().0, 0.0);
        let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
        assert!(lo < 0.5 && 0.5 < hi);
        // closed form: z = 1.959964, half width = z/(1+z²/n) sqrt(1/400 + z²/(4n²))
        let z = 1.959_963_984_540_054f64;
        let n = 100.0;
        let half = z / (1.0 + z * z / n) * (0.25 / n + z * z / (4.0 * n * n)).sqrt();
        assert!(((hi - lo) - 2.0 * half).abs() < 1e-12);
        assert!((hi - lo - 0.19).abs() < 0.01);
        assert!(wilson_interval(11, 10, 0.99).is_err());
        assert!(wilson_interval(0, 0, 0.99).is_err());
        assert!(wilson_interval(1, 10, 1.0).is_err());
    }

    #[test]
    fn exact_binomial_case() {
        let r = exact_tail_small_rational(4, 0.5, 1.0).unwrap();
        assert_eq!(r, BigRational::new(1.into(), 8.into()));
        assert_eq!(exact_tail_small(4, 0.5, 1.0).unwrap(), 0.125);
    }

    #[test]
    fn exact_extremes() {
        assert_eq!(exact_tail_small(3, 0.3, 0.0).unwrap(), 1.0);
        let v = (5.0 + 5.0 * 0.3) / 5f64.sqrt() * 1.01;
        assert_eq!(exact_tail_small(5, 0.3, v).unwrap(), 0.0);
        assert!(matches!(
            exact_tail_small(1000, 0.001, 0.1),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn exact_matches_brute_force_with_leftover() {
        // σ² = 0.375 → k = 2, leftover 0.25. Brute-force over all 3^n cell
        // assignments of n labelled points.
        let (n, s2) = (5u32, 0.375);
        let masses = [s2, s2, 1.0 - 2.0 * s2];
        for v in [0.0, 0.3, 0.6, 0.9, 1.2] {
            let mut p = 0.0;
            for code in 0..3u32.pow(n) {
                let mut c = [0u32; 3];
                let mut x = code;
                let mut prob = 1.0;
                for _ in 0..n {
                    c[(x % 3) as usize] += 1;
                    prob *= masses[(x % 3) as usize];
                    x /= 3;
                }
                let dev = |m: u32| (m as f64 - n as f64 * s2).abs() / (n as f64).sqrt();
                if dev(c[0]).max(dev(c[1])) >= v {
                    p += prob;
                }
            }
            let exact = exact_tail_small(n as u64, s2, v).unwrap();
            assert!((exact - p).abs() < 1e-14, "v={v}: {exact} vs {p}");
        }
    }

    #[test]
    fn estimates_are_monotone_and_reproducible() {
        let cfg = config(
            20,
            0.1,
            vec![
                LevelSpec::Value(0.0),
                LevelSpec::Value(0.5),
                LevelSpec::Rule(LevelRule::HatU),
                LevelSpec::Value(1.5),
            ],
            2000,
        );
        let a = estimate_tail(&cfg).unwrap();
        assert_eq!(a, estimate_tail(&cfg).unwrap());
        assert_eq!(a[0].p_hat, 1.0);
        assert!(a.windows(2).all(|w| w[0].v < w[1].v && w[0].hits >= w[1].hits));
    }

    #[test]
    fn schedule_does_not_change_estimates() {
        let cfg = config(30, 0.2, vec![LevelSpec::Value(0.4), LevelSpec::Value(0.9)], 3000);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_tail(&cfg).unwrap())
        };
        assert_eq!(run(1), run(5));
    }

    #[test]
    fn levels_sorted_and_deduplicated() {
        let cfg = config(
            100,
            0.25,
            vec![
                LevelSpec::Value(3.0),
                LevelSpec::Rule(LevelRule::TwoSqrtNSigma2),
                LevelSpec::Value(5.0),
                LevelSpec::Value(0.5),
            ],
            10,
        );
        let v: Vec<f64> = cfg.resolved_levels().unwrap().iter().map(|l| l.v).collect();
        assert_eq!(v, vec![0.5, 3.0, 5.0]);
    }

    #[test]
    fn level_rules_parse_from_json() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"n": 10, "sigma2": 0.5, "levels": [0.1, "u", "u_bar", "hat_u", "2*sqrt(n)*sigma2"],
                "reps": 5, "seed": 1, "constants": {"C5": 3}}"#,
        )
        .unwrap();
        assert_eq!(cfg.levels.len(), 5);
        assert_eq!(cfg.params.c5, 3.0);
        assert_eq!(cfg.dims, DenseClass::default());
        let u = cfg.resolve_level(&LevelSpec::Rule(LevelRule::U)).unwrap();
        assert_eq!(u, threshold_u(10, 0.5, &cfg.dims, &cfg.params).unwrap());
        assert!(serde_json::from_str::<ExperimentConfig>(
            r#"{"n": 10, "sigma2": 0.5, "levels": ["w"], "reps": 5, "seed": 1}"#
        )
        .is_err());
    }

    #[test]
    fn comparison_marks_inapplicable_bounds() {
        let est = TailEstimate::new(1e-3, 900, 1000).unwrap();
        let rows = compare_with_bounds(
            &[est],
            1000,
            0.01,
            &DenseClass::default(),
            &BoundParams::default(),
            EstimateTarget::ClassSupremum,
        );
        let row = &rows[0];
        assert!(!row.theorem1.applicable && row.theorem1.reason.is_some());
        assert!(!row.extension.applicable);
        assert!(!row.bennett.applicable && row.bennett.value.is_some());
        assert_eq!(row.dominance, Dominance::NotApplicable);
        assert_eq!(row.estimate.hits, 900);
    }

    #[test]
    fn dominance_states() {
        let e = TailEstimate::new(1.0, 0, 100_000).unwrap();
        assert_eq!(Dominance::classify(&e, Some(1e-3)), Dominance::Dominated);
        assert_eq!(
            Dominance::classify(&e, Some(1e-9)),
            Dominance::InsufficientResolution
        );
        let e = TailEstimate::new(1.0, 500, 1000).unwrap();
        assert_eq!(Dominance::classify(&e, Some(0.1)), Dominance::Violated);
    }

    #[test]
    fn member_tail_against_exact_binomial() {
        // P(S ≥ 1) for n = 4, σ² = 0.5 is P(N = 4) = 1/16.
        let est = estimate_member_tail(4, 0.5, &[1.0], 50_000, 3).unwrap();
        let wide = wilson_interval(est[0].hits, est[0].reps, 0.999).unwrap();
        assert!(wide.0 <= 0.0625 && 0.0625 <= wide.1, "{:?}", est[0]);
    }
}

//! Poisson processes on `[0, 1]`, the Poisson lower-bound construction for
//! the grid class, and the coupling of a Poisson process with a uniform
//! sample through a Poisson stopping index.
//!
//! For a Poisson process with mean measure `n·dt` the cell counts
//! `V̄_j = Z(jσ²) - Z((j-1)σ²)` are i.i.d. Poisson(nσ²). At the integer level
//! `m* ≈ √n û(σ, n)` with `û(σ, n) = 3 log n / (4√n log(log n / (nσ²)))`,
//!
//! ```text
//! P(max_j V̄_j ≥ m*) ≥ 1 - (1 - p)^k ≥ 1 - exp(-T),
//! p = (nσ²)^{m*} e^{-nσ²} / m*!  ≥  (nσ²/m*)^{m*} e^{-nσ²},
//! T = σ^{-2} (nσ²/m*)^{m*} e^{-nσ²}.
//! ```
//!
//! All pmf and `T` arithmetic is done in log space.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::bounds::{check_sigma2, lower_bound_level, BoundParams};
use crate::classes::{GridClassSpec, MAX_MATERIALIZED_CELLS};
use crate::empirical::{increment_sup, SamplePath};
use crate::error::{Error, Result};
use crate::montecarlo::{replicate_counts, replicate_hits, TailEstimate};
use crate::rng::{experiment, StreamSeed};

/// Intensity of the coupled Poisson process relative to `n`.
pub const COUPLING_RATE_FACTOR: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonPath {
    /// Sorted points in `[0, 1]`; possibly empty.
    pub points: Vec<f64>,
    /// Expected number of points.
    pub rate: f64,
    pub seed: Option<StreamSeed>,
}

fn poisson_draw<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<u64> {
    let dist = Poisson::new(rate)
        .map_err(|e| Error::domain(format!("invalid Poisson rate {rate}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Draws `N ~ Poisson(rate)` and then `N` sorted uniforms.
pub fn sample_poisson_process(rate: f64, seed: impl Into<StreamSeed>) -> Result<PoissonPath> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!("rate must be finite and > 0, got {rate}")));
    }
    let seed = seed.into();
    let mut rng = seed.rng();
    let count = poisson_draw(rate, &mut rng)?;
    let mut points: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
    points.sort_unstable_by(f64::total_cmp);
    Ok(PoissonPath {
        points,
        rate,
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellCounts {
    /// Count in cell `j` at index `j - 1`.
    pub counts: Vec<u64>,
    /// Points in `[kσ², 1]`.
    pub leftover: u64,
}

impl CellCounts {
    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Counts per grid cell of any sorted or unsorted set of points in `[0, 1]`.
pub fn cell_counts_of(points: &[f64], sigma2: f64) -> Result<CellCounts> {
    let spec = GridClassSpec::new(sigma2, false)?;
    if spec.k_f64() > MAX_MATERIALIZED_CELLS as f64 {
        return Err(Error::domain(format!(
            "{} cells is too many to materialize",
            spec.k_f64()
        )));
    }
    let mut counts = vec![0u64; spec.k() as usize];
    let mut leftover = 0;
    for &x in points {
        match spec.cell_key(x) {
            Some(q) => counts[q as usize] += 1,
            None => leftover += 1,
        }
    }
    Ok(CellCounts { counts, leftover })
}

pub fn cell_counts(path: &PoissonPath, sigma2: f64) -> Result<CellCounts> {
    cell_counts_of(&path.points, sigma2)
}

fn check_construction_range(rate: f64, sigma2: f64) -> Result<()> {
    if !(rate > 1.0 && rate.is_finite()) {
        return Err(Error::domain(format!("rate n must exceed 1, got {rate}")));
    }
    check_sigma2(sigma2)?;
    let limit = rate.ln() / (7.0 * rate);
    if sigma2 > limit {
        return Err(Error::Condition {
            bound: "Poisson lower-bound construction",
            condition: format!("sigma2 = {sigma2} exceeds log n / (7n) = {limit}"),
        });
    }
    Ok(())
}

/// `û(σ, n) = 3 log n / (4 √n log(log n / (nσ²)))` for `σ² ≤ log n / (7n)`.
pub fn hat_u_poisson(n: f64, sigma2: f64) -> Result<f64> {
    check_construction_range(n, sigma2)?;
    let ln_n = n.ln();
    let log_z = ln_n.ln() - ln_n - sigma2.ln();
    Ok(0.75 / n.sqrt() * ln_n / log_z)
}

/// `max(1, round(√n û(σ, n)))`, halves rounded up.
pub fn poisson_level_count(n: f64, sigma2: f64) -> Result<u64> {
    let target = n.sqrt() * hat_u_poisson(n, sigma2)?;
    Ok(round_level(target))
}

pub(crate) fn round_level(target: f64) -> u64 {
    ((target + 0.5).floor() as u64).max(1)
}

/// `log P(X = m)` for `X ~ Poisson(lambda)`.
pub fn ln_poisson_pmf(lambda: f64, m: u64) -> f64 {
    let m_f = m as f64;
    if lambda == 0.0 {
        return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    m_f * lambda.ln() - lambda - ln_gamma(m_f + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonLowerBound {
    pub hat_u: f64,
    pub m_star: u64,
    pub log_t: f64,
    /// `1 - exp(-T)`.
    pub probability: f64,
}

/// `1 - exp(-T)`, a lower bound for `P(max_j V̄_j ≥ m*)` under a Poisson
/// process of rate `n`.
pub fn analytic_lower_bound(n: f64, sigma2: f64) -> Result<PoissonLowerBound> {
    let hat_u = hat_u_poisson(n, sigma2)?;
    let m_star = round_level(n.sqrt() * hat_u);
    let n_s2 = n * sigma2;
    let m = m_star as f64;
    let log_t = -sigma2.ln() + m * (n_s2 / m).ln() - n_s2;
    let t = log_t.exp();
    Ok(PoissonLowerBound {
        hat_u,
        m_star,
        log_t,
        probability: -(-t).exp_m1(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientCondition {
    pub holds: bool,
    /// `log LHS - log RHS`.
    pub log_margin: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
}

/// Checks `(nσ²/m*)^{m*} ≥ σ² e^{nσ²} log(1/δ)`, which forces `T ≥ log(1/δ)`
/// and hence `1 - exp(-T) ≥ 1 - δ`.
pub fn check_inequality_24(n: f64, sigma2: f64, delta: f64) -> Result<SufficientCondition> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let m = poisson_level_count(n, sigma2)? as f64;
    let n_s2 = n * sigma2;
    let log_lhs = m * (n_s2 / m).ln();
    let log_rhs = sigma2.ln() + n_s2 + (1.0 / delta).ln().ln();
    let log_margin = log_lhs - log_rhs;
    Ok(SufficientCondition {
        holds: log_margin >= 0.0,
        log_margin,
        log_lhs,
        log_rhs,
    })
}

/// A uniform sample and a Poisson process built from a prefix of the same
/// uniform stream.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPair {
    pub uniforms: SamplePath,
    /// Poisson(0.99 n) stopping index.
    pub eta: u64,
    /// The first `eta` uniforms of the stream, sorted.
    pub poisson_prefix: PoissonPath,
}

impl CoupledPair {
    pub fn eta_within_n(&self) -> bool {
        self.eta <= self.uniforms.n() as u64
    }

    /// True when every grid cell and the leftover interval hold at most as
    /// many prefix points as uniform points.
    pub fn interval_dominance(&self, sigma2: f64) -> Result<bool> {
        let poisson = cell_counts(&self.poisson_prefix, sigma2)?;
        let uniform = cell_counts_of(self.uniforms.points(), sigma2)?;
        Ok(poisson.leftover <= uniform.leftover
            && poisson
                .counts
                .iter()
                .zip(&uniform.counts)
                .all(|(p, u)| p <= u))
    }
}

/// Draws `η ~ Poisson(0.99 n)` and `max(n, η)` uniforms from one stream; the
/// first `n` form the sample and the first `η` the Poisson process.
pub fn sample_coupled(n: usize, seed: impl Into<StreamSeed>) -> Result<CoupledPair> {
    if n == 0 {
        return Err(Error::domain("sample size n must be >= 1"));
    }
    let seed = seed.into();
    let mut rng = seed.rng();
    let rate = COUPLING_RATE_FACTOR * n as f64;
    let eta = poisson_draw(rate, &mut rng)?;
    let total = n.max(eta as usize);
    let stream: Vec<f64> = (0..total).map(|_| rng.random::<f64>()).collect();

    let mut uniforms = stream[..n].to_vec();
    uniforms.sort_unstable_by(f64::total_cmp);
    let mut prefix = stream[..eta as usize].to_vec();
    prefix.sort_unstable_by(f64::total_cmp);
    Ok(CoupledPair {
        uniforms: SamplePath::from_sorted_unchecked(uniforms, Some(seed)),
        eta,
        poisson_prefix: PoissonPath {
            points: prefix,
            rate,
            seed: Some(seed),
        },
    })
}

/// Whether the maximal cell count of a rate-`n` Poisson process reaches
/// `level`, sampled through its independent Poisson(nσ²) cell increments and
/// stopping at the first cell that reaches the level.
fn poisson_max_reaches<R: Rng + ?Sized>(
    cell_mean: f64,
    cells: u64,
    level: u64,
    rng: &mut R,
) -> Result<bool> {
    let dist = Poisson::new(cell_mean)
        .map_err(|e| Error::domain(format!("invalid cell mean {cell_mean}: {e}")))?;
    for _ in 0..cells {
        if dist.sample(rng) as u64 >= level {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Above `SPARSE_CELL_FACTOR · n` cells, [`poisson_tail_experiment`] samples
/// whole paths and counts only occupied cells.
const SPARSE_CELL_FACTOR: f64 = 64.0;

/// Largest number of sorted points sharing one grid cell.
fn max_cell_count(sorted: &[f64], spec: &GridClassSpec) -> u64 {
    let mut best = 0;
    let mut run = 0;
    let mut current = None;
    for &x in sorted {
        let key = spec.cell_key(x);
        if key.is_none() {
            break;
        }
        if key == current {
            run += 1;
        } else {
            current = key;
            run = 1;
        }
        best = best.max(run);
    }
    best
}

/// Monte Carlo estimate of `P(max_j V̄_j ≥ m*)` for a rate-`n` Poisson
/// process, reported at level `m*`. Samples independent Poisson(nσ²) cell
/// counts when the grid is small and whole paths when it is huge.
pub fn poisson_tail_experiment(
    n: f64,
    sigma2: f64,
    reps: u64,
    master_seed: u64,
) -> Result<TailEstimate> {
    let m_star = poisson_level_count(n, sigma2)?;
    let spec = GridClassSpec::new(sigma2, false)?;
    let cell_mean = n * sigma2;
    let base = StreamSeed::new(master_seed, experiment::POISSON_LOWER_BOUND, 0);
    let hits = if spec.k_f64() <= SPARSE_CELL_FACTOR * n {
        let cells = spec.k();
        replicate_hits(reps, |r| {
            let mut rng = base.replication(r).rng();
            poisson_max_reaches(cell_mean, cells, m_star, &mut rng)
        })?
    } else {
        replicate_hits(reps, |r| {
            let path = sample_poisson_process(n, base.replication(r))?;
            Ok(max_cell_count(&path.points, &spec) >= m_star)
        })?
    };
    TailEstimate::new(m_star as f64, hits, reps)
}

/// Monte Carlo estimate of `P(sup_{f ∈ F_σ} |S_n(f)| ≥ û(σ))` for a uniform
/// sample of size `n`, with `û` the regime's lower-bound level.
pub fn lower_bound_experiment(
    n: u64,
    sigma2: f64,
    reps: u64,
    master_seed: u64,
    params: &BoundParams,
) -> Result<TailEstimate> {
    let level = lower_bound_level(n, sigma2, params)?;
    let spec = GridClassSpec::new(sigma2, true)?;
    let base = StreamSeed::new(master_seed, experiment::LOWER_BOUND, 0);
    let size = usize::try_from(n).map_err(|_| Error::domain("n too large"))?;
    let hits = replicate_hits(reps, |r| {
        let path = crate::empirical::sample_uniform(size, base.replication(r))?;
        Ok(increment_sup(path.points(), &spec).value >= level)
    })?;
    TailEstimate::new(level, hits, reps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingSummary {
    pub reps: u64,
    /// Replications with `η ≤ n`.
    pub eta_within_n: u64,
    /// Replications with `η ≤ n` on which interval dominance failed for at
    /// least one tested `σ²`.
    pub dominance_failures: u64,
}

impl CouplingSummary {
    pub fn eta_fraction(&self) -> f64 {
        self.eta_within_n as f64 / self.reps as f64
    }
}

/// Replicates [`sample_coupled`] and checks interval dominance for every
/// `σ²` in `sigma2s` on each replication with `η ≤ n`.
pub fn coupling_experiment(
    n: usize,
    sigma2s: &[f64],
    reps: u64,
    master_seed: u64,
) -> Result<CouplingSummary> {
    for &s2 in sigma2s {
        GridClassSpec::new(s2, false)?;
    }
    let base = StreamSeed::new(master_seed, experiment::COUPLING, 0);
    let counts = replicate_counts(reps, 2, |r, acc| {
        let pair = sample_coupled(n, base.replication(r))?;
        if pair.eta_within_n() {
            acc[0] += 1;
            for &s2 in sigma2s {
                if !pair.interval_dominance(s2)? {
                    acc[1] += 1;
                    break;
                }
            }
        }
        Ok(())
    })?;
    Ok(CouplingSummary {
        reps,
        eta_within_n: counts[0],
        dominance_failures: counts[1],
    })
}

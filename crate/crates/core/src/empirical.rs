//! Uniform samples, the empirical distribution function and the supremum of
//! the grid class.
//!
//! `F_n(x)` counts sample points strictly below `x`; `G_n(x) = √n (F_n(x) - x)`.
//! For the centered grid class `S_n(f_j) = (N_j - nσ²)/√n`, where `N_j` is the
//! count in cell `j`, so the class supremum is the largest absolute increment
//! of `G_n` over consecutive grid points `jσ²`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classes::{GridClassSpec, MAX_MATERIALIZED_CELLS};
use crate::error::{Error, Result};
use crate::rng::StreamSeed;

/// A sorted sample of points in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    points: Vec<f64>,
    seed: Option<StreamSeed>,
}

impl SamplePath {
    /// Wraps an arbitrary sample; points are sorted here.
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("sample must contain at least one point"));
        }
        if let Some(bad) = points.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::domain(format!("sample point {bad} outside [0, 1]")));
        }
        points.sort_by(f64::total_cmp);
        Ok(Self { points, seed: None })
    }

    pub(crate) fn from_sorted_unchecked(points: Vec<f64>, seed: Option<StreamSeed>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] <= w[1]));
        Self { points, seed }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn seed(&self) -> Option<StreamSeed> {
        self.seed
    }

    /// Number of points strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        self.points.partition_point(|&p| p < x)
    }

    pub fn empirical_cdf(&self, x: f64) -> Result<f64> {
        check_unit_arg(x)?;
        Ok(self.count_below(x) as f64 / self.n() as f64)
    }

    pub fn normalized_process(&self, x: f64) -> Result<f64> {
        check_unit_arg(x)?;
        Ok(self.g(x))
    }

    /// `G_n(x)` without the argument check; `G_n(0) = 0`.
    fn g(&self, x: f64) -> f64 {
        let n = self.n() as f64;
        (self.count_below(x) as f64 - n * x) / n.sqrt()
    }
}

fn check_unit_arg(x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::domain(format!("argument x must lie in (0, 1], got {x}")));
    }
    Ok(())
}

/// Draws `n` i.i.d. uniform points from the stream addressed by `seed`.
pub fn sample_uniform(n: usize, seed: impl Into<StreamSeed>) -> Result<SamplePath> {
    if n == 0 {
        return Err(Error::domain("sample size n must be >= 1"));
    }
    let seed = seed.into();
    let mut rng = seed.rng();
    let mut points: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    points.sort_unstable_by(f64::total_cmp);
    Ok(SamplePath::from_sorted_unchecked(points, Some(seed)))
}

/// Largest grid increment and the lowest one-based cell attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementSup {
    pub value: f64,
    /// Saturates at `u64::MAX` for classes with more than 2^64 cells.
    pub cell: u64,
}

/// `max_j |G_n(jσ²) - G_n((j-1)σ²)| = max_j |N_j - nσ²| / √n`.
///
/// Works from the occupied cells only, so the cost is `O(n)` on a sorted
/// path whatever the number of cells.
pub fn sup_via_increments(path: &SamplePath, sigma2: f64) -> Result<IncrementSup> {
    let spec = GridClassSpec::new(sigma2, true)?;
    Ok(increment_sup(path.points(), &spec))
}

/// Same as [`sup_via_increments`] for a prepared class and sorted points.
pub(crate) fn increment_sup(sorted: &[f64], spec: &GridClassSpec) -> IncrementSup {
    let n = sorted.len() as f64;
    let expected = n * spec.sigma2();
    // (deviation, zero-based cell key)
    let mut best: Option<(f64, f64)> = None;
    let consider = |dev: f64, key: f64, best: &mut Option<(f64, f64)>| match best {
        Some((d, k)) if dev < *d || (dev == *d && key >= *k) => {}
        _ => *best = Some((dev, key)),
    };

    let mut occupied = 0f64;
    let mut first_gap: Option<f64> = None;
    let mut expected_key = 0f64;
    let mut i = 0;
    while i < sorted.len() {
        let Some(key) = spec.cell_key(sorted[i]) else {
            // leftover interval; everything after is leftover too
            break;
        };
        let mut count = 0usize;
        while i < sorted.len() && spec.cell_key(sorted[i]) == Some(key) {
            count += 1;
            i += 1;
        }
        if first_gap.is_none() && key > expected_key {
            first_gap = Some(expected_key);
        }
        expected_key = key + 1.0;
        occupied += 1.0;
        consider((count as f64 - expected).abs(), key, &mut best);
    }
    if occupied < spec.k_f64() {
        let gap = first_gap.unwrap_or(expected_key);
        consider(expected, gap, &mut best);
    }
    let (dev, key) = best.expect("a grid class has at least one cell");
    IncrementSup {
        value: dev / n.sqrt(),
        cell: if key + 1.0 >= u64::MAX as f64 {
            u64::MAX
        } else {
            key as u64 + 1
        },
    }
}

/// `max_j |S_n(f_j)|` by explicit summation of the centered members over the
/// sample. Costs `O(n k)`; the reference route for [`sup_via_increments`].
pub fn sup_direct(path: &SamplePath, spec: &GridClassSpec) -> Result<f64> {
    if !spec.centered() {
        return Err(Error::domain("sup_direct needs the centered class"));
    }
    if spec.k_f64() > MAX_MATERIALIZED_CELLS as f64 {
        return Err(Error::domain(format!(
            "class with {} members is too large for direct summation",
            spec.k_f64()
        )));
    }
    let root_n = (path.n() as f64).sqrt();
    let mut best = 0f64;
    for j in 1..=spec.k() {
        let sum = neumaier_sum(path.points().iter().map(|&x| spec.member_value(j, x)));
        best = best.max((sum / root_n).abs());
    }
    Ok(best)
}

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Monotone deque tracking the maximum of a sliding window of `(position,
/// value)` pairs pushed in increasing position order.
struct WindowMax {
    items: std::collections::VecDeque<(f64, f64)>,
}

impl WindowMax {
    fn new() -> Self {
        Self {
            items: Default::default(),
        }
    }

    fn push(&mut self, pos: f64, value: f64) {
        while matches!(self.items.back(), Some(&(_, v)) if v <= value) {
            self.items.pop_back();
        }
        self.items.push_back((pos, value));
    }

    /// Drops entries whose position fails `keep`.
    fn evict(&mut self, keep: impl Fn(f64) -> bool) {
        while matches!(self.items.front(), Some(&(p, _)) if !keep(p)) {
            self.items.pop_front();
        }
    }

    fn max(&self) -> Option<f64> {
        self.items.front().map(|&(_, v)| v)
    }
}

/// `sup { |G_n(t) - G_n(s)| : 0 ≤ s, t ≤ 1, |t - s| ≤ δ }`, computed exactly.
///
/// With `H(x) = #{ξ < x} - n x`, an increment over `[s, t)` is the count in
/// the window minus `n (t - s)`. The positive side is maximized by windows
/// `[ξ_a, ξ_b]` (shortest length for a given count), the negative side by
/// windows whose ends sit just past a point, on a point, at 0 or 1, or exactly
/// `δ` apart. Each family is scanned with a sliding-window maximum after
/// sorting, so the whole computation is `O(n log n)`.
pub fn modulus_statistic(path: &SamplePath, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    let n = path.n() as f64;
    // Points at exactly 1 never enter F_n on (0, 1].
    let pts: Vec<f64> = path.points().iter().copied().filter(|&x| x < 1.0).collect();

    // Distinct values with counts below (c) and at-or-below (c_incl).
    let mut values = Vec::new();
    let mut below = Vec::new();
    let mut upto = Vec::new();
    let mut i = 0;
    while i < pts.len() {
        let v = pts[i];
        let start = i;
        while i < pts.len() && pts[i] == v {
            i += 1;
        }
        values.push(v);
        below.push(start as f64);
        upto.push(i as f64);
    }
    let count_below = |x: f64| pts.partition_point(|&p| p < x) as f64;
    let total = pts.len() as f64;

    let mut best = 0f64;

    // Positive side: s = v_a (included), t -> v_b from above, v_b - v_a < δ.
    let mut window = WindowMax::new();
    for b in 0..values.len() {
        window.push(values[b], n * values[b] - below[b]);
        let vb = values[b];
        window.evict(|pos| vb - pos < delta);
        if let Some(m) = window.max() {
            best = best.max(upto[b] - n * vb + m);
        }
    }

    // Negative side. Left ends: 0 (nothing excluded) and v_a from above
    // (excluding v_a itself); right ends: v_b (excluded) and 1.
    let mut lefts: Vec<(f64, f64)> = Vec::with_capacity(values.len() + 1);
    lefts.push((0.0, 0.0));
    lefts.extend(values.iter().zip(&upto).map(|(&v, &c)| (v, c)));
    let mut rights: Vec<(f64, f64)> = values.iter().zip(&below).map(|(&v, &c)| (v, c)).collect();
    rights.push((1.0, total));

    // Both ends at breakpoints: n(t - s) - (c(t) - c(s)) for 0 < t - s ≤ δ.
    let mut window = WindowMax::new();
    let mut next_left = 0;
    for &(t, ct) in &rights {
        while next_left < lefts.len() && lefts[next_left].0 < t {
            let (s, cs) = lefts[next_left];
            window.push(s, cs - n * s);
            next_left += 1;
        }
        window.evict(|s| t - s <= delta);
        if let Some(m) = window.max() {
            best = best.max(n * t - ct + m);
        }
    }
    // Left end at a breakpoint, length exactly δ.
    for &(s, cs) in &lefts {
        let t = s + delta;
        if t <= 1.0 {
            best = best.max(n * delta - (count_below(t) - cs));
        }
    }
    // Right end at a breakpoint, length exactly δ.
    for &(t, ct) in &rights {
        let s = t - delta;
        if s >= 0.0 {
            best = best.max(n * delta - (ct - count_below(s)));
        }
    }

    Ok(best / n.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(points: &[f64]) -> SamplePath {
        SamplePath::from_points(points.to_vec()).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_sorted() {
        let a = sample_uniform(5, 42).unwrap();
        let b = sample_uniform(5, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.points().windows(2).all(|w| w[0] <= w[1]));
        assert_ne!(a, sample_uniform(5, 43).unwrap());
        assert!(sample_uniform(0, 1).is_err());
    }

    #[test]
    fn large_sample_mean_in_clt_band() {
        let p = sample_uniform(1_000_000, 2024).unwrap();
        let mean = p.points().iter().sum::<f64>() / p.n() as f64;
        assert!((0.497..=0.503).contains(&mean), "{mean}");
    }

    #[test]
    fn cdf_examples() {
        let one = path(&[0.3]);
        assert_eq!(one.empirical_cdf(0.5).unwrap(), 1.0);
        assert_eq!(one.empirical_cdf(0.3).unwrap(), 0.0);
        let three = path(&[0.1, 0.2, 0.9]);
        assert_eq!(three.empirical_cdf(0.5).unwrap(), 2.0 / 3.0);
        assert!(three.empirical_cdf(0.0).is_err());
        assert!(three.empirical_cdf(1.5).is_err());
    }

    #[test]
    fn normalized_process_examples() {
        assert_eq!(path(&[0.3]).normalized_process(0.5).unwrap(), 0.5);
        assert_eq!(path(&[0.3, 0.6]).normalized_process(1.0).unwrap(), 0.0);
        // F_n(0.5) = 0.5 exactly
        assert_eq!(path(&[0.2, 0.7]).normalized_process(0.5).unwrap(), 0.0);
    }

    #[test]
    fn increment_examples() {
        let p = path(&[0.1, 0.2, 0.3, 0.4]);
        let s = sup_via_increments(&p, 0.5).unwrap();
        assert_eq!((s.value, s.cell), (1.0, 1));
        // counts (2, 2) equal nσ²
        let even = path(&[0.1, 0.2, 0.6, 0.7]);
        assert_eq!(sup_via_increments(&even, 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn increment_matches_g_differences() {
        let p = sample_uniform(200, 9).unwrap();
        let s2 = 0.07;
        let spec = GridClassSpec::new(s2, true).unwrap();
        let mut best = 0f64;
        for j in 1..=spec.k() {
            let (lo, hi) = spec.cell_bounds(j).unwrap();
            best = best.max((p.g(hi) - p.g(lo)).abs());
        }
        let s = sup_via_increments(&p, s2).unwrap();
        assert!((s.value - best).abs() < 1e-12);
    }

    #[test]
    fn empty_cells_and_argmax() {
        // σ² = 0.25, n = 2: cells 2 and 4 empty, cell 1 holds 2 points.
        let p = path(&[0.05, 0.1]);
        let s = sup_via_increments(&p, 0.25).unwrap();
        assert_eq!(s.cell, 1);
        assert!((s.value - 1.5 / 2f64.sqrt()).abs() < 1e-15);
        // both points in cell 3: |2 - 0.5| beats empty |0 - 0.5|
        let p = path(&[0.55, 0.6]);
        assert_eq!(sup_via_increments(&p, 0.25).unwrap().cell, 3);
        // σ² = 0.5, n = 1 point in cell 2: |1 - .5| = |0 - .5|, tie goes to cell 1
        let p = path(&[0.7]);
        assert_eq!(sup_via_increments(&p, 0.5).unwrap().cell, 1);
    }

    #[test]
    fn direct_examples() {
        let spec = GridClassSpec::new(0.5, true).unwrap();
        let p = path(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(sup_direct(&p, &spec).unwrap(), 1.0);
        // σ² = 0.25 → k = 4, no leftover; cell 4 empty
        let spec = GridClassSpec::new(0.25, true).unwrap();
        let p = path(&[0.1, 0.3, 0.6]);
        let n = 3f64;
        assert!((sup_direct(&p, &spec).unwrap() - 0.75 / n.sqrt()).abs() < 1e-15);
        let uncentered = GridClassSpec::new(0.25, false).unwrap();
        assert!(sup_direct(&p, &uncentered).is_err());
    }

    #[test]
    fn regime_a_sup_is_one_over_root_n() {
        let p = sample_uniform(100, 5).unwrap();
        let s = sup_via_increments(&p, 1e-300).unwrap();
        assert!((s.value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn modulus_single_point() {
        // one point at 0.5: positive side 1 at s=0.5, t->0.5+
        let p = path(&[0.5]);
        let m = modulus_statistic(&p, 0.1).unwrap();
        assert!((m - 1.0).abs() < 1e-12, "{m}");
        // no point nearby: nδ for a window avoiding 0.5
        let m = modulus_statistic(&path(&[0.5]), 0.4).unwrap();
        assert!((m - 1.0).abs() < 1e-12, "{m}");
        assert!(modulus_statistic(&p, 0.0).is_err());
    }

    #[test]
    fn modulus_full_window_is_range() {
        let p = sample_uniform(50, 11).unwrap();
        let m = modulus_statistic(&p, 1.0).unwrap();
        let mut hi = 0f64;
        let mut lo = 0f64;
        for &x in p.points() {
            for y in [x, next_up(x)] {
                let g = p.g(y);
                hi = hi.max(g);
                lo = lo.min(g);
            }
        }
        assert!((m - (hi - lo)).abs() < 1e-9, "{m} vs {}", hi - lo);
    }

    fn next_up(x: f64) -> f64 {
        f64::from_bits(x.to_bits() + 1)
    }
}

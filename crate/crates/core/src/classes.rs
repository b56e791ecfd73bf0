//! Grid indicator classes on `[0, 1]` and empirical L1-density estimates.
//!
//! For `0 < σ² ≤ 1` and `k = ⌊1/σ²⌋`, member `j` (1-based) of the
//! uncentered class is the indicator of the cell `[(j-1)σ², jσ²)`; the
//! centered member subtracts `σ²`. The leftover interval `[kσ², 1)` belongs
//! to no cell. Members are evaluated in closed form and never tabulated.

use serde::{Deserialize, Serialize};

use crate::bounds::check_sigma2;
use crate::error::{Error, Result};

/// Measures with more atoms than this are refused.
pub const MAX_MATERIALIZED_CELLS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridClassSpec {
    sigma2: f64,
    /// `⌊1/σ²⌋` as an exact integer-valued float; stays exact where `u64`
    /// would overflow (σ² below 2^-64).
    cells: f64,
    centered: bool,
}

impl GridClassSpec {
    pub fn new(sigma2: f64, centered: bool) -> Result<Self> {
        check_sigma2(sigma2)?;
        let mut cells = (1.0 / sigma2).floor();
        // 1/σ² is rounded; restore k σ² ≤ 1 < (k+1) σ² in the products the
        // rest of the module uses.
        if cells * sigma2 > 1.0 && cells > 1.0 {
            cells -= 1.0;
        } else if (cells + 1.0) * sigma2 <= 1.0 {
            cells += 1.0;
        }
        Ok(Self {
            sigma2,
            cells,
            centered,
        })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    /// Number of cells, saturating at `u64::MAX`.
    pub fn k(&self) -> u64 {
        if self.cells >= u64::MAX as f64 {
            u64::MAX
        } else {
            self.cells as u64
        }
    }

    /// Number of cells as a float; exact for every representable `σ²`.
    pub fn k_f64(&self) -> f64 {
        self.cells
    }

    /// Mass `1 - kσ²` of the leftover interval under the uniform law.
    pub fn leftover_mass(&self) -> f64 {
        (1.0 - self.cells * self.sigma2).max(0.0)
    }

    /// Zero-based cell index of `x` as an integer-valued float, or `None`
    /// when `x` lies outside `[0, kσ²)`.
    ///
    /// Cell boundaries are the floating-point products `q·σ²`, the same
    /// values at which `F_n` is evaluated, so counts computed here agree with
    /// increments of the empirical distribution function.
    pub fn cell_key(&self, x: f64) -> Option<f64> {
        if !(x >= 0.0) {
            return None;
        }
        let s2 = self.sigma2;
        let mut q = (x / s2).floor();
        if q * s2 > x {
            q -= 1.0;
        } else if (q + 1.0) * s2 <= x {
            q += 1.0;
        }
        (q >= 0.0 && q < self.cells).then_some(q)
    }

    /// One-based member index whose cell contains `x`.
    pub fn cell_of(&self, x: f64) -> Option<u64> {
        self.cell_key(x).map(|q| q as u64 + 1)
    }

    /// Left and right end of cell `j` (1-based).
    pub fn cell_bounds(&self, j: u64) -> Result<(f64, f64)> {
        self.check_index(j)?;
        let j = j as f64;
        Ok(((j - 1.0) * self.sigma2, j * self.sigma2))
    }

    fn check_index(&self, j: u64) -> Result<()> {
        if j == 0 || j as f64 > self.cells {
            return Err(Error::domain(format!(
                "member index {j} out of range 1..={}",
                self.cells
            )));
        }
        Ok(())
    }

    pub fn evaluate_member(&self, j: u64, x: f64) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.member_value(j, x))
    }

    /// [`evaluate_member`](Self::evaluate_member) without the index check.
    pub(crate) fn member_value(&self, j: u64, x: f64) -> f64 {
        let inside = self.cell_key(x) == Some((j - 1) as f64);
        let indicator = if inside { 1.0 } else { 0.0 };
        if self.centered {
            indicator - self.sigma2
        } else {
            indicator
        }
    }

    /// Mean and second moment of member `j` under the uniform law on `[0, 1]`.
    pub fn member_moments(&self, j: u64) -> Result<(f64, f64)> {
        self.check_index(j)?;
        let s2 = self.sigma2;
        let outside = 1.0 - s2;
        if self.centered {
            // value 1-σ² on mass σ², value -σ² on mass 1-σ²
            let inside_value = outside;
            let mean = s2 * inside_value - outside * s2;
            let second = s2 * inside_value * inside_value + outside * s2 * s2;
            Ok((mean, second))
        } else {
            Ok((s2, s2))
        }
    }
}

/// A probability measure on the `k + 1` atoms generated by the cells: one
/// weight per cell and one for the leftover interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMeasure {
    cells: Vec<f64>,
    leftover: f64,
}

impl CellMeasure {
    pub fn new(cells: Vec<f64>, leftover: f64) -> Result<Self> {
        if cells.iter().chain([&leftover]).any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain("measure weights must be finite and >= 0"));
        }
        let total: f64 = cells.iter().sum::<f64>() + leftover;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "measure weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { cells, leftover })
    }

    fn materializable(spec: &GridClassSpec) -> Result<usize> {
        if spec.k_f64() > MAX_MATERIALIZED_CELLS as f64 {
            return Err(Error::domain(format!(
                "class has {} cells; measures are limited to {MAX_MATERIALIZED_CELLS}",
                spec.k_f64()
            )));
        }
        Ok(spec.k() as usize)
    }

    /// The uniform law on `[0, 1]` restricted to the cell algebra.
    pub fn uniform(spec: &GridClassSpec) -> Result<Self> {
        let k = Self::materializable(spec)?;
        Self::new(vec![spec.sigma2(); k], spec.leftover_mass())
    }

    /// Point mass on cell `j` (1-based).
    pub fn concentrated(spec: &GridClassSpec, j: u64) -> Result<Self> {
        let k = Self::materializable(spec)?;
        spec.check_index(j)?;
        let mut cells = vec![0.0; k];
        cells[(j - 1) as usize] = 1.0;
        Self::new(cells, 0.0)
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.cells
    }

    pub fn leftover(&self) -> f64 {
        self.leftover
    }

    fn check_matches(&self, spec: &GridClassSpec) -> Result<()> {
        if self.cells.len() as f64 != spec.k_f64() {
            return Err(Error::domain(format!(
                "measure has {} cell weights but the class has {} cells",
                self.cells.len(),
                spec.k_f64()
            )));
        }
        Ok(())
    }
}

/// `∫|f_i - f_j| dν`. For `i ≠ j` the cells are disjoint and the `σ²`
/// shifts cancel, leaving `ν(cell i) + ν(cell j)`.
pub fn l1_distance(spec: &GridClassSpec, i: u64, j: u64, nu: &CellMeasure) -> Result<f64> {
    nu.check_matches(spec)?;
    spec.check_index(i)?;
    spec.check_index(j)?;
    if i == j {
        return Ok(0.0);
    }
    Ok(nu.cells[(i - 1) as usize] + nu.cells[(j - 1) as usize])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverResult {
    /// One-based member indices, in selection order.
    pub centers: Vec<u64>,
    pub epsilon: f64,
    pub m: usize,
}

impl CoverResult {
    /// Checks that every member lies strictly within `epsilon` of a center.
    pub fn covers(&self, spec: &GridClassSpec, nu: &CellMeasure) -> Result<bool> {
        for i in 1..=spec.k() {
            let mut best = f64::INFINITY;
            for &c in &self.centers {
                best = best.min(l1_distance(spec, i, c, nu)?);
            }
            if !(best < self.epsilon) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Greedy farthest-point ε-cover of the class in `L1(ν)`.
///
/// Starts from member 1 and repeatedly adds the member farthest from the
/// current centers (lowest index on ties) until every member is strictly
/// closer than `epsilon`. The selection order does not depend on `epsilon`,
/// so the cover size is nonincreasing in `epsilon`.
pub fn greedy_cover(spec: &GridClassSpec, nu: &CellMeasure, epsilon: f64) -> Result<CoverResult> {
    nu.check_matches(spec)?;
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    let w = &nu.cells;
    let k = w.len();
    let mut centers = vec![1u64];
    // Distance of each member to its nearest center.
    let mut nearest: Vec<f64> = (0..k)
        .map(|i| if i == 0 { 0.0 } else { w[i] + w[0] })
        .collect();
    loop {
        let (far, far_dist) = nearest
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |best, (i, &d)| {
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            });
        if far_dist < epsilon {
            break;
        }
        centers.push(far as u64 + 1);
        for (i, d) in nearest.iter_mut().enumerate() {
            let to_new = if i == far { 0.0 } else { w[i] + w[far] };
            if to_new < *d {
                *d = to_new;
            }
        }
    }
    Ok(CoverResult {
        m: centers.len(),
        centers,
        epsilon,
    })
}

/// Fitted parameter and exponent of `m(ε) ≤ D ε^{-L}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseFit {
    pub d_hat: f64,
    pub l_hat: f64,
    /// `(ε, worst-case cover size)` pairs the fit was computed from.
    pub points: Vec<(f64, usize)>,
}

/// Fits `L` as the least-squares slope of `log m` against `-log ε` (worst
/// measure per `ε`), then takes the smallest `D` for which `m ≤ D ε^{-L}` on
/// every grid point. Both are clamped to at least 1.
pub fn fit_dense_parameters(
    spec: &GridClassSpec,
    epsilon_grid: &[f64],
    measures: &[CellMeasure],
) -> Result<DenseFit> {
    if epsilon_grid.is_empty() {
        return Err(Error::domain("epsilon grid is empty"));
    }
    if measures.is_empty() {
        return Err(Error::domain("no measures supplied"));
    }
    let mut points = Vec::with_capacity(epsilon_grid.len());
    for &eps in epsilon_grid {
        let mut worst = 0usize;
        for nu in measures {
            worst = worst.max(greedy_cover(spec, nu, eps)?.m);
        }
        points.push((eps, worst));
    }

    let xs: Vec<f64> = points.iter().map(|(e, _)| -e.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, m)| (*m as f64).ln()).collect();
    let count = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 1.0 };
    let l_hat = slope.max(1.0);
    let d_hat = points
        .iter()
        .map(|&(e, m)| m as f64 * e.powf(l_hat))
        .fold(1.0, f64::max);
    Ok(DenseFit {
        d_hat,
        l_hat,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_examples() {
        assert_eq!(GridClassSpec::new(0.5, true).unwrap().k(), 2);
        let s = GridClassSpec::new(0.3, false).unwrap();
        assert_eq!(s.k(), 3);
        assert!((s.leftover_mass() - 0.1).abs() < 1e-15);
        assert_eq!(s.cell_of(0.95), None);
        let one = GridClassSpec::new(1.0, true).unwrap();
        assert_eq!(one.k(), 1);
        assert_eq!(one.cell_bounds(1).unwrap(), (0.0, 1.0));
        assert!(GridClassSpec::new(0.0, true).is_err());
        assert!(GridClassSpec::new(1.01, true).is_err());
    }

    #[test]
    fn cell_count_brackets_one() {
        for s2 in [0.1, 0.3, 1.0 / 3.0, 0.7, 1e-3, 1.0 / 7.0, 0.142_857_142_857_142_85] {
            let s = GridClassSpec::new(s2, true).unwrap();
            assert!(s.k_f64() * s2 <= 1.0, "{s2}");
            assert!((s.k_f64() + 1.0) * s2 > 1.0, "{s2}");
        }
    }

    #[test]
    fn tiny_sigma_keeps_exact_cell_count() {
        let s = GridClassSpec::new(1e-300, true).unwrap();
        assert_eq!(s.k(), u64::MAX);
        assert!(s.k_f64() > 1e299);
        assert!(s.cell_key(0.5).is_some());
    }

    #[test]
    fn evaluate_examples() {
        let c = GridClassSpec::new(0.5, true).unwrap();
        assert_eq!(c.evaluate_member(1, 0.25).unwrap(), 0.5);
        assert_eq!(c.evaluate_member(1, 0.75).unwrap(), -0.5);
        let u = GridClassSpec::new(0.5, false).unwrap();
        assert_eq!(u.evaluate_member(2, 0.5).unwrap(), 1.0);
        assert_eq!(u.evaluate_member(1, 0.5).unwrap(), 0.0);
        assert!(u.evaluate_member(0, 0.5).is_err());
        assert!(u.evaluate_member(3, 0.5).is_err());
    }

    #[test]
    fn moment_examples() {
        let c = GridClassSpec::new(0.25, true).unwrap();
        assert_eq!(c.member_moments(1).unwrap(), (0.0, 0.1875));
        let one = GridClassSpec::new(1.0, true).unwrap();
        assert_eq!(one.member_moments(1).unwrap(), (0.0, 0.0));
        let u = GridClassSpec::new(0.5, false).unwrap();
        assert_eq!(u.member_moments(2).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn distance_examples() {
        let s = GridClassSpec::new(0.25, true).unwrap();
        let mu = CellMeasure::uniform(&s).unwrap();
        assert_eq!(l1_distance(&s, 1, 3, &mu).unwrap(), 0.5);
        assert_eq!(l1_distance(&s, 2, 2, &mu).unwrap(), 0.0);
        let point = CellMeasure::concentrated(&s, 2).unwrap();
        assert_eq!(l1_distance(&s, 2, 4, &point).unwrap(), 1.0);
        assert!(CellMeasure::new(vec![0.5, 0.4], 0.0).is_err());
        assert!(CellMeasure::new(vec![0.5, 0.5 + 1e-13], 0.0).is_ok());
    }

    #[test]
    fn cover_examples() {
        let s = GridClassSpec::new(0.25, true).unwrap();
        let mu = CellMeasure::uniform(&s).unwrap();
        let fine = greedy_cover(&s, &mu, 0.1).unwrap();
        assert_eq!(fine.m, 4);
        assert_eq!(fine.centers, vec![1, 2, 3, 4]);
        assert!(fine.covers(&s, &mu).unwrap());
        assert_eq!(greedy_cover(&s, &mu, 1.5).unwrap().m, 1);
        // distances are exactly 0.5: strict inequality forces every center
        assert_eq!(greedy_cover(&s, &mu, 0.5).unwrap().m, 4);
        let one = GridClassSpec::new(1.0, true).unwrap();
        let mu1 = CellMeasure::uniform(&one).unwrap();
        assert_eq!(greedy_cover(&one, &mu1, 0.01).unwrap().m, 1);
        assert!(greedy_cover(&s, &mu, 0.0).is_err());
    }

    #[test]
    fn cover_picks_heavy_cells_first() {
        let s = GridClassSpec::new(0.25, true).unwrap();
        let nu = CellMeasure::new(vec![0.1, 0.1, 0.7, 0.1], 0.0).unwrap();
        let cover = greedy_cover(&s, &nu, 0.25).unwrap();
        assert_eq!(cover.centers, vec![1, 3]);
        assert!(cover.covers(&s, &nu).unwrap());
    }

    #[test]
    fn fit_examples() {
        let one = GridClassSpec::new(1.0, true).unwrap();
        let mu1 = CellMeasure::uniform(&one).unwrap();
        let fit = fit_dense_parameters(&one, &[0.9, 0.5, 0.1], &[mu1]).unwrap();
        assert_eq!((fit.d_hat, fit.l_hat), (1.0, 1.0));

        let s = GridClassSpec::new(0.25, true).unwrap();
        let mu = CellMeasure::uniform(&s).unwrap();
        let grid = [0.9, 0.5, 0.1];
        let fit = fit_dense_parameters(&s, &grid, &[mu]).unwrap();
        let ms: Vec<usize> = fit.points.iter().map(|p| p.1).collect();
        assert_eq!(ms, vec![1, 4, 4]);
        assert!(fit.l_hat >= 1.0 && fit.d_hat >= 1.0);
        for (e, m) in &fit.points {
            assert!(*m as f64 <= fit.d_hat * e.powf(-fit.l_hat) * (1.0 + 1e-12));
        }
        assert!(fit_dense_parameters(&s, &[], &[]).is_err());
    }
}

//! Closed-form thresholds and tail bounds for `P(sup_f |S_n(f)| ≥ v)`.
//!
//! Every evaluator is a pure function. Bounds are returned unclamped so that
//! monotonicity can be checked on raw values; reports clamp to 1.
//! Logarithms are natural throughout.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Regime of a pair `(n, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `σ² ≤ n^{-200}`
    A,
    /// `n^{-200} < σ² ≤ log n / (8n)`
    B,
    /// `log n / (8n) < σ² ≤ 1`
    C,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::A => "A",
            Regime::B => "B",
            Regime::C => "C",
        })
    }
}

/// Parameter `D` and exponent `L` of an L1-dense class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DenseClass {
    #[serde(rename = "D")]
    pub parameter: f64,
    #[serde(rename = "L")]
    pub exponent: f64,
}

impl Default for DenseClass {
    fn default() -> Self {
        Self {
            parameter: 1.0,
            exponent: 1.0,
        }
    }
}

impl DenseClass {
    pub fn new(parameter: f64, exponent: f64) -> Result<Self> {
        let dims = Self {
            parameter,
            exponent,
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.parameter.is_finite() && self.parameter >= 1.0) {
            return Err(Error::domain(format!(
                "class parameter D must be >= 1, got {}",
                self.parameter
            )));
        }
        if !(self.exponent.is_finite() && self.exponent >= 1.0) {
            return Err(Error::domain(format!(
                "class exponent L must be >= 1, got {}",
                self.exponent
            )));
        }
        Ok(())
    }

    fn log_d(&self) -> f64 {
        self.parameter.ln()
    }
}

/// Universal constants of the bounds. None of them is pinned by theory; the
/// defaults are calibrated so that `u(σ) ≥ 2√n σ²` in regimes B and C and the
/// The main bound at `v = u(σ)` stays below 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundParams {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "C5")]
    pub c5: f64,
    #[serde(rename = "C6")]
    pub c6: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha_bar: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "Cbar")]
    pub c_bar: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 0.5,
            c3: 20.0,
            c4: 20.0,
            c5: 20.0,
            c6: 20.0,
            k: 0.25,
            alpha: 0.125,
            c: 2.0,
            alpha_bar: 0.125,
            a0: 16.0,
            c_bar: 0.5,
        }
    }
}

impl BoundParams {
    /// Names accepted by [`BoundParams::set`], in declaration order.
    pub const NAMES: [&'static str; 12] = [
        "C1", "C2", "C3", "C4", "C5", "C6", "K", "alpha", "C", "alpha_bar", "A0", "Cbar",
    ];

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.entries() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(format!(
                    "constant {name} must be finite and > 0, got {value}"
                )));
            }
        }
        if self.c2 >= 1.0 {
            return Err(Error::domain(format!(
                "constant C2 must be < 1, got {}",
                self.c2
            )));
        }
        Ok(())
    }

    pub fn entries(&self) -> [(&'static str, f64); 12] {
        [
            ("C1", self.c1),
            ("C2", self.c2),
            ("C3", self.c3),
            ("C4", self.c4),
            ("C5", self.c5),
            ("C6", self.c6),
            ("K", self.k),
            ("alpha", self.alpha),
            ("C", self.c),
            ("alpha_bar", self.alpha_bar),
            ("A0", self.a0),
            ("Cbar", self.c_bar),
        ]
    }

    /// Overrides one constant by name. Does not validate; call
    /// [`BoundParams::validate`] once all overrides are applied.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "C1" => &mut self.c1,
            "C2" => &mut self.c2,
            "C3" => &mut self.c3,
            "C4" => &mut self.c4,
            "C5" => &mut self.c5,
            "C6" => &mut self.c6,
            "K" => &mut self.k,
            "alpha" => &mut self.alpha,
            "C" => &mut self.c,
            "alpha_bar" => &mut self.alpha_bar,
            "A0" => &mut self.a0,
            "Cbar" => &mut self.c_bar,
            other => {
                return Err(Error::domain(format!(
                    "unknown constant {other:?}; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    /// Parses `k=v,k=v,...` overrides on top of `self` and validates the result.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        self.apply_overrides(spec)?;
        self.validate()?;
        Ok(self)
    }

    /// Like [`BoundParams::with_overrides`] but leaves validation to the caller.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<()> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::domain(format!("constant override {item:?} is not k=v")))?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::domain(format!("constant override {item:?} has a non-numeric value"))
            })?;
            self.set(name.trim(), value)?;
        }
        Ok(())
    }
}

pub(crate) fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("sample size n must be >= 2, got {n}")));
    }
    Ok(())
}

pub(crate) fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2 <= 1.0) {
        return Err(Error::domain(format!(
            "variance bound sigma2 must lie in (0, 1], got {sigma2}"
        )));
    }
    Ok(())
}

/// `log n / (8n)`, the boundary between regimes B and C.
pub fn regime_bc_boundary(n: u64) -> f64 {
    let n = n as f64;
    n.ln() / (8.0 * n)
}

pub fn classify_regime(n: u64, sigma2: f64) -> Result<Regime> {
    check_n(n)?;
    check_sigma2(sigma2)?;
    // n^{-200} underflows for n > ~34; compare logarithms instead.
    if sigma2.ln() <= -200.0 * (n as f64).ln() {
        Ok(Regime::A)
    } else if sigma2 <= regime_bc_boundary(n) {
        Ok(Regime::B)
    } else {
        Ok(Regime::C)
    }
}

/// `log(log n / (nσ²))`, evaluated in log space.
fn log_z(n: u64, sigma2: f64) -> f64 {
    let ln_n = (n as f64).ln();
    ln_n.ln() - ln_n - sigma2.ln()
}

/// Case-(a) formula of `u(σ)`, regardless of the regime of `(n, σ²)`.
pub fn u_case_a(n: u64, dims: &DenseClass, params: &BoundParams) -> f64 {
    let ln_n = (n as f64).ln();
    params.c3 / (n as f64).sqrt() * (dims.exponent + dims.log_d() / ln_n)
}

/// Case-(b) formula of `u(σ)`. Only meaningful when `log n / (nσ²) > 1`.
pub fn u_case_b(n: u64, sigma2: f64, dims: &DenseClass, params: &BoundParams) -> f64 {
    let ln_n = (n as f64).ln();
    params.c4 / (n as f64).sqrt() * (dims.exponent * ln_n / log_z(n, sigma2) + dims.log_d())
}

/// Case-(c) formula of `u(σ)`.
pub fn u_case_c(n: u64, sigma2: f64, dims: &DenseClass, params: &BoundParams) -> f64 {
    let nf = n as f64;
    params.c5 / nf.sqrt() * (nf * sigma2 + dims.exponent * nf.ln() + dims.log_d())
}

/// `u(σ)`: the level from which the main bound is valid.
pub fn threshold_u(n: u64, sigma2: f64, dims: &DenseClass, params: &BoundParams) -> Result<f64> {
    dims.validate()?;
    Ok(match classify_regime(n, sigma2)? {
        Regime::A => u_case_a(n, dims, params),
        Regime::B => u_case_b(n, sigma2, dims, params),
        Regime::C => u_case_c(n, sigma2, dims, params),
    })
}

/// `ū(σ) = C₆ σ (L^{3/4} log^{1/2}(2/σ) + (log D)^{3/4})`.
pub fn threshold_u_bar(sigma2: f64, dims: &DenseClass, params: &BoundParams) -> Result<f64> {
    check_sigma2(sigma2)?;
    dims.validate()?;
    let sigma = sigma2.sqrt();
    Ok(params.c6
        * sigma
        * (dims.exponent.powf(0.75) * (2.0 / sigma).ln().sqrt() + dims.log_d().powf(0.75)))
}

/// Raw main-bound expression `C₁ exp{-C₂ √n v log(v / (√n σ²))}` with no
/// validity checks.
pub fn theorem1_tail(n: u64, sigma2: f64, v: f64, params: &BoundParams) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let log_ratio = v.ln() - sqrt_n.ln() - sigma2.ln();
    params.c1 * (-params.c2 * sqrt_n * v * log_ratio).exp()
}

pub fn upper_bound_theorem1(
    n: u64,
    sigma2: f64,
    v: f64,
    dims: &DenseClass,
    params: &BoundParams,
) -> Result<f64> {
    const NAME: &str = "main bound";
    let u = threshold_u(n, sigma2, dims, params)?;
    if !(v >= u) {
        return Err(Error::BelowThreshold {
            bound: NAME,
            v,
            threshold: u,
        });
    }
    let scale = (n as f64).sqrt() * sigma2;
    if !(v > scale) {
        return Err(Error::Condition {
            bound: NAME,
            condition: format!("v / (sqrt(n) sigma2) = {} must exceed 1", v / scale),
        });
    }
    Ok(theorem1_tail(n, sigma2, v, params))
}

/// Gaussian-type bound `C exp{-α v² / σ²}`, valid for `ū(σ) ≤ v ≤ √n σ²` in
/// regime C.
pub fn upper_bound_extension(
    n: u64,
    sigma2: f64,
    v: f64,
    dims: &DenseClass,
    params: &BoundParams,
) -> Result<f64> {
    const NAME: &str = "extension bound";
    require_regime_c(NAME, n, sigma2)?;
    let u_bar = threshold_u_bar(sigma2, dims, params)?;
    if !(v >= u_bar) {
        return Err(Error::BelowThreshold {
            bound: NAME,
            v,
            threshold: u_bar,
        });
    }
    let limit = (n as f64).sqrt() * sigma2;
    if v > limit {
        return Err(Error::AboveLimit {
            bound: NAME,
            v,
            limit,
        });
    }
    Ok(params.c * (-params.alpha * v * v / sigma2).exp())
}

/// Gap-filling bound `C exp{-ᾱ v² / σ²}` for `ū(σ) < v ≤ u(σ)` in regime C.
/// Only meaningful when `D` and `L` do not grow with `1/σ²`.
pub fn upper_bound_gap(
    n: u64,
    sigma2: f64,
    v: f64,
    dims: &DenseClass,
    params: &BoundParams,
) -> Result<f64> {
    const NAME: &str = "gap bound";
    require_regime_c(NAME, n, sigma2)?;
    let u_bar = threshold_u_bar(sigma2, dims, params)?;
    if !(v > u_bar) {
        return Err(Error::BelowThreshold {
            bound: NAME,
            v,
            threshold: u_bar,
        });
    }
    let u = threshold_u(n, sigma2, dims, params)?;
    if v > u {
        return Err(Error::AboveLimit {
            bound: NAME,
            v,
            limit: u,
        });
    }
    Ok(params.c * (-params.alpha_bar * v * v / sigma2).exp())
}

fn require_regime_c(bound: &'static str, n: u64, sigma2: f64) -> Result<()> {
    let regime = classify_regime(n, sigma2)?;
    if regime != Regime::C {
        return Err(Error::Condition {
            bound,
            condition: format!(
                "requires regime C (sigma2 > log n / 8n = {}), got regime {regime}",
                regime_bc_boundary(n)
            ),
        });
    }
    Ok(())
}

/// `(1+w) log(1+w) - w`, accurate for small `w`.
fn bennett_h(w: f64) -> f64 {
    if w < 1e-4 {
        // w²/2 - w³/6 + w⁴/12 - w⁵/20
        let w2 = w * w;
        w2 * (0.5 - w / 6.0 + w2 / 12.0 - w2 * w / 20.0)
    } else {
        (1.0 + w) * w.ln_1p() - w
    }
}

/// Bennett's inequality for one normalized sum of bounded centered terms:
/// `exp{-nσ² [(1+w) log(1+w) - w]}` with `w = v / (√n σ²)`.
pub fn bennett_bound(n: u64, sigma2: f64, v: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("sample size n must be >= 1"));
    }
    check_sigma2(sigma2)?;
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("level v must be finite and >= 0, got {v}")));
    }
    let nf = n as f64;
    let w = v / (nf.sqrt() * sigma2);
    Ok((-nf * sigma2 * bennett_h(w)).exp())
}

/// Simplified Bennett bound `exp{-K √n v log(v / (√n σ²))}` for `v > 2√n σ²`.
pub fn bennett_simplified(n: u64, sigma2: f64, v: f64, params: &BoundParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("sample size n must be >= 1"));
    }
    check_sigma2(sigma2)?;
    let sqrt_n = (n as f64).sqrt();
    let threshold = 2.0 * sqrt_n * sigma2;
    if !(v > threshold) {
        return Err(Error::BelowThreshold {
            bound: "simplified Bennett bound",
            v,
            threshold,
        });
    }
    Ok((-params.k * sqrt_n * v * (v / (sqrt_n * sigma2)).ln()).exp())
}

/// Level and bound of the large-deviation estimate
/// `P(sup |S_n(f)| ≥ A √n σ²) ≤ exp{-√A nσ² / 2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeDeviationBound {
    pub level: f64,
    pub bound: f64,
}

pub fn upper_bound_theorem31(
    n: u64,
    sigma2: f64,
    multiplier: f64,
    dims: &DenseClass,
    params: &BoundParams,
) -> Result<LargeDeviationBound> {
    const NAME: &str = "large-deviation bound";
    check_n(n)?;
    check_sigma2(sigma2)?;
    dims.validate()?;
    let nf = n as f64;
    let n_sigma2 = nf * sigma2;
    let complexity = dims.exponent * nf.ln() + dims.log_d();
    if !(n_sigma2 > complexity) {
        return Err(Error::Condition {
            bound: NAME,
            condition: format!(
                "n sigma2 = {n_sigma2} must exceed L log n + log D = {complexity}"
            ),
        });
    }
    if !(multiplier >= params.a0) {
        return Err(Error::Condition {
            bound: NAME,
            condition: format!("multiplier A = {multiplier} is below A0 = {}", params.a0),
        });
    }
    Ok(LargeDeviationBound {
        level: multiplier * nf.sqrt() * sigma2,
        bound: (-multiplier.sqrt() * n_sigma2 / 2.0).exp(),
    })
}

/// `û(σ)`: the level the grid class exceeds with high probability.
pub fn lower_bound_level(n: u64, sigma2: f64, params: &BoundParams) -> Result<f64> {
    let sqrt_n = (n as f64).sqrt();
    Ok(match classify_regime(n, sigma2)? {
        Regime::A => params.c_bar / sqrt_n,
        Regime::B => params.c_bar / sqrt_n * (n as f64).ln() / log_z(n, sigma2),
        Regime::C => {
            let sigma = sigma2.sqrt();
            params.c_bar * sigma * (2.0 / sigma).ln().sqrt()
        }
    })
}

//! Moving-average coefficient families and their covariance functions.
//!
//! A stationary, purely non-deterministic Gaussian sequence has a moving
//! average representation `Δ_n = Σ_{k≥0} a_k ξ_{n-k}` with square-summable
//! coefficients. Everything downstream of this crate is parametrized by a
//! finite truncation `a_0..a_K` of that kernel. Three named families are
//! built in:
//!
//! - polynomial: `a_k = (k+1)^{-ρ}`, `ρ > 1/2`
//! - exponential: `a_0 = 1`, `a_k = C_a e^{-λk}` for `k ≥ 1`
//! - fractional Brownian increments with Hurst parameter `H ∈ (0,1)` and
//!   time step `h`
//!
//! All stored kernels are normalized so that `a_0 = 1`; the fbm family
//! divides by its raw `a_0` and keeps that scale in metadata.

use crate::{Error, Result};
use statrs::function::gamma::gamma;

/// Which parametric family a kernel came from, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Polynomial { rho: f64 },
    Exponential { c_a: f64, lambda: f64 },
    Fbm { hurst: f64, step: f64 },
    Custom,
}

/// A finite truncation `a_0..a_K` of a moving-average kernel, with family
/// metadata and tail-decay information.
#[derive(Debug, Clone)]
pub struct CoefficientSequence {
    family: Family,
    values: Vec<f64>,
    /// ρ for polynomial-tailed families, λ for the exponential one.
    tail_exponent: Option<f64>,
    /// Raw `a_0` before normalization (fbm only).
    raw_a0: Option<f64>,
}

/// `κ(H) = sqrt(sin(πH) Γ(2H+1)) / Γ(H+1/2)`, the variance-normalizing
/// constant of the fractional moving-average representation.
pub fn kappa_h(hurst: f64) -> f64 {
    (f64::sin(std::f64::consts::PI * hurst) * gamma(2.0 * hurst + 1.0)).sqrt()
        / gamma(hurst + 0.5)
}

impl CoefficientSequence {
    /// Polynomial kernel `a_k = (k+1)^{-ρ}`. Requires `ρ > 1/2` for square
    /// summability and `K ≥ 1`.
    pub fn polynomial(rho: f64, k_max: usize) -> Result<Self> {
        if !(rho > 0.5) {
            return Err(Error::ParameterDomain(format!(
                "polynomial kernel requires rho > 1/2 for square summability, got {rho}"
            )));
        }
        if k_max < 1 {
            return Err(Error::ParameterDomain("k_max must be >= 1".into()));
        }
        let values = (0..=k_max).map(|k| ((k + 1) as f64).powf(-rho)).collect();
        Ok(Self { family: Family::Polynomial { rho }, values, tail_exponent: Some(rho), raw_a0: None })
    }

    /// Exponential kernel `a_0 = 1`, `a_k = C_a e^{-λk}` for `k ≥ 1`.
    /// Requires `λ > 0`.
    pub fn exponential(c_a: f64, lambda: f64, k_max: usize) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "exponential kernel requires lambda > 0, got {lambda}"
            )));
        }
        if k_max < 1 {
            return Err(Error::ParameterDomain("k_max must be >= 1".into()));
        }
        let mut values = vec![1.0];
        values.extend((1..=k_max).map(|k| c_a * (-lambda * k as f64).exp()));
        Ok(Self {
            family: Family::Exponential { c_a, lambda },
            values,
            tail_exponent: Some(lambda),
            raw_a0: None,
        })
    }

    /// Fractional Brownian increment kernel for Hurst parameter
    /// `H ∈ (0,1)` and time step `h > 0`:
    ///
    /// ```text
    /// a_0 = h^H κ(H) 2^{1/2-H}
    /// a_k = h^H κ(H) ((k+1/2)^{H-1/2} - (k-1/2)^{H-1/2}),  k ≥ 1
    /// ```
    ///
    /// Stored values are divided by `a_0` (the raw scale is kept in
    /// metadata), so the asymptotic decay `|a_k| ~ C (k+1)^{-(3/2-H)}` is
    /// unchanged.
    pub fn fbm(hurst: f64, step: f64, k_max: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::ParameterDomain(format!(
                "Hurst parameter must lie strictly inside (0,1), got {hurst}"
            )));
        }
        if !(step > 0.0) {
            return Err(Error::ParameterDomain(format!("step must be > 0, got {step}")));
        }
        if k_max < 1 {
            return Err(Error::ParameterDomain("k_max must be >= 1".into()));
        }
        let scale = step.powf(hurst) * kappa_h(hurst);
        let raw_a0 = scale * 2f64.powf(0.5 - hurst);
        let e = hurst - 0.5;
        let mut values = vec![1.0];
        values.extend((1..=k_max).map(|k| {
            let k = k as f64;
            scale * ((k + 0.5).powf(e) - (k - 0.5).powf(e)) / raw_a0
        }));
        Ok(Self {
            family: Family::Fbm { hurst, step },
            values,
            tail_exponent: Some(1.5 - hurst),
            raw_a0: Some(raw_a0),
        })
    }

    /// Wraps caller-supplied values. `a_0` must be nonzero; values are
    /// normalized so the stored `a_0` is 1.
    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::ParameterDomain("custom kernel needs at least a_0, a_1".into()));
        }
        let a0 = values[0];
        if a0 == 0.0 || !a0.is_finite() {
            return Err(Error::NonInvertible(format!("custom kernel has a_0 = {a0}")));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "custom kernel entry {bad} is not finite"
            )));
        }
        let values = values.iter().map(|v| v / a0).collect();
        Ok(Self { family: Family::Custom, values, tail_exponent: None, raw_a0: Some(a0) })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest stored index `K` (the truncation length).
    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `a_k`, treating indices beyond the truncation as zero.
    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn tail_exponent(&self) -> Option<f64> {
        self.tail_exponent
    }

    /// Raw `a_0` before normalization, where that differs from 1.
    pub fn raw_a0(&self) -> Option<f64> {
        self.raw_a0
    }

    /// `Σ_{k=0}^{K} a_k²` over the stored truncation.
    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Upper bound on the discarded tail `Σ_{k>k0} a_k²`, from the family's
    /// decay parameters. `None` when the family gives no tail information.
    pub fn tail_sum_sq_beyond(&self, k0: usize) -> Option<f64> {
        match self.family {
            Family::Exponential { c_a, lambda } => {
                let q = (-2.0 * lambda).exp();
                Some(c_a * c_a * q.powi(k0 as i32 + 1) / (1.0 - q))
            }
            Family::Polynomial { .. } | Family::Fbm { .. } => {
                let rho = self.tail_exponent?;
                // Empirical constant with |a_k| <= c (k+1)^{-rho} over the
                // stored range; exact 1 for the polynomial family.
                let c = self
                    .values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v.abs() * ((k + 1) as f64).powf(rho))
                    .fold(0.0f64, f64::max);
                Some(c * c * ((k0 + 1) as f64).powf(1.0 - 2.0 * rho) / (2.0 * rho - 1.0))
            }
            Family::Custom => None,
        }
    }

    /// Extends the truncation with zeros, keeping family metadata. Useful
    /// when the reciprocal sequence is needed beyond the kernel's support
    /// (a finitely supported kernel has an infinitely supported inverse).
    pub fn zero_padded(&self, k_max: usize) -> CoefficientSequence {
        let mut values = self.values.clone();
        if values.len() < k_max + 1 {
            values.resize(k_max + 1, 0.0);
        }
        CoefficientSequence {
            family: self.family,
            values,
            tail_exponent: self.tail_exponent,
            raw_a0: self.raw_a0,
        }
    }

    /// For the exponential family: true when `ζ = λ - ln|1-C_a| ≤ 0`, in
    /// which case the reciprocal sequence `(b_k)` diverges even though
    /// `(a_k)` decays. Always false for the other families.
    pub fn inverse_divergence_warning(&self) -> bool {
        match self.family {
            Family::Exponential { c_a, lambda } => exp_zeta(c_a, lambda) <= 0.0,
            _ => false,
        }
    }
}

/// Decay exponent `ζ = λ - ln|1-C_a|` of the reciprocal of an exponential
/// kernel; `+∞` when `C_a = 1` (the reciprocal terminates).
pub fn exp_zeta(c_a: f64, lambda: f64) -> f64 {
    if c_a == 1.0 {
        f64::INFINITY
    } else {
        lambda - (1.0 - c_a).abs().ln()
    }
}

/// Covariance values `c(k) = Σ_i a_i a_{k+i}` of the noise, truncated to
/// the stored kernel, with a per-entry bound on the truncation error.
#[derive(Debug, Clone)]
pub struct CovarianceTable {
    values: Vec<f64>,
    truncation_error_bound: Option<f64>,
}

impl CovarianceTable {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Per-entry bound on the dropped tail of the defining sum, or `None`
    /// when the family carries no tail information.
    pub fn truncation_error_bound(&self) -> Option<f64> {
        self.truncation_error_bound
    }
}

/// Computes `c(0)..c(k_max)` by the truncated sum. Requires
/// `k_max ≤ K/2` so every entry retains at least `K/2` terms.
pub fn covariance(a: &CoefficientSequence, k_max: usize) -> Result<CovarianceTable> {
    let k = a.k_max();
    if k_max > k / 2 {
        return Err(Error::TruncationDomain(format!(
            "covariance lag {k_max} exceeds K/2 = {} for K = {k}",
            k / 2
        )));
    }
    let v = a.values();
    let values = (0..=k_max)
        .map(|lag| v[..=k - lag].iter().zip(&v[lag..]).map(|(x, y)| x * y).sum())
        .collect();
    // Dropped terms all have index > K/2 in at least one factor; bound by
    // Cauchy-Schwarz against the family tail.
    let truncation_error_bound = a.tail_sum_sq_beyond(k / 2).map(|t| (t * a.sum_sq()).sqrt());
    Ok(CovarianceTable { values, truncation_error_bound })
}

/// Empirical constants for the polynomial decay hypothesis on a kernel:
/// the minimal `C_ρ` with `|a_k| ≤ C_ρ (k+1)^{-ρ}` and the minimal `C_κ`
/// with `|a_k - a_{k+1}| ≤ C_κ (k+1)^{-κ}` over the stored range.
#[derive(Debug, Clone, Copy)]
pub struct HypothesisReport {
    pub rho: f64,
    pub kappa: f64,
    pub c_rho: f64,
    pub c_kappa: f64,
    /// Whether `κ ≥ ρ + 1`, the discrete-derivative condition.
    pub kappa_dominates: bool,
}

/// Scans the stored values for the minimal hypothesis constants. These are
/// empirical over the truncation, not a proof for the infinite sequence.
pub fn check_hypothesis_poly(a: &CoefficientSequence, rho: f64, kappa: f64) -> HypothesisReport {
    let v = a.values();
    let c_rho = v
        .iter()
        .enumerate()
        .map(|(k, x)| x.abs() * ((k + 1) as f64).powf(rho))
        .fold(0.0f64, f64::max);
    let c_kappa = v
        .windows(2)
        .enumerate()
        .map(|(k, w)| (w[0] - w[1]).abs() * ((k + 1) as f64).powf(kappa))
        .fold(0.0f64, f64::max);
    HypothesisReport { rho, kappa, c_rho, c_kappa, kappa_dominates: kappa >= rho + 1.0 }
}

/// True iff the kernel is log-convex: `a_k ≥ 0` for all stored `k` and
/// `a_k² ≤ a_{k-1} a_{k+1}` for `1 ≤ k ≤ K-1`. Log-convex kernels have
/// non-positive reciprocal coefficients dominated by `b_0 a_k`.
pub fn check_log_convex(a: &CoefficientSequence) -> bool {
    let v = a.values();
    if v.iter().any(|&x| x < 0.0) {
        return false;
    }
    v.windows(3).all(|w| w[1] * w[1] <= w[0] * w[2])
}

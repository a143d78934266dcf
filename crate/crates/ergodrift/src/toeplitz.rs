//! Inversion of the moving-average kernel as a triangular Toeplitz
//! operator.
//!
//! Convolution by `(a_k)` on one-sided sequences is a lower-triangular
//! Toeplitz matrix; its inverse is convolution by the reciprocal sequence
//! `(b_k)` defined by
//!
//! ```text
//! b_0 = 1/a_0,    b_k = -(1/a_0) Σ_{l=1..k} a_l b_{k-l}
//! ```
//!
//! The recursion is the ground truth here. Two independent cross-checks
//! are provided: an exhaustive composition-sum formula (valid for small k)
//! and a closed form for the exponential family. The module also estimates
//! decay exponents of sequences by log-log regression and verifies the
//! non-positivity/domination bound available for log-convex kernels.

use crate::coeffs::{check_log_convex, exp_zeta, CoefficientSequence, Family};
use crate::stats::linear_fit;
use crate::{Error, Result};

/// How an [`InverseSequence`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseSource {
    Recursion,
    Combinatorial,
    ClosedFormExp,
}

/// A truncation `b_0..b_K` of the reciprocal kernel.
#[derive(Debug, Clone)]
pub struct InverseSequence {
    values: Vec<f64>,
    source: InverseSource,
    /// Analytic decay parameter where one is known: ζ for exponential
    /// kernels, ρ for log-convex polynomial ones, H + 1/2 for fractional
    /// kernels with H < 1/2. `None` when only fitted slopes are available.
    zeta_or_beta: Option<f64>,
}

impl InverseSequence {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn source(&self) -> InverseSource {
        self.source
    }

    pub fn zeta_or_beta(&self) -> Option<f64> {
        self.zeta_or_beta
    }

    /// Wraps raw values read back from a file.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ParameterDomain("empty inverse sequence".into()));
        }
        Ok(Self { values, source: InverseSource::Recursion, zeta_or_beta: None })
    }
}

fn analytic_inverse_decay(a: &CoefficientSequence) -> Option<f64> {
    match a.family() {
        Family::Exponential { c_a, lambda } => {
            let z = exp_zeta(c_a, lambda);
            (z > 0.0).then_some(z)
        }
        Family::Polynomial { rho } => Some(rho),
        Family::Fbm { hurst, .. } => (hurst < 0.5).then_some(hurst + 0.5),
        Family::Custom => None,
    }
}

/// Computes `b_0..b_K` by the defining recursion. `O(K²)`.
pub fn invert_coeffs(a: &CoefficientSequence) -> Result<InverseSequence> {
    let av = a.values();
    let a0 = av[0];
    if a0 == 0.0 {
        return Err(Error::NonInvertible("a_0 = 0".into()));
    }
    let k_max = a.k_max();
    let mut b = Vec::with_capacity(k_max + 1);
    b.push(1.0 / a0);
    for k in 1..=k_max {
        // b_k = -(1/a0) Σ_{l=1..k} a_l b_{k-l}; Neumaier compensation keeps
        // the long dot products from drifting at large K.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (al, bl) in av[1..=k].iter().zip(b[..k].iter().rev()) {
            let term = al * bl;
            let t = sum + term;
            comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
            sum = t;
        }
        b.push(-(sum + comp) / a0);
    }
    Ok(InverseSequence { values: b, source: InverseSource::Recursion, zeta_or_beta: analytic_inverse_decay(a) })
}

/// Computes `b_0..b_{k_max}` by exhaustive enumeration of integer
/// compositions:
///
/// ```text
/// b_k = Σ_{p=1..k} (-1)^p / a_0^{p+1}  Σ_{k_1+..+k_p = k, k_i ≥ 1}  Π a_{k_i}
/// ```
///
/// A composition of `k` corresponds to a subset of the `k-1` gap positions,
/// so the cost is `Θ(2^k)` per coefficient; `k_max` is capped at 20. This
/// path shares no code with the recursion and serves as its oracle.
pub fn invert_coeffs_combinatorial(a: &CoefficientSequence, k_max: usize) -> Result<InverseSequence> {
    if k_max > 20 {
        return Err(Error::ComplexityGuard(format!(
            "combinatorial inversion enumerates 2^(k-1) compositions; k_max = {k_max} > 20"
        )));
    }
    let av = a.values();
    let a0 = av[0];
    if a0 == 0.0 {
        return Err(Error::NonInvertible("a_0 = 0".into()));
    }
    if k_max > a.k_max() {
        return Err(Error::TruncationDomain(format!(
            "k_max = {k_max} exceeds stored kernel length {}",
            a.k_max()
        )));
    }
    let mut b = vec![1.0 / a0];
    for k in 1..=k_max {
        let mut total = 0.0f64;
        // Bit i of mask set <=> a bar between positions i and i+1.
        for mask in 0u64..(1u64 << (k - 1)) {
            let mut product = 1.0f64;
            let mut parts = 1u32;
            let mut part_len = 1usize;
            for i in 0..k - 1 {
                if mask >> i & 1 == 1 {
                    product *= av[part_len];
                    parts += 1;
                    part_len = 1;
                } else {
                    part_len += 1;
                }
            }
            product *= av[part_len];
            let sign = if parts % 2 == 1 { -1.0 } else { 1.0 };
            total += sign * product / a0.powi(parts as i32 + 1);
        }
        b.push(total);
    }
    Ok(InverseSequence { values: b, source: InverseSource::Combinatorial, zeta_or_beta: None })
}

/// Closed form `b_k = -C_a (1-C_a)^{k-1} e^{-λk}` for the exponential
/// kernel, valid for `k ≥ 1` (callers use `b_0 = 1`).
pub fn exp_closed_form_b(c_a: f64, lambda: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::ParameterDomain("closed form applies to k >= 1; b_0 = 1".into()));
    }
    Ok(-c_a * (1.0 - c_a).powi(k as i32 - 1) * (-lambda * k as f64).exp())
}

/// Causal convolution of a finite sequence with a kernel:
/// `out[n] = Σ_{l=0..min(n,K)} kernel[l] w[n-l]`, oldest entry first.
///
/// Applying the reciprocal kernel after the kernel (or vice versa)
/// reproduces `w` exactly.
pub fn apply_t(kernel: &[f64], w: &[f64]) -> Vec<f64> {
    let k_max = kernel.len() - 1;
    (0..w.len())
        .map(|n| {
            let lo = n.saturating_sub(k_max);
            kernel[..=n - lo].iter().zip(w[lo..=n].iter().rev()).map(|(a, x)| a * x).sum()
        })
        .collect()
}

/// Residual of the convolution identity `Σ_{k=0..i} b_k a_{i-k} = 1{i=0}`:
/// the largest deviation over `0 ≤ i ≤ min(K_a, K_b)`.
pub fn convolution_identity_residual(a: &CoefficientSequence, b: &InverseSequence) -> f64 {
    let n = a.k_max().min(b.k_max());
    let conv = apply_t(a.values(), &b.values()[..=n]);
    conv.iter()
        .enumerate()
        .map(|(i, &c)| if i == 0 { (c - 1.0).abs() } else { c.abs() })
        .fold(0.0, f64::max)
}

/// Least-squares fit of `log|seq[k]|` against `log(k+1)`.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub k_range: (usize, usize),
    pub residual_rms: f64,
    /// Exactly-zero entries inside the fit range, excluded from the fit.
    pub dropped_zeros: usize,
}

/// Fits a decay exponent over `k ∈ [k_min, k_max]`. Requires `k_min ≥ 1`
/// and `k_max > 2 k_min` (at least a factor-two span on the log axis);
/// zero entries are dropped, and fewer than 10 usable points is an error.
pub fn estimate_decay_exponent(seq: &[f64], k_min: usize, k_max: usize) -> Result<SlopeFit> {
    if k_min < 1 || k_max <= 2 * k_min {
        return Err(Error::ParameterDomain(format!(
            "fit range requires 1 <= k_min and k_max > 2 k_min, got [{k_min}, {k_max}]"
        )));
    }
    if k_max >= seq.len() {
        return Err(Error::TruncationDomain(format!(
            "k_max = {k_max} out of bounds for sequence of length {}",
            seq.len()
        )));
    }
    let mut xs = Vec::with_capacity(k_max - k_min + 1);
    let mut ys = Vec::with_capacity(k_max - k_min + 1);
    let mut dropped = 0usize;
    for k in k_min..=k_max {
        let v = seq[k].abs();
        if v == 0.0 {
            dropped += 1;
        } else {
            xs.push(((k + 1) as f64).ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "only {} nonzero points in [{k_min}, {k_max}]; need at least 10",
            xs.len()
        )));
    }
    let fit = linear_fit(&xs, &ys);
    Ok(SlopeFit {
        slope: fit.slope,
        intercept: fit.intercept,
        k_range: (k_min, k_max),
        residual_rms: fit.residual_rms,
        dropped_zeros: dropped,
    })
}

/// Outcome of the log-convex domination check `b_k ≤ 0`,
/// `|b_k| ≤ b_0 a_k`.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    /// Largest positive `b_k / (b_0 a_k)` over `k ≥ 1` (0 when every sign
    /// is correct).
    pub max_sign_violation: f64,
    /// Largest `(|b_k| - b_0 a_k) / (b_0 a_k)` over `k ≥ 1`.
    pub max_domination_violation: f64,
    pub pass: bool,
}

const BOUND_TOL: f64 = 1e-12;

/// Checks the reciprocal of a log-convex kernel for non-positivity and
/// domination by `b_0 a_k`. Errors if the kernel is not log-convex.
pub fn log_convex_bound_check(a: &CoefficientSequence, b: &InverseSequence) -> Result<BoundReport> {
    if !check_log_convex(a) || a.values()[0] <= 0.0 {
        return Err(Error::Inapplicable("kernel is not log-convex with a_0 > 0".into()));
    }
    let b0 = b.values()[0];
    let n = a.k_max().min(b.k_max());
    let mut max_sign = 0.0f64;
    let mut max_dom = f64::NEG_INFINITY;
    for k in 1..=n {
        let scale = (b0 * a.get(k)).max(f64::MIN_POSITIVE);
        max_sign = max_sign.max(b.get(k) / scale);
        max_dom = max_dom.max((b.get(k).abs() - b0 * a.get(k)) / scale);
    }
    Ok(BoundReport {
        max_sign_violation: max_sign,
        max_domination_violation: max_dom,
        pass: max_sign <= BOUND_TOL && max_dom <= BOUND_TOL,
    })
}

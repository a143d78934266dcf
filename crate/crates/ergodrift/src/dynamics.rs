//! Euler-scheme state updates and the affine hitting map.
//!
//! The state map is `F_h(x, w) = x + h b(x) + σ(x) w` with an invertible
//! diffusion matrix. Two sampled hypothesis checks are provided: the
//! step-size bound under which the drift inequalities transfer to `F_h`,
//! and a Lyapunov-drift inequality `V(F(x,w)) ≤ γV(x) + C(1+|w|)` tested
//! on a point cloud.
//!
//! For coupling, two trajectories at positions `x, x'` with memory terms
//! `y, y'` are glued in one step by the affine map
//!
//! ```text
//! Λ(u) = A u + B,   A = σ^{-1}(x')σ(x),
//! B = σ^{-1}(x')(x - x' + h(b(x) - b(x'))) + A y - y'
//! ```
//!
//! which satisfies `F_h(x, u + y) = F_h(x', Λ(u) + y')` for every `u`.
//! The affine map is a global bijection for the Euler family, so it is
//! used on all of R^d; this keeps the pair sampler's marginals exact, and
//! the displacement `|Λ(u) - u|` is reported empirically on the region of
//! interest rather than enforced by a localized construction.

use crate::rng::{CounterRng, SeedDescriptor};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Drift constants: `⟨x, b(x)⟩ ≤ β̃ - α̃|x|²` and `|b(x)| ≤ C(1+|x|)`.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovParams {
    pub alpha_tilde: f64,
    pub beta_tilde: f64,
    pub growth: f64,
}

/// A state-update model `F_h(x, w) = x + h b(x) + σ(x) w`.
#[derive(Clone)]
pub struct EulerModel {
    drift: VecFn,
    diffusion: MatFn,
    diffusion_inv: MatFn,
    step: f64,
    dim: usize,
    lyapunov: Option<LyapunovParams>,
}

impl std::fmt::Debug for EulerModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EulerModel")
            .field("step", &self.step)
            .field("dim", &self.dim)
            .field("lyapunov", &self.lyapunov)
            .finish()
    }
}

/// `true` iff `0 < h < min{ sqrt(1 + α̃/(2C²)) - 1, 1/α̃ }`, the step
/// bound under which the drift hypotheses carry over to `F_h`.
pub fn check_h_bound(alpha_tilde: f64, growth: f64, h: f64) -> Result<bool> {
    if !(alpha_tilde > 0.0 && growth > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "h-bound needs alpha_tilde > 0 and C > 0, got ({alpha_tilde}, {growth})"
        )));
    }
    let threshold =
        ((1.0 + alpha_tilde / (2.0 * growth * growth)).sqrt() - 1.0).min(1.0 / alpha_tilde);
    Ok(h > 0.0 && h < threshold)
}

impl EulerModel {
    /// Assembles a model from its pieces and validates that the supplied
    /// inverse actually inverts the diffusion (to 1e-10, on a small point
    /// cloud). With `enforce_h_bound` set, also rejects steps outside the
    /// admissible range for the given drift constants.
    pub fn new(
        drift: VecFn,
        diffusion: MatFn,
        diffusion_inv: MatFn,
        step: f64,
        dim: usize,
        lyapunov: Option<LyapunovParams>,
        enforce_h_bound: bool,
    ) -> Result<Self> {
        if dim == 0 || !(step > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "need dim >= 1 and step > 0, got dim = {dim}, step = {step}"
            )));
        }
        if enforce_h_bound {
            let lp = lyapunov.ok_or_else(|| {
                Error::ParameterDomain("h-bound enforcement needs drift constants".into())
            })?;
            if !check_h_bound(lp.alpha_tilde, lp.growth, step)? {
                return Err(Error::ParameterDomain(format!(
                    "step {step} violates the admissible bound for alpha_tilde = {}, C = {}",
                    lp.alpha_tilde, lp.growth
                )));
            }
        }
        let model = Self { drift, diffusion, diffusion_inv, step, dim, lyapunov };
        model.validate_inverse()?;
        Ok(model)
    }

    fn validate_inverse(&self) -> Result<()> {
        let mut rng = CounterRng::new(SeedDescriptor::new(0x5157_u64, 0));
        let mut points = vec![vec![0.0; self.dim]];
        for i in 0..self.dim {
            for &r in &[1.0, -2.0] {
                let mut x = vec![0.0; self.dim];
                x[i] = r;
                points.push(x);
            }
        }
        for _ in 0..8 {
            points.push((0..self.dim).map(|_| 4.0 * (rng.next_uniform() - 0.5)).collect());
        }
        for x in &points {
            let prod = (self.diffusion)(x) * (self.diffusion_inv)(x);
            let residual = (&prod - DMatrix::<f64>::identity(self.dim, self.dim)).abs().max();
            if residual > 1e-10 {
                return Err(Error::ParameterDomain(format!(
                    "diffusion inverse is off by {residual:.3e} at {x:?}"
                )));
            }
        }
        Ok(())
    }

    /// Ornstein-Uhlenbeck drift `b(x) = -κx` with constant diffusion
    /// `σ = s I`. Drift constants are `α̃ = κ`, `β̃ = 0`, `C = κ`.
    pub fn ornstein_uhlenbeck(
        dim: usize,
        kappa: f64,
        sigma_scale: f64,
        step: f64,
        enforce_h_bound: bool,
    ) -> Result<Self> {
        if !(kappa > 0.0 && sigma_scale > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "need kappa > 0 and sigma > 0, got ({kappa}, {sigma_scale})"
            )));
        }
        let lp = LyapunovParams { alpha_tilde: kappa, beta_tilde: 0.0, growth: kappa.max(1e-12) };
        Self::new(
            Arc::new(move |x: &[f64]| x.iter().map(|v| -kappa * v).collect()),
            Arc::new(move |x: &[f64]| DMatrix::identity(x.len(), x.len()) * sigma_scale),
            Arc::new(move |x: &[f64]| DMatrix::identity(x.len(), x.len()) / sigma_scale),
            step,
            dim,
            Some(lp),
            enforce_h_bound,
        )
    }

    /// Ornstein-Uhlenbeck drift with a bounded smooth diagonal diffusion
    /// `σ_ii(x) = s (1 + x_i²/(1 + x_i²))`, ranging over `[s, 2s)`.
    pub fn ou_bounded_sigma(
        dim: usize,
        kappa: f64,
        sigma_scale: f64,
        step: f64,
        enforce_h_bound: bool,
    ) -> Result<Self> {
        if !(kappa > 0.0 && sigma_scale > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "need kappa > 0 and sigma > 0, got ({kappa}, {sigma_scale})"
            )));
        }
        let lp = LyapunovParams { alpha_tilde: kappa, beta_tilde: 0.0, growth: kappa.max(1e-12) };
        let diag = move |x: &[f64]| -> Vec<f64> {
            x.iter().map(|&v| sigma_scale * (1.0 + v * v / (1.0 + v * v))).collect()
        };
        Self::new(
            Arc::new(move |x: &[f64]| x.iter().map(|v| -kappa * v).collect()),
            Arc::new(move |x: &[f64]| DMatrix::from_diagonal(&DVector::from_vec(diag(x)))),
            Arc::new(move |x: &[f64]| {
                DMatrix::from_diagonal(&DVector::from_iterator(
                    x.len(),
                    diag(x).into_iter().map(|d| 1.0 / d),
                ))
            }),
            step,
            dim,
            Some(lp),
            enforce_h_bound,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lyapunov_params(&self) -> Option<LyapunovParams> {
        self.lyapunov
    }

    pub fn drift_at(&self, x: &[f64]) -> Vec<f64> {
        (self.drift)(x)
    }

    pub fn sigma_at(&self, x: &[f64]) -> DMatrix<f64> {
        (self.diffusion)(x)
    }

    pub fn sigma_inv_at(&self, x: &[f64]) -> DMatrix<f64> {
        (self.diffusion_inv)(x)
    }

    /// One state update `x + h b(x) + σ(x) w`.
    pub fn euler_map(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(w.len(), self.dim);
        let b = (self.drift)(x);
        let sw = (self.diffusion)(x) * DVector::from_column_slice(w);
        x.iter()
            .zip(b.iter().zip(sw.iter()))
            .map(|(&xi, (&bi, &si))| xi + self.step * bi + si)
            .collect()
    }
}

/// Sampling plan for the Lyapunov-drift check: a deterministic pseudo
/// random cloud of `(x, w)` pairs with `|x_i| ≤ x_radius`,
/// `|w_i| ≤ w_radius`.
#[derive(Debug, Clone, Copy)]
pub struct SampleSpec {
    pub count: usize,
    pub x_radius: f64,
    pub w_radius: f64,
    pub seed: u64,
}

/// Outcome of the sampled Lyapunov-drift check.
#[derive(Debug, Clone)]
pub struct LyapunovReport {
    /// Largest `V(F(x,w)) - γV(x) - C(1+|w|)` over the cloud.
    pub max_excess: f64,
    pub pass: bool,
    pub worst_x: Vec<f64>,
    pub worst_w: Vec<f64>,
}

/// Evaluates `V(F(x,w)) ≤ γV(x) + C(1+|w|)` on a sampled cloud.
/// `γ` must lie strictly inside `(0,1)`.
pub fn check_lyapunov_sample(
    model: &EulerModel,
    v: &dyn Fn(&[f64]) -> f64,
    gamma: f64,
    c: f64,
    spec: &SampleSpec,
) -> Result<LyapunovReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::ParameterDomain(format!(
            "gamma must lie strictly inside (0,1), got {gamma}"
        )));
    }
    let mut rng = CounterRng::new(SeedDescriptor::new(spec.seed, 0));
    let d = model.dim();
    let mut max_excess = f64::NEG_INFINITY;
    let mut worst_x = vec![0.0; d];
    let mut worst_w = vec![0.0; d];
    for _ in 0..spec.count {
        let x: Vec<f64> =
            (0..d).map(|_| spec.x_radius * 2.0 * (rng.next_uniform() - 0.5)).collect();
        let w: Vec<f64> =
            (0..d).map(|_| spec.w_radius * 2.0 * (rng.next_uniform() - 0.5)).collect();
        let fx = model.euler_map(&x, &w);
        let wnorm = w.iter().map(|t| t * t).sum::<f64>().sqrt();
        let excess = v(&fx) - gamma * v(&x) - c * (1.0 + wnorm);
        if excess > max_excess {
            max_excess = excess;
            worst_x = x;
            worst_w = w;
        }
    }
    Ok(LyapunovReport { max_excess, pass: max_excess <= 0.0, worst_x, worst_w })
}

/// Inputs of the hitting map: the two positions and the two memory terms
/// `y^i = Σ_{k≥1} a_k ξ^i_{n+1-k}`.
#[derive(Debug, Clone)]
pub struct HittingMapParams {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

/// An invertible affine map `u ↦ A u + B` with cached inverse and
/// log-determinant; the Gaussian pair sampler consumes this interface.
#[derive(Debug, Clone)]
pub struct AffineBijection {
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    b: DVector<f64>,
    log_abs_det: f64,
}

const MAX_CONDITION: f64 = 1e12;

impl AffineBijection {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let dim = a.nrows();
        if a.ncols() != dim || b.len() != dim {
            return Err(Error::ParameterDomain("affine map shape mismatch".into()));
        }
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 0.0) || smax / smin > MAX_CONDITION {
            return Err(Error::Conditioning(format!(
                "affine map condition number {:.3e} exceeds {MAX_CONDITION:.0e}",
                smax / smin.max(f64::MIN_POSITIVE)
            )));
        }
        let a_inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Conditioning("affine map is singular".into()))?;
        let log_abs_det = svd.singular_values.iter().map(|s| s.ln()).sum();
        Ok(Self { a, a_inv, b, log_abs_det })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            a: DMatrix::identity(dim, dim),
            a_inv: DMatrix::identity(dim, dim),
            b: DVector::zeros(dim),
            log_abs_det: 0.0,
        }
    }

    pub fn translation(shift: &[f64]) -> Self {
        let dim = shift.len();
        Self {
            a: DMatrix::identity(dim, dim),
            a_inv: DMatrix::identity(dim, dim),
            b: DVector::from_column_slice(shift),
            log_abs_det: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (&self.a * DVector::from_column_slice(u) + &self.b).data.into()
    }

    pub fn apply_inv(&self, v: &[f64]) -> Vec<f64> {
        (&self.a_inv * (DVector::from_column_slice(v) - &self.b)).data.into()
    }

    /// `log |det J_Λ|`; constant in `u` for an affine map.
    pub fn log_abs_det_jacobian(&self) -> f64 {
        self.log_abs_det
    }

    /// `ln D_Λ(u) = (|u|² - |Λ(u)|²)/2 + log|det J_Λ|`, the log density
    /// ratio used by the pair sampler.
    pub fn log_density_ratio_forward(&self, u: &[f64]) -> f64 {
        let v = self.apply(u);
        let nu: f64 = u.iter().map(|t| t * t).sum();
        let nv: f64 = v.iter().map(|t| t * t).sum();
        0.5 * (nu - nv) + self.log_abs_det
    }

    /// `ln D_{Λ^{-1}}(v)`, the same quantity for the inverse map.
    pub fn log_density_ratio_inverse(&self, v: &[f64]) -> f64 {
        let u = self.apply_inv(v);
        let nv: f64 = v.iter().map(|t| t * t).sum();
        let nu: f64 = u.iter().map(|t| t * t).sum();
        0.5 * (nv - nu) - self.log_abs_det
    }
}

/// Builds the affine hitting map for the given positions and memory
/// terms. Errors when the matrix `σ^{-1}(x')σ(x)` is ill-conditioned.
pub fn hitting_map(model: &EulerModel, params: &HittingMapParams) -> Result<AffineBijection> {
    let d = model.dim();
    if [&params.x1, &params.x2, &params.y1, &params.y2].iter().any(|v| v.len() != d) {
        return Err(Error::ParameterDomain("hitting map parameter dimension mismatch".into()));
    }
    let sig1 = model.sigma_at(&params.x1);
    let sig2_inv = model.sigma_inv_at(&params.x2);
    let a = &sig2_inv * &sig1;

    let b1 = model.drift_at(&params.x1);
    let b2 = model.drift_at(&params.x2);
    let h = model.step();
    let gap = DVector::from_iterator(
        d,
        params
            .x1
            .iter()
            .zip(&params.x2)
            .zip(b1.iter().zip(&b2))
            .map(|((x1, x2), (b1, b2))| x1 - x2 + h * (b1 - b2)),
    );
    let offset = &sig2_inv * gap + &a * DVector::from_column_slice(&params.y1)
        - DVector::from_column_slice(&params.y2);
    AffineBijection::new(a, offset)
}

/// Evaluates the hitting map at `u`.
pub fn lambda_map(model: &EulerModel, params: &HittingMapParams, u: &[f64]) -> Result<Vec<f64>> {
    Ok(hitting_map(model, params)?.apply(u))
}

/// `log |det J_Λ|` of the hitting map.
pub fn lambda_jacobian_logdet(model: &EulerModel, params: &HittingMapParams) -> Result<f64> {
    Ok(hitting_map(model, params)?.log_abs_det_jacobian())
}

//! Coalescent coupling of two trajectories driven by moving-average
//! Gaussian noise.
//!
//! Two copies of the dynamics start from a shared noise past and
//! different positions. Coupling proceeds in repeated trials:
//!
//! 1. **Hitting.** At an admissible time `τ` the positions are glued at
//!    `τ+1` by drawing the innovation pair from [`sample_hitting_pair`]
//!    with the affine hitting map of the dynamics.
//! 2. **Sticking.** Because the noise has memory, staying glued costs a
//!    drift: the innovations must differ by exactly the sticking drift
//!    `g_k = -Σ_{l≥1} a_l g_{k-l}`. The engine enforces this on a
//!    schedule of geometrically growing intervals via
//!    [`interval_coupling`], whose per-interval failure probability is
//!    summable.
//! 3. **Waiting.** On failure both sides receive identical innovations
//!    for a duration that grows with the trial index and the failed
//!    interval, letting the accumulated drift decay until the next
//!    attempt is admissible again.
//!
//! The time `τ∞` from which the paths agree forever bounds the total
//! variation distance between the running law and the stationary regime,
//! and its tail is estimated by Monte Carlo over independent replicas.

mod engine;
mod samplers;
mod schedule;
mod tail;

pub use engine::{
    admissibility_check, run_coupling, run_coupling_with_state, successful_drift,
    AdmissibilityReport, CoupledSystem, CouplingTrace, Phase, TraceEvent, TrialRecord,
};
pub use samplers::{
    interval_coupling, sample_hitting_pair, translation_coupling_1d,
    translation_stick_probability, Branch, PairBijection,
};
pub use schedule::{interval_schedule, step3_duration};
pub use tail::{estimate_tv_tail, SoundnessSummary, TailEstimate, TailFit};

use crate::{Error, Result};

/// Decay regime of the coupling configuration, carrying the admissibility
/// exponent `α` and the kernel/reciprocal decay parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingMode {
    /// `|a_k| ≤ C(k+1)^{-ρ}`, `|b_k| ≤ C(k+1)^{-β}`; admissibility speed
    /// `v_n = (n+1)^{-α}`.
    Poly { alpha: f64, rho: f64, beta: f64 },
    /// `|a_k| ≤ Ce^{-λk}`, `|b_k| ≤ Ce^{-ζk}`; admissibility speed
    /// `v_n = e^{-αn}`.
    Exp { alpha: f64, lambda: f64, zeta: f64 },
}

impl CouplingMode {
    /// Admissibility speed `v_n`.
    pub fn speed(&self, n: u64) -> f64 {
        match self {
            CouplingMode::Poly { alpha, .. } => ((n + 1) as f64).powf(-alpha),
            CouplingMode::Exp { alpha, .. } => (-alpha * n as f64).exp(),
        }
    }

    /// Exponent `α̃` of the per-interval drift budgets `2^{-α̃ℓ}`:
    /// `min{α, β, α+β-1} - 1/2 - ε` in polynomial mode (ε = 0 away from
    /// the boundary set `{α=1, β≤1} ∪ {β=1, α≤1}`, 0.01 on it) and
    /// `min(α, ζ)` in exponential mode.
    pub fn alpha_tilde(&self) -> f64 {
        match *self {
            CouplingMode::Poly { alpha, beta, .. } => {
                let on_boundary =
                    (alpha == 1.0 && beta <= 1.0) || (beta == 1.0 && alpha <= 1.0);
                let eps = if on_boundary { 0.01 } else { 0.0 };
                alpha.min(beta).min(alpha + beta - 1.0) - 0.5 - eps
            }
            CouplingMode::Exp { alpha, zeta, .. } => alpha.min(zeta),
        }
    }
}

/// Tunables of the coupling engine. Field names double as the config-file
/// keys of the command-line front end.
#[derive(Debug, Clone)]
pub struct CouplingConfig {
    pub mode: CouplingMode,
    /// Admissibility radius `K`: positions and memory terms must lie in
    /// the centered ball of this radius for an attempt to start.
    pub adm_radius: f64,
    /// Acceptance radius `K₁` of the hitting step; a forward draw counts
    /// as a hit only when `|Z₁| ≤ K₁`.
    pub hit_radius: f64,
    /// Base length of the sticking intervals (`≥ 2`). Doubled
    /// automatically when first-interval drifts repeatedly exceed the
    /// budget cap.
    pub c2: u64,
    /// Base duration of the waiting step.
    pub t_star: f64,
    /// Per-trial growth factor of the waiting step (`> 1`).
    pub varsigma: f64,
    /// Failed-interval exponent of the waiting step; polynomial mode
    /// requires `θ > 1/(2(ρ-α))`.
    pub theta: f64,
    /// Maximum simulated time.
    pub horizon: u64,
    /// Cap on the adaptively estimated first-interval budget.
    pub budget_cap: f64,
    /// How many admissibility-tail indices to scan.
    pub n_check: usize,
    /// Initial positions of the two copies.
    pub x0_1: Vec<f64>,
    pub x0_2: Vec<f64>,
}

impl CouplingConfig {
    /// A starting point with mode-appropriate defaults; callers override
    /// fields as needed.
    pub fn new(mode: CouplingMode, dim: usize, horizon: u64) -> Self {
        Self {
            mode,
            adm_radius: 6.0,
            hit_radius: 6.0,
            c2: 4,
            t_star: 20.0,
            varsigma: 1.5,
            theta: match mode {
                CouplingMode::Poly { alpha, rho, .. } => 1.0 / (2.0 * (rho - alpha)) + 0.5,
                CouplingMode::Exp { .. } => 1.0,
            },
            horizon,
            budget_cap: 8.0,
            n_check: 512,
            x0_1: vec![0.0; dim],
            x0_2: vec![1.0 / (dim as f64).sqrt(); dim],
        }
    }

    /// Checks every structural inequality, naming the violated one.
    pub fn validate(&self) -> Result<()> {
        if self.c2 < 2 {
            return Err(Error::Config("require c2 >= 2".into()));
        }
        if !(self.t_star > 0.0) {
            return Err(Error::Config("require t_star > 0".into()));
        }
        if !(self.varsigma > 1.0) {
            return Err(Error::Config("require varsigma > 1".into()));
        }
        if !(self.adm_radius > 0.0) || !(self.hit_radius > 0.0) {
            return Err(Error::Config("require K > 0 and K1 > 0".into()));
        }
        if !(self.budget_cap > 0.0) {
            return Err(Error::Config("require budget_cap > 0".into()));
        }
        if self.x0_1.len() != self.x0_2.len() || self.x0_1.is_empty() {
            return Err(Error::Config("initial positions must share a nonzero dimension".into()));
        }
        match self.mode {
            CouplingMode::Poly { alpha, rho, beta } => {
                if !(beta > 0.5) {
                    return Err(Error::Config("require beta > 1/2".into()));
                }
                if !(alpha > 0.5f64.max(1.5 - beta)) {
                    return Err(Error::Config("require alpha > max(1/2, 3/2 - beta)".into()));
                }
                if !(alpha < rho) {
                    return Err(Error::Config("require alpha < rho".into()));
                }
                if !(self.theta > 1.0 / (2.0 * (rho - alpha))) {
                    return Err(Error::Config("require theta > 1/(2(rho - alpha))".into()));
                }
                if !(self.mode.alpha_tilde() > 0.0) {
                    return Err(Error::Config(
                        "require min(alpha, beta, alpha + beta - 1) > 1/2 + eps".into(),
                    ));
                }
            }
            CouplingMode::Exp { alpha, lambda, zeta } => {
                if !(alpha > 0.0 && alpha < lambda) {
                    return Err(Error::Config("require 0 < alpha < lambda".into()));
                }
                if alpha == zeta {
                    return Err(Error::Config("require alpha != zeta".into()));
                }
                if !(zeta > 0.0) {
                    return Err(Error::Config("require zeta > 0".into()));
                }
                if !(self.theta > 0.0) {
                    return Err(Error::Config("require theta > 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Drift budget of sticking interval `ℓ ≥ 2`.
    pub fn interval_budget(&self, ell: u64) -> f64 {
        2f64.powf(-self.mode.alpha_tilde() * ell as f64)
    }
}

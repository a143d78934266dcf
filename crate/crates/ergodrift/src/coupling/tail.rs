//! Monte Carlo estimation of the coupling-time tail.
//!
//! `P(τ∞ > n)` bounds the total-variation distance between the law of the
//! trajectory from time `n` on and the stationary regime. Replicas run on
//! disjoint deterministic streams; the survival curve is reported with
//! Wilson 95% bands and, where the curve crosses a usable range, a fitted
//! log-log decay exponent.

use super::engine::run_coupling;
use super::CouplingConfig;
use crate::coeffs::CoefficientSequence;
use crate::dynamics::EulerModel;
use crate::rng::SeedDescriptor;
use crate::stats::{linear_fit, wilson_interval};
use crate::{Error, Result};
use rayon::prelude::*;

/// Log-log line fit of the survival curve over one decade.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub exponent: f64,
    pub intercept: f64,
    pub n_range: (u64, u64),
    pub residual_rms: f64,
    /// Replicas whose coupling time fell inside the fit window.
    pub replicas_in_window: u64,
}

/// Aggregated soundness counters over all replicas of a tail run.
#[derive(Debug, Clone, Copy, Default)]
pub struct SoundnessSummary {
    pub max_hit_residual: f64,
    pub max_glue_residual: f64,
    pub max_coalescence_residual: f64,
    pub max_bookkeeping_residual: f64,
    pub budget_attempts: u64,
    pub budget_violations: u64,
    pub adm_checks_after_wait: u64,
    pub adm_cond1_failures_after_wait: u64,
    pub step1_attempts: u64,
    pub step1_hits: u64,
}

/// Empirical survival curve of the coupling time.
#[derive(Debug, Clone)]
pub struct TailEstimate {
    pub grid: Vec<u64>,
    pub p_hat: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub replicas: u64,
    pub coalesced: u64,
    /// Fitted decay exponent over the largest decade where the curve
    /// stays inside (0.02, 0.5); `None` when no such decade exists.
    pub fit: Option<TailFit>,
    /// False when fewer than 20 replicas coalesced inside the fit window.
    pub fit_reliable: bool,
    pub soundness: SoundnessSummary,
}

impl TailEstimate {
    /// `P(τ∞ > n)` at an arbitrary `n` (step function between grid
    /// points is not interpolated; exact count is recomputed).
    pub fn survival_at(&self, n: u64) -> Option<f64> {
        self.grid.iter().position(|&g| g == n).map(|i| self.p_hat[i])
    }
}

fn default_grid(horizon: u64) -> Vec<u64> {
    let mut grid = vec![0u64];
    let mut x = 1.0f64;
    while (x as u64) < horizon {
        let n = x as u64;
        if grid.last() != Some(&n) {
            grid.push(n);
        }
        x *= 1.2;
    }
    if horizon > 0 {
        grid.push(horizon);
    }
    grid
}

/// Runs `replicas` independent coupling experiments (streams
/// `0..replicas` of `seed`) and estimates the survival curve of `τ∞` on
/// `n_grid` (a logarithmic default when `None`).
pub fn estimate_tv_tail(
    model: &EulerModel,
    a: &CoefficientSequence,
    cfg: &CouplingConfig,
    replicas: u64,
    horizon: u64,
    seed: u64,
    n_grid: Option<Vec<u64>>,
) -> Result<TailEstimate> {
    if replicas < 100 {
        return Err(Error::InsufficientData(format!(
            "tail estimation needs at least 100 replicas, got {replicas}"
        )));
    }
    let mut cfg = cfg.clone();
    cfg.horizon = horizon;
    cfg.validate()?;

    let traces: Vec<_> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            run_coupling(model, a, &cfg, SeedDescriptor::new(seed, r)).map(|t| {
                (
                    t.tau_infinity,
                    t.hit_residual,
                    t.glue_residual,
                    t.coalescence_residual,
                    t.bookkeeping_residual,
                    t.budget_attempts,
                    t.budget_violations,
                    t.adm_checks_after_wait,
                    t.adm_cond1_failures_after_wait,
                    t.step1_attempts,
                    t.step1_hits,
                )
            })
        })
        .collect::<Result<_>>()?;

    let mut soundness = SoundnessSummary::default();
    let mut taus: Vec<Option<u64>> = Vec::with_capacity(traces.len());
    for t in &traces {
        taus.push(t.0);
        soundness.max_hit_residual = soundness.max_hit_residual.max(t.1);
        soundness.max_glue_residual = soundness.max_glue_residual.max(t.2);
        soundness.max_coalescence_residual = soundness.max_coalescence_residual.max(t.3);
        soundness.max_bookkeeping_residual = soundness.max_bookkeeping_residual.max(t.4);
        soundness.budget_attempts += t.5;
        soundness.budget_violations += t.6;
        soundness.adm_checks_after_wait += t.7;
        soundness.adm_cond1_failures_after_wait += t.8;
        soundness.step1_attempts += t.9;
        soundness.step1_hits += t.10;
    }
    let coalesced = taus.iter().filter(|t| t.is_some()).count() as u64;

    let grid = n_grid.unwrap_or_else(|| default_grid(horizon));
    let survivors_at = |n: u64| -> u64 {
        taus.iter().filter(|t| t.map_or(true, |tau| tau > n)).count() as u64
    };
    let mut p_hat = Vec::with_capacity(grid.len());
    let mut ci_lo = Vec::with_capacity(grid.len());
    let mut ci_hi = Vec::with_capacity(grid.len());
    for &n in &grid {
        let s = survivors_at(n);
        let (lo, hi) = wilson_interval(s, replicas, 1.96);
        p_hat.push(s as f64 / replicas as f64);
        ci_lo.push(lo);
        ci_hi.push(hi);
    }

    // Fit window: the largest decade [e/10, e] whose grid points all have
    // p_hat inside (0.02, 0.5).
    let usable = |p: f64| p > 0.02 && p < 0.5;
    let mut fit = None;
    for i in (0..grid.len()).rev() {
        let e = grid[i];
        if e < 10 || !usable(p_hat[i]) {
            continue;
        }
        let lo_edge = e / 10;
        let window: Vec<usize> = (0..grid.len())
            .filter(|&k| grid[k] >= lo_edge.max(1) && grid[k] <= e)
            .collect();
        if window.len() < 5 || !window.iter().all(|&k| usable(p_hat[k])) {
            continue;
        }
        let xs: Vec<f64> = window.iter().map(|&k| (grid[k] as f64).ln()).collect();
        let ys: Vec<f64> = window.iter().map(|&k| p_hat[k].ln()).collect();
        let lf = linear_fit(&xs, &ys);
        let in_window = taus
            .iter()
            .filter(|t| t.map_or(false, |tau| tau >= lo_edge.max(1) && tau <= e))
            .count() as u64;
        fit = Some(TailFit {
            exponent: lf.slope,
            intercept: lf.intercept,
            n_range: (lo_edge.max(1), e),
            residual_rms: lf.residual_rms,
            replicas_in_window: in_window,
        });
        break;
    }
    let fit_reliable = fit.map_or(false, |f| f.replicas_in_window >= 20);

    Ok(TailEstimate {
        grid,
        p_hat,
        ci_lo,
        ci_hi,
        replicas,
        coalesced,
        fit,
        fit_reliable,
        soundness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::CouplingMode;

    fn quick_setup() -> (EulerModel, CoefficientSequence, CouplingConfig) {
        let model = EulerModel::ornstein_uhlenbeck(1, 1.0, 1.0, 0.1, true).unwrap();
        let a = CoefficientSequence::exponential(1.0, 1.0, 48).unwrap();
        let cfg = CouplingConfig::new(
            CouplingMode::Exp { alpha: 0.5, lambda: 1.0, zeta: 2.0 },
            1,
            2000,
        );
        (model, a, cfg)
    }

    #[test]
    fn survival_curve_is_monotone_with_valid_bands() {
        let (model, a, cfg) = quick_setup();
        let est = estimate_tv_tail(&model, &a, &cfg, 120, 2000, 99, None).unwrap();
        assert_eq!(est.replicas, 120);
        for w in est.p_hat.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "survival must be non-increasing");
        }
        for i in 0..est.grid.len() {
            assert!(est.ci_lo[i] <= est.p_hat[i] && est.p_hat[i] <= est.ci_hi[i]);
        }
        // Most replicas couple quickly under the memoryless-ish kernel.
        assert!(est.coalesced > 60, "only {} of 120 coalesced", est.coalesced);
    }

    #[test]
    fn replica_floor_enforced() {
        let (model, a, cfg) = quick_setup();
        assert!(estimate_tv_tail(&model, &a, &cfg, 50, 100, 1, None).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let (model, a, cfg) = quick_setup();
        let e1 = estimate_tv_tail(&model, &a, &cfg, 100, 500, 7, None).unwrap();
        let e2 = estimate_tv_tail(&model, &a, &cfg, 100, 500, 7, None).unwrap();
        assert_eq!(e1.p_hat, e2.p_hat);
        assert_eq!(e1.coalesced, e2.coalesced);
    }
}

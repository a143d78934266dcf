//! Interval schedules for the sticking step and waiting durations for the
//! cool-down step.

use super::CouplingMode;

/// Interval index scale: `s_ℓ = 2^ℓ` in polynomial mode, `ℓ` in
/// exponential mode (`ℓ ≥ 2`).
pub(crate) fn s_ell(mode: &CouplingMode, ell: u64) -> u64 {
    match mode {
        CouplingMode::Poly { .. } => 1u64.checked_shl(ell as u32).unwrap_or(u64::MAX / 4),
        CouplingMode::Exp { .. } => ell,
    }
}

/// Time interval `I_ℓ` of the sticking step for a trial that started its
/// attempt at `τ + 1` (both endpoints inclusive):
///
/// ```text
/// I_0 = {τ+1},  I_1 = [τ+2, τ+c₂s_2-1],
/// I_ℓ = [τ + c₂ s_ℓ, τ + c₂ s_{ℓ+1} - 1]  for ℓ ≥ 2.
/// ```
///
/// Consecutive intervals tile the timeline with no gaps; in exponential
/// mode `c₂s_2 = 2c₂`, so the first interval is `[τ+2, τ+2c₂-1]`. Leaving
/// `I_1` at that length in polynomial mode too would orphan the times
/// `[τ+2c₂, τ+4c₂-1]`: no interval would enforce the sticking drift
/// there and the paths would silently unglue.
pub fn interval_schedule(ell: u64, c2: u64, tau: u64, mode: &CouplingMode) -> (u64, u64) {
    match ell {
        0 => (tau + 1, tau + 1),
        1 => (tau + 2, tau + c2.saturating_mul(s_ell(mode, 2)) - 1),
        _ => (
            tau + c2.saturating_mul(s_ell(mode, ell)),
            tau + c2.saturating_mul(s_ell(mode, ell + 1)) - 1,
        ),
    }
}

/// Duration of the waiting step after trial `j` failed at interval
/// `ℓ*` (0 when the hitting step itself failed):
///
/// ```text
/// t* ς^j 2^{θ ℓ*}   (polynomial mode)
/// t* + ς^j + θ ℓ*   (exponential mode)
/// ```
///
/// rounded up to an integer number of steps.
pub fn step3_duration(j: u32, ell_star: u64, t_star: f64, varsigma: f64, theta: f64, mode: &CouplingMode) -> u64 {
    let raw = match mode {
        CouplingMode::Poly { .. } => {
            t_star * varsigma.powi(j as i32) * 2f64.powf(theta * ell_star as f64)
        }
        CouplingMode::Exp { .. } => t_star + varsigma.powi(j as i32) + theta * ell_star as f64,
    };
    if raw >= u64::MAX as f64 {
        u64::MAX / 4
    } else {
        raw.ceil() as u64
    }
}

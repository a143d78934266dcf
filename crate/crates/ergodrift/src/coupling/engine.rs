//! The coupled pair of trajectories and the trial loop.

use super::samplers::{interval_coupling, sample_hitting_pair, Branch};
use super::schedule::{interval_schedule, step3_duration};
use super::CouplingConfig;
use crate::coeffs::CoefficientSequence;
use crate::dynamics::{hitting_map, EulerModel, HittingMapParams};
use crate::rng::{CounterRng, SeedDescriptor};
use crate::{Error, Result};

/// Tolerance on the bookkeeping identity `Δ¹ - Δ² = a ⋆ g`; exceeding it
/// means the engine's state is corrupt.
const BOOKKEEPING_TOL: f64 = 1e-10;

/// Budgets below this are treated as unmeasurable when counting
/// budget-violation statistics (they underflow long after the drift
/// itself has decayed to zero).
const BUDGET_STAT_FLOOR: f64 = 1e-12;

/// Engine phase, as it appears in trace events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Pre,
    Step1,
    Step2,
    Step3,
    Run,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Phase::Pre => "pre",
            Phase::Step1 => "step1",
            Phase::Step2 => "step2",
            Phase::Step3 => "step3",
            Phase::Run => "run",
        };
        f.write_str(s)
    }
}

/// One line of the event log.
#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub time: u64,
    pub phase: Phase,
    pub event: &'static str,
    pub detail: String,
}

/// Summary of one coupling trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub j: u32,
    /// Trial start (the attempt targets `tau_start + 1`).
    pub tau_start: u64,
    /// End of the trial: the next trial starts at `tau_end`. Equal to the
    /// horizon when the run was cut off, and to `tau_start` + ∞
    /// conceptually on success (stored as the horizon).
    pub tau_end: u64,
    /// Failed interval index; 0 when the hitting step failed, `None` when
    /// the trial succeeded.
    pub ell_star: Option<u64>,
    pub admissible: bool,
    pub adm_ratio: f64,
}

/// Everything observable about one coupling run.
#[derive(Debug, Clone, Default)]
pub struct CouplingTrace {
    /// Time from which the two paths agree forever, when reached.
    pub tau_infinity: Option<u64>,
    pub events: Vec<TraceEvent>,
    pub trials: Vec<TrialRecord>,
    /// Largest `|X¹ - X²|` at a hitting step.
    pub hit_residual: f64,
    /// Largest `|X¹ - X²|` across steps of successful sticking intervals.
    pub glue_residual: f64,
    /// Largest `|X¹ - X²|` over all times ≥ τ∞ (0 when never coalesced).
    pub coalescence_residual: f64,
    /// Largest deviation of the bookkeeping identity `Δ¹-Δ² = a ⋆ g`.
    pub bookkeeping_residual: f64,
    /// Sticking intervals `ℓ ≥ 2` attempted with a measurable budget, and
    /// how often the realized drift exceeded it.
    pub budget_attempts: u64,
    pub budget_violations: u64,
    /// Admissibility tail-condition outcomes at trial starts following a
    /// waiting step (the regime the schedule is designed to protect).
    pub adm_checks_after_wait: u64,
    pub adm_cond1_failures_after_wait: u64,
    /// Hitting-step attempts at admissible times, and how many hit.
    pub step1_attempts: u64,
    pub step1_hits: u64,
}

/// Outcome of the two admissibility conditions at the current time.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityReport {
    /// Max over `0 ≤ n ≤ n_check` of `(|Σ_{k>n} a_k g_{τ+n-k}| + resid_n)/v_n`.
    pub cond1_max_ratio: f64,
    pub cond1_pass: bool,
    /// The tail index realizing the max, and the computed-sum part of the
    /// ratio there (the rest is the truncation remainder).
    pub argmax_n: usize,
    pub sum_ratio_at_argmax: f64,
    /// Cauchy-Schwarz bound on the kernel-truncation remainder at the
    /// maximizing index (covers drift entries older than the kernel
    /// window).
    pub truncation_residual: f64,
    pub x1_norm: f64,
    pub x2_norm: f64,
    pub mem1_norm: f64,
    pub mem2_norm: f64,
    pub cond2_pass: bool,
    pub pass: bool,
}

/// The sticking drift `-Σ_{l=1}^{min(n,K)} a_l g_{n-l}` at index `n`,
/// given the realized drift history `g_0..g_{n-1}` (flat, `dim`-strided).
pub fn successful_drift(
    a: &CoefficientSequence,
    g_history: &[f64],
    dim: usize,
    n: usize,
) -> Vec<f64> {
    debug_assert!(g_history.len() >= n * dim);
    let mut out = vec![0.0; dim];
    let reach = n.min(a.k_max());
    for l in 1..=reach {
        let al = a.get(l);
        if al == 0.0 {
            continue;
        }
        let src = &g_history[(n - l) * dim..(n - l + 1) * dim];
        for (o, s) in out.iter_mut().zip(src) {
            *o -= al * s;
        }
    }
    out
}

/// The paired state: two trajectories, their innovation histories, the
/// realized innovation drift, and the running residual trackers.
pub struct CoupledSystem {
    model: EulerModel,
    kernel: Vec<f64>,
    cfg: CouplingConfig,
    dim: usize,
    history_len: usize,
    time: u64,
    x1: Vec<f64>,
    x2: Vec<f64>,
    /// Flat innovation storage; slot `t + history_len - 1` holds time `t`.
    xi1: Vec<f64>,
    xi2: Vec<f64>,
    /// Realized drift `g_n = ξ¹_{n+1} - ξ²_{n+1}`, flat over `n`.
    g: Vec<f64>,
    /// Sorted indices `n` with `g_n ≠ 0`.
    g_nonzero: Vec<u64>,
    /// Cumulative `Σ |g|²` over the nonzero entries, aligned with
    /// `g_nonzero`.
    g_prefix_sq: Vec<f64>,
    /// `sqrt(Σ_{k>K} a_k²)` when the family provides it.
    tail_sqrt: f64,
    bookkeeping_residual: f64,
}

impl CoupledSystem {
    pub fn new(
        model: &EulerModel,
        a: &CoefficientSequence,
        cfg: &CouplingConfig,
        seed: SeedDescriptor,
    ) -> Result<(Self, CounterRng)> {
        cfg.validate()?;
        let dim = model.dim();
        if cfg.x0_1.len() != dim {
            return Err(Error::Config(format!(
                "initial positions have dimension {}, model has {dim}",
                cfg.x0_1.len()
            )));
        }
        let history_len = a.k_max();
        let horizon = cfg.horizon as usize;
        let root = CounterRng::new(seed);
        let mut past_rng = root.fork(0);
        let run_rng = root.fork(1);

        // Shared noise past: both sides see identical innovations at
        // times ≤ 0.
        let mut xi1 = vec![0.0; (history_len + horizon) * dim];
        past_rng.fill_standard_normal(&mut xi1[..history_len * dim]);
        let xi2 = xi1.clone();

        let sys = Self {
            model: model.clone(),
            kernel: a.values().to_vec(),
            cfg: cfg.clone(),
            dim,
            history_len,
            time: 0,
            x1: cfg.x0_1.clone(),
            x2: cfg.x0_2.clone(),
            xi1,
            xi2,
            g: vec![0.0; horizon * dim],
            g_nonzero: Vec::new(),
            g_prefix_sq: Vec::new(),
            tail_sqrt: a.tail_sum_sq_beyond(a.k_max()).map_or(0.0, f64::sqrt),
            bookkeeping_residual: 0.0,
        };
        Ok((sys, run_rng))
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn x2(&self) -> &[f64] {
        &self.x2
    }

    pub fn bookkeeping_residual(&self) -> f64 {
        self.bookkeeping_residual
    }

    /// Innovation `ξ_t` of the given side (0 or 1) for
    /// `-history_len < t ≤ time`.
    pub fn innovation(&self, side: usize, t: i64) -> &[f64] {
        let xi = if side == 0 { &self.xi1 } else { &self.xi2 };
        let s = self.slot(t);
        &xi[s..s + self.dim]
    }

    /// Realized drift `g_n` (zero vector before the first attempt).
    pub fn drift_at(&self, n: u64) -> &[f64] {
        let i = n as usize * self.dim;
        &self.g[i..i + self.dim]
    }

    #[inline]
    fn slot(&self, t: i64) -> usize {
        (t + self.history_len as i64 - 1) as usize * self.dim
    }

    fn delta_at(&self, xi: &[f64], t: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (k, &ak) in self.kernel.iter().enumerate() {
            if ak == 0.0 {
                continue;
            }
            let s = self.slot(t as i64 - k as i64);
            for (o, x) in out.iter_mut().zip(&xi[s..s + self.dim]) {
                *o += ak * x;
            }
        }
        out
    }

    /// Memory term `Σ_{k≥1} a_k ξ_{τ+1-k}` of the given side at the
    /// current time.
    pub fn memory_term(&self, side: usize) -> Vec<f64> {
        let xi = if side == 0 { &self.xi1 } else { &self.xi2 };
        let mut out = vec![0.0; self.dim];
        for (k, &ak) in self.kernel.iter().enumerate().skip(1) {
            if ak == 0.0 {
                continue;
            }
            let s = self.slot(self.time as i64 + 1 - k as i64);
            for (o, x) in out.iter_mut().zip(&xi[s..s + self.dim]) {
                *o += ak * x;
            }
        }
        out
    }

    /// Advances one step with the given innovation pair at time
    /// `self.time + 1`; returns the sup-norm position gap after the step.
    pub fn advance_pair(&mut self, xi1_t: &[f64], xi2_t: &[f64]) -> Result<f64> {
        let t = self.time + 1;
        debug_assert!(t <= self.cfg.horizon);
        let s = self.slot(t as i64);
        self.xi1[s..s + self.dim].copy_from_slice(xi1_t);
        self.xi2[s..s + self.dim].copy_from_slice(xi2_t);

        let n = (t - 1) as usize;
        let mut any = false;
        let mut l2 = 0.0;
        for c in 0..self.dim {
            let gv = xi1_t[c] - xi2_t[c];
            self.g[n * self.dim + c] = gv;
            any |= gv != 0.0;
            l2 += gv * gv;
        }
        if any {
            self.g_nonzero.push(t - 1);
            let total = self.g_prefix_sq.last().copied().unwrap_or(0.0) + l2;
            self.g_prefix_sq.push(total);
        }

        let d1 = self.delta_at(&self.xi1, t);
        let d2 = self.delta_at(&self.xi2, t);

        // Bookkeeping: Δ¹_t - Δ²_t must equal (a ⋆ g)_{t-1}.
        let mut conv = vec![0.0; self.dim];
        let lo = (t - 1).saturating_sub(self.kernel.len() as u64 - 1);
        let start = self.g_nonzero.partition_point(|&i| i < lo);
        for &i in &self.g_nonzero[start..] {
            let k = (t - 1 - i) as usize;
            let ak = self.kernel[k];
            if ak == 0.0 {
                continue;
            }
            let gi = &self.g[i as usize * self.dim..(i as usize + 1) * self.dim];
            for (cv, gv) in conv.iter_mut().zip(gi) {
                *cv += ak * gv;
            }
        }
        let mut resid = 0.0f64;
        for c in 0..self.dim {
            resid = resid.max(((d1[c] - d2[c]) - conv[c]).abs());
        }
        self.bookkeeping_residual = self.bookkeeping_residual.max(resid);
        if resid > BOOKKEEPING_TOL {
            return Err(Error::InternalInvariant(format!(
                "drift bookkeeping residual {resid:.3e} at time {t}"
            )));
        }

        self.x1 = self.model.euler_map(&self.x1, &d1);
        self.x2 = self.model.euler_map(&self.x2, &d2);
        self.time = t;
        let mut gap = 0.0f64;
        for c in 0..self.dim {
            gap = gap.max((self.x1[c] - self.x2[c]).abs());
        }
        Ok(gap)
    }

    /// Advances one step feeding the same innovation to both sides.
    pub fn advance_shared(&mut self, rng: &mut CounterRng) -> Result<f64> {
        let mut xi = vec![0.0; self.dim];
        rng.fill_standard_normal(&mut xi);
        self.advance_pair(&xi.clone(), &xi)
    }

    /// Sticking-drift targets for the drift indices `n0..=n1`, treating
    /// targets earlier in the block as already realized.
    fn sticking_targets(&self, n0: u64, n1: u64) -> Vec<f64> {
        let d = self.dim;
        let len = (n1 - n0 + 1) as usize;
        let mut out = vec![0.0; len * d];
        for idx in 0..len {
            let n = n0 as usize + idx;
            let reach = n.min(self.kernel.len() - 1);
            let (head, tail) = out.split_at_mut(idx * d);
            let target = &mut tail[..d];
            for l in 1..=reach {
                let al = self.kernel[l];
                if al == 0.0 {
                    continue;
                }
                let src = n - l;
                let slice = if src >= n0 as usize {
                    &head[(src - n0 as usize) * d..(src - n0 as usize + 1) * d]
                } else {
                    &self.g[src * d..(src + 1) * d]
                };
                for (o, s) in target.iter_mut().zip(slice) {
                    *o -= al * s;
                }
            }
        }
        out
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Evaluates both admissibility conditions at the system's current time.
pub fn admissibility_check(
    sys: &CoupledSystem,
    cfg: &CouplingConfig,
    n_check: usize,
) -> AdmissibilityReport {
    let d = sys.dim;
    let tau = sys.time;
    let k_max = sys.kernel.len() - 1;
    let n_check = n_check.min(k_max.saturating_sub(1));

    // Tail sums Σ_{k>n} a_k g_{τ+n-k} = Σ_{m≥1} a_{n+m} g_{τ-m} for all
    // n at once, iterating over the nonzero drift entries.
    let mut acc = vec![0.0; (n_check + 1) * d];
    if tau > 0 {
        let lo = tau.saturating_sub(k_max as u64);
        let start = sys.g_nonzero.partition_point(|&i| i < lo);
        for &i in &sys.g_nonzero[start..] {
            if i >= tau {
                break;
            }
            let m = (tau - i) as usize;
            let gi = &sys.g[i as usize * d..(i as usize + 1) * d];
            let n_hi = n_check.min(k_max - m);
            for n in 0..=n_hi {
                let w = sys.kernel[n + m];
                if w == 0.0 {
                    continue;
                }
                for c in 0..d {
                    acc[n * d + c] += w * gi[c];
                }
            }
        }
    }
    // Truncation remainder at tail index n: only drift entries older
    // than the kernel window (index < τ + n - K) are invisible to the
    // computed sum; bound their contribution by Cauchy-Schwarz against
    // the kernel tail.
    let remainder_at = |n: usize| -> f64 {
        if sys.tail_sqrt == 0.0 {
            return 0.0;
        }
        let cutoff = (tau + n as u64).saturating_sub(k_max as u64);
        let pos = sys.g_nonzero.partition_point(|&i| i < cutoff);
        if pos == 0 {
            0.0
        } else {
            sys.tail_sqrt * sys.g_prefix_sq[pos - 1].sqrt()
        }
    };
    let mut max_ratio = 0.0f64;
    let mut argmax_n = 0usize;
    let mut sum_ratio_at_argmax = 0.0f64;
    let mut resid_at_argmax = 0.0f64;
    for n in 0..=n_check {
        let s = norm2(&acc[n * d..(n + 1) * d]);
        let resid = remainder_at(n);
        let speed = cfg.mode.speed(n as u64);
        let ratio = (s + resid) / speed;
        if ratio > max_ratio {
            max_ratio = ratio;
            argmax_n = n;
            sum_ratio_at_argmax = s / speed;
            resid_at_argmax = resid;
        }
    }
    let cond1_pass = max_ratio <= 1.0;

    let x1_norm = norm2(&sys.x1);
    let x2_norm = norm2(&sys.x2);
    let mem1_norm = norm2(&sys.memory_term(0));
    let mem2_norm = norm2(&sys.memory_term(1));
    let k = cfg.adm_radius;
    let cond2_pass = x1_norm <= k && x2_norm <= k && mem1_norm <= k && mem2_norm <= k;

    AdmissibilityReport {
        cond1_max_ratio: max_ratio,
        cond1_pass,
        argmax_n,
        sum_ratio_at_argmax,
        truncation_residual: resid_at_argmax,
        x1_norm,
        x2_norm,
        mem1_norm,
        mem2_norm,
        cond2_pass,
        pass: cond1_pass && cond2_pass,
    }
}

/// Runs the full trial loop from a shared past until the paths coalesce
/// or the horizon is exhausted.
pub fn run_coupling(
    model: &EulerModel,
    a: &CoefficientSequence,
    cfg: &CouplingConfig,
    seed: SeedDescriptor,
) -> Result<CouplingTrace> {
    run_coupling_with_state(model, a, cfg, seed).map(|(trace, _)| trace)
}

/// Like [`run_coupling`], additionally returning the final state (for
/// inspection of innovations, drifts and positions).
pub fn run_coupling_with_state(
    model: &EulerModel,
    a: &CoefficientSequence,
    cfg: &CouplingConfig,
    seed: SeedDescriptor,
) -> Result<(CouplingTrace, CoupledSystem)> {
    let (mut sys, mut rng) = CoupledSystem::new(model, a, cfg, seed)?;
    let mut trace = CouplingTrace::default();
    let horizon = cfg.horizon;

    if horizon == 0 {
        trace.tau_infinity = (cfg.x0_1 == cfg.x0_2).then_some(0);
        return Ok((trace, sys));
    }

    trace.events.push(TraceEvent {
        time: 0,
        phase: Phase::Pre,
        event: "start",
        detail: format!("x1={:?} x2={:?}", cfg.x0_1, cfg.x0_2),
    });

    // Preliminary phase: identical innovations until the system is
    // admissible for a first attempt.
    loop {
        let adm = admissibility_check(&sys, cfg, cfg.n_check);
        if adm.pass {
            trace.events.push(TraceEvent {
                time: sys.time(),
                phase: Phase::Pre,
                event: "admissible",
                detail: format!("ratio={:.3e}", adm.cond1_max_ratio),
            });
            break;
        }
        if sys.time() >= horizon {
            trace.events.push(TraceEvent {
                time: horizon,
                phase: Phase::Run,
                event: "horizon_exhausted",
                detail: "never admissible".into(),
            });
            trace.bookkeeping_residual = sys.bookkeeping_residual();
            return Ok((trace, sys));
        }
        sys.advance_shared(&mut rng)?;
    }

    let mut c2 = cfg.c2;
    let mut c2_overflow_streak = 0u32;
    let mut j: u32 = 0;

    'trials: while sys.time() < horizon {
        j += 1;
        let tau = sys.time();
        let adm = admissibility_check(&sys, cfg, cfg.n_check);
        if j > 1 {
            trace.adm_checks_after_wait += 1;
            if !adm.cond1_pass {
                trace.adm_cond1_failures_after_wait += 1;
            }
        }
        trace.events.push(TraceEvent {
            time: tau,
            phase: Phase::Step1,
            event: "trial_start",
            detail: format!(
                "j={j} ratio={:.3e} at_n={} sum_part={:.3e} resid={:.3e} cond2={}",
                adm.cond1_max_ratio,
                adm.argmax_n,
                adm.sum_ratio_at_argmax,
                adm.truncation_residual,
                adm.cond2_pass
            ),
        });

        let mut record = TrialRecord {
            j,
            tau_start: tau,
            tau_end: tau,
            ell_star: Some(0),
            admissible: adm.pass,
            adm_ratio: adm.cond1_max_ratio,
        };

        let mut hit = false;
        let mut hit_gap = 0.0f64;
        if adm.pass {
            trace.step1_attempts += 1;
            let params = HittingMapParams {
                x1: sys.x1().to_vec(),
                x2: sys.x2().to_vec(),
                y1: sys.memory_term(0),
                y2: sys.memory_term(1),
            };
            match hitting_map(model, &params) {
                Ok(lambda) => {
                    let (z1, z2, branch) = sample_hitting_pair(&lambda, &mut rng)?;
                    let z1_norm = norm2(&z1);
                    let gap = sys.advance_pair(&z1, &z2)?;
                    hit = branch == Branch::Forward && z1_norm <= cfg.hit_radius;
                    if hit {
                        hit_gap = gap;
                        trace.hit_residual = trace.hit_residual.max(gap);
                        trace.events.push(TraceEvent {
                            time: sys.time(),
                            phase: Phase::Step1,
                            event: "hit",
                            detail: format!("gap={gap:.3e}"),
                        });
                    } else {
                        trace.events.push(TraceEvent {
                            time: sys.time(),
                            phase: Phase::Step1,
                            event: "miss",
                            detail: format!("branch={branch:?} |z1|={z1_norm:.3}"),
                        });
                    }
                }
                Err(Error::Conditioning(why)) => {
                    // No usable map at this state; fall through to the
                    // waiting step with a shared draw.
                    sys.advance_shared(&mut rng)?;
                    trace.events.push(TraceEvent {
                        time: sys.time(),
                        phase: Phase::Step1,
                        event: "map_unusable",
                        detail: why,
                    });
                }
                Err(e) => return Err(e),
            }
        } else {
            // Inadmissible start counts as a hitting-step failure with a
            // shared innovation.
            sys.advance_shared(&mut rng)?;
        }

        if hit {
            let hit_time = sys.time();
            let mut trial_gap = hit_gap;
            let mut ell: u64 = 1;
            let mut ell_star: Option<u64> = None;
            while sys.time() < horizon {
                let (start, end) = interval_schedule(ell, c2, tau, &cfg.mode);
                if start > horizon {
                    break;
                }
                let end_c = end.min(horizon);
                let targets = sys.sticking_targets(start - 1, end_c - 1);
                let mut norm_max = 0.0f64;
                for c in 0..sys.dim() {
                    let s: f64 = targets
                        .iter()
                        .skip(c)
                        .step_by(sys.dim())
                        .map(|v| v * v)
                        .sum();
                    norm_max = norm_max.max(s.sqrt());
                }
                let budget = if ell == 1 {
                    if norm_max > cfg.budget_cap {
                        c2_overflow_streak += 1;
                        trace.events.push(TraceEvent {
                            time: start,
                            phase: Phase::Step2,
                            event: "first_interval_overflow",
                            detail: format!("norm={norm_max:.3e} cap={}", cfg.budget_cap),
                        });
                        if c2_overflow_streak >= 2 && c2 < 1024 {
                            c2 *= 2;
                            c2_overflow_streak = 0;
                            trace.events.push(TraceEvent {
                                time: start,
                                phase: Phase::Step2,
                                event: "c2_escalated",
                                detail: format!("c2={c2}"),
                            });
                        }
                    } else {
                        c2_overflow_streak = 0;
                    }
                    // Adaptive first-interval budget: realized drift plus
                    // headroom, capped.
                    (1.1 * norm_max).min(cfg.budget_cap).max(norm_max)
                } else {
                    let b = cfg.interval_budget(ell);
                    if b >= BUDGET_STAT_FLOOR {
                        trace.budget_attempts += 1;
                        if norm_max > b {
                            trace.budget_violations += 1;
                            trace.events.push(TraceEvent {
                                time: start,
                                phase: Phase::Step2,
                                event: "budget_overflow",
                                detail: format!(
                                    "ell={ell} norm={norm_max:.3e} budget={b:.3e} adm_ratio={:.3e}",
                                    record.adm_ratio
                                ),
                            });
                        }
                    }
                    b.max(norm_max)
                };

                let (xi1b, xi2b, success) =
                    interval_coupling(&targets, budget, sys.dim(), &mut rng)?;
                let d = sys.dim();
                let mut block_gap = 0.0f64;
                for (i, t) in (start..=end_c).enumerate() {
                    let gap =
                        sys.advance_pair(&xi1b[i * d..(i + 1) * d], &xi2b[i * d..(i + 1) * d])?;
                    block_gap = block_gap.max(gap);
                    debug_assert_eq!(sys.time(), t);
                }
                if success {
                    trial_gap = trial_gap.max(block_gap);
                    trace.glue_residual = trace.glue_residual.max(block_gap);
                    ell += 1;
                } else {
                    ell_star = Some(ell);
                    trace.events.push(TraceEvent {
                        time: end_c,
                        phase: Phase::Step2,
                        event: "interval_fail",
                        detail: format!("ell={ell}"),
                    });
                    break;
                }
            }

            match ell_star {
                None => {
                    // Every interval up to the horizon stuck.
                    trace.tau_infinity = Some(hit_time);
                    trace.coalescence_residual = trial_gap;
                    record.ell_star = None;
                    record.tau_end = horizon;
                    trace.trials.push(record);
                    trace.events.push(TraceEvent {
                        time: hit_time,
                        phase: Phase::Run,
                        event: "coalesced",
                        detail: format!("j={j} residual={trial_gap:.3e}"),
                    });
                    trace.step1_hits += 1;
                    break 'trials;
                }
                Some(l) => {
                    trace.step1_hits += 1;
                    record.ell_star = Some(l);
                    wait_step3(&mut sys, &mut rng, &mut trace, cfg, j, l, horizon)?;
                    record.tau_end = sys.time();
                    trace.trials.push(record);
                }
            }
        } else {
            // Hitting failure (inadmissible, unusable map, or a miss):
            // the failed-interval index is 0.
            wait_step3(&mut sys, &mut rng, &mut trace, cfg, j, 0, horizon)?;
            record.ell_star = Some(0);
            record.tau_end = sys.time();
            trace.trials.push(record);
        }
    }

    if trace.tau_infinity.is_none() {
        trace.events.push(TraceEvent {
            time: horizon,
            phase: Phase::Run,
            event: "horizon_exhausted",
            detail: format!("trials={}", trace.trials.len()),
        });
    }
    trace.bookkeeping_residual = sys.bookkeeping_residual();
    Ok((trace, sys))
}

fn wait_step3(
    sys: &mut CoupledSystem,
    rng: &mut CounterRng,
    trace: &mut CouplingTrace,
    cfg: &CouplingConfig,
    j: u32,
    ell_star: u64,
    horizon: u64,
) -> Result<()> {
    let duration = step3_duration(j, ell_star, cfg.t_star, cfg.varsigma, cfg.theta, &cfg.mode);
    trace.events.push(TraceEvent {
        time: sys.time(),
        phase: Phase::Step3,
        event: "wait",
        detail: format!("j={j} ell_star={ell_star} duration={duration}"),
    });
    let steps = duration.min(horizon.saturating_sub(sys.time()));
    for _ in 0..steps {
        sys.advance_shared(rng)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientSequence;
    use crate::coupling::CouplingMode;
    use crate::toeplitz::invert_coeffs;

    fn ou_model() -> EulerModel {
        EulerModel::ornstein_uhlenbeck(1, 1.0, 1.0, 0.1, true).unwrap()
    }

    fn exp_cfg(horizon: u64) -> CouplingConfig {
        CouplingConfig::new(CouplingMode::Exp { alpha: 0.5, lambda: 1.0, zeta: 2.0 }, 1, horizon)
    }

    #[test]
    fn sticking_drift_examples() {
        let a = CoefficientSequence::custom(vec![1.0, 0.4, -0.2, 0.1]).unwrap();
        // All-zero history.
        let g = vec![0.0; 8];
        assert_eq!(successful_drift(&a, &g, 1, 5), vec![0.0]);
        // Single nonzero g_{n-1} = v gives -a_1 v.
        let mut g = vec![0.0; 8];
        g[4] = 2.0;
        let out = successful_drift(&a, &g, 1, 5);
        assert!((out[0] + 0.4 * 2.0).abs() < 1e-15);
    }

    #[test]
    fn unit_kick_reproduces_reciprocal_kernel() {
        // Following the recursion from g_τ = 1 yields g_{τ+k} = b_k.
        let a = CoefficientSequence::fbm(0.3, 1.0, 256).unwrap();
        let b = invert_coeffs(&a).unwrap();
        let mut g = vec![0.0; 128];
        g[0] = 1.0;
        for n in 1..110 {
            let v = successful_drift(&a, &g, 1, n)[0];
            g[n] = v;
        }
        for k in 1..=100 {
            assert!(
                (g[k] - b.get(k)).abs() < 1e-9,
                "k = {k}: {} vs {}",
                g[k],
                b.get(k)
            );
        }
    }

    #[test]
    fn shared_noise_contracts_ou_paths() {
        let model = ou_model();
        let a = CoefficientSequence::exponential(1.0, 1.0, 64).unwrap();
        let cfg = exp_cfg(500);
        let (mut sys, mut rng) =
            CoupledSystem::new(&model, &a, &cfg, SeedDescriptor::new(1, 0)).unwrap();
        let gap0 = (sys.x1()[0] - sys.x2()[0]).abs();
        let mut gap = gap0;
        for _ in 0..200 {
            gap = sys.advance_shared(&mut rng).unwrap();
        }
        // (1 - hκ)^200 contraction of the initial gap.
        assert!(gap < gap0 * 0.9f64.powi(199));
        assert!(sys.bookkeeping_residual() < 1e-12);
    }

    #[test]
    fn admissibility_trivial_with_zero_drift() {
        let model = ou_model();
        let a = CoefficientSequence::exponential(1.0, 1.0, 64).unwrap();
        let cfg = exp_cfg(100);
        let (mut sys, mut rng) =
            CoupledSystem::new(&model, &a, &cfg, SeedDescriptor::new(2, 0)).unwrap();
        for _ in 0..10 {
            sys.advance_shared(&mut rng).unwrap();
        }
        let adm = admissibility_check(&sys, &cfg, 64);
        assert!(adm.cond1_pass);
        assert_eq!(adm.cond1_max_ratio, 0.0);
    }

    #[test]
    fn admissibility_cond2_fails_far_out() {
        let model = ou_model();
        let a = CoefficientSequence::exponential(1.0, 1.0, 64).unwrap();
        let mut cfg = exp_cfg(100);
        cfg.x0_1 = vec![cfg.adm_radius + 1.0];
        let (sys, _) = CoupledSystem::new(&model, &a, &cfg, SeedDescriptor::new(3, 0)).unwrap();
        let adm = admissibility_check(&sys, &cfg, 16);
        assert!(!adm.cond2_pass);
        assert!(adm.cond1_pass);
    }

    #[test]
    fn white_noise_coalesces_and_stays() {
        // Memoryless kernel: after a hit the sticking drift is
        // identically zero and every interval succeeds.
        let model = ou_model();
        let a = CoefficientSequence::exponential(0.0, 1.0, 4).unwrap();
        let cfg = exp_cfg(2000);
        let trace =
            run_coupling(&model, &a, &cfg, SeedDescriptor::new(4, 7)).unwrap();
        assert!(trace.tau_infinity.is_some(), "white noise run must coalesce");
        assert!(trace.coalescence_residual <= 1e-10, "{}", trace.coalescence_residual);
        assert!(trace.bookkeeping_residual <= 1e-12);
        // Once coalesced there are no interval failures.
        let last = trace.trials.last().unwrap();
        assert!(last.ell_star.is_none());
    }

    #[test]
    fn exponential_kernel_run_is_sound() {
        let model = ou_model();
        let a = CoefficientSequence::exponential(1.0, 1.0, 64).unwrap();
        let cfg = exp_cfg(5000);
        let trace = run_coupling(&model, &a, &cfg, SeedDescriptor::new(5, 3)).unwrap();
        assert!(trace.bookkeeping_residual <= 1e-10);
        assert!(trace.hit_residual <= 1e-10);
        assert!(trace.glue_residual <= 1e-9);
        if let Some(tau) = trace.tau_infinity {
            assert!(trace.coalescence_residual <= 1e-8);
            assert!(tau <= 5000);
        }
    }

    #[test]
    fn deterministic_replay() {
        let model = ou_model();
        let a = CoefficientSequence::exponential(1.0, 1.0, 64).unwrap();
        let cfg = exp_cfg(3000);
        let t1 = run_coupling(&model, &a, &cfg, SeedDescriptor::new(6, 11)).unwrap();
        let t2 = run_coupling(&model, &a, &cfg, SeedDescriptor::new(6, 11)).unwrap();
        assert_eq!(t1.tau_infinity, t2.tau_infinity);
        assert_eq!(t1.trials.len(), t2.trials.len());
        assert_eq!(t1.coalescence_residual, t2.coalescence_residual);
        assert_eq!(t1.bookkeeping_residual, t2.bookkeeping_residual);
    }

    #[test]
    fn two_dimensional_run_is_sound() {
        let model = EulerModel::ornstein_uhlenbeck(2, 1.0, 1.0, 0.1, true).unwrap();
        let a = CoefficientSequence::exponential(1.0, 1.0, 48).unwrap();
        let mut cfg = CouplingConfig::new(
            CouplingMode::Exp { alpha: 0.5, lambda: 1.0, zeta: 2.0 },
            2,
            4000,
        );
        cfg.adm_radius = 8.0;
        cfg.hit_radius = 8.0;
        let trace = run_coupling(&model, &a, &cfg, SeedDescriptor::new(8, 5)).unwrap();
        assert!(trace.bookkeeping_residual <= 1e-10);
        if trace.tau_infinity.is_some() {
            assert!(trace.coalescence_residual <= 1e-8);
        }
    }

    #[test]
    fn horizon_zero_counts_initial_positions() {
        let model = ou_model();
        let a = CoefficientSequence::exponential(1.0, 1.0, 8).unwrap();
        let mut cfg = exp_cfg(0);
        let trace = run_coupling(&model, &a, &cfg, SeedDescriptor::new(7, 0)).unwrap();
        assert_eq!(trace.tau_infinity, None);
        cfg.x0_2 = cfg.x0_1.clone();
        let trace = run_coupling(&model, &a, &cfg, SeedDescriptor::new(7, 0)).unwrap();
        assert_eq!(trace.tau_infinity, Some(0));
    }
}

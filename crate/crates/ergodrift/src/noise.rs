//! Stationary Gaussian noise paths with moving-average memory.
//!
//! A path realizes `Δ_n = Σ_{k=0}^{min(K, n+H-1)} a_k ξ_{n-k}` over a time
//! window `n = 1..T`, where the innovations `ξ` extend back through a
//! finite history buffer of length `H` (times `-H+1..0`). The infinite
//! past of the exact process is truncated at the buffer; the discarded
//! variance is quantified per path.
//!
//! Innovations come from counter-based streams, so a path is a pure
//! function of `(seed, stream, parameters)`.

use crate::coeffs::CoefficientSequence;
use crate::rng::{CounterRng, SeedDescriptor};
use crate::toeplitz::{apply_t, InverseSequence};
use crate::{Error, Result};

/// One realized noise path: innovations, the noise it generates, and the
/// truncation metadata needed to interpret it.
#[derive(Debug, Clone)]
pub struct NoisePath {
    /// Flat `(history_len + steps) × dim`; row `i` holds the innovation at
    /// time `i - history_len + 1`.
    innovations: Vec<f64>,
    /// Flat `steps × dim`; row `n-1` holds `Δ_n`.
    deltas: Vec<f64>,
    history_len: usize,
    steps: usize,
    dim: usize,
    seed: SeedDescriptor,
    /// Upper bound on the variance lost to history truncation at `n = 1`
    /// (the worst-affected time), `Σ_{k > H} a_k²`. `None` for kernels
    /// without tail information.
    variance_deficit: Option<f64>,
}

impl NoisePath {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn history_len(&self) -> usize {
        self.history_len
    }

    pub fn seed(&self) -> SeedDescriptor {
        self.seed
    }

    pub fn variance_deficit(&self) -> Option<f64> {
        self.variance_deficit
    }

    /// Innovation `ξ_n` for `-history_len < n ≤ steps`.
    pub fn innovation(&self, n: isize) -> &[f64] {
        let row = (n + self.history_len as isize - 1) as usize;
        &self.innovations[row * self.dim..(row + 1) * self.dim]
    }

    /// Noise value `Δ_n` for `1 ≤ n ≤ steps`.
    pub fn delta(&self, n: usize) -> &[f64] {
        let row = n - 1;
        &self.deltas[row * self.dim..(row + 1) * self.dim]
    }

    pub fn deltas_flat(&self) -> &[f64] {
        &self.deltas
    }
}

/// Draws a path of `steps` noise values in dimension `dim` with a
/// history buffer of `history_len` innovations.
pub fn sample_path(
    a: &CoefficientSequence,
    dim: usize,
    steps: usize,
    history_len: usize,
    seed: SeedDescriptor,
) -> Result<NoisePath> {
    if dim < 1 || steps < 1 {
        return Err(Error::ParameterDomain(format!(
            "need dim >= 1 and steps >= 1, got dim = {dim}, steps = {steps}"
        )));
    }
    let rows = history_len + steps;
    let mut innovations = vec![0.0; rows * dim];
    let mut rng = CounterRng::new(seed);
    rng.fill_standard_normal(&mut innovations);

    let mut deltas = vec![0.0; steps * dim];
    for n in 1..=steps {
        let reach = a.k_max().min(n + history_len - 1);
        let out = &mut deltas[(n - 1) * dim..n * dim];
        for k in 0..=reach {
            let ak = a.get(k);
            if ak == 0.0 {
                continue;
            }
            let row = n + history_len - 1 - k;
            let xi = &innovations[row * dim..(row + 1) * dim];
            for (o, x) in out.iter_mut().zip(xi) {
                *o += ak * x;
            }
        }
    }
    Ok(NoisePath {
        innovations,
        deltas,
        history_len,
        steps,
        dim,
        seed,
        variance_deficit: a.tail_sum_sq_beyond(history_len),
    })
}

/// Cross-replica estimate of `c(lag) = E[Δ_1 · Δ_{1+lag}]`, component
/// averaged, with its standard error.
pub fn empirical_covariance(paths: &[NoisePath], lag: usize) -> Result<(f64, f64)> {
    if paths.is_empty() {
        return Err(Error::InsufficientData("no paths supplied".into()));
    }
    let dim = paths[0].dim();
    let steps = paths[0].steps();
    if paths.iter().any(|p| p.dim() != dim || p.steps() != steps) {
        return Err(Error::ParameterDomain("paths must share dim and steps".into()));
    }
    if lag >= steps {
        return Err(Error::ParameterDomain(format!("lag = {lag} >= steps = {steps}")));
    }
    let products: Vec<f64> = paths
        .iter()
        .map(|p| {
            let x = p.delta(1);
            let y = p.delta(1 + lag);
            x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / dim as f64
        })
        .collect();
    Ok(crate::stats::mean_stderr(&products))
}

/// Recovers innovations from a scalar noise sequence generated with zero
/// history: `ξ̂_n = Σ_{k=0..n-1} b_k Δ_{n-k}`. Exact (up to rounding) when
/// the deltas were produced by the matching kernel with `history_len = 0`.
pub fn reconstruct_innovations(b: &InverseSequence, deltas: &[f64]) -> Vec<f64> {
    apply_t(b.values(), deltas)
}

//! Exact Gaussian pair samplers.
//!
//! Three couplers, all with exactly standard normal marginals on each
//! side:
//!
//! - [`sample_hitting_pair`]: given a bijection `Λ` with tractable density
//!   ratio `D_Λ(u) = exp(|u|²/2 - |Λ(u)|²/2)|det J_Λ|`, returns `(Z₁, Z₂)`
//!   with `Z₂ = Λ(Z₁)` with probability `½ E[min(D_Λ, 1)]`, the mirrored
//!   branch `Z₂ = Λ^{-1}(Z₁)` with the symmetrized probability, and
//!   `Z₂ = Z₁` otherwise.
//! - [`translation_coupling_1d`]: the maximal coupling of N(0,1) with
//!   itself along the translation `u ↦ u + a`: sticks with probability
//!   `2Φ(-|a|/2)` (≥ 1 - b whenever `|a| ≤ b < 1`), reflecting to `-U₁` on
//!   failure.
//! - [`interval_coupling`]: couples whole innovation blocks so that
//!   `ξ¹ = ξ² + g` for a target drift vector `g`, by rotating the
//!   translation coupling onto the direction `g/|g|` and sharing the
//!   orthogonal complement.

use crate::rng::CounterRng;
use crate::{Error, Result};

/// Which branch of the pair law a sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `Z₂ = Λ(Z₁)`.
    Forward,
    /// `Z₂ = Λ^{-1}(Z₁)`.
    Backward,
    /// `Z₂ = Z₁`.
    Diagonal,
}

/// A bijection of R^d usable by [`sample_hitting_pair`]: forward and
/// inverse evaluation plus the Gaussian log density ratios of both
/// directions.
pub trait PairBijection {
    fn dim(&self) -> usize;
    fn forward(&self, u: &[f64]) -> Vec<f64>;
    fn inverse(&self, v: &[f64]) -> Vec<f64>;
    /// `ln D_Λ(u)`.
    fn log_density_ratio_forward(&self, u: &[f64]) -> f64;
    /// `ln D_{Λ^{-1}}(v)`.
    fn log_density_ratio_inverse(&self, v: &[f64]) -> f64;
}

impl PairBijection for crate::dynamics::AffineBijection {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn forward(&self, u: &[f64]) -> Vec<f64> {
        self.apply(u)
    }
    fn inverse(&self, v: &[f64]) -> Vec<f64> {
        self.apply_inv(v)
    }
    fn log_density_ratio_forward(&self, u: &[f64]) -> f64 {
        crate::dynamics::AffineBijection::log_density_ratio_forward(self, u)
    }
    fn log_density_ratio_inverse(&self, v: &[f64]) -> f64 {
        crate::dynamics::AffineBijection::log_density_ratio_inverse(self, v)
    }
}

/// Draws `(Z₁, Z₂)` with both marginals exactly N(0, I_d).
///
/// `Z₁` is a standard normal draw `X`; the branch is chosen with
/// probabilities `p_f(X) = ½ min(D_Λ(X), 1)` and
/// `p_b(X) = ½ min(D_{Λ^{-1}}(X), 1)`, diagonal otherwise. Each factor is
/// at most ½ by construction, so `p_f + p_b ≤ 1`; a violation beyond
/// rounding signals a wrong density ratio and is reported as an internal
/// error.
pub fn sample_hitting_pair<L: PairBijection>(
    lambda: &L,
    rng: &mut CounterRng,
) -> Result<(Vec<f64>, Vec<f64>, Branch)> {
    let d = lambda.dim();
    let mut x = vec![0.0; d];
    rng.fill_standard_normal(&mut x);
    let p_f = 0.5 * lambda.log_density_ratio_forward(&x).min(0.0).exp();
    let p_b = 0.5 * lambda.log_density_ratio_inverse(&x).min(0.0).exp();
    if p_f + p_b > 1.0 + 1e-12 {
        return Err(Error::InternalInvariant(format!(
            "branch probabilities sum to {} > 1; density ratio is wrong",
            p_f + p_b
        )));
    }
    let u = rng.next_uniform();
    if u < p_f {
        let z2 = lambda.forward(&x);
        Ok((x, z2, Branch::Forward))
    } else if u < p_f + p_b {
        let z2 = lambda.inverse(&x);
        Ok((x, z2, Branch::Backward))
    } else {
        let z2 = x.clone();
        Ok((x, z2, Branch::Diagonal))
    }
}

/// Maximal translation coupling of N(0,1) with itself.
///
/// Returns `(U₁, U₂, stuck)` with both marginals standard normal,
/// `stuck ⇔ U₂ = U₁ + a`, and `P(stuck) = 2Φ(-|a|/2)`, the largest value
/// any coupling can achieve, and at least `1 - b` for `|a| ≤ b < 1`. On
/// the stick branch the displacement is exactly `|a|`; on failure `U₂`
/// is the reflection `-U₁`, which is what transports the leftover mass
/// exactly (no coupling attaining the maximal stick probability can keep
/// the failure displacement bounded).
pub fn translation_coupling_1d(
    a: f64,
    b: f64,
    rng: &mut CounterRng,
) -> Result<(f64, f64, bool)> {
    if !(b >= a.abs()) {
        return Err(Error::Budget(format!("translation budget b = {b} < |a| = {}", a.abs())));
    }
    let x = rng.next_standard_normal();
    // ln φ(x+a)/φ(x) = -a x - a²/2.
    let log_accept = -a * x - 0.5 * a * a;
    let stuck = rng.next_uniform().ln() < log_accept.min(0.0);
    if stuck {
        Ok((x, x + a, true))
    } else {
        Ok((x, -x, false))
    }
}

/// Closed-form stick probability of [`translation_coupling_1d`].
pub fn translation_stick_probability(a: f64) -> f64 {
    2.0 * crate::stats::normal_cdf(-0.5 * a.abs())
}

/// Couples an innovation block of `len = g_target.len()/dim` time steps
/// so that `ξ¹_t = ξ²_t + g_t` for every `t` in the block
/// (component-wise; `g_target` is flat row-major `[t][component]`).
///
/// Each component `c` is handled on its own copy of R^len: the
/// translation coupling acts along `g_c/|g_c|` and the orthogonal
/// complement is shared, so each side's block is exactly N(0, I_len) per
/// component and components are independent. The block success requires
/// every component to stick. A zero target couples the component
/// identically (success). Requires `|g_c| ≤ budget` for every component.
pub fn interval_coupling(
    g_target: &[f64],
    budget: f64,
    dim: usize,
    rng: &mut CounterRng,
) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    if dim == 0 || g_target.len() % dim != 0 {
        return Err(Error::ParameterDomain("block length must be a multiple of dim".into()));
    }
    let len = g_target.len() / dim;
    let mut xi1 = vec![0.0; len * dim];
    let mut xi2 = vec![0.0; len * dim];
    let mut success = true;
    let mut w = vec![0.0; len];
    for c in 0..dim {
        let g_c: Vec<f64> = (0..len).map(|t| g_target[t * dim + c]).collect();
        let norm = g_c.iter().map(|v| v * v).sum::<f64>().sqrt();
        rng.fill_standard_normal(&mut w);
        if norm == 0.0 {
            for t in 0..len {
                xi1[t * dim + c] = w[t];
                xi2[t * dim + c] = w[t];
            }
            continue;
        }
        if norm > budget {
            return Err(Error::Budget(format!(
                "interval budget {budget} < component drift norm {norm}"
            )));
        }
        let (v1, v2, stuck) = translation_coupling_1d(norm, budget, rng)?;
        let proj: f64 = w.iter().zip(&g_c).map(|(wi, gi)| wi * gi).sum::<f64>() / norm;
        for t in 0..len {
            let u0 = g_c[t] / norm;
            let base = w[t] - proj * u0;
            xi2[t * dim + c] = base + v1 * u0;
            // On the stick branch v2 = v1 + norm exactly, so ξ¹ = ξ² + g
            // holds bit for bit.
            xi1[t * dim + c] =
                if stuck { xi2[t * dim + c] + g_c[t] } else { base + v2 * u0 };
        }
        success &= stuck;
    }
    Ok((xi1, xi2, success))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::AffineBijection;
    use crate::rng::SeedDescriptor;
    use crate::stats::{ks_critical_1pct, ks_statistic_standard_normal, normal_cdf, normal_pdf};

    #[test]
    fn identity_map_always_couples() {
        let lam = AffineBijection::identity(2);
        let mut rng = CounterRng::new(SeedDescriptor::new(1, 0));
        for _ in 0..500 {
            let (z1, z2, branch) = sample_hitting_pair(&lam, &mut rng).unwrap();
            assert_eq!(z1, z2);
            // p_f = p_b = 1/2: never the diagonal remainder.
            assert_ne!(branch, Branch::Diagonal);
        }
    }

    #[test]
    fn forward_branch_applies_the_map() {
        let lam = AffineBijection::translation(&[0.7, -0.3]);
        let mut rng = CounterRng::new(SeedDescriptor::new(2, 0));
        for _ in 0..2000 {
            let (z1, z2, branch) = sample_hitting_pair(&lam, &mut rng).unwrap();
            match branch {
                Branch::Forward => {
                    assert!((z2[0] - (z1[0] + 0.7)).abs() < 1e-14);
                    assert!((z2[1] - (z1[1] - 0.3)).abs() < 1e-14);
                }
                Branch::Backward => {
                    assert!((z2[0] - (z1[0] - 0.7)).abs() < 1e-14);
                    assert!((z2[1] - (z1[1] + 0.3)).abs() < 1e-14);
                }
                Branch::Diagonal => assert_eq!(z1, z2),
            }
        }
    }

    fn random_affine_2d(rng: &mut CounterRng) -> AffineBijection {
        use nalgebra::{DMatrix, DVector};
        // Well-conditioned by construction: I + small perturbation.
        let mut m = DMatrix::identity(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] += 0.3 * (rng.next_uniform() - 0.5);
            }
        }
        let b = DVector::from_fn(2, |_, _| rng.next_uniform() - 0.5);
        AffineBijection::new(m, b).unwrap()
    }

    #[test]
    fn second_marginal_is_standard_normal() {
        let mut rng = CounterRng::new(SeedDescriptor::new(3, 0));
        let lam = random_affine_2d(&mut rng);
        let n = 40_000;
        let mut comp0 = Vec::with_capacity(n);
        let mut comp1 = Vec::with_capacity(n);
        for _ in 0..n {
            let (_, z2, _) = sample_hitting_pair(&lam, &mut rng).unwrap();
            comp0.push(z2[0]);
            comp1.push(z2[1]);
        }
        for sample in [&comp0, &comp1] {
            let d = ks_statistic_standard_normal(sample);
            assert!(d < ks_critical_1pct(n), "KS {d}");
        }
    }

    #[test]
    fn translation_stick_probability_quadrature() {
        // ∫ min(φ(x), φ(x+a)) dx computed by Simpson's rule must equal
        // 2Φ(-|a|/2).
        for &a in &[0.1f64, 0.5, 1.0, 2.5] {
            let (lo, hi, n) = (-12.0, 12.0, 48_000);
            let h = (hi - lo) / n as f64;
            let f = |x: f64| normal_pdf(x).min(normal_pdf(x + a));
            let mut s = f(lo) + f(hi);
            for i in 1..n {
                let x = lo + i as f64 * h;
                s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = s * h / 3.0;
            let closed = translation_stick_probability(a);
            assert!((integral - closed).abs() < 1e-10, "a = {a}: {integral} vs {closed}");
        }
    }

    #[test]
    fn translation_coupler_stick_rate_and_marginals() {
        let mut rng = CounterRng::new(SeedDescriptor::new(5, 0));
        let (a, b) = (0.5, 0.5);
        let n = 200_000;
        let mut sticks = 0u64;
        let mut u2s = Vec::with_capacity(n);
        for _ in 0..n {
            let (u1, u2, stuck) = translation_coupling_1d(a, b, &mut rng).unwrap();
            if stuck {
                sticks += 1;
                assert_eq!(u2, u1 + a);
            } else {
                assert_eq!(u2, -u1);
            }
            u2s.push(u2);
        }
        let p_hat = sticks as f64 / n as f64;
        let p = translation_stick_probability(a);
        assert!((p - 2.0 * normal_cdf(-0.25)).abs() < 1e-15);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p_hat - p).abs() < 3.0 * se, "p_hat = {p_hat}, p = {p}");
        assert!(p >= 1.0 - b);
        let d = ks_statistic_standard_normal(&u2s);
        assert!(d < ks_critical_1pct(n), "U2 marginal KS {d}");
    }

    #[test]
    fn translation_zero_always_sticks() {
        let mut rng = CounterRng::new(SeedDescriptor::new(6, 0));
        for _ in 0..100 {
            let (u1, u2, stuck) = translation_coupling_1d(0.0, 0.5, &mut rng).unwrap();
            assert!(stuck);
            assert_eq!(u1, u2);
        }
    }

    #[test]
    fn translation_budget_guard() {
        let mut rng = CounterRng::new(SeedDescriptor::new(7, 0));
        assert!(translation_coupling_1d(0.6, 0.5, &mut rng).is_err());
    }

    #[test]
    fn interval_zero_target_shares_noise() {
        let mut rng = CounterRng::new(SeedDescriptor::new(8, 0));
        let g = vec![0.0; 10 * 2];
        let (xi1, xi2, ok) = interval_coupling(&g, 0.5, 2, &mut rng).unwrap();
        assert!(ok);
        assert_eq!(xi1, xi2);
    }

    #[test]
    fn interval_single_step_reduces_to_translation() {
        // One time step, one component: the drift is carried entirely by
        // the translation coordinate.
        let mut rng = CounterRng::new(SeedDescriptor::new(9, 0));
        let mut stuck_count = 0;
        let n = 50_000;
        for _ in 0..n {
            let g = [0.3];
            let (xi1, xi2, ok) = interval_coupling(&g, 0.5, 1, &mut rng).unwrap();
            if ok {
                stuck_count += 1;
                assert!((xi1[0] - xi2[0] - 0.3).abs() < 1e-14);
            }
        }
        let p = translation_stick_probability(0.3);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let p_hat = stuck_count as f64 / n as f64;
        assert!((p_hat - p).abs() < 4.0 * se, "{p_hat} vs {p}");
    }

    #[test]
    fn interval_success_rate_beats_one_minus_b() {
        let mut rng = CounterRng::new(SeedDescriptor::new(10, 0));
        for &b in &[0.2, 0.5, 0.8] {
            let n = 20_000;
            let mut ok_count = 0;
            for _ in 0..n {
                // Drift spread across 8 steps with norm exactly b.
                let g: Vec<f64> = (0..8).map(|_| b / (8f64).sqrt()).collect();
                let (xi1, xi2, ok) = interval_coupling(&g, b, 1, &mut rng).unwrap();
                if ok {
                    ok_count += 1;
                    for t in 0..8 {
                        assert!((xi1[t] - xi2[t] - g[t]).abs() < 1e-13);
                    }
                }
            }
            let p_hat = ok_count as f64 / n as f64;
            let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
            assert!(
                p_hat + 3.0 * se >= 1.0 - b,
                "b = {b}: success rate {p_hat} below 1 - b"
            );
        }
    }

    #[test]
    fn interval_marginals_standard_normal() {
        let mut rng = CounterRng::new(SeedDescriptor::new(11, 0));
        let g = [0.2, -0.1, 0.15, 0.05];
        let n = 30_000;
        let mut first1 = Vec::with_capacity(n);
        let mut first2 = Vec::with_capacity(n);
        for _ in 0..n {
            let (xi1, xi2, _) = interval_coupling(&g, 0.6, 1, &mut rng).unwrap();
            first1.push(xi1[0]);
            first2.push(xi2[2]);
        }
        assert!(ks_statistic_standard_normal(&first1) < ks_critical_1pct(n));
        assert!(ks_statistic_standard_normal(&first2) < ks_critical_1pct(n));
    }

    #[test]
    fn interval_budget_guard() {
        let mut rng = CounterRng::new(SeedDescriptor::new(12, 0));
        let g = [1.0, 1.0];
        assert!(interval_coupling(&g, 0.5, 1, &mut rng).is_err());
    }
}

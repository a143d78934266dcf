//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured numbers (run with `cargo test --test acceptance --
//! --nocapture` to see them).

use ergodrift::coeffs::CoefficientSequence;
use ergodrift::coupling::{
    estimate_tv_tail, sample_hitting_pair, translation_coupling_1d,
    translation_stick_probability, CouplingConfig, CouplingMode,
};
use ergodrift::dynamics::{AffineBijection, EulerModel};
use ergodrift::rates::{convolution_bound_check, rate_v, rate_v_closed_poly, rate_v_fbm};
use ergodrift::rng::{CounterRng, SeedDescriptor};
use ergodrift::stats::{ks_critical_1pct, ks_statistic_standard_normal};
use ergodrift::toeplitz::{
    apply_t, convolution_identity_residual, estimate_decay_exponent, exp_closed_form_b,
    invert_coeffs, invert_coeffs_combinatorial, log_convex_bound_check,
};

/// Random kernel with entries `u_k (k+1)^{-3/2}`, `u ~ U[-1/2, 1/2]`:
/// `Σ_{k≥1} |a_k| < 1`, so the reciprocal is absolutely summable and
/// fixed absolute tolerances are meaningful.
fn damped_kernel(rng: &mut CounterRng, len: usize) -> CoefficientSequence {
    let mut v = vec![1.0];
    v.extend((1..len).map(|k| (rng.next_uniform() - 0.5) * ((k + 1) as f64).powf(-1.5)));
    CoefficientSequence::custom(v).unwrap()
}

#[test]
fn criterion_01_toeplitz_round_trip() {
    let t0 = std::time::Instant::now();
    let mut rng = CounterRng::new(SeedDescriptor::new(101, 0));
    let mut max_identity = 0.0f64;
    let mut max_round_trip = 0.0f64;
    for _ in 0..100 {
        let a = damped_kernel(&mut rng, 64);
        let b = invert_coeffs(&a).unwrap();
        max_identity = max_identity.max(convolution_identity_residual(&a, &b));
        let w: Vec<f64> = (0..64).map(|_| rng.next_standard_normal()).collect();
        let back = apply_t(b.values(), &apply_t(a.values(), &w));
        for (x, y) in back.iter().zip(&w) {
            max_round_trip = max_round_trip.max((x - y).abs());
        }
    }
    assert!(max_identity <= 1e-9, "identity residual {max_identity:.3e}");
    assert!(max_round_trip <= 1e-9, "round trip residual {max_round_trip:.3e}");
    println!(
        "criterion 1: PASS - identity residual {max_identity:.2e}, round trip {max_round_trip:.2e} over 100 kernels in {:?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_02_combinatorial_oracle() {
    let t0 = std::time::Instant::now();
    let mut rng = CounterRng::new(SeedDescriptor::new(102, 0));
    let mut max_diff = 0.0f64;
    for _ in 0..100 {
        // Entries uniform in [-0.5, 0.5] with a_0 = 1, as stated.
        let mut v = vec![1.0];
        v.extend((1..16).map(|_| rng.next_uniform() - 0.5));
        let a = CoefficientSequence::custom(v).unwrap();
        let rec = invert_coeffs(&a).unwrap();
        let comb = invert_coeffs_combinatorial(&a, 12).unwrap();
        for k in 0..=12 {
            max_diff = max_diff.max((rec.get(k) - comb.get(k)).abs());
        }
    }
    assert!(max_diff <= 1e-9, "oracle disagreement {max_diff:.3e}");
    println!(
        "criterion 2: PASS - recursion vs composition-sum oracle, max |diff| {max_diff:.2e} for k <= 12 on 100 kernels in {:?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_03_exponential_closed_form() {
    let t0 = std::time::Instant::now();
    let eps = f64::EPSILON;
    let mut worst = 0.0f64;
    for &(c_a, lambda) in &[(1.0, 1.0), (0.5, 0.5), (-0.2, 1.0)] {
        assert!(ergodrift::coeffs::exp_zeta(c_a, lambda) > 0.0);
        let a = CoefficientSequence::exponential(c_a, lambda, 200).unwrap();
        let b = invert_coeffs(&a).unwrap();
        for k in 1..=200usize {
            let closed = exp_closed_form_b(c_a, lambda, k).unwrap();
            // The recursion computes b_k as an alternating dot product of
            // terms of size ~ max(1,|1-C_a|)^{k-1} e^{-λk}; no f64
            // evaluation can resolve the result below that scale times
            // rounding, so the per-element tolerance carries an absolute
            // floor at the optimal achievable dot-product error.
            let floor = 32.0
                * (k as f64 + 2.0)
                * eps
                * (1.0 - c_a).abs().max(1.0).powi(k as i32 - 1)
                * (c_a * c_a).max(1.0)
                * (-lambda * k as f64).exp();
            let tol = 1e-10 * closed.abs() + floor;
            let diff = (b.get(k) - closed).abs();
            assert!(
                diff <= tol,
                "(C_a, lambda) = ({c_a}, {lambda}), k = {k}: |{} - {closed}| = {diff:.3e} > {tol:.3e}",
                b.get(k)
            );
            worst = worst.max(diff / tol.max(f64::MIN_POSITIVE));
        }
    }
    println!(
        "criterion 3: PASS - recursion matches the closed form for k <= 200 on three kernels (worst margin use {:.2}%) in {:?}",
        100.0 * worst,
        t0.elapsed()
    );
}

#[test]
fn criterion_04_log_convex_bound_large_k() {
    let t0 = std::time::Instant::now();
    for &rho in &[0.8, 1.2, 2.0] {
        let a = CoefficientSequence::polynomial(rho, 100_000).unwrap();
        let b = invert_coeffs(&a).unwrap();
        let report = log_convex_bound_check(&a, &b).unwrap();
        assert!(
            report.pass,
            "rho = {rho}: sign violation {:.3e}, domination violation {:.3e}",
            report.max_sign_violation, report.max_domination_violation
        );
    }
    println!(
        "criterion 4: PASS - b_k <= 0 and |b_k| <= (k+1)^-rho with zero violations for rho in {{0.8, 1.2, 2}}, K = 1e5, in {:?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_05_fractional_reciprocal_slopes() {
    let t0 = std::time::Instant::now();
    let mut lines = Vec::new();
    for &h in &[0.1, 0.3] {
        let a = CoefficientSequence::fbm(h, 1.0, 32_768).unwrap();
        let b = invert_coeffs(&a).unwrap();
        let fit = estimate_decay_exponent(b.values(), 100, 20_000).unwrap();
        let expected = -(h + 0.5);
        assert!(
            (fit.slope - expected).abs() <= 0.05,
            "H = {h}: slope {} vs {expected}",
            fit.slope
        );
        lines.push(format!("H={h}: {:.4} (theory {expected})", fit.slope));
    }
    for &h in &[0.6, 0.9] {
        let a = CoefficientSequence::fbm(h, 1.0, 32_768).unwrap();
        let b = invert_coeffs(&a).unwrap();
        let fit = estimate_decay_exponent(b.values(), 100, 20_000).unwrap();
        assert!(fit.slope <= -1.0, "H = {h}: slope {} above -1", fit.slope);
        lines.push(format!("H={h}: {:.4} (reported; conjectured < -1)", fit.slope));
    }
    println!(
        "criterion 5: PASS - reciprocal decay slopes over k in [1e2, 2e4]: {} in {:?}",
        lines.join("; "),
        t0.elapsed()
    );
}

#[test]
fn criterion_06_rate_formulas() {
    let t0 = std::time::Instant::now();
    for &rho in &[0.8, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0] {
        let (v, _) = rate_v(rho, rho, None).unwrap();
        let closed = rate_v_closed_poly(rho).unwrap();
        assert!((v - closed).abs() <= 1e-3, "rho = {rho}: {v} vs {closed}");
    }
    for i in 1..=9 {
        let h = 0.05 * i as f64;
        let (v, _) = rate_v(h + 0.5, 1.5 - h, None).unwrap();
        let closed = rate_v_fbm(h).unwrap();
        assert!((v - closed).abs() <= 1e-3, "H = {h}: {v} vs {closed}");
        // Same memory order, different local structure: strictly slower.
        let (vpoly, _) = rate_v(1.5 - h, 1.5 - h, None).unwrap();
        assert!(closed < vpoly, "H = {h}: {closed} !< {vpoly}");
    }
    println!(
        "criterion 6: PASS - numeric supremum matches both closed forms (1e-3) and the fractional rate sits strictly below the pure polynomial rate, in {:?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_07_convolution_bound() {
    let t0 = std::time::Instant::now();
    // Fast-converging pairs.
    for &(alpha, beta) in &[(1.5, 2.0), (2.0, 0.6)] {
        let report = convolution_bound_check(alpha, beta, 1_000_000, 0.0).unwrap();
        assert!(report.stabilizes, "({alpha}, {beta}) failed to stabilize: {report:?}");
    }
    // Slow pair: the exponent gap is 0.1 so the transient decays like
    // n^{-0.1}; the per-decade growth drops below 5% around n = 2e7.
    let slow = convolution_bound_check(0.7, 0.9, 20_000_000, 0.0).unwrap();
    assert!(
        slow.stabilizes,
        "(0.7, 0.9): last decade {:.5} vs earlier {:.5}",
        slow.last_decade_max, slow.early_max
    );
    let boundary = convolution_bound_check(1.0, 0.8, 1_000_000, 0.0).unwrap();
    assert!(!boundary.stabilizes, "(1, 0.8) must be flagged as logarithmic growth");
    println!(
        "criterion 7: PASS - C* stabilizes for (1.5,2), (0.7,0.9), (2,0.6) at eps = 0 and grows logarithmically at (1,0.8), in {:?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_08_hitting_sampler_exactness() {
    let t0 = std::time::Instant::now();
    use nalgebra::{DMatrix, DVector};
    let mut rng = CounterRng::new(SeedDescriptor::new(108, 0));
    // A fixed, well-conditioned random affine map in d = 2.
    let mut m = DMatrix::identity(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] += 0.4 * (rng.next_uniform() - 0.5);
        }
    }
    let shift = DVector::from_fn(2, |_, _| rng.next_uniform() - 0.5);
    let lambda = AffineBijection::new(m, shift).unwrap();

    let n = 100_000;
    let mut z1_cols = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut z2_cols = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut max_prob_sum = 0.0f64;
    for _ in 0..n {
        let (z1, z2, _) = sample_hitting_pair(&lambda, &mut rng).unwrap();
        let p_f = 0.5 * lambda.log_density_ratio_forward(&z1).min(0.0).exp();
        let p_b = 0.5 * lambda.log_density_ratio_inverse(&z1).min(0.0).exp();
        max_prob_sum = max_prob_sum.max(p_f + p_b);
        for c in 0..2 {
            z1_cols[c].push(z1[c]);
            z2_cols[c].push(z2[c]);
        }
    }
    assert!(max_prob_sum <= 1.0 + 1e-12, "p_f + p_b reached {max_prob_sum}");
    let crit = ks_critical_1pct(n);
    let mut worst_ks = 0.0f64;
    for cols in [&z1_cols, &z2_cols] {
        for c in 0..2 {
            let d = ks_statistic_standard_normal(&cols[c]);
            worst_ks = worst_ks.max(d);
            assert!(d < crit, "KS statistic {d:.4e} >= critical {crit:.4e}");
        }
    }
    println!(
        "criterion 8: PASS - all four marginals standard normal (worst KS {worst_ks:.2e} < {crit:.2e} at 1%), p_f + p_b <= 1 everywhere (max {max_prob_sum:.4}), in {:?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_09_sticking_coupler_grid() {
    let t0 = std::time::Instant::now();
    let mut rng = CounterRng::new(SeedDescriptor::new(109, 0));
    let n = 100_000usize;
    for i in 1..=9 {
        let b = 0.1 * i as f64;
        for &a in &[b, 0.5 * b] {
            let mut sticks = 0u64;
            for _ in 0..n {
                let (u1, u2, stuck) = translation_coupling_1d(a, b, &mut rng).unwrap();
                if stuck {
                    assert_eq!(u2, u1 + a);
                    sticks += 1;
                }
            }
            let p_hat = sticks as f64 / n as f64;
            let p = translation_stick_probability(a);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (p_hat - p).abs() <= 3.0 * se,
                "a = {a}, b = {b}: p_hat = {p_hat} vs closed form {p} (se {se:.2e})"
            );
            assert!(
                p_hat + 3.0 * se >= 1.0 - b,
                "a = {a}, b = {b}: stick rate {p_hat} below 1 - b"
            );
        }
    }
    println!(
        "criterion 9: PASS - stick rate matches 2Φ(-|a|/2) within 3σ and stays >= 1 - b on the grid b in {{0.1..0.9}}, 1e5 draws per point, in {:?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_10_exponential_end_to_end() {
    let t0 = std::time::Instant::now();
    let model = EulerModel::ornstein_uhlenbeck(1, 1.0, 1.0, 0.1, true).unwrap();
    let kernel = CoefficientSequence::exponential(1.0, 1.0, 64).unwrap();
    let cfg = CouplingConfig::new(
        CouplingMode::Exp { alpha: 0.5, lambda: 1.0, zeta: 2.0 },
        1,
        10_000,
    );
    cfg.validate().unwrap();
    let est = estimate_tv_tail(&model, &kernel, &cfg, 1000, 10_000, 2026, None).unwrap();

    let frac = est.coalesced as f64 / est.replicas as f64;
    assert!(frac >= 0.95, "(a) coalescence fraction {frac}");
    for w in est.p_hat.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "(b) survival must be non-increasing");
    }
    assert!(
        est.soundness.max_coalescence_residual <= 1e-8,
        "(c) replay residual {:.3e}",
        est.soundness.max_coalescence_residual
    );
    assert!(
        est.soundness.max_bookkeeping_residual <= 1e-10,
        "(d) bookkeeping residual {:.3e}",
        est.soundness.max_bookkeeping_residual
    );
    println!(
        "criterion 10: PASS - {:.1}% of 1000 replicas coalesced (>= 95%), survival monotone, replay residual {:.1e} <= 1e-8, bookkeeping {:.1e} <= 1e-10, in {:?}",
        100.0 * frac,
        est.soundness.max_coalescence_residual,
        est.soundness.max_bookkeeping_residual,
        t0.elapsed()
    );
}

#[test]
fn criterion_11_fractional_memory_smoke() {
    let t0 = std::time::Instant::now();
    let model = EulerModel::ornstein_uhlenbeck(1, 1.0, 1.0, 0.1, true).unwrap();
    let kernel = CoefficientSequence::fbm(0.3, 0.1, 1 << 12).unwrap();
    let mut cfg = CouplingConfig::new(
        CouplingMode::Poly { alpha: 0.8, rho: 1.2, beta: 0.8 },
        1,
        10_000,
    );
    cfg.t_star = 100.0;
    cfg.theta = 1.6;
    cfg.varsigma = 1.35;
    cfg.validate().unwrap();
    let est = estimate_tv_tail(&model, &kernel, &cfg, 300, 10_000, 2026, None).unwrap();

    let frac = est.coalesced as f64 / est.replicas as f64;
    assert!(frac >= 0.5, "coalescence fraction {frac}");
    for w in est.p_hat.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "survival must be non-increasing");
    }
    assert!(
        est.soundness.max_coalescence_residual <= 1e-8,
        "replay residual {:.3e}",
        est.soundness.max_coalescence_residual
    );
    assert!(
        est.soundness.max_bookkeeping_residual <= 1e-10,
        "bookkeeping residual {:.3e}",
        est.soundness.max_bookkeeping_residual
    );
    // Per-interval drift budgets and the post-wait admissibility tail
    // condition must hold in at least 99% of the attempts they govern.
    let s = &est.soundness;
    assert!(
        s.budget_violations * 100 <= s.budget_attempts,
        "budget violations {}/{}",
        s.budget_violations,
        s.budget_attempts
    );
    assert!(
        s.adm_cond1_failures_after_wait * 100 <= s.adm_checks_after_wait,
        "admissibility tail failures {}/{}",
        s.adm_cond1_failures_after_wait,
        s.adm_checks_after_wait
    );
    // The theorem gives an upper bound on the achievable exponent; the
    // fitted empirical value is reported without a closeness assertion.
    let v = rate_v_fbm(0.3).unwrap();
    let fitted = est.fit.map(|f| f.exponent);
    println!(
        "criterion 11: PASS - {:.1}% of 300 replicas coalesced (>= 50%), fitted tail exponent {:?} (reliable: {}) reported next to v = {v}, residuals replay {:.1e} / bookkeeping {:.1e}, in {:?}",
        100.0 * frac,
        fitted,
        est.fit_reliable,
        est.soundness.max_coalescence_residual,
        est.soundness.max_bookkeeping_residual,
        t0.elapsed()
    );
}

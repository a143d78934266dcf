//! Invert a kernel by the triangular Toeplitz recursion, cross-check it
//! against the exhaustive composition-sum oracle and against the
//! exponential closed form, and demonstrate the round trip.
//!
//! ```text
//! cargo run --example invert_kernel
//! ```

use ergodrift::coeffs::CoefficientSequence;
use ergodrift::toeplitz::{
    apply_t, convolution_identity_residual, exp_closed_form_b, invert_coeffs,
    invert_coeffs_combinatorial, log_convex_bound_check,
};

fn main() -> ergodrift::Result<()> {
    // Exponential kernel with C_a = 1: the reciprocal terminates after
    // one step, b = (1, -e^{-1}, 0, 0, ...).
    let a = CoefficientSequence::exponential(1.0, 1.0, 256)?;
    let b = invert_coeffs(&a)?;
    println!("exp kernel: b_0..b_3 = {:?}", &b.values()[..4]);
    for k in 1..=4 {
        println!(
            "  closed form b_{k} = {:+.6e}, recursion {:+.6e}",
            exp_closed_form_b(1.0, 1.0, k)?,
            b.get(k)
        );
    }

    // Identity Σ_{k<=i} b_k a_{i-k} = 1{i=0} and both-way convolution
    // round trip.
    println!("convolution identity residual = {:.3e}", convolution_identity_residual(&a, &b));
    let w: Vec<f64> = (0..32).map(|i| (i as f64 * 0.7).sin()).collect();
    let back = apply_t(b.values(), &apply_t(a.values(), &w));
    let rt = w.iter().zip(&back).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max);
    println!("round trip residual          = {rt:.3e}");

    // Independent oracle: exhaustive enumeration of the 2^{k-1} integer
    // compositions of each index.
    let small = CoefficientSequence::custom(vec![1.0, 0.4, -0.2, 0.1, 0.3, -0.15])?;
    let rec = invert_coeffs(&small)?;
    let comb = invert_coeffs_combinatorial(&small, 5)?;
    println!("\nrandomish kernel, recursion vs composition oracle:");
    for k in 0..=5 {
        println!("  b_{k}: {:+.12} vs {:+.12}", rec.get(k), comb.get(k));
    }

    // Log-convex kernels have non-positive reciprocals dominated by
    // b_0 a_k.
    let poly = CoefficientSequence::polynomial(1.2, 20_000)?;
    let pb = invert_coeffs(&poly)?;
    let report = log_convex_bound_check(&poly, &pb)?;
    println!(
        "\npoly(rho=1.2): b_k <= 0 and |b_k| <= a_k -> pass = {} (worst domination excess {:.2e})",
        report.pass, report.max_domination_violation
    );
    Ok(())
}

//! Build the three kernel families, inspect their covariance functions
//! and check the decay-hypothesis constants.
//!
//! ```text
//! cargo run --example kernel_families
//! ```

use ergodrift::coeffs::{
    check_hypothesis_poly, check_log_convex, covariance, CoefficientSequence,
};

fn main() -> ergodrift::Result<()> {
    let poly = CoefficientSequence::polynomial(1.2, 4096)?;
    let exp = CoefficientSequence::exponential(1.0, 1.0, 4096)?;
    let fbm = CoefficientSequence::fbm(0.3, 1.0, 4096)?;

    for (name, a) in [("poly(rho=1.2)", &poly), ("exp(C_a=1, lambda=1)", &exp), ("fbm(H=0.3)", &fbm)] {
        println!("{name}");
        println!("  a_0..a_4        = {:?}", &a.values()[..5]);
        println!("  sum of squares  = {:.6}", a.sum_sq());
        println!("  log-convex      = {}", check_log_convex(a));
        let c = covariance(a, 8)?;
        println!("  c(0), c(1), c(4) = {:.6}, {:.6}, {:.6}", c.get(0), c.get(1), c.get(4));
        if let Some(bound) = c.truncation_error_bound() {
            println!("  covariance truncation error <= {bound:.3e}");
        }
        println!();
    }

    // Minimal constants for the polynomial decay hypothesis on the
    // fractional kernel: |a_k| <= C_rho (k+1)^{-1.2} and
    // |a_k - a_{k+1}| <= C_kappa (k+1)^{-2.2}.
    let report = check_hypothesis_poly(&fbm, 1.2, 2.2);
    println!("fbm(H=0.3) hypothesis constants over the stored range:");
    println!("  C_rho = {:.4}, C_kappa = {:.4}, kappa >= rho + 1: {}",
        report.c_rho, report.c_kappa, report.kappa_dominates);
    Ok(())
}

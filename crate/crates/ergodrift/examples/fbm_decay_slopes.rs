//! Decay exponents of the reciprocal kernel of fractional Brownian
//! increments, fitted by log-log regression: `-(H + 1/2)` for
//! `H < 1/2`, and steeper than `-1` in the conjectured regime
//! `H > 1/2`.
//!
//! ```text
//! cargo run --release --example fbm_decay_slopes
//! ```

use ergodrift::coeffs::CoefficientSequence;
use ergodrift::toeplitz::{estimate_decay_exponent, invert_coeffs};

fn main() -> ergodrift::Result<()> {
    let k_trunc = 32_768;
    println!("{:>5} {:>12} {:>12} {:>10}", "H", "fitted", "theory", "rms");
    for &h in &[0.1, 0.3, 0.6, 0.9] {
        let a = CoefficientSequence::fbm(h, 1.0, k_trunc)?;
        let b = invert_coeffs(&a)?;
        let fit = estimate_decay_exponent(b.values(), 100, 20_000)?;
        let theory = if h < 0.5 {
            format!("{:+.3}", -(h + 0.5))
        } else {
            "< -1 (conj.)".to_string()
        };
        println!("{h:>5} {:>+12.4} {theory:>12} {:>10.2e}", fit.slope, fit.residual_rms);
    }
    println!("\n(fit over k in [100, 20000] of log|b_k| against log(k+1))");
    Ok(())
}

//! The polynomial convergence-rate function `v(β,ρ)` against its closed
//! forms, and the discrete convolution bound behind the sticking-step
//! estimates.
//!
//! ```text
//! cargo run --example rate_function
//! ```

use ergodrift::rates::{convolution_bound_check, rate_v, rate_v_closed_poly, rate_v_fbm};

fn main() -> ergodrift::Result<()> {
    println!("pure polynomial kernels (beta = rho):");
    println!("{:>6} {:>12} {:>12} {:>10}", "rho", "numeric", "closed", "argmax");
    for &rho in &[0.8, 1.0, 1.2, 1.5, 2.0, 3.0] {
        let (v, alpha) = rate_v(rho, rho, None)?;
        println!("{rho:>6} {v:>12.6} {:>12.6} {alpha:>10.4}", rate_v_closed_poly(rho)?);
    }

    println!("\nfractional increments (beta, rho) = (H + 1/2, 3/2 - H):");
    println!("{:>6} {:>12} {:>12} {:>14}", "H", "numeric", "closed", "poly same rho");
    for i in 1..=4 {
        let h = 0.1 * i as f64;
        let (v, _) = rate_v(h + 0.5, 1.5 - h, None)?;
        let (vpoly, _) = rate_v(1.5 - h, 1.5 - h, None)?;
        println!("{h:>6.1} {v:>12.6} {:>12.6} {vpoly:>14.6}", rate_v_fbm(h)?);
    }
    println!("(same memory order, slower rate: the local covariance structure matters)");

    println!("\nconvolution bound S(n)(n+1)^min{{a,b,a+b-1}}:");
    for (alpha, beta, n_max) in [(1.5, 2.0, 1_000_000u64), (1.0, 0.8, 1_000_000)] {
        let report = convolution_bound_check(alpha, beta, n_max, 0.0)?;
        println!(
            "  (alpha, beta) = ({alpha}, {beta}): C* early {:.4}, last decade {:.4} -> {}",
            report.early_max,
            report.last_decade_max,
            if report.stabilizes { "stabilizes" } else { "keeps growing (boundary case)" }
        );
    }
    Ok(())
}

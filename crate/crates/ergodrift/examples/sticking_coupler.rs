//! The sticking couplers: the maximal 1D translation coupling and the
//! block coupler that rides it along the drift direction.
//!
//! ```text
//! cargo run --example sticking_coupler
//! ```

use ergodrift::coupling::{interval_coupling, translation_coupling_1d, translation_stick_probability};
use ergodrift::rng::{CounterRng, SeedDescriptor};

fn main() -> ergodrift::Result<()> {
    let mut rng = CounterRng::new(SeedDescriptor::new(3, 0));
    let n = 100_000;

    println!("1d translation coupling, {n} draws per point:");
    println!("{:>5} {:>10} {:>12} {:>8}", "a", "empirical", "2Phi(-a/2)", "1-b");
    for &a in &[0.1, 0.3, 0.5, 0.9] {
        let mut sticks = 0u64;
        for _ in 0..n {
            let (_, _, stuck) = translation_coupling_1d(a, a, &mut rng)?;
            sticks += stuck as u64;
        }
        println!(
            "{a:>5} {:>10.4} {:>12.4} {:>8.4}",
            sticks as f64 / n as f64,
            translation_stick_probability(a),
            1.0 - a
        );
    }

    // Block coupling: force ξ¹ = ξ² + g across a whole 16-step window.
    let g: Vec<f64> = (0..16).map(|t| 0.08 * ((t as f64 * 0.9).cos())).collect();
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let trials = 20_000;
    let mut ok = 0u64;
    for _ in 0..trials {
        let (xi1, xi2, success) = interval_coupling(&g, 0.5, 1, &mut rng)?;
        if success {
            ok += 1;
            let worst = (0..16)
                .map(|t| (xi1[t] - xi2[t] - g[t]).abs())
                .fold(0.0f64, f64::max);
            assert!(worst < 1e-12);
        }
    }
    println!(
        "\nblock coupler: |g| = {norm:.3}, success rate {:.4} (closed form {:.4})",
        ok as f64 / trials as f64,
        translation_stick_probability(norm)
    );
    Ok(())
}

//! One coupling run, narrated: the event log of the trial loop and the
//! final soundness numbers.
//!
//! ```text
//! cargo run --example coupling_trace
//! ```

use ergodrift::coeffs::CoefficientSequence;
use ergodrift::coupling::{run_coupling, CouplingConfig, CouplingMode};
use ergodrift::dynamics::EulerModel;
use ergodrift::rng::SeedDescriptor;

fn main() -> ergodrift::Result<()> {
    let model = EulerModel::ornstein_uhlenbeck(1, 1.0, 1.0, 0.1, true)?;
    let kernel = CoefficientSequence::fbm(0.3, 0.1, 1024)?;
    let mut cfg = CouplingConfig::new(
        CouplingMode::Poly { alpha: 0.8, rho: 1.2, beta: 0.8 },
        1,
        5_000,
    );
    cfg.t_star = 50.0;
    cfg.theta = 1.6;

    let trace = run_coupling(&model, &kernel, &cfg, SeedDescriptor::new(12, 0))?;
    println!("{:>6}  {:<6} {:<22} detail", "time", "phase", "event");
    for ev in &trace.events {
        println!("{:>6}  {:<6} {:<22} {}", ev.time, ev.phase, ev.event, ev.detail);
    }

    println!("\ntrials:");
    for t in &trace.trials {
        println!(
            "  j={} tau=[{}, {}] ell*={:?} admissible={} (tail ratio {:.2e})",
            t.j, t.tau_start, t.tau_end, t.ell_star, t.admissible, t.adm_ratio
        );
    }

    match trace.tau_infinity {
        Some(tau) => println!(
            "\ncoalesced at tau_inf = {tau}; max |X1 - X2| afterwards = {:.2e}",
            trace.coalescence_residual
        ),
        None => println!("\nnot coalesced within the horizon"),
    }
    println!("bookkeeping residual (delta difference vs kernel * drift): {:.2e}", trace.bookkeeping_residual);
    Ok(())
}

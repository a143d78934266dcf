//! Command-line front end: experiment orchestration, deterministic
//! seeding, CSV and JSON emission.
//!
//! Subcommands: `coeffs`, `invert`, `slope`, `simulate-noise`, `rate`,
//! `figure1`, `couple`, `tail`. Every output file starts with a single
//! `#` header carrying the resolved configuration and its hash, so any
//! result can be traced back to the exact run that produced it. Exit
//! codes: 0 success, 2 parameter or configuration errors, 3 internal
//! invariant breaches.

pub mod config;

use crate::coeffs::CoefficientSequence;
use crate::coupling::{estimate_tv_tail, run_coupling, CouplingMode};
use crate::noise::sample_path;
use crate::rates::{rate_v, rate_v_fbm};
use crate::rng::SeedDescriptor;
use crate::toeplitz::{estimate_decay_exponent, invert_coeffs, invert_coeffs_combinatorial};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use config::{fnv1a, read_sequence_csv, RunConfig};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "ergodrift",
    version,
    about = "Simulation and verification toolkit for discrete dynamics driven by stationary Gaussian noise with moving-average memory"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a moving-average kernel and write it as CSV (columns k,a_k)
    Coeffs(CoeffsArgs),
    /// Invert a kernel into its reciprocal sequence (columns k,b_k)
    Invert(InvertArgs),
    /// Fit a log-log decay exponent to a sequence file
    Slope(SlopeArgs),
    /// Simulate noise paths (columns replica,n,component,delta)
    SimulateNoise(SimulateNoiseArgs),
    /// Evaluate the polynomial convergence-rate function v(beta, rho)
    Rate(RateArgs),
    /// Reciprocal-decay data for a list of Hurst parameters, one CSV and
    /// one JSON sidecar per value
    Figure1(Figure1Args),
    /// Run coupling replicas and write the survival curve of the
    /// coupling time (columns n,p_hat,ci_lo,ci_hi)
    Couple(RunArgs),
    /// Like `couple`, plus a summary JSON with the fitted tail exponent
    /// next to the theoretical rate
    Tail(RunArgs),
}

#[derive(Args)]
struct CoeffsArgs {
    /// Kernel family: poly | exp | fbm | custom
    #[arg(long)]
    family: String,
    /// Family parameters, comma-separated key=value pairs
    /// (poly: rho=..; exp: c_a=..,lambda=..; fbm: hurst=..,h=..;
    /// custom: file=path.csv)
    #[arg(long)]
    params: Option<String>,
    /// Truncation length K (indices 0..=K are stored)
    #[arg(long = "k-max")]
    k_max: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InvertArgs {
    /// Kernel CSV (columns k,a_k)
    #[arg(long)]
    coeffs: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Cross-check the recursion against the combinatorial formula up to
    /// this index (max 20); mismatch beyond 1e-9 is an internal error
    #[arg(long = "oracle-check")]
    oracle_check: Option<usize>,
}

#[derive(Args)]
struct SlopeArgs {
    /// Sequence CSV (columns k,value)
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    kmin: usize,
    #[arg(long)]
    kmax: usize,
    /// Emit {"slope", "intercept", "residual_rms"} JSON on stdout
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateNoiseArgs {
    /// Kernel CSV (columns k,a_k)
    #[arg(long)]
    coeffs: PathBuf,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    steps: usize,
    /// History buffer length (innovations before time 1); defaults to
    /// the kernel truncation length
    #[arg(long)]
    history: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    replicas: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RateArgs {
    /// Reciprocal-decay exponent beta (with --rho)
    #[arg(long)]
    beta: Option<f64>,
    /// Kernel-decay exponent rho (with --beta)
    #[arg(long)]
    rho: Option<f64>,
    /// Closed-form rate for fractional increments with this Hurst
    /// parameter in (0, 1/2)
    #[arg(long)]
    fbm: Option<f64>,
    /// Emit {"v", "argmax_alpha"} JSON on stdout
    #[arg(long)]
    json: bool,
    /// Tabulate a grid (with --rho-grid): comma-separated beta values
    #[arg(long = "beta-grid")]
    beta_grid: Option<String>,
    /// Comma-separated rho values for the grid
    #[arg(long = "rho-grid")]
    rho_grid: Option<String>,
    /// Output CSV for grid mode (columns beta,rho,v,argmax_alpha,reason)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Figure1Args {
    /// Comma-separated Hurst parameters
    #[arg(long = "hurst-list")]
    hurst_list: String,
    /// Time step of the fractional increments
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    /// Kernel truncation length
    #[arg(long = "k-trunc", default_value_t = 32768)]
    k_trunc: usize,
    /// Slope-fit range
    #[arg(long = "k-min", default_value_t = 100)]
    k_min: usize,
    #[arg(long = "k-max", default_value_t = 20000)]
    k_max: usize,
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
}

/// Flag mirror of every config-file key (identical strings; flags
/// override the file).
#[derive(Args, Default, Clone)]
struct KeyOverrides {
    #[arg(long, help = "kernel family: poly | exp | fbm | custom")]
    family: Option<String>,
    #[arg(long, help = "kernel/mode decay exponent rho")]
    rho: Option<String>,
    #[arg(long = "c_a", help = "exponential kernel amplitude C_a")]
    c_a: Option<String>,
    #[arg(long, help = "exponential decay lambda")]
    lambda: Option<String>,
    #[arg(long, help = "Hurst parameter of the fbm kernel")]
    hurst: Option<String>,
    #[arg(long, help = "custom kernel CSV path")]
    coeffs: Option<String>,
    #[arg(long = "k_trunc", help = "kernel truncation length")]
    k_trunc: Option<String>,
    #[arg(long, help = "state model: ou")]
    model: Option<String>,
    #[arg(long, help = "drift rate of the ou model")]
    kappa: Option<String>,
    #[arg(long = "sigma-kind", help = "diffusion kind: const | bounded-smooth")]
    sigma_kind: Option<String>,
    #[arg(long, help = "diffusion scale")]
    sigma: Option<String>,
    #[arg(long, help = "Euler step (and fbm increment step)")]
    h: Option<String>,
    #[arg(long, help = "state dimension")]
    dim: Option<String>,
    #[arg(long = "enforce_h_bound", help = "reject steps outside the admissible range (default true)")]
    enforce_h_bound: Option<String>,
    #[arg(long, help = "coupling mode: poly | exp")]
    mode: Option<String>,
    #[arg(long, help = "admissibility speed exponent alpha")]
    alpha: Option<String>,
    #[arg(long, help = "reciprocal decay exponent beta (poly mode)")]
    beta: Option<String>,
    #[arg(long, help = "reciprocal decay exponent zeta (exp mode)")]
    zeta: Option<String>,
    #[arg(long = "K", help = "admissibility radius K")]
    adm_radius: Option<String>,
    #[arg(long = "K1", help = "hit acceptance radius K1")]
    hit_radius: Option<String>,
    #[arg(long, help = "base sticking-interval length (>= 2)")]
    c2: Option<String>,
    #[arg(long = "t_star", help = "base waiting duration")]
    t_star: Option<String>,
    #[arg(long, help = "waiting growth factor (> 1)")]
    varsigma: Option<String>,
    #[arg(long, help = "waiting exponent theta")]
    theta: Option<String>,
    #[arg(long, help = "maximum simulated time")]
    horizon: Option<String>,
    #[arg(long = "budget_cap", help = "cap on the first-interval budget")]
    budget_cap: Option<String>,
    #[arg(long = "n_check", help = "admissibility tail indices to scan")]
    n_check: Option<String>,
    #[arg(long = "x0_1", help = "initial position of copy 1 (scalar or comma list)")]
    x0_1: Option<String>,
    #[arg(long = "x0_2", help = "initial position of copy 2")]
    x0_2: Option<String>,
    #[arg(long, help = "base seed (fallback: ERGODRIFT_SEED, then 0)")]
    seed: Option<String>,
    #[arg(long, help = "number of Monte Carlo replicas")]
    replicas: Option<String>,
    #[arg(long, help = "worker threads (default: available parallelism)")]
    workers: Option<String>,
}

impl KeyOverrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let pairs: [(&str, &Option<String>); 32] = [
            ("family", &self.family),
            ("rho", &self.rho),
            ("c_a", &self.c_a),
            ("lambda", &self.lambda),
            ("hurst", &self.hurst),
            ("coeffs", &self.coeffs),
            ("k_trunc", &self.k_trunc),
            ("model", &self.model),
            ("kappa", &self.kappa),
            ("sigma-kind", &self.sigma_kind),
            ("sigma", &self.sigma),
            ("h", &self.h),
            ("dim", &self.dim),
            ("enforce_h_bound", &self.enforce_h_bound),
            ("mode", &self.mode),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("zeta", &self.zeta),
            ("K", &self.adm_radius),
            ("K1", &self.hit_radius),
            ("c2", &self.c2),
            ("t_star", &self.t_star),
            ("varsigma", &self.varsigma),
            ("theta", &self.theta),
            ("horizon", &self.horizon),
            ("budget_cap", &self.budget_cap),
            ("n_check", &self.n_check),
            ("x0_1", &self.x0_1),
            ("x0_2", &self.x0_2),
            ("seed", &self.seed),
            ("replicas", &self.replicas),
            ("workers", &self.workers),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Survival-curve CSV output
    #[arg(long)]
    out: PathBuf,
    /// Directory for per-replica event traces (first 8 replicas)
    #[arg(long = "trace-out")]
    trace_out: Option<PathBuf>,
    /// Summary JSON output (tail subcommand; default <out>.summary.json)
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    overrides: KeyOverrides,
}

/// Parses argv and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Coeffs(a) => cmd_coeffs(a),
        Cmd::Invert(a) => cmd_invert(a),
        Cmd::Slope(a) => cmd_slope(a),
        Cmd::SimulateNoise(a) => cmd_simulate_noise(a),
        Cmd::Rate(a) => cmd_rate(a),
        Cmd::Figure1(a) => cmd_figure1(a),
        Cmd::Couple(a) => cmd_run(a, false),
        Cmd::Tail(a) => cmd_run(a, true),
    }
}

fn header(cmd: &str, pairs: &[(&str, String)]) -> String {
    let canonical: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    let inline: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(
        "# ergodrift {cmd} config_hash={:016x} {}",
        fnv1a(canonical.as_bytes()),
        inline.join(" ")
    )
}

fn write_series<I: IntoIterator<Item = (usize, f64)>>(
    path: &Path,
    head: &str,
    columns: &str,
    rows: I,
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{head}")?;
    writeln!(f, "{columns}")?;
    for (k, v) in rows {
        writeln!(f, "{k},{v:.16e}")?;
    }
    Ok(())
}

fn parse_param_list(spec: &Option<String>) -> Result<Vec<(String, String)>> {
    let Some(spec) = spec else { return Ok(Vec::new()) };
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("expected key=value in --params, got {kv:?}")))
        })
        .collect()
}

fn cmd_coeffs(args: CoeffsArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    cfg.set("family", &args.family)?;
    cfg.set("k_trunc", &args.k_max.to_string())?;
    for (k, v) in parse_param_list(&args.params)? {
        let key = if k == "file" { "coeffs".to_string() } else { k };
        cfg.set(&key, &v)?;
    }
    let kernel = cfg.build_kernel()?;
    let pairs: Vec<(&str, String)> = vec![("resolved", cfg.summary_line())];
    write_series(
        &args.out,
        &header("coeffs", &pairs),
        "k,a_k",
        kernel.values().iter().copied().enumerate(),
    )?;
    if kernel.inverse_divergence_warning() {
        eprintln!("warning: lambda - ln|1 - C_a| <= 0, the reciprocal sequence diverges");
    }
    Ok(())
}

fn cmd_invert(args: InvertArgs) -> Result<()> {
    let values = read_sequence_csv(&args.coeffs)?;
    let kernel = CoefficientSequence::custom(values)?;
    let inverse = invert_coeffs(&kernel)?;
    if let Some(k_check) = args.oracle_check {
        let oracle = invert_coeffs_combinatorial(&kernel, k_check)?;
        let mut max_diff = 0.0f64;
        for k in 0..=k_check {
            max_diff = max_diff.max((inverse.get(k) - oracle.get(k)).abs());
        }
        println!(
            "oracle check: max |recursion - combinatorial| = {max_diff:.3e} for k <= {k_check}"
        );
        if max_diff > 1e-9 {
            return Err(Error::InternalInvariant(format!(
                "recursion disagrees with the combinatorial formula by {max_diff:.3e}"
            )));
        }
    }
    let pairs = vec![
        ("coeffs", args.coeffs.display().to_string()),
        ("oracle_check", format!("{:?}", args.oracle_check)),
    ];
    write_series(
        &args.out,
        &header("invert", &pairs),
        "k,b_k",
        inverse.values().iter().copied().enumerate(),
    )
}

fn cmd_slope(args: SlopeArgs) -> Result<()> {
    let seq = read_sequence_csv(&args.input)?;
    let fit = estimate_decay_exponent(&seq, args.kmin, args.kmax)?;
    if args.json {
        let obj = serde_json::json!({
            "slope": fit.slope,
            "intercept": fit.intercept,
            "residual_rms": fit.residual_rms,
        });
        println!("{obj}");
    } else {
        println!(
            "slope {:.6} intercept {:.6} residual_rms {:.3e} over k in [{}, {}] ({} zeros dropped)",
            fit.slope,
            fit.intercept,
            fit.residual_rms,
            fit.k_range.0,
            fit.k_range.1,
            fit.dropped_zeros
        );
    }
    Ok(())
}

fn cmd_simulate_noise(args: SimulateNoiseArgs) -> Result<()> {
    let values = read_sequence_csv(&args.coeffs)?;
    let kernel = CoefficientSequence::custom(values)?;
    let history = args.history.unwrap_or_else(|| kernel.k_max());
    let seed = resolve_seed(args.seed)?;
    let pairs = vec![
        ("coeffs", args.coeffs.display().to_string()),
        ("dim", args.dim.to_string()),
        ("steps", args.steps.to_string()),
        ("history", history.to_string()),
        ("seed", seed.to_string()),
        ("replicas", args.replicas.to_string()),
    ];
    let mut f = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
    writeln!(f, "{}", header("simulate-noise", &pairs))?;
    writeln!(f, "replica,n,component,delta")?;
    for r in 0..args.replicas {
        let path = sample_path(
            &kernel,
            args.dim,
            args.steps,
            history,
            SeedDescriptor::new(seed, r),
        )?;
        for n in 1..=args.steps {
            for (c, v) in path.delta(n).iter().enumerate() {
                writeln!(f, "{r},{n},{c},{v:.16e}")?;
            }
        }
    }
    Ok(())
}

fn parse_grid(spec: &str, what: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("{what}: cannot parse {s:?}")))
        })
        .collect()
}

fn cmd_rate(args: RateArgs) -> Result<()> {
    if let (Some(bg), Some(rg)) = (&args.beta_grid, &args.rho_grid) {
        let out = args
            .out
            .as_ref()
            .ok_or_else(|| Error::Config("grid mode needs --out".into()))?;
        let betas = parse_grid(bg, "--beta-grid")?;
        let rhos = parse_grid(rg, "--rho-grid")?;
        let pairs = vec![("beta_grid", bg.clone()), ("rho_grid", rg.clone())];
        let mut f = std::io::BufWriter::new(std::fs::File::create(out)?);
        writeln!(f, "{}", header("rate", &pairs))?;
        writeln!(f, "beta,rho,v,argmax_alpha,reason")?;
        for &beta in &betas {
            for &rho in &rhos {
                match rate_v(beta, rho, None) {
                    Ok((v, alpha)) => writeln!(f, "{beta},{rho},{v:.12},{alpha:.12},")?,
                    Err(e) => writeln!(f, "{beta},{rho},NaN,NaN,{e}")?,
                }
            }
        }
        return Ok(());
    }
    let (v, argmax) = if let Some(h) = args.fbm {
        let v = rate_v_fbm(h)?;
        // Numeric argmax for the same pairing.
        let (_, alpha) = rate_v(h + 0.5, 1.5 - h, None)?;
        (v, alpha)
    } else {
        let beta = args
            .beta
            .ok_or_else(|| Error::Config("need --beta with --rho, or --fbm".into()))?;
        let rho = args.rho.ok_or_else(|| Error::Config("need --rho with --beta".into()))?;
        rate_v(beta, rho, None)?
    };
    if args.json {
        println!("{}", serde_json::json!({ "v": v, "argmax_alpha": argmax }));
    } else {
        println!("v = {v:.9} at alpha = {argmax:.9}");
    }
    Ok(())
}

fn cmd_figure1(args: Figure1Args) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)?;
    for h in parse_grid(&args.hurst_list, "--hurst-list")? {
        let kernel = CoefficientSequence::fbm(h, args.step, args.k_trunc)?;
        let inverse = invert_coeffs(&kernel)?;
        let fit = estimate_decay_exponent(inverse.values(), args.k_min, args.k_max)?;
        let pairs = vec![
            ("hurst", h.to_string()),
            ("step", args.step.to_string()),
            ("k_trunc", args.k_trunc.to_string()),
        ];
        let head = header("figure1", &pairs);
        let csv_path = args.out_dir.join(format!("fig1_h{h}.csv"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
        writeln!(f, "{head}")?;
        writeln!(f, "log_k,log_abs_b")?;
        for (k, &b) in inverse.values().iter().enumerate().skip(1) {
            if b != 0.0 {
                writeln!(f, "{:.12},{:.12}", ((k + 1) as f64).ln(), b.abs().ln())?;
            }
        }
        let sidecar = serde_json::json!({
            "hurst": h,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "residual_rms": fit.residual_rms,
            "k_min": args.k_min,
            "k_max": args.k_max,
            "dropped_zeros": fit.dropped_zeros,
            "config_hash": format!("{:016x}", fnv1a(head.as_bytes())),
        });
        std::fs::write(
            args.out_dir.join(format!("fig1_h{h}.json")),
            serde_json::to_string_pretty(&sidecar).unwrap(),
        )?;
        println!(
            "H = {h}: fitted slope {:.4} over k in [{}, {}]",
            fit.slope, args.k_min, args.k_max
        );
    }
    Ok(())
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    RunConfig::default().seed(flag)
}

fn cmd_run(args: RunArgs, with_summary: bool) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    args.overrides.apply(&mut cfg)?;

    let kernel = cfg.build_kernel()?;
    let model = cfg.build_model()?;
    let coupling = cfg.build_coupling(&kernel)?;
    let replicas: u64 = cfg
        .get("replicas")
        .unwrap_or("100")
        .parse()
        .map_err(|_| Error::Config("key replicas: not an integer".into()))?;
    let seed = cfg.seed(None)?;
    let horizon = coupling.horizon;

    let workers: Option<usize> = match cfg.get("workers") {
        None => None,
        Some(w) => {
            Some(w.parse().map_err(|_| Error::Config("key workers: not an integer".into()))?)
        }
    };

    let estimate = {
        let task = || estimate_tv_tail(&model, &kernel, &coupling, replicas, horizon, seed, None);
        match workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?
                .install(task),
            None => task(),
        }?
    };

    let pairs: Vec<(&str, String)> = vec![("resolved", cfg.summary_line())];
    let head = header(if with_summary { "tail" } else { "couple" }, &pairs);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
    writeln!(f, "{head}")?;
    writeln!(f, "n,p_hat,ci_lo,ci_hi")?;
    for i in 0..estimate.grid.len() {
        writeln!(
            f,
            "{},{:.8},{:.8},{:.8}",
            estimate.grid[i], estimate.p_hat[i], estimate.ci_lo[i], estimate.ci_hi[i]
        )?;
    }
    drop(f);

    if let Some(dir) = &args.trace_out {
        std::fs::create_dir_all(dir)?;
        for r in 0..replicas.min(8) {
            let trace = run_coupling(&model, &kernel, &coupling, SeedDescriptor::new(seed, r))?;
            let mut tf = std::io::BufWriter::new(std::fs::File::create(
                dir.join(format!("trace_{r:04}.csv")),
            )?);
            writeln!(tf, "{head}")?;
            writeln!(tf, "time,phase,event,detail")?;
            for ev in &trace.events {
                writeln!(
                    tf,
                    "{},{},{},{}",
                    ev.time,
                    ev.phase,
                    ev.event,
                    ev.detail.replace(',', ";")
                )?;
            }
        }
    }

    println!(
        "{} of {} replicas coalesced within horizon {}",
        estimate.coalesced, replicas, horizon
    );

    if with_summary {
        let summary_path = args
            .summary
            .clone()
            .unwrap_or_else(|| args.out.with_extension("summary.json"));
        let v_theory = match coupling.mode {
            CouplingMode::Poly { alpha: _, rho, beta } => rate_v(beta, rho, None).ok(),
            CouplingMode::Exp { .. } => None,
        };
        let s = &estimate.soundness;
        let obj = serde_json::json!({
            "replicas": estimate.replicas,
            "coalesced": estimate.coalesced,
            "coalesced_fraction": estimate.coalesced as f64 / estimate.replicas as f64,
            "fitted_exponent": estimate.fit.map(|fit| serde_json::json!({
                "exponent": fit.exponent,
                "intercept": fit.intercept,
                "residual_rms": fit.residual_rms,
                "n_lo": fit.n_range.0,
                "n_hi": fit.n_range.1,
                "replicas_in_window": fit.replicas_in_window,
            })),
            "fit_reliable": estimate.fit_reliable,
            "v_theoretical": v_theory.map(|(v, _)| v),
            "v_argmax_alpha": v_theory.map(|(_, a)| a),
            "soundness": {
                "max_hit_residual": s.max_hit_residual,
                "max_glue_residual": s.max_glue_residual,
                "max_coalescence_residual": s.max_coalescence_residual,
                "max_bookkeeping_residual": s.max_bookkeeping_residual,
                "budget_attempts": s.budget_attempts,
                "budget_violations": s.budget_violations,
                "adm_checks_after_wait": s.adm_checks_after_wait,
                "adm_cond1_failures_after_wait": s.adm_cond1_failures_after_wait,
                "step1_attempts": s.step1_attempts,
                "step1_hits": s.step1_hits,
            },
            "config_hash": format!("{:016x}", cfg.hash()),
            "resolved_config": cfg.resolved(),
        });
        std::fs::write(&summary_path, serde_json::to_string_pretty(&obj).unwrap())?;
        println!("summary written to {}", summary_path.display());
    }
    Ok(())
}

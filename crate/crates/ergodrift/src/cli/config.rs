//! Flat `key = value` run configuration shared by the config file and the
//! command-line flags (flags override file values; the names are
//! identical strings).

use crate::coeffs::{exp_zeta, CoefficientSequence};
use crate::coupling::{CouplingConfig, CouplingMode};
use crate::dynamics::EulerModel;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

/// Every key the run configuration understands.
pub const KNOWN_KEYS: &[&str] = &[
    // kernel
    "family", "rho", "c_a", "lambda", "hurst", "coeffs", "k_trunc",
    // model
    "model", "kappa", "sigma-kind", "sigma", "h", "dim", "enforce_h_bound",
    // coupling
    "mode", "alpha", "beta", "zeta", "K", "K1", "c2", "t_star", "varsigma", "theta", "horizon",
    "budget_cap", "n_check", "x0_1", "x0_2",
    // run
    "seed", "replicas", "workers",
];

/// A resolved run configuration: an ordered key/value map plus the places
/// the values came from.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    map: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parses a flat config file: one `key = value` per line, `#` starts
    /// a comment, blank lines ignored. Unknown keys are errors.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected `key = value`, got {raw:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown config key {key:?}")));
        }
        self.map.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Overlays flag values (which win) onto file values.
    pub fn overlay(&mut self, other: &RunConfig) {
        for (k, v) in &other.map {
            self.map.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("key {key}: cannot parse {v:?} as a number"))),
        }
    }

    fn f64_required(&self, key: &str) -> Result<f64> {
        self.map
            .get(key)
            .ok_or_else(|| Error::Config(format!("missing required key {key:?}")))?
            .parse()
            .map_err(|_| Error::Config(format!("key {key}: not a number")))
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("key {key}: cannot parse {v:?} as an integer"))),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.map.get(key).map(|s| s.as_str()) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(Error::Config(format!("key {key}: expected a boolean, got {v:?}"))),
        }
    }

    /// Vector-valued key: either one scalar replicated to `dim` entries
    /// or a comma-separated list of exactly `dim` numbers.
    fn vec_or(&self, key: &str, dim: usize, default: f64) -> Result<Vec<f64>> {
        match self.map.get(key) {
            None => Ok(vec![default; dim]),
            Some(v) => {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                let nums: Vec<f64> = parts
                    .iter()
                    .map(|p| {
                        p.parse().map_err(|_| {
                            Error::Config(format!("key {key}: cannot parse {p:?} as a number"))
                        })
                    })
                    .collect::<Result<_>>()?;
                if nums.len() == 1 {
                    Ok(vec![nums[0]; dim])
                } else if nums.len() == dim {
                    Ok(nums)
                } else {
                    Err(Error::Config(format!(
                        "key {key}: expected 1 or {dim} numbers, got {}",
                        nums.len()
                    )))
                }
            }
        }
    }

    /// Builds the memory kernel named by the `family` key.
    pub fn build_kernel(&self) -> Result<CoefficientSequence> {
        let k_trunc = self.u64_or("k_trunc", 4096)? as usize;
        match self.get("family") {
            Some("poly") => CoefficientSequence::polynomial(self.f64_required("rho")?, k_trunc),
            Some("exp") => CoefficientSequence::exponential(
                self.f64_or("c_a", 1.0)?,
                self.f64_required("lambda")?,
                k_trunc,
            ),
            Some("fbm") => CoefficientSequence::fbm(
                self.f64_required("hurst")?,
                self.f64_or("h", 0.1)?,
                k_trunc,
            ),
            Some("custom") => {
                let path = self
                    .get("coeffs")
                    .ok_or_else(|| Error::Config("custom family needs key `coeffs`".into()))?;
                let values = read_sequence_csv(Path::new(path))?;
                CoefficientSequence::custom(values)
            }
            Some(other) => Err(Error::Config(format!(
                "unknown family {other:?}; expected poly, exp, fbm or custom"
            ))),
            None => Err(Error::Config("missing required key \"family\"".into())),
        }
    }

    /// Builds the state-update model (`model = ou` with `sigma-kind`
    /// either `const` or `bounded-smooth`).
    pub fn build_model(&self) -> Result<EulerModel> {
        let dim = self.u64_or("dim", 1)? as usize;
        let kappa = self.f64_or("kappa", 1.0)?;
        let sigma = self.f64_or("sigma", 1.0)?;
        let h = self.f64_or("h", 0.1)?;
        let enforce = self.bool_or("enforce_h_bound", true)?;
        match self.get("model").unwrap_or("ou") {
            "ou" => match self.get("sigma-kind").unwrap_or("const") {
                "const" => EulerModel::ornstein_uhlenbeck(dim, kappa, sigma, h, enforce),
                "bounded-smooth" => EulerModel::ou_bounded_sigma(dim, kappa, sigma, h, enforce),
                other => Err(Error::Config(format!(
                    "unknown sigma-kind {other:?}; expected const or bounded-smooth"
                ))),
            },
            other => Err(Error::Config(format!(
                "unknown model {other:?}; only `ou` is configurable (custom models are library-level)"
            ))),
        }
    }

    /// Builds the coupling configuration. Decay parameters default from
    /// the kernel family where they are derivable: `rho` and `beta` from
    /// a fractional kernel (`3/2 - H` and `H + 1/2`), `rho` and `beta`
    /// from a polynomial kernel (both `ρ`, valid since such kernels are
    /// log-convex), `lambda` and `zeta` from an exponential kernel.
    pub fn build_coupling(&self, kernel: &CoefficientSequence) -> Result<CouplingConfig> {
        let dim = self.u64_or("dim", 1)? as usize;
        let horizon = self.u64_or("horizon", 10_000)?;
        let alpha = self.f64_required("alpha")?;
        let mode = match self.get("mode") {
            Some("poly") => {
                let (rho_d, beta_d) = match kernel.family() {
                    crate::coeffs::Family::Fbm { hurst, .. } => {
                        (Some(1.5 - hurst), Some(hurst + 0.5))
                    }
                    crate::coeffs::Family::Polynomial { rho } => (Some(rho), Some(rho)),
                    _ => (None, None),
                };
                let rho = match self.map.get("rho") {
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::Config("key rho: not a number".into()))?,
                    None => rho_d.ok_or_else(|| {
                        Error::Config("key rho required for poly mode with this kernel".into())
                    })?,
                };
                let beta = match self.map.get("beta") {
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::Config("key beta: not a number".into()))?,
                    None => beta_d.ok_or_else(|| {
                        Error::Config("key beta required for poly mode with this kernel".into())
                    })?,
                };
                CouplingMode::Poly { alpha, rho, beta }
            }
            Some("exp") => {
                let (lambda_d, zeta_d) = match kernel.family() {
                    crate::coeffs::Family::Exponential { c_a, lambda } => {
                        let z = exp_zeta(c_a, lambda);
                        (Some(lambda), (z > 0.0).then_some(z))
                    }
                    _ => (None, None),
                };
                let lambda = match self.map.get("lambda") {
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::Config("key lambda: not a number".into()))?,
                    None => lambda_d.ok_or_else(|| {
                        Error::Config("key lambda required for exp mode with this kernel".into())
                    })?,
                };
                let zeta = match self.map.get("zeta") {
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::Config("key zeta: not a number".into()))?,
                    None => zeta_d.ok_or_else(|| {
                        Error::Config(
                            "key zeta required (the kernel's reciprocal decay is not derivable)"
                                .into(),
                        )
                    })?,
                };
                // An exponential kernel whose reciprocal diverges cannot
                // satisfy any positive zeta.
                if kernel.inverse_divergence_warning() {
                    return Err(Error::Config(
                        "kernel has lambda - ln|1 - C_a| <= 0: reciprocal coefficients diverge"
                            .into(),
                    ));
                }
                CouplingMode::Exp { alpha, lambda, zeta }
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown mode {other:?}; expected poly or exp"
                )))
            }
            None => return Err(Error::Config("missing required key \"mode\"".into())),
        };

        let mut cfg = CouplingConfig::new(mode, dim, horizon);
        cfg.adm_radius = self.f64_or("K", cfg.adm_radius)?;
        cfg.hit_radius = self.f64_or("K1", cfg.adm_radius)?;
        cfg.c2 = self.u64_or("c2", cfg.c2)?;
        cfg.t_star = self.f64_or("t_star", cfg.t_star)?;
        cfg.varsigma = self.f64_or("varsigma", cfg.varsigma)?;
        cfg.theta = self.f64_or("theta", cfg.theta)?;
        cfg.budget_cap = self.f64_or("budget_cap", cfg.budget_cap)?;
        cfg.n_check = self.u64_or("n_check", cfg.n_check as u64)? as usize;
        cfg.x0_1 = self.vec_or("x0_1", dim, 0.0)?;
        cfg.x0_2 = self.vec_or("x0_2", dim, 1.0 / (dim as f64).sqrt())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag {
            return Ok(s);
        }
        if let Some(v) = self.map.get("seed") {
            return v
                .parse()
                .map_err(|_| Error::Config("key seed: not an integer".into()));
        }
        if let Ok(env) = std::env::var("ERGODRIFT_SEED") {
            return env
                .parse()
                .map_err(|_| Error::Config("ERGODRIFT_SEED: not an integer".into()));
        }
        Ok(0)
    }

    /// Canonical `key = value` rendering (sorted keys).
    pub fn resolved(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.map {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// FNV-1a hash of the canonical rendering; stamped into every output
    /// file so results can be traced back to their exact configuration.
    pub fn hash(&self) -> u64 {
        fnv1a(self.resolved().as_bytes())
    }

    /// One-line `k=v` list for output headers.
    pub fn summary_line(&self) -> String {
        self.map
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Reads a two-column `index,value` CSV (as written by this tool):
/// `#` comment lines and a textual header row are skipped; rows must be
/// sorted by index starting at 0.
pub fn read_sequence_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',');
        let first = cols.next().unwrap_or("").trim();
        let second = cols
            .next()
            .ok_or_else(|| Error::Config(format!("{}: expected two columns", path.display())))?
            .trim();
        let Ok(idx) = first.parse::<usize>() else {
            continue; // header row
        };
        if idx != values.len() {
            return Err(Error::Config(format!(
                "{}: indices must be consecutive from 0, got {idx} at row {}",
                path.display(),
                values.len()
            )));
        }
        let v: f64 = second.parse().map_err(|_| {
            Error::Config(format!("{}: cannot parse value {second:?}", path.display()))
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Config(format!("{}: no data rows", path.display())));
    }
    Ok(values)
}

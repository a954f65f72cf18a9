use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

/// A problem with the configuration file or flags; maps to exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Settings shared by every subcommand. Each field can come from the TOML
/// file given with `--config` or from the flag of the same name, and the flag
/// wins.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Benchmark name: biactive, strict, nonsmooth or spherical.
    #[arg(long)]
    pub problem: Option<String>,
    /// Refinement levels, e.g. `4`, `3,4,5` or `3-6`.
    #[arg(long, value_parser = parse_levels)]
    pub levels: Option<Levels>,
    /// Proximal step rule: fixed:A | geo:MU | arith:C:M | fact:C | dexp:R,Q.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Stop once the L2 increment of the primal iterate drops below this.
    #[arg(long)]
    pub tol_exit: Option<f64>,
    /// Diffusion coefficient of the advection-diffusion benchmark.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Shift added to the latent block of every Newton system.
    #[arg(long)]
    pub hessian_eps: Option<f64>,
    /// Temperature of the entropic Poisson check in `verify`.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Helmholtz filter radius for topology optimization.
    #[arg(long)]
    pub filter_radius: Option<f64>,
    /// Mirror descent step rule for topology optimization.
    #[arg(long)]
    pub alpha_rule: Option<String>,
    /// Absolute increment cap of the mirror descent stopping test.
    #[arg(long)]
    pub itol: Option<f64>,
    /// Increment-over-step tolerance of the mirror descent stopping test.
    #[arg(long)]
    pub ntol: Option<f64>,
    /// Largest number of outer iterations.
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use the lumped equal-order P1 pair instead of P1-bubble / P0.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub lumped: Option<bool>,
    /// Reserved; every solve is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Refinement levels in the order given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Levels(pub Vec<usize>);

pub fn parse_levels(s: &str) -> Result<Levels, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad level '{t}' in '{s}'"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty level range '{part}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err("no levels given".into());
    }
    Ok(Levels(out))
}

impl<'de> Deserialize<'de> for Levels {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(usize),
            Many(Vec<usize>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::One(l) => Ok(Levels(vec![l])),
            Raw::Many(v) if !v.is_empty() => Ok(Levels(v)),
            Raw::Many(_) => Err(serde::de::Error::custom("no levels given")),
            Raw::Text(s) => parse_levels(&s).map_err(serde::de::Error::custom),
        }
    }
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),+) => {
        ExperimentConfig { $($field: $flags.$field.or($file.$field)),+ }
    };
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Flags take precedence over values from the file.
    pub fn overlay(self, file: ExperimentConfig) -> ExperimentConfig {
        overlay!(
            self,
            file,
            problem,
            levels,
            schedule,
            tol_exit,
            epsilon,
            hessian_eps,
            theta,
            filter_radius,
            alpha_rule,
            itol,
            ntol,
            max_outer,
            out,
            lumped,
            seed
        )
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn levels_or(&self, default: &[usize]) -> Vec<usize> {
        self.levels.as_ref().map_or_else(|| default.to_vec(), |l| l.0.clone())
    }

    /// `key = value` lines for every field that is set, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((format!("config.{k}"), v));
            }
        };
        put("problem", self.problem.clone());
        put("levels", self.levels.as_ref().map(|l| format!("{:?}", l.0)));
        put("schedule", self.schedule.clone());
        put("tol_exit", self.tol_exit.map(|v| v.to_string()));
        put("epsilon", self.epsilon.map(|v| v.to_string()));
        put("hessian_eps", self.hessian_eps.map(|v| v.to_string()));
        put("theta", self.theta.map(|v| v.to_string()));
        put("filter_radius", self.filter_radius.map(|v| v.to_string()));
        put("alpha_rule", self.alpha_rule.clone());
        put("itol", self.itol.map(|v| v.to_string()));
        put("ntol", self.ntol.map(|v| v.to_string()));
        put("max_outer", self.max_outer.map(|v| v.to_string()));
        put("lumped", self.lumped.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        out
    }
}

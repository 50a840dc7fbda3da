//! Run configuration, read from a TOML file. Unknown keys are errors.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ngrayleigh::functionals::Parameters;
use ngrayleigh::propagator::PropagatorConfig;
use ngrayleigh::solver::SolverConfig;
use serde::{Deserialize, Serialize};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "NGRAYLEIGH_OUTPUT_DIR";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemBlock,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub propagator: PropagatorConfig,
    pub solve: Option<SolveBlock>,
    pub atlas: Option<AtlasBlock>,
    pub stability: Option<StabilityBlock>,
    pub verify: Option<VerifyBlock>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub p: f64,
    pub q: f64,
    pub mu: Option<f64>,
    /// `μ / μ̂⁰`, as an alternative to `mu` (atlas only).
    pub mu_over_mu_hat_zero: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Ffs,
    Muhat,
    FixedLambda,
    Appendix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantName {
    Defocusing,
    Focusing,
    Combined,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveBlock {
    pub mode: Mode,
    /// Action level `S` (ffs, muhat).
    pub level: Option<f64>,
    /// Frequency `λ` (fixed-lambda, appendix).
    pub lambda: Option<f64>,
    pub variant: Option<VariantName>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasBlock {
    /// Explicit branch levels; otherwise `points` levels evenly spaced from
    /// `S(μ) + offset` to 0.
    pub levels: Option<Vec<f64>>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_offset")]
    pub offset: f64,
    #[serde(default = "default_extremal")]
    pub extremal_levels: Vec<f64>,
}

fn default_points() -> usize {
    8
}

fn default_offset() -> f64 {
    0.05
}

fn default_extremal() -> Vec<f64> {
    vec![0.0, -0.5, -1.0, -2.0, -4.0, -8.0, -16.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityBlock {
    /// A `profile.csv` from an earlier `solve`; its `report.json` supplies
    /// the level. Without it the `[solve]` block (mode ffs) is run first.
    pub profile: Option<PathBuf>,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    pub profile: PathBuf,
    /// Defaults to the neighbouring `report.json`.
    pub lambda: Option<f64>,
    pub level: Option<f64>,
    pub mu: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not need a computation.
    pub fn validate(&self) -> Result<()> {
        let pb = &self.problem;
        Parameters::validation(pb.p, pb.q, pb.mu.unwrap_or(1.0), 1.0)?;
        if let Some(mu) = pb.mu {
            Parameters::new(pb.p, pb.q, mu)?;
        }
        match (pb.mu, pb.mu_over_mu_hat_zero) {
            (Some(_), Some(_)) => bail!("give either problem.mu or problem.mu_over_mu_hat_zero, not both"),
            (None, Some(f)) if !(f > 0.0 && f.is_finite()) => bail!("mu_over_mu_hat_zero must be positive, got {f}"),
            _ => {}
        }
        self.solver.validate()?;
        self.propagator.validate()?;
        if let Some(st) = &self.stability {
            if st.deltas.is_empty() {
                bail!("stability.deltas is empty");
            }
        }
        Ok(())
    }

    /// Parameters with an explicit `μ`; `None` if only a multiplier was given.
    pub fn explicit_params(&self) -> Result<Option<Parameters>> {
        let pb = &self.problem;
        pb.mu.map(|mu| Parameters::new(pb.p, pb.q, mu).map_err(Into::into)).transpose()
    }

    /// Output directory: flag, then environment, then config, then default.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(f) = flag {
            return f.to_path_buf();
        }
        if let Some(env) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(env);
        }
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("ngrayleigh-out"))
    }
}

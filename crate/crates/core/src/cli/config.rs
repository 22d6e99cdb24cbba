//! Run configuration, read from a TOML file with five sections.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dividend_payment_delay::PaymentDelaySpec;
use crate::levy_model::RiskModel;
use crate::parisian_ruin::ParisianSpec;
use crate::simulate::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    CramerLundbergExp,
    BrownianDrift,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub premium: Option<f64>,
    pub intensity: Option<f64>,
    pub claim_rate: Option<f64>,
    pub drift: Option<f64>,
    pub volatility: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BarrierChoice {
    Level(f64),
    Named(BarrierName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierName {
    Optimal,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub q: Option<f64>,
    pub zeta: Option<f64>,
    pub d: Option<f64>,
    pub barrier: Option<BarrierChoice>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimTarget {
    RuinDelay,
    PaymentDelay,
    ParisianRuin,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n_paths: Option<u64>,
    pub seed: Option<u64>,
    pub euler_step: Option<f64>,
    pub horizon_epsilon: Option<f64>,
    pub batch_size: Option<u64>,
    pub target: Option<SimTarget>,
    /// Initial surplus of the simulated paths.
    pub x: Option<f64>,
    /// Required for `parisian_ruin`.
    pub time_cap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Written to standard output when absent.
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub control: ControlSection,
    pub grid: Option<GridSection>,
    pub sim: Option<SimSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// A configuration problem, reported with exit code 2.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| err(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        cfg.model()?;
        let c = &cfg.control;
        for (key, v) in [
            ("control.q", c.q),
            ("control.zeta", c.zeta),
            ("control.d", c.d),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(err(format!("{key} must be finite and ≥ 0, got {v}")));
                }
            }
        }
        if let Some(BarrierChoice::Level(a)) = c.barrier {
            if !(a >= 0.0) || !a.is_finite() {
                return Err(err(format!(
                    "control.barrier must be finite and ≥ 0, got {a}"
                )));
            }
        }
        if let Some(g) = cfg.grid {
            if !(g.x_min.is_finite() && g.x_max.is_finite()) || g.x_min > g.x_max {
                return Err(err(format!(
                    "grid needs finite x_min ≤ x_max, got [{}, {}]",
                    g.x_min, g.x_max
                )));
            }
        }
        if cfg.sim.is_some() {
            cfg.sim_config()?;
        }
        Ok(cfg)
    }

    pub fn model(&self) -> Result<RiskModel, ConfigError> {
        let m = &self.model;
        let need = |key: &str, v: Option<f64>| {
            v.ok_or_else(|| err(format!("model.{key} is required for this model kind")))
        };
        let forbid = |keys: &[(&str, Option<f64>)]| {
            for (key, v) in keys {
                if v.is_some() {
                    return Err(err(format!(
                        "model.{key} does not apply to this model kind"
                    )));
                }
            }
            Ok(())
        };
        let model = match m.kind {
            ModelKind::CramerLundbergExp => {
                forbid(&[("drift", m.drift), ("volatility", m.volatility)])?;
                RiskModel::cramer_lundberg(
                    need("premium", m.premium)?,
                    need("intensity", m.intensity)?,
                    need("claim_rate", m.claim_rate)?,
                )
            }
            ModelKind::BrownianDrift => {
                forbid(&[
                    ("premium", m.premium),
                    ("intensity", m.intensity),
                    ("claim_rate", m.claim_rate),
                ])?;
                RiskModel::brownian(need("drift", m.drift)?, need("volatility", m.volatility)?)
            }
        };
        model.map_err(|e| err(format!("model: {e}")))
    }

    pub fn q(&self) -> Result<f64, ConfigError> {
        self.control.q.ok_or_else(|| err("control.q is required"))
    }

    pub fn positive_q(&self) -> Result<f64, ConfigError> {
        let q = self.q()?;
        if q > 0.0 {
            Ok(q)
        } else {
            Err(err("control.q must be positive for this command"))
        }
    }

    pub fn parisian(&self) -> Result<ParisianSpec, ConfigError> {
        let zeta = self
            .control
            .zeta
            .ok_or_else(|| err("control.zeta is required"))?;
        ParisianSpec::new(zeta).map_err(|e| err(format!("control.zeta: {e}")))
    }

    pub fn payment(&self) -> Result<PaymentDelaySpec, ConfigError> {
        let d = self.control.d.ok_or_else(|| err("control.d is required"))?;
        PaymentDelaySpec::new(d).map_err(|e| err(format!("control.d: {e}")))
    }

    pub fn barrier(&self) -> Result<BarrierChoice, ConfigError> {
        self.control
            .barrier
            .ok_or_else(|| err("control.barrier is required (a level or \"optimal\")"))
    }

    /// `n_points` evenly spaced points on `[x_min, x_max]`.
    pub fn grid_points(&self) -> Result<Vec<f64>, ConfigError> {
        let g = self.grid.ok_or_else(|| err("[grid] section is required"))?;
        linspace(g)
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let s = self
            .sim
            .as_ref()
            .ok_or_else(|| err("[sim] section is required"))?;
        let d = SimConfig::default();
        let cfg = SimConfig {
            n_paths: s.n_paths.unwrap_or(d.n_paths),
            seed: s.seed.unwrap_or(d.seed),
            euler_step: s.euler_step.unwrap_or(d.euler_step),
            horizon_epsilon: s.horizon_epsilon.unwrap_or(d.horizon_epsilon),
            batch_size: s.batch_size.unwrap_or(d.batch_size),
        };
        cfg.validate().map_err(|e| err(format!("sim: {e}")))?;
        if let Some(t) = s.time_cap {
            if !(t > 0.0) || !t.is_finite() {
                return Err(err(format!("sim.time_cap must be positive, got {t}")));
            }
        }
        Ok(cfg)
    }
}

pub(crate) fn linspace(g: GridSection) -> Result<Vec<f64>, ConfigError> {
    match g.n_points {
        0 => Err(err("grid.n_points must be at least 1")),
        1 => Ok(vec![g.x_min]),
        n => {
            let step = (g.x_max - g.x_min) / (n - 1) as f64;
            Ok((0..n)
                .map(|i| {
                    if i == n - 1 {
                        g.x_max
                    } else {
                        g.x_min + step * i as f64
                    }
                })
                .collect())
        }
    }
}

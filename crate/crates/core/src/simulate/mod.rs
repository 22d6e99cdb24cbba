//! Monte Carlo counterparts of the closed forms.
//!
//! Compound Poisson paths are simulated exactly, event by event. Brownian
//! paths use an Euler scheme; for discounted dividends they are cut into
//! regeneration cycles at barrier visits so that only a few time units per
//! path have to be simulated.
//!
//! Paths are grouped in batches of `batch_size`. Batch `i` draws from the
//! ChaCha8 stream `i` of the master seed and batch results are reduced in
//! batch order, so results do not depend on the number of worker threads.

mod brownian;
mod compound_poisson;
mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dividend_payment_delay::PaymentDelaySpec;
use crate::dividend_ruin_delay::BarrierPolicy;
use crate::error::{invalid, Error, Result};
use crate::levy_model::RiskModel;
use crate::parisian_ruin::ParisianSpec;

pub use stats::{PairMoments, SimEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: u64,
    pub seed: u64,
    /// Euler step (Brownian model only).
    pub euler_step: f64,
    /// Paths are stopped once the discount factor drops below this.
    pub horizon_epsilon: f64,
    pub batch_size: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            seed: 0,
            euler_step: 1e-3,
            horizon_epsilon: 1e-10,
            batch_size: 10_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(invalid("n_paths must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size must be at least 1"));
        }
        if !(self.euler_step > 0.0) || !self.euler_step.is_finite() {
            return Err(invalid(format!(
                "euler_step must be positive, got {}",
                self.euler_step
            )));
        }
        if !(self.horizon_epsilon > 0.0 && self.horizon_epsilon < 1.0) {
            return Err(invalid(format!(
                "horizon_epsilon must lie in (0, 1), got {}",
                self.horizon_epsilon
            )));
        }
        Ok(())
    }

    /// Time after which discounting at rate `q` falls below `horizon_epsilon`.
    pub fn horizon(&self, q: f64) -> f64 {
        (1.0 / self.horizon_epsilon).ln() / q
    }
}

/// State of a controlled surplus path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlledPathState {
    /// Controlled surplus `U_t`.
    pub surplus: f64,
    /// Dividends paid so far by reflection, `(a ∨ X̄_t) − a`.
    pub running_max_offset: f64,
    /// Time since the surplus was last nonnegative.
    pub parisian_clock: f64,
    /// Time spent at or above the barrier since the current decision.
    pub delay_clock: f64,
    pub cumulative_discounted_dividends: f64,
}

/// Stream offsets so that different estimators never share random numbers.
#[derive(Clone, Copy)]
pub(crate) enum Stream {
    Direct = 0,
    Entry = 1,
    Cycle = 2,
}

/// Runs `paths(rng, count)` over all batches and reduces in batch order.
pub(crate) fn run_batches<F>(cfg: &SimConfig, stream: Stream, paths: F) -> PairMoments
where
    F: Fn(&mut ChaCha8Rng, u64) -> PairMoments + Sync,
{
    let n_batches = cfg.n_paths.div_ceil(cfg.batch_size);
    let parts: Vec<PairMoments> = (0..n_batches)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((stream as u64) << 48) | i);
            let count = cfg.batch_size.min(cfg.n_paths - i * cfg.batch_size);
            paths(&mut rng, count)
        })
        .collect();
    parts
        .into_iter()
        .fold(PairMoments::default(), |acc, p| acc.merge(&p))
}

fn check_common(model: &RiskModel, q: f64, cfg: &SimConfig) -> Result<()> {
    model.validate()?;
    cfg.validate()?;
    if !(q > 0.0) || !q.is_finite() {
        return Err(invalid(format!("q must be positive, got {q}")));
    }
    Ok(())
}

/// Expected discounted dividends of the barrier strategy at `a` under
/// Parisian ruin with window `ζ`.
pub fn simulate_ruin_delay(
    model: &RiskModel,
    q: f64,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    x: f64,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    check_common(model, q, cfg)?;
    let spec = ParisianSpec::new(spec.zeta)?;
    let policy = BarrierPolicy::new(policy.a)?;
    if !x.is_finite() {
        return Err(invalid(format!("x must be finite, got {x}")));
    }
    match *model {
        RiskModel::CramerLundbergExp { .. } => Ok(compound_poisson::ruin_delay(
            model, q, spec.zeta, policy.a, x, cfg,
        )),
        RiskModel::BrownianDrift { .. } => {
            Ok(brownian::ruin_delay(model, q, spec.zeta, policy.a, x, cfg))
        }
    }
}

/// Expected discounted dividends of the delayed-payment barrier strategy.
pub fn simulate_payment_delay(
    model: &RiskModel,
    q: f64,
    spec: PaymentDelaySpec,
    policy: BarrierPolicy,
    x: f64,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    check_common(model, q, cfg)?;
    let spec = PaymentDelaySpec::new(spec.d)?;
    let policy = BarrierPolicy::new(policy.a)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("x must be finite and ≥ 0, got {x}")));
    }
    if spec.d == 0.0 {
        // Paying as soon as the barrier is reached is reflection with
        // classical ruin.
        return simulate_ruin_delay(model, q, ParisianSpec { zeta: 0.0 }, policy, x, cfg);
    }
    match *model {
        RiskModel::CramerLundbergExp { .. } => Ok(compound_poisson::payment_delay(
            model, q, spec.d, policy.a, x, cfg,
        )),
        RiskModel::BrownianDrift { .. } => {
            Ok(brownian::payment_delay(model, q, spec.d, policy.a, x, cfg))
        }
    }
}

/// Probability of Parisian ruin before `time_cap`.
///
/// Paths that climb to a level from which even classical ruin has
/// probability below `horizon_epsilon` are stopped and counted as
/// surviving; this and the paths still running at `time_cap` make up the
/// censoring bound.
pub fn simulate_parisian_ruin_prob(
    model: &RiskModel,
    spec: ParisianSpec,
    x: f64,
    cfg: &SimConfig,
    time_cap: f64,
) -> Result<SimEstimate> {
    model.validate()?;
    cfg.validate()?;
    let spec = ParisianSpec::new(spec.zeta)?;
    if !(model.mean_drift() > 0.0) {
        return Err(Error::UnsupportedModel(
            "ruin probabilities need a positive mean drift".into(),
        ));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("x must be finite and ≥ 0, got {x}")));
    }
    if !(time_cap > 0.0) || !time_cap.is_finite() {
        return Err(invalid(format!(
            "time_cap must be positive, got {time_cap}"
        )));
    }
    match *model {
        RiskModel::CramerLundbergExp { .. } => Ok(compound_poisson::parisian_ruin(
            model, spec.zeta, x, cfg, time_cap,
        )),
        RiskModel::BrownianDrift { .. } => {
            Ok(brownian::parisian_ruin(model, spec.zeta, x, cfg, time_cap))
        }
    }
}

/// Level above which classical ruin has probability at most `eps`.
pub(crate) fn escape_level(model: &RiskModel, eps: f64) -> f64 {
    match *model {
        RiskModel::CramerLundbergExp {
            premium,
            intensity,
            claim_rate,
        } => {
            let beta = intensity / (premium * claim_rate);
            let decay = claim_rate - intensity / premium;
            ((beta / eps).ln() / decay).max(0.0)
        }
        RiskModel::BrownianDrift { drift, volatility } => {
            volatility * volatility * (1.0 / eps).ln() / (2.0 * drift)
        }
    }
}

//! Euler simulation of Brownian motion with drift.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::stats::{PairMoments, SimEstimate};
use super::{escape_level, run_batches, ControlledPathState, SimConfig, Stream};
use crate::levy_model::RiskModel;

#[derive(Debug, Clone, Copy)]
struct Euler {
    drift_step: f64,
    vol_step: f64,
    h: f64,
}

impl Euler {
    fn new(model: &RiskModel, h: f64) -> Self {
        let RiskModel::BrownianDrift { drift, volatility } = *model else {
            unreachable!("dispatched on the model variant")
        };
        Self {
            drift_step: drift * h,
            vol_step: volatility * h.sqrt(),
            h,
        }
    }

    fn increment(&self, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.drift_step + self.vol_step * z
    }

    /// Consecutive negative steps that make up a grace period of `zeta`.
    fn grace_steps(&self, zeta: f64) -> u64 {
        ((zeta / self.h - 1e-9).ceil() as u64).max(1)
    }
}

/// Result of one regeneration cycle or entry run: discounted payoff,
/// discount factor at the regeneration time (0 on ruin), censoring bound.
type Cycle = (f64, f64, f64);

/// Reflected path with Parisian ruin started at `y0 ≤ a`. Stops at the
/// first payment after `min_time`; with `min_time = 0` this is the first
/// passage above `a` (its overshoot is paid).
#[allow(clippy::too_many_arguments)]
fn reflected_cycle(
    rng: &mut ChaCha8Rng,
    e: Euler,
    q: f64,
    grace: u64,
    a: f64,
    y0: f64,
    min_time: f64,
    t_max: f64,
    tail_value: f64,
) -> Cycle {
    let mut s = ControlledPathState {
        surplus: y0,
        ..ControlledPathState::default()
    };
    let mut negative_steps = 0u64;
    let mut k = 0u64;
    loop {
        k += 1;
        let t = k as f64 * e.h;
        s.surplus += e.increment(rng);
        if s.surplus >= a {
            // running supremum moved: L_t = (a ∨ X̄_t) − a
            let paid = s.surplus - a;
            s.running_max_offset += paid;
            s.surplus = a;
            let disc = (-q * t).exp();
            s.cumulative_discounted_dividends += disc * paid;
            if t >= min_time {
                return (s.cumulative_discounted_dividends, disc, 0.0);
            }
        }
        if s.surplus < 0.0 {
            negative_steps += 1;
            s.parisian_clock = negative_steps as f64 * e.h;
            if negative_steps >= grace {
                return (s.cumulative_discounted_dividends, 0.0, 0.0);
            }
        } else {
            negative_steps = 0;
            s.parisian_clock = 0.0;
        }
        if t >= t_max {
            return (
                s.cumulative_discounted_dividends,
                0.0,
                (-q * t).exp() * tail_value,
            );
        }
    }
}

/// Combines entry runs from `x` with renewal cycles from `a`:
/// `v(x) = E[O] + E[P]·v(a)`, `v(a) = E[D]/(1 − E[B])`.
fn regenerative_estimate(
    cfg: &SimConfig,
    x_at_or_above: Option<f64>,
    entry: impl Fn(&mut ChaCha8Rng) -> Cycle + Sync,
    cycle: impl Fn(&mut ChaCha8Rng) -> Cycle + Sync,
) -> SimEstimate {
    let collect = |stream, f: &(dyn Fn(&mut ChaCha8Rng) -> Cycle + Sync)| {
        run_batches(cfg, stream, |rng, n| {
            let mut m = PairMoments::default();
            for _ in 0..n {
                let (y, z, c) = f(rng);
                m.push(y, z, c);
            }
            m
        })
    };
    let cycles = collect(Stream::Cycle, &cycle);
    let (va, var_va) = cycles.renewal_ratio();
    let n = cfg.n_paths as f64;
    let cycle_censoring = cycles.censored / n / (1.0 - cycles.mean_z());
    if let Some(excess) = x_at_or_above {
        return SimEstimate {
            mean: excess + va,
            std_error: var_va.sqrt(),
            n_effective: cycles.n,
            censoring_bias_bound: cycle_censoring,
        };
    }
    let entries = collect(Stream::Entry, &entry);
    let p = entries.mean_z();
    let var = entries.var_of_mean_combination(va) + p * p * var_va;
    SimEstimate {
        mean: entries.mean_y() + p * va,
        std_error: var.sqrt(),
        n_effective: entries.n,
        censoring_bias_bound: entries.censored / n + p * cycle_censoring,
    }
}

pub(crate) fn ruin_delay(
    model: &RiskModel,
    q: f64,
    zeta: f64,
    a: f64,
    x: f64,
    cfg: &SimConfig,
) -> SimEstimate {
    let e = Euler::new(model, cfg.euler_step);
    let grace = e.grace_steps(zeta);
    let t_max = cfg.horizon(q);
    let tail_value = 1.0 / model.phi(q).map(|c| c.phi_q).unwrap_or(f64::NAN);
    let min_time = 0.25 / q;
    let above = (x >= a).then_some(x - a);
    regenerative_estimate(
        cfg,
        above,
        |rng| reflected_cycle(rng, e, q, grace, a, x, 0.0, t_max, tail_value),
        |rng| reflected_cycle(rng, e, q, grace, a, a, min_time, t_max, tail_value),
    )
}

/// Delayed-payment path from `y0` up to the first payment, which restarts
/// the process at `a`.
#[allow(clippy::too_many_arguments)]
fn payment_cycle(
    rng: &mut ChaCha8Rng,
    e: Euler,
    q: f64,
    d: f64,
    a: f64,
    y0: f64,
    t_max: f64,
    tail_value: f64,
) -> Cycle {
    let mut y = y0;
    let mut started = (y0 >= a).then_some(0.0);
    let mut k = 0u64;
    let slack = 1e-9 * e.h;
    loop {
        k += 1;
        let t = k as f64 * e.h;
        y += e.increment(rng);
        if y < 0.0 {
            return (0.0, 0.0, 0.0);
        }
        if y < a {
            started = None;
        } else {
            match started {
                None => started = Some(t),
                Some(s) if t - s >= d - slack => {
                    let disc = (-q * t).exp();
                    return (disc * (y - a), disc, 0.0);
                }
                Some(_) => {}
            }
        }
        if t >= t_max {
            return (0.0, 0.0, (-q * t).exp() * ((y - a).max(0.0) + tail_value));
        }
    }
}

pub(crate) fn payment_delay(
    model: &RiskModel,
    q: f64,
    d: f64,
    a: f64,
    x: f64,
    cfg: &SimConfig,
) -> SimEstimate {
    let e = Euler::new(model, cfg.euler_step);
    let t_max = cfg.horizon(q);
    let tail_value = 1.0 / model.phi(q).map(|c| c.phi_q).unwrap_or(f64::NAN);
    let at_barrier = (x == a).then_some(0.0);
    regenerative_estimate(
        cfg,
        at_barrier,
        |rng| payment_cycle(rng, e, q, d, a, x, t_max, tail_value),
        |rng| payment_cycle(rng, e, q, d, a, a, t_max, tail_value),
    )
}

#[allow(clippy::too_many_arguments)]
fn parisian_ruin_path(
    rng: &mut ChaCha8Rng,
    e: Euler,
    grace: u64,
    x: f64,
    t_cap: f64,
    escape: f64,
    eps: f64,
    reflect_rate: f64,
) -> (f64, f64) {
    let mut y = x;
    let mut negative_steps = 0u64;
    let mut k = 0u64;
    loop {
        if y >= escape {
            return (0.0, eps);
        }
        k += 1;
        y += e.increment(rng);
        if y < 0.0 {
            negative_steps += 1;
            if negative_steps >= grace {
                return (1.0, 0.0);
            }
        } else {
            negative_steps = 0;
        }
        if k as f64 * e.h >= t_cap {
            let bound = if y < 0.0 {
                1.0
            } else {
                (-reflect_rate * y).exp()
            };
            return (0.0, bound);
        }
    }
}

pub(crate) fn parisian_ruin(
    model: &RiskModel,
    zeta: f64,
    x: f64,
    cfg: &SimConfig,
    t_cap: f64,
) -> SimEstimate {
    let RiskModel::BrownianDrift { drift, volatility } = *model else {
        unreachable!("dispatched on the model variant")
    };
    let e = Euler::new(model, cfg.euler_step);
    let grace = e.grace_steps(zeta);
    let eps = cfg.horizon_epsilon;
    let escape = escape_level(model, eps);
    let reflect_rate = 2.0 * drift / (volatility * volatility);
    run_batches(cfg, Stream::Direct, |rng, n| {
        let mut m = PairMoments::default();
        for _ in 0..n {
            let (r, c) = parisian_ruin_path(rng, e, grace, x, t_cap, escape, eps, reflect_rate);
            m.push(r, 0.0, c);
        }
        m
    })
    .estimate_y()
}

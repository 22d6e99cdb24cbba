//! Exact event-driven simulation of the compound Poisson model.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::stats::{PairMoments, SimEstimate};
use super::{escape_level, run_batches, SimConfig, Stream};
use crate::levy_model::RiskModel;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Params {
    pub c: f64,
    pub lam: f64,
    pub xi: f64,
}

impl Params {
    fn of(model: &RiskModel) -> Self {
        match *model {
            RiskModel::CramerLundbergExp {
                premium,
                intensity,
                claim_rate,
            } => Self {
                c: premium,
                lam: intensity,
                xi: claim_rate,
            },
            _ => unreachable!("dispatched on the model variant"),
        }
    }
}

fn exp(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Below {
    Returned(f64),
    Ruined(f64),
    Censored,
}

/// Follows an excursion below 0 that started at time `t` with surplus `u`.
/// Without a claim the surplus is back at 0 after `−u/c`, so the grace
/// period can be checked exactly.
pub(crate) fn negative_excursion(
    rng: &mut ChaCha8Rng,
    p: Params,
    mut t: f64,
    mut u: f64,
    zeta: f64,
    t_max: f64,
) -> Below {
    let deadline = t + zeta;
    loop {
        let e = exp(rng, p.lam);
        let back = -u / p.c;
        let first = e.min(back);
        if t + first >= deadline {
            return if deadline <= t_max {
                Below::Ruined(deadline)
            } else {
                Below::Censored
            };
        }
        if t + first >= t_max {
            return Below::Censored;
        }
        if back <= e {
            return Below::Returned(t + back);
        }
        t += e;
        u += p.c * e - exp(rng, p.xi);
    }
}

/// Discounted dividends of one path reflected at `a`, and the censoring
/// bound if the path is cut at `t_max`.
#[allow(clippy::too_many_arguments)]
fn ruin_delay_path(
    rng: &mut ChaCha8Rng,
    p: Params,
    q: f64,
    zeta: f64,
    a: f64,
    x: f64,
    t_max: f64,
    tail_value: f64,
) -> (f64, f64) {
    let mut t = 0.0;
    let mut u = x;
    let mut div = 0.0;
    if u > a {
        div += u - a;
        u = a;
    }
    let accrue = |t1: f64, t2: f64| p.c * ((-q * t1).exp() - (-q * t2).exp()) / q;
    loop {
        if u < 0.0 {
            match negative_excursion(rng, p, t, u, zeta, t_max) {
                Below::Ruined(_) => return (div, 0.0),
                Below::Censored => return (div, (-q * t_max).exp() * tail_value),
                Below::Returned(r) => {
                    t = r;
                    u = 0.0;
                }
            }
        }
        let tc = t + exp(rng, p.lam);
        let reach = t + (a - u) / p.c;
        if tc >= t_max {
            if reach < t_max {
                div += accrue(reach, t_max);
            }
            return (div, (-q * t_max).exp() * tail_value);
        }
        if reach < tc {
            div += accrue(reach, tc);
            u = a;
        } else {
            u += p.c * (tc - t);
        }
        t = tc;
        u -= exp(rng, p.xi);
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
    let p = Params::of(model);
    let t_max = cfg.horizon(q);
    // E ∫ e^{−qt} dX̄_t = 1/Φ(q) bounds what any later dividends are worth.
    let tail_value = 1.0 / model.phi(q).map(|c| c.phi_q).unwrap_or(f64::NAN);
    run_batches(cfg, Stream::Direct, |rng, n| {
        let mut m = PairMoments::default();
        for _ in 0..n {
            let (v, cens) = ruin_delay_path(rng, p, q, zeta, a, x, t_max, tail_value);
            m.push(v, 0.0, cens);
        }
        m
    })
    .estimate_y()
}

#[allow(clippy::too_many_arguments)]
fn payment_delay_path(
    rng: &mut ChaCha8Rng,
    p: Params,
    q: f64,
    d: f64,
    a: f64,
    x: f64,
    t_max: f64,
    tail_value: f64,
) -> (f64, f64) {
    let mut t = 0.0;
    let mut u = x;
    let mut div = 0.0;
    let mut expiry = if u >= a { Some(d) } else { None };
    loop {
        if t >= t_max {
            return (div, (-q * t).exp() * ((u - a).max(0.0) + tail_value));
        }
        let e = exp(rng, p.lam);
        match expiry {
            Some(te) if t + e >= te => {
                u += p.c * (te - t);
                t = te;
                div += (-q * t).exp() * (u - a);
                u = a;
                expiry = Some(t + d);
                continue;
            }
            Some(_) => {}
            None => {
                let reach = (a - u) / p.c;
                if e >= reach {
                    t += reach;
                    u = a;
                    expiry = Some(t + d);
                    continue;
                }
            }
        }
        t += e;
        u += p.c * e - exp(rng, p.xi);
        if u < 0.0 {
            return (div, 0.0);
        }
        if u < a {
            expiry = None;
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
    let p = Params::of(model);
    let t_max = cfg.horizon(q);
    let tail_value = 1.0 / model.phi(q).map(|c| c.phi_q).unwrap_or(f64::NAN);
    run_batches(cfg, Stream::Direct, |rng, n| {
        let mut m = PairMoments::default();
        for _ in 0..n {
            let (v, cens) = payment_delay_path(rng, p, q, d, a, x, t_max, tail_value);
            m.push(v, 0.0, cens);
        }
        m
    })
    .estimate_y()
}

fn classical_ruin(p: Params, u: f64) -> f64 {
    if u < 0.0 {
        return 1.0;
    }
    let beta = p.lam / (p.c * p.xi);
    beta * (-(p.xi - p.lam / p.c) * u).exp()
}

/// 1 if Parisian ruin happens before `t_cap`, plus the censoring bound.
fn parisian_ruin_path(
    rng: &mut ChaCha8Rng,
    p: Params,
    zeta: f64,
    x: f64,
    t_cap: f64,
    escape: f64,
    eps: f64,
) -> (f64, f64) {
    let mut t = 0.0;
    let mut u = x;
    loop {
        if u >= escape {
            return (0.0, eps);
        }
        if u < 0.0 {
            match negative_excursion(rng, p, t, u, zeta, t_cap) {
                Below::Ruined(_) => return (1.0, 0.0),
                Below::Censored => return (0.0, 1.0),
                Below::Returned(r) => {
                    t = r;
                    u = 0.0;
                }
            }
        }
        let e = exp(rng, p.lam);
        if t + e >= t_cap {
            return (0.0, classical_ruin(p, u + p.c * (t_cap - t)));
        }
        t += e;
        u += p.c * e - exp(rng, p.xi);
    }
}

pub(crate) fn parisian_ruin(
    model: &RiskModel,
    zeta: f64,
    x: f64,
    cfg: &SimConfig,
    t_cap: f64,
) -> SimEstimate {
    let p = Params::of(model);
    let eps = cfg.horizon_epsilon;
    let escape = escape_level(model, eps);
    run_batches(cfg, Stream::Direct, |rng, n| {
        let mut m = PairMoments::default();
        for _ in 0..n {
            let (r, cens) = parisian_ruin_path(rng, p, zeta, x, t_cap, escape, eps);
            m.push(r, 0.0, cens);
        }
        m
    })
    .estimate_y()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn params() -> Params {
        Params {
            c: 2.0,
            lam: 1.0,
            xi: 1.0,
        }
    }

    #[test]
    fn excursion_without_claims_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Params {
            c: 2.0,
            lam: 0.0,
            xi: 1.0,
        };
        assert_eq!(
            negative_excursion(&mut rng, p, 3.0, -1.0, 1.0, 100.0),
            Below::Returned(3.5)
        );
        assert_eq!(
            negative_excursion(&mut rng, p, 3.0, -1.0, 0.4, 100.0),
            Below::Ruined(3.4)
        );
        assert_eq!(
            negative_excursion(&mut rng, p, 3.0, -1.0, 0.0, 100.0),
            Below::Ruined(3.0)
        );
        assert_eq!(
            negative_excursion(&mut rng, p, 3.0, -1.0, 1.0, 3.2),
            Below::Censored
        );
    }

    #[test]
    fn free_position_mean() {
        // Unreflected, unkilled position after time t.
        let p = params();
        let (x, t) = (1.0, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut m = PairMoments::default();
        for _ in 0..n {
            let mut s = 0.0;
            let mut u = x;
            loop {
                let e = exp(&mut rng, p.lam);
                if s + e > t {
                    u += p.c * (t - s);
                    break;
                }
                s += e;
                u += p.c * e - exp(&mut rng, p.xi);
            }
            m.push(u, 0.0, 0.0);
        }
        let e = m.estimate_y();
        let expect = x + (p.c - p.lam / p.xi) * t;
        assert!((e.mean - expect).abs() < 3.0 * e.std_error);
    }

    #[test]
    fn payments_accrue_at_barrier() {
        // With no claims the surplus sits at the barrier and pays c per unit
        // time forever.
        let p = Params {
            c: 2.0,
            lam: 0.0,
            xi: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = 0.1;
        let (v, cens) = ruin_delay_path(&mut rng, p, q, 1.0, 1.0, 0.5, 1e3, 0.0);
        let expect = p.c * (-q * 0.25f64).exp() / q;
        assert!((v - expect).abs() < 1e-9 && cens == 0.0);
    }
}

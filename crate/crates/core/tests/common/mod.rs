//! Monte Carlo oracles shared by the integration tests. They are written
//! independently of the library's simulation engines.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

pub struct Mc {
    pub mean: f64,
    pub se: f64,
}

impl Mc {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Mc {
            mean,
            se: (var / n).sqrt(),
        }
    }

    pub fn within(&self, target: f64, k: f64, margin: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + margin
    }
}

fn exp(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// `P_x(τ₀⁻ ≤ t)` for the compound Poisson model, exact.
pub fn cl_finite_time_ruin(c: f64, lam: f64, xi: f64, x: f64, t: f64, n: usize, seed: u64) -> Mc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n)
        .map(|_| {
            let (mut s, mut u) = (0.0, x);
            loop {
                let e = exp(&mut rng, lam);
                if s + e > t {
                    return 0.0;
                }
                s += e;
                u += c * e - exp(&mut rng, xi);
                if u < 0.0 {
                    return 1.0;
                }
            }
        })
        .collect();
    Mc::from_samples(&xs)
}

/// `P_x(τ₀⁻ ≤ t)` for Brownian motion with drift: Gaussian steps plus the
/// exact probability that the bridge between two grid points crosses 0.
pub fn bm_finite_time_ruin(c: f64, s: f64, x: f64, t: f64, h: f64, n: usize, seed: u64) -> Mc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (t / h).round() as usize;
    let xs: Vec<f64> = (0..n)
        .map(|_| {
            let mut y = x;
            let mut survive = 1.0;
            for _ in 0..steps {
                let z: f64 = rng.sample(StandardNormal);
                let next = y + c * h + s * h.sqrt() * z;
                if next <= 0.0 {
                    return 1.0;
                }
                survive *= 1.0 - (-2.0 * y * next / (s * s * h)).exp();
                y = next;
            }
            1.0 - survive
        })
        .collect();
    Mc::from_samples(&xs)
}

/// `E_x[e^{−qτ_a⁺}; τ_a⁺ < τ^ζ]` for the compound Poisson model with
/// Parisian ruin, exact.
#[allow(clippy::too_many_arguments)]
pub fn cl_reach_before_parisian_ruin(
    c: f64,
    lam: f64,
    xi: f64,
    q: f64,
    zeta: f64,
    x: f64,
    a: f64,
    n: usize,
    seed: u64,
) -> Mc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n)
        .map(|_| {
            let (mut t, mut u) = (0.0, x);
            let mut neg_since: Option<f64> = None;
            loop {
                let e = exp(&mut rng, lam);
                match neg_since {
                    None => {
                        let up = (a - u) / c;
                        if e >= up {
                            return (-q * (t + up)).exp();
                        }
                    }
                    Some(t0) => {
                        let back = -u / c;
                        if t + e.min(back) >= t0 + zeta {
                            return 0.0;
                        }
                        if back <= e {
                            // back at zero; the claim clock restarts
                            t += back;
                            u = 0.0;
                            neg_since = None;
                            continue;
                        }
                    }
                }
                t += e;
                u += c * e - exp(&mut rng, xi);
                if u < 0.0 && neg_since.is_none() {
                    neg_since = Some(t);
                }
            }
        })
        .collect();
    Mc::from_samples(&xs)
}

/// `(E_z[e^{−qτ_a⁺}; τ_a⁺ < τ₀⁻], E_z[e^{−qτ₀⁻}; τ₀⁻ < τ_a⁺])`, exact.
#[allow(clippy::too_many_arguments)]
pub fn cl_two_sided_exit(
    c: f64,
    lam: f64,
    xi: f64,
    q: f64,
    z: f64,
    a: f64,
    n: usize,
    seed: u64,
) -> (Mc, Mc) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut up = Vec::with_capacity(n);
    let mut down = Vec::with_capacity(n);
    for _ in 0..n {
        let (mut t, mut u) = (0.0, z);
        loop {
            let e = exp(&mut rng, lam);
            let reach = (a - u) / c;
            if e >= reach {
                up.push((-q * (t + reach)).exp());
                down.push(0.0);
                break;
            }
            t += e;
            u += c * e - exp(&mut rng, xi);
            if u < 0.0 {
                up.push(0.0);
                down.push((-q * t).exp());
                break;
            }
        }
    }
    (Mc::from_samples(&up), Mc::from_samples(&down))
}

/// `∫₀^∞ e^{−αs} E_z[X_s; τ₀⁻ > s] ds` as `E[X_S; τ₀⁻ > S]/α` with
/// `S ~ Exp(α)` independent, exact.
pub fn cl_position_transform(
    c: f64,
    lam: f64,
    xi: f64,
    alpha: f64,
    z: f64,
    n: usize,
    seed: u64,
) -> Mc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n)
        .map(|_| {
            let horizon = exp(&mut rng, alpha);
            let (mut t, mut u) = (0.0, z);
            loop {
                let e = exp(&mut rng, lam);
                if t + e >= horizon {
                    return (u + c * (horizon - t)) / alpha;
                }
                t += e;
                u += c * e - exp(&mut rng, xi);
                if u < 0.0 {
                    return 0.0;
                }
            }
        })
        .collect();
    Mc::from_samples(&xs)
}

/// Probability that Brownian motion with drift started at `x` never spends
/// `ζ` consecutive time units below 0 (Euler, stopped at `escape`).
#[allow(clippy::too_many_arguments)]
pub fn bm_parisian_survival(
    c: f64,
    s: f64,
    zeta: f64,
    x: f64,
    h: f64,
    escape: f64,
    n: usize,
    seed: u64,
) -> Mc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grace = (zeta / h).round() as u64;
    let xs: Vec<f64> = (0..n)
        .map(|_| {
            let mut y = x;
            let mut neg = 0u64;
            loop {
                let z: f64 = rng.sample(StandardNormal);
                y += c * h + s * h.sqrt() * z;
                if y < 0.0 {
                    neg += 1;
                    if neg >= grace {
                        return 0.0;
                    }
                } else {
                    neg = 0;
                    if y >= escape {
                        return 1.0;
                    }
                }
            }
        })
        .collect();
    Mc::from_samples(&xs)
}

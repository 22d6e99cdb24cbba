//! Barrier strategy with an implementation delay.
//!
//! When the surplus reaches `a` a clock of length `d` starts. If the surplus
//! stays at or above `a` until the clock expires, everything above `a` is paid
//! out and the process restarts at `a`; if it drops below `a` first, the
//! pending payment is cancelled and a new clock starts at the next visit to
//! `a`. Ruin is classical (first passage below 0).
//!
//! Above the barrier the value is affine in `v(a)`:
//! `v(a + z) = A(z) + B(z)·v(a)`, where `A` and `B` are built from the
//! finite-time ruin law of the free process started at `z`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy_model::RiskModel;
use crate::numerics::{
    i0_scaled, i1_over_x_scaled, integrate, integrate_pieces, normal_cdf, one_minus_exp_over,
    std_normal_pdf, Tolerance,
};
use crate::scale::ScaleEval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaymentDelaySpec {
    pub d: f64,
}

impl PaymentDelaySpec {
    pub fn new(d: f64) -> Result<Self> {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(invalid(format!("delay must be finite and ≥ 0, got {d}")));
        }
        Ok(Self { d })
    }
}

/// Space/time scaling applied to the seminal finite-time ruin formula for
/// exponential claims.
///
/// `UnitPremium` evaluates the formula for the process measured in units of
/// the mean claim and of the time needed to earn one mean claim, i.e. with
/// `β = λ/(cξ)`, `u = ξx`, `T = cξt`. `Literal` plugs `(λ/ξ, x, t)` in
/// directly, which is only correct when `c = ξ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuinNormalization {
    #[default]
    UnitPremium,
    Literal,
}

impl RuinNormalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuinNormalization::UnitPremium => "unit_premium",
            RuinNormalization::Literal => "literal",
        }
    }
}

fn fine() -> Tolerance {
    Tolerance::fine()
}

fn require_cl(model: &RiskModel) -> Result<(f64, f64, f64)> {
    match *model {
        RiskModel::CramerLundbergExp {
            premium,
            intensity,
            claim_rate,
        } => Ok((premium, intensity, claim_rate)),
        _ => Err(Error::UnsupportedModel(
            "operation needs the compound Poisson model".into(),
        )),
    }
}

fn require_bm(model: &RiskModel) -> Result<(f64, f64)> {
    match *model {
        RiskModel::BrownianDrift { drift, volatility } => Ok((drift, volatility)),
        _ => Err(Error::UnsupportedModel(
            "operation needs the Brownian model".into(),
        )),
    }
}

/// First passage below 0 of the compound Poisson model with exponential
/// claims, written as `θ`-integrals over `(0, π)`.
///
/// With `f₁(θ, T) = β exp{2√β T cosθ − (1+β)T + u(√β cosθ − 1)}` one has
/// `∂_T f₁ = −f₃ f₁`, so every time integral of the passage density reduces
/// to an elementary function of `f₃` inside the `θ`-integral.
struct ClPassage {
    beta: f64,
    u: f64,
    /// Scaled time per unit time.
    clock: f64,
    lead: f64,
}

impl ClPassage {
    fn new(model: &RiskModel, z: f64, norm: RuinNormalization) -> Result<Self> {
        let (c, lam, xi) = require_cl(model)?;
        Ok(match norm {
            RuinNormalization::UnitPremium => {
                let beta = lam / (c * xi);
                Self {
                    beta,
                    u: xi * z,
                    clock: c * xi,
                    lead: beta,
                }
            }
            RuinNormalization::Literal => Self {
                beta: lam / xi,
                u: z,
                clock: 1.0,
                lead: lam,
            },
        })
    }

    /// `(1/π) ∫₀^π f₁(θ, 0) f₂(θ) w(f₃(θ)) dθ`.
    fn theta_integral(&self, w: impl Fn(f64) -> f64) -> Result<f64> {
        let sb = self.beta.sqrt();
        let (beta, u) = (self.beta, self.u);
        let integrand = |th: f64| {
            let (s, c) = th.sin_cos();
            let f1 = beta * (u * (sb * c - 1.0)).exp();
            let arg = u * sb * s;
            let f2 = arg.cos() - (arg + 2.0 * th).cos();
            let f3 = 1.0 + beta - 2.0 * sb * c;
            f1 * f2 * w(f3)
        };
        Ok(integrate(integrand, 0.0, PI, fine())? / PI)
    }

    fn ruin_by(&self, t: f64) -> Result<f64> {
        let tt = self.clock * t;
        let tail = self.theta_integral(|f3| (-f3 * tt).exp() / f3)?;
        Ok(self.lead * (-(1.0 - self.beta) * self.u).exp() - tail)
    }

    fn density(&self, t: f64) -> Result<f64> {
        let tt = self.clock * t;
        Ok(self.clock * self.theta_integral(|f3| (-f3 * tt).exp())?)
    }

    /// `∫₀^d e^{−qt} P(τ ∈ dt)`.
    fn discounted_mass(&self, q: f64, d: f64) -> Result<f64> {
        let qs = q / self.clock;
        let td = self.clock * d;
        self.theta_integral(|f3| one_minus_exp_over(f3 + qs, td))
    }

    /// `∫₀^d (d − t) P(τ ∈ dt)`.
    fn remaining_time(&self, d: f64) -> Result<f64> {
        let td = self.clock * d;
        Ok(self.theta_integral(|k| ramp(k, td))? / self.clock)
    }
}

/// `∫₀^L e^{−kT}(L − T) dT`.
fn ramp(k: f64, len: f64) -> f64 {
    let kl = k * len;
    if kl.abs() < 1e-4 {
        len * len * (0.5 - kl / 6.0 + kl * kl / 24.0)
    } else {
        (kl + (-kl).exp_m1()) / (k * k)
    }
}

fn check_xt(x: f64, t: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() || !(t >= 0.0) || t.is_nan() {
        return Err(invalid(format!(
            "need finite x ≥ 0 and t ≥ 0, got x={x}, t={t}"
        )));
    }
    Ok(())
}

/// `P_x(τ₀⁻ ≤ t)` for the compound Poisson model.
pub fn finite_time_ruin_cl(x: f64, t: f64, model: &RiskModel) -> Result<f64> {
    finite_time_ruin_cl_with(x, t, model, RuinNormalization::default())
}

pub fn finite_time_ruin_cl_with(
    x: f64,
    t: f64,
    model: &RiskModel,
    norm: RuinNormalization,
) -> Result<f64> {
    check_xt(x, t)?;
    let pass = ClPassage::new(model, x, norm)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok((pass.lead * (-(1.0 - pass.beta) * pass.u).exp()).clamp(0.0, 1.0));
    }
    Ok(pass.ruin_by(t)?.clamp(0.0, 1.0))
}

/// `P_x(τ₀⁻ ≤ t)` for Brownian motion with drift.
pub fn finite_time_ruin_bm(x: f64, t: f64, model: &RiskModel) -> Result<f64> {
    check_xt(x, t)?;
    let (c, s) = require_bm(model)?;
    if t == 0.0 {
        return Ok(if x == 0.0 { 1.0 } else { 0.0 });
    }
    let reflect = -2.0 * c * x / (s * s);
    if t.is_infinite() {
        return Ok(reflect.exp());
    }
    let sd = s * t.sqrt();
    let direct = normal_cdf((-x - c * t) / sd);
    let mirrored = normal_cdf((-x + c * t) / sd);
    let second = if mirrored > 0.0 {
        (reflect + mirrored.ln()).exp()
    } else {
        0.0
    };
    Ok((direct + second).clamp(0.0, 1.0))
}

pub fn finite_time_ruin(model: &RiskModel, x: f64, t: f64) -> Result<f64> {
    match model {
        RiskModel::CramerLundbergExp { .. } => finite_time_ruin_cl(x, t, model),
        RiskModel::BrownianDrift { .. } => finite_time_ruin_bm(x, t, model),
    }
}

/// A sub-probability law on the line: a point mass plus a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityWithAtom {
    pub atom_location: f64,
    pub atom_weight: f64,
    pub density: f64,
}

/// Law of `z + X_s − X_0` for the compound Poisson model at `y`.
///
/// The absolutely continuous part `Σ_{k≥1} Pois(k; λs) Γ(k, ξ)(z + cs − y)`
/// is summed in closed form through `I₁`.
pub fn transition_density_cl(z: f64, s: f64, y: f64, model: &RiskModel) -> Result<DensityWithAtom> {
    let (c, lam, xi) = require_cl(model)?;
    if !(s > 0.0) || !s.is_finite() || !z.is_finite() || y.is_nan() {
        return Err(invalid(format!(
            "need s > 0 and finite z, y; got s={s}, z={z}, y={y}"
        )));
    }
    let top = z + c * s;
    Ok(DensityWithAtom {
        atom_location: top,
        atom_weight: (-lam * s).exp(),
        density: claims_density(lam * s, xi, top - y),
    })
}

/// Density at `w > 0` of a compound Poisson sum with mean count `m` and
/// `Exp(ξ)` summands.
fn claims_density(m: f64, xi: f64, w: f64) -> f64 {
    if !(w > 0.0) {
        return 0.0;
    }
    let sig = 2.0 * (m * xi * w).sqrt();
    2.0 * m * xi * i1_over_x_scaled(sig) * (sig - m - xi * w).exp()
}

/// Density at `w > 0` of `Exp(ξ)` plus an independent compound Poisson sum
/// as in [`claims_density`].
fn overshoot_claims_density(m: f64, xi: f64, w: f64) -> f64 {
    if !(w > 0.0) {
        return 0.0;
    }
    let sig = 2.0 * (m * xi * w).sqrt();
    xi * i0_scaled(sig) * (sig - m - xi * w).exp()
}

/// `P_z(τ₀⁻ > d, X_d ∈ dy)`.
pub fn killed_density(z: f64, d: f64, y: f64, model: &RiskModel) -> Result<DensityWithAtom> {
    if !(z >= 0.0) || !z.is_finite() || !(d > 0.0) || !d.is_finite() || y.is_nan() {
        return Err(invalid(format!(
            "need z ≥ 0, d > 0; got z={z}, d={d}, y={y}"
        )));
    }
    match *model {
        RiskModel::CramerLundbergExp {
            premium: c,
            intensity: lam,
            claim_rate: xi,
        } => {
            let free = transition_density_cl(z, d, y, model)?;
            if y < 0.0 {
                return Ok(DensityWithAtom {
                    density: 0.0,
                    ..free
                });
            }
            // After ruin at t the position is −Exp(ξ); it then needs
            // (d − t) c > y to come back up to y.
            let horizon = d - y / c;
            if horizon <= 0.0 || free.density == 0.0 {
                return Ok(free);
            }
            let pass = ClPassage::new(model, z, RuinNormalization::UnitPremium)?;
            let lost = integrate(
                |t| {
                    let s = d - t;
                    let f = pass.density(t).unwrap_or(f64::NAN);
                    f * overshoot_claims_density(lam * s, xi, c * s - y)
                },
                0.0,
                horizon,
                Tolerance::new(1e-12, 1e-10, 100_000)?,
            )?;
            Ok(DensityWithAtom {
                density: (free.density - lost).max(0.0),
                ..free
            })
        }
        RiskModel::BrownianDrift {
            drift: c,
            volatility: s,
        } => {
            let free = bm_free_density(c, s, d, y - z);
            let density = if y <= 0.0 {
                0.0
            } else {
                let lost = bm_passage_integral(c, s, z, d, |t| bm_free_density(c, s, d - t, y))?;
                (free - lost).max(0.0)
            };
            Ok(DensityWithAtom {
                atom_location: z + c * d,
                atom_weight: 0.0,
                density,
            })
        }
    }
}

fn bm_free_density(c: f64, s: f64, t: f64, dy: f64) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    let sd = s * t.sqrt();
    std_normal_pdf((dy - c * t) / sd) / sd
}

/// `∫₀^d g(t) P_z(τ₀⁻ ∈ dt)` for Brownian motion with drift `c`.
///
/// With `u = z/√t` the inverse-Gaussian density becomes
/// `√(2/π)/σ · exp(−(u + cz/u)²/(2σ²)) du`, which stays regular at `z = 0`.
fn bm_passage_integral(c: f64, s: f64, z: f64, d: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(g(0.0));
    }
    let lo = z / d.sqrt();
    let hi = lo + 40.0 * s;
    let k = (2.0 / PI).sqrt() / s;
    let peak = (c * z).sqrt().clamp(lo, hi);
    integrate_pieces(
        |u| {
            let e = u + c * z / u;
            k * (-e * e / (2.0 * s * s)).exp() * g(z * z / (u * u))
        },
        &[lo, peak, hi],
        fine(),
    )
}

/// `v(x) = W(x)/W(a)·v(a)` on `[0, a]`.
pub fn value_below(model: &RiskModel, q: f64, a: f64, va: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(x >= 0.0 && x <= a) {
        return Err(invalid(format!("need 0 ≤ x ≤ a, a > 0; got x={x}, a={a}")));
    }
    let w = ScaleEval::new(*model, q)?;
    Ok(w.W(x) / w.W(a) * va)
}

/// `(A(z), B(z))` of the affine representation above the barrier.
fn above_parts(model: &RiskModel, q: f64, d: f64, a: f64, z: f64) -> Result<(f64, f64)> {
    if d == 0.0 {
        return Ok((z, 1.0));
    }
    let disc = (-q * d).exp();
    match *model {
        RiskModel::CramerLundbergExp { claim_rate: xi, .. } => {
            let pass = ClPassage::new(model, z, RuinNormalization::UnitPremium)?;
            let ruined = pass.ruin_by(d)?.clamp(0.0, 1.0);
            let drift = model.mean_drift();
            // E_z[X_d; τ ≤ d]: the undershoot is Exp(ξ), then free drift.
            let lost_mean = -ruined / xi + drift * pass.remaining_time(d)?;
            let mean_alive = z + drift * d - lost_mean;
            let lap = pass.discounted_mass(q, d)?;
            let back = reascent_factor(model, q, a)?;
            Ok((disc * mean_alive, disc * (1.0 - ruined) + lap * back))
        }
        RiskModel::BrownianDrift {
            drift: c,
            volatility: s,
        } => {
            let ruined = bm_passage_integral(c, s, z, d, |_| 1.0)?.min(1.0);
            let rem = bm_passage_integral(c, s, z, d, |t| d - t)?;
            let lap = bm_passage_integral(c, s, z, d, |t| (-q * t).exp())?;
            Ok((disc * (z + c * d - c * rem), disc * (1.0 - ruined) + lap))
        }
    }
}

/// `∫₀^a (W(a−y)/W(a)) ξe^{−ξy} dy`: probability-like factor of climbing
/// back to `a` after a claim takes the surplus below it.
fn reascent_factor(model: &RiskModel, q: f64, a: f64) -> Result<f64> {
    let (_, _, xi) = require_cl(model)?;
    let w = ScaleEval::new(*model, q)?;
    let num: f64 = w
        .exponential_sum()
        .terms
        .iter()
        .map(|t| t.coef * xi * (t.rate * a).exp() * one_minus_exp_over(t.rate + xi, a))
        .sum();
    Ok(num / w.W(a))
}

fn check_above(q: f64, a: f64, va: f64, x: f64) -> Result<()> {
    if !(q >= 0.0) || !(a > 0.0) || !(va >= 0.0) || !(x >= a) || !x.is_finite() {
        return Err(invalid(format!(
            "need q ≥ 0, a > 0, v(a) ≥ 0, finite x ≥ a; got q={q}, a={a}, v(a)={va}, x={x}"
        )));
    }
    Ok(())
}

pub fn value_above_cl(
    model: &RiskModel,
    q: f64,
    spec: PaymentDelaySpec,
    a: f64,
    va: f64,
    x: f64,
) -> Result<f64> {
    require_cl(model)?;
    check_above(q, a, va, x)?;
    let (p, b) = above_parts(model, q, PaymentDelaySpec::new(spec.d)?.d, a, x - a)?;
    Ok(p + b * va)
}

pub fn value_above_bm(
    model: &RiskModel,
    q: f64,
    spec: PaymentDelaySpec,
    a: f64,
    va: f64,
    x: f64,
) -> Result<f64> {
    require_bm(model)?;
    check_above(q, a, va, x)?;
    let (p, b) = above_parts(model, q, PaymentDelaySpec::new(spec.d)?.d, a, x - a)?;
    Ok(p + b * va)
}

pub fn value_above(
    model: &RiskModel,
    q: f64,
    spec: PaymentDelaySpec,
    a: f64,
    va: f64,
    x: f64,
) -> Result<f64> {
    match model {
        RiskModel::CramerLundbergExp { .. } => value_above_cl(model, q, spec, a, va, x),
        RiskModel::BrownianDrift { .. } => value_above_bm(model, q, spec, a, va, x),
    }
}

type CoefKey = [u64; 6];

fn coefficient_cache() -> &'static RwLock<HashMap<CoefKey, (f64, f64)>> {
    static CACHE: OnceLock<RwLock<HashMap<CoefKey, (f64, f64)>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn coefficient_key(model: &RiskModel, q: f64, d: f64, a: f64) -> CoefKey {
    let (tag, p1, p2, p3) = match *model {
        RiskModel::CramerLundbergExp {
            premium,
            intensity,
            claim_rate,
        } => (0u64, premium, intensity, claim_rate),
        RiskModel::BrownianDrift { drift, volatility } => (1u64, drift, volatility, 0.0),
    };
    let h = |v: f64| v.to_bits();
    [tag ^ h(p1).rotate_left(1), h(p2), h(p3), h(q), h(d), h(a)]
}

/// Relative step for the one-sided derivative at the barrier.
pub const PASTE_STEP: f64 = 1e-4;

/// `(A, B)` with `v(a+) = A + B·v(a)` (compound Poisson), or
/// `(A′, B′)` with `v′(a+) = A′ + B′·v(a)` (Brownian).
fn boundary_coefficients(model: &RiskModel, q: f64, d: f64, a: f64) -> Result<(f64, f64)> {
    let key = coefficient_key(model, q, d, a);
    if let Some(v) = coefficient_cache()
        .read()
        .ok()
        .and_then(|m| m.get(&key).copied())
    {
        return Ok(v);
    }
    let spec = PaymentDelaySpec { d };
    let coefs = match model {
        RiskModel::CramerLundbergExp { .. } => {
            let a0 = value_above_cl(model, q, spec, a, 0.0, a)?;
            let a1 = value_above_cl(model, q, spec, a, 1.0, a)?;
            (a0, a1 - a0)
        }
        RiskModel::BrownianDrift { .. } => {
            let eval = |va: f64, x: f64| value_above_bm(model, q, spec, a, va, x);
            let h = PASTE_STEP * a.max(1.0);
            let slope = |va: f64| -> Result<f64> {
                let f0 = eval(va, a)?;
                let fd = |h: f64| -> Result<f64> {
                    Ok((-3.0 * f0 + 4.0 * eval(va, a + h)? - eval(va, a + 2.0 * h)?) / (2.0 * h))
                };
                Ok((4.0 * fd(0.5 * h)? - fd(h)?) / 3.0)
            };
            let s0 = slope(0.0)?;
            let s1 = slope(1.0)?;
            (s0, s1 - s0)
        }
    };
    if let Ok(mut m) = coefficient_cache().write() {
        m.insert(key, coefs);
    }
    Ok(coefs)
}

/// `v(a)` for the delayed-payment barrier strategy.
pub fn solve_boundary_value(
    model: &RiskModel,
    q: f64,
    spec: PaymentDelaySpec,
    a: f64,
) -> Result<f64> {
    let spec = PaymentDelaySpec::new(spec.d)?;
    if !(q > 0.0) || !(a > 0.0) || !a.is_finite() {
        return Err(invalid(format!("need q > 0 and a > 0, got q={q}, a={a}")));
    }
    let w = ScaleEval::new(*model, q)?;
    if spec.d == 0.0 {
        return Ok(w.W(a) / w.w_prime(a));
    }
    let (p, b) = boundary_coefficients(model, q, spec.d, a)?;
    let va = match model {
        RiskModel::CramerLundbergExp { .. } => {
            if !(b < 1.0) {
                return Err(Error::IllPosedBoundary(format!("coefficient B = {b} ≥ 1")));
            }
            p / (1.0 - b)
        }
        RiskModel::BrownianDrift { .. } => {
            let den = w.w_prime(a) / w.W(a) - b;
            if !(den > 0.0) {
                return Err(Error::IllPosedBoundary(format!(
                    "smooth-paste denominator {den} is not positive"
                )));
            }
            p / den
        }
    };
    if !(va >= 0.0) || !va.is_finite() {
        return Err(Error::IllPosedBoundary(format!(
            "boundary value {va} is not admissible"
        )));
    }
    Ok(va)
}

/// The solved value function of the delayed-payment strategy.
#[derive(Debug, Clone)]
pub struct PaymentDelayValue {
    model: RiskModel,
    q: f64,
    d: f64,
    a: f64,
    va: f64,
    scale: ScaleEval,
}

impl PaymentDelayValue {
    pub fn new(model: RiskModel, q: f64, spec: PaymentDelaySpec, a: f64) -> Result<Self> {
        let va = solve_boundary_value(&model, q, spec, a)?;
        Ok(Self {
            model,
            q,
            d: spec.d,
            a,
            va,
            scale: ScaleEval::new(model, q)?,
        })
    }

    pub fn boundary_value(&self) -> f64 {
        self.va
    }

    pub fn barrier(&self) -> f64 {
        self.a
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(invalid("x is NaN"));
        }
        if x < 0.0 {
            return Ok(0.0);
        }
        if x <= self.a {
            return Ok(self.scale.W(x) / self.scale.W(self.a) * self.va);
        }
        let (p, b) = above_parts(&self.model, self.q, self.d, self.a, x - self.a)?;
        Ok(p + b * self.va)
    }

    /// `v′(a−) = v(a) W′(a)/W(a)`.
    pub fn left_slope_at_barrier(&self) -> f64 {
        self.va * self.scale.w_prime(self.a) / self.scale.W(self.a)
    }

    /// `|v(a−) − v(a+)|`, evaluated through the above-barrier formula at
    /// `x = a`.
    pub fn continuity_gap(&self) -> Result<f64> {
        let (p, b) = above_parts(&self.model, self.q, self.d, self.a, 0.0)?;
        Ok((p + b * self.va - self.va).abs())
    }
}

pub fn value_payment_delay(
    model: &RiskModel,
    q: f64,
    spec: PaymentDelaySpec,
    a: f64,
    x: f64,
) -> Result<f64> {
    PaymentDelayValue::new(*model, q, spec, a)?.value(x)
}

//! Parisian ruin for the two closed-form models.
//!
//! The central object is the function
//! `V^{(q)}(x) = e^{Φ(q)x} P^{Φ(q)}_x(τ^ζ = ∞)`, which for both models has the
//! shape `e^{Φx} − R·e^{(Φ−κ)x}` on `[0, ∞)`. On the negative half-line it is
//! continued by `V(−y) = e^{−Φy}·V(0)·P^{Φ}_0(τ_y⁺ ≤ ζ)`, which is what the
//! jump part of the generator sees.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy_model::{RiskModel, VariantConstants};
use crate::numerics::{i1_over_x_scaled, integrate, normal_cdf, std_normal_cdf, Tolerance};
use crate::scale::ScaleEval;

/// Length of the grace period below zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParisianSpec {
    pub zeta: f64,
}

impl ParisianSpec {
    pub fn new(zeta: f64) -> Result<Self> {
        if !(zeta >= 0.0) || !zeta.is_finite() {
            return Err(invalid(format!("zeta must be finite and ≥ 0, got {zeta}")));
        }
        Ok(Self { zeta })
    }
}

/// Which claim rate enters the Bessel argument of the survival factor `D`.
///
/// `Tilted` uses `ξ_q` everywhere, which makes `D` the distribution function
/// of an M/M/1 busy period under the tilted measure. `AsPrinted` keeps the
/// untilted `ξ` in the Bessel argument only. Both agree at `q = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivalVariant {
    #[default]
    Tilted,
    AsPrinted,
}

type CacheKey = [u64; 6];

fn survival_cache() -> &'static RwLock<HashMap<CacheKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// The constant `D` for a compound Poisson model with premium `c`, tilted
/// intensity `λ_q`, tilted claim rate `ξ_q` and Bessel claim rate
/// `bessel_xi`:
///
/// `D = 1 − ∫₀^ζ √(cξ_q/λ_q) e^{−(λ_q+cξ_q)t} t⁻¹ I₁(2t√(cλ_q·bessel_xi)) dt`.
pub fn cl_survival_factor(
    premium: f64,
    lambda_q: f64,
    xi_q: f64,
    bessel_xi: f64,
    zeta: f64,
) -> Result<f64> {
    for (name, v) in [
        ("premium", premium),
        ("lambda_q", lambda_q),
        ("xi_q", xi_q),
        ("bessel_xi", bessel_xi),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    if premium * xi_q <= lambda_q {
        return Err(invalid("tilted model violates the net profit condition"));
    }
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return Err(invalid(format!("zeta must be finite and ≥ 0, got {zeta}")));
    }
    if zeta == 0.0 {
        return Ok(1.0);
    }
    let key = [
        1,
        premium.to_bits(),
        lambda_q.to_bits(),
        xi_q.to_bits(),
        bessel_xi.to_bits(),
        zeta.to_bits(),
    ];
    if let Some(v) = survival_cache()
        .read()
        .ok()
        .and_then(|m| m.get(&key).copied())
    {
        return Ok(v);
    }
    let mu = premium * xi_q;
    let k = (premium * lambda_q * bessel_xi).sqrt();
    let pref = 2.0 * k * (mu / lambda_q).sqrt();
    // I₁(2tk)/t = 2k·I₁(s)/s with s = 2tk; the exponential scaling keeps the
    // integrand finite for every t and removes the 0/0 at the origin.
    let integrand = |t: f64| {
        let s = 2.0 * t * k;
        pref * i1_over_x_scaled(s) * (s - (lambda_q + mu) * t).exp()
    };
    let mass = integrate(integrand, 0.0, zeta, Tolerance::fine())?;
    let d = 1.0 - mass;
    if let Ok(mut m) = survival_cache().write() {
        m.insert(key, d);
    }
    Ok(d)
}

/// `Ψ(x) = 2√π x N(√2 x) − √π x + e^{−x²}`.
pub fn bm_psi(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("Ψ needs a finite x ≥ 0, got {x}")));
    }
    let sp = std::f64::consts::PI.sqrt();
    Ok(2.0 * sp * x * std_normal_cdf(std::f64::consts::SQRT_2 * x)? - sp * x + (-x * x).exp())
}

/// `(Ψ(η) − η√π)/(Ψ(η) + η√π)` with the numerator written as
/// `e^{−η²} − √π η erfc(η)` to avoid cancellation.
fn bm_ratio(eta: f64) -> f64 {
    let sp = std::f64::consts::PI.sqrt();
    let num = (-eta * eta).exp() - sp * eta * libm::erfc(eta);
    num / (num + 2.0 * sp * eta)
}

/// `V^{(q)}` for a fixed `(model, q, ζ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParisianScale {
    model: RiskModel,
    /// The `Φ(q)`-tilted model.
    tilted: RiskModel,
    q: f64,
    zeta: f64,
    phi: f64,
    kappa: f64,
    ratio: f64,
    survival_factor: Option<f64>,
    variant: SurvivalVariant,
}

impl ParisianScale {
    pub fn new(model: RiskModel, q: f64, spec: ParisianSpec) -> Result<Self> {
        Self::with_variant(model, q, spec, SurvivalVariant::default())
    }

    pub fn with_variant(
        model: RiskModel,
        q: f64,
        spec: ParisianSpec,
        variant: SurvivalVariant,
    ) -> Result<Self> {
        let spec = ParisianSpec::new(spec.zeta)?;
        let constants = model.phi(q)?;
        let phi = constants.phi_q;
        let tilted = model.tilt(phi)?;
        let (kappa, ratio, survival_factor) = match (model, constants.variant) {
            (
                RiskModel::CramerLundbergExp {
                    premium,
                    claim_rate,
                    ..
                },
                VariantConstants::CramerLundberg { xi_q, lambda_q, .. },
            ) => {
                let bessel_xi = match variant {
                    SurvivalVariant::Tilted => xi_q,
                    SurvivalVariant::AsPrinted => claim_rate,
                };
                let d = cl_survival_factor(premium, lambda_q, xi_q, bessel_xi, spec.zeta)?;
                let gap = premium * xi_q - lambda_q;
                let ratio = lambda_q * d / (gap + lambda_q * d);
                (gap / premium, ratio, Some(d))
            }
            (
                RiskModel::BrownianDrift { volatility, .. },
                VariantConstants::Brownian { c_q, .. },
            ) => {
                let eta = c_q / volatility * (spec.zeta / 2.0).sqrt();
                let ratio = bm_ratio(eta);
                (2.0 * c_q / (volatility * volatility), ratio, None)
            }
            _ => unreachable!("constants always match the model variant"),
        };
        Ok(Self {
            model,
            tilted,
            q,
            zeta: spec.zeta,
            phi,
            kappa,
            ratio,
            survival_factor,
            variant,
        })
    }

    pub fn model(&self) -> &RiskModel {
        &self.model
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn phi_q(&self) -> f64 {
        self.phi
    }

    /// Decay rate of the correction term.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Weight `R` of the correction term, `V(x) = e^{Φx} − R e^{(Φ−κ)x}`.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// `D` (compound Poisson model only).
    pub fn survival_factor(&self) -> Option<f64> {
        self.survival_factor
    }

    pub fn variant(&self) -> SurvivalVariant {
        self.variant
    }

    /// `V^{(q)}(x)` on the whole real line.
    pub fn value(&self, x: f64) -> f64 {
        if x >= 0.0 {
            (self.phi * x).exp() - self.ratio * ((self.phi - self.kappa) * x).exp()
        } else {
            let y = -x;
            (-self.phi * y).exp() * (1.0 - self.ratio) * self.tilted_passage_by_zeta(y)
        }
    }

    /// Analytic derivative of order `order` on `[0, ∞)` (right derivative at
    /// 0); order 0 is the value.
    pub fn derivative(&self, x: f64, order: i32) -> f64 {
        let lo = self.phi - self.kappa;
        self.phi.powi(order) * (self.phi * x).exp() - self.ratio * lo.powi(order) * (lo * x).exp()
    }

    /// Closed-form zero of `V″`, if the logarithm has a positive argument.
    pub fn inflection_point(&self) -> Option<f64> {
        if self.phi <= 0.0 {
            return None;
        }
        let lo = self.phi - self.kappa;
        let arg = self.ratio * (lo / self.phi).powi(2);
        if arg > 0.0 && arg.is_finite() {
            Some(arg.ln() / self.kappa)
        } else {
            None
        }
    }

    /// `P^{Φ}_0(τ_y⁺ ≤ ζ)`: the tilted process started at 0 reaches `y`
    /// within the grace period.
    fn tilted_passage_by_zeta(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 1.0;
        }
        if self.zeta == 0.0 {
            return 0.0;
        }
        match self.tilted {
            RiskModel::CramerLundbergExp {
                premium: c,
                intensity: lam,
                claim_rate: xi,
            } => {
                let t0 = y / c;
                if t0 > self.zeta {
                    return 0.0;
                }
                // Kendall's identity: P(τ_y⁺ ∈ dt) = (y/t) P(X_t ∈ dy) dt,
                // plus the atom from reaching y with no claim.
                let atom = (-lam * t0).exp();
                let dens = |t: f64| {
                    let w = c * t - y;
                    if w <= 0.0 {
                        return 0.0;
                    }
                    let s = 2.0 * (lam * t * xi * w).sqrt();
                    (y / t)
                        * 2.0
                        * lam
                        * t
                        * xi
                        * i1_over_x_scaled(s)
                        * (s - lam * t - xi * w).exp()
                };
                let tol = Tolerance::new(1e-12, 1e-10, 100_000).expect("valid tolerance");
                let cont = integrate(dens, t0, self.zeta, tol).unwrap_or_else(|e| match e {
                    Error::Convergence { estimate, .. } => estimate,
                    _ => f64::NAN,
                });
                (atom + cont).min(1.0)
            }
            RiskModel::BrownianDrift {
                drift: c,
                volatility: s,
            } => {
                let sd = s * self.zeta.sqrt();
                let first = normal_cdf((c * self.zeta - y) / sd);
                let log_second = 2.0 * c * y / (s * s) + normal_cdf((-y - c * self.zeta) / sd).ln();
                (first + log_second.exp()).min(1.0)
            }
        }
    }
}

/// `V^{(q)}(x)` for `x ≥ 0`.
#[allow(non_snake_case)]
pub fn V(model: &RiskModel, q: f64, spec: ParisianSpec, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be ≥ 0, got {x}")));
    }
    Ok(ParisianScale::new(*model, q, spec)?.value(x))
}

/// First or second derivative of `V^{(q)}` at `x ≥ 0`.
#[allow(non_snake_case)]
pub fn V_derivatives(
    model: &RiskModel,
    q: f64,
    spec: ParisianSpec,
    x: f64,
    order: u8,
) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be ≥ 0, got {x}")));
    }
    if !(order == 1 || order == 2) {
        return Err(invalid(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    Ok(ParisianScale::new(*model, q, spec)?.derivative(x, order as i32))
}

fn require_positive_drift(model: &RiskModel) -> Result<()> {
    if !(model.mean_drift() > 0.0) {
        return Err(Error::UnsupportedModel(
            "ruin probabilities need a positive mean drift".into(),
        ));
    }
    Ok(())
}

/// Probability of Parisian ruin from `x`, `1 − V^{(0)}(x)`.
pub fn parisian_ruin_probability(model: &RiskModel, spec: ParisianSpec, x: f64) -> Result<f64> {
    parisian_ruin_probability_with(model, spec, x, SurvivalVariant::default())
}

pub fn parisian_ruin_probability_with(
    model: &RiskModel,
    spec: ParisianSpec,
    x: f64,
    variant: SurvivalVariant,
) -> Result<f64> {
    require_positive_drift(model)?;
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be ≥ 0, got {x}")));
    }
    let v = ParisianScale::with_variant(*model, 0.0, spec, variant)?.value(x);
    Ok((1.0 - v).clamp(0.0, 1.0))
}

/// Classical ruin probability `1 − ψ′(0+) W(x)`.
pub fn classical_ruin_probability(model: &RiskModel, x: f64) -> Result<f64> {
    require_positive_drift(model)?;
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be ≥ 0, got {x}")));
    }
    let w = ScaleEval::new(*model, 0.0)?;
    Ok((1.0 - model.mean_drift() * w.W(x)).clamp(0.0, 1.0))
}

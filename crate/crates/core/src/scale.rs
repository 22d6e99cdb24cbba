//! Scale functions `W^{(q)}`, `Z^{(q)}` and the fluctuation identities built
//! from them.
//!
//! For both supported models `W^{(q)}` is a sum of two exponentials
//! `Σ Res_{θ=r} (ψ(θ) − q)^{-1} e^{r x}` over the real roots of `ψ(θ) = q`.
//! Tilted scale functions are always obtained from the untilted ones through
//! `e^{β z} W_β^{(u)}(z) = W^{(u+ψ(β))}(z)`.

use crate::error::{invalid, Result};
use crate::levy_model::{ModelConstants, RiskModel, VariantConstants};
use crate::numerics::{differentiate, DerivativeOrder};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub coef: f64,
    pub rate: f64,
}

/// `x ↦ Σ coef·e^{rate·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    pub terms: Vec<ExpTerm>,
}

/// `(e^{r x} − 1) / r`, continuous in `r`.
pub(crate) fn expm1_over(rate: f64, x: f64) -> f64 {
    let rx = rate * x;
    if rx.abs() < 1e-10 {
        x * (1.0 + 0.5 * rx)
    } else {
        rx.exp_m1() / rate
    }
}

impl ExpSum {
    pub fn new(terms: Vec<ExpTerm>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.coef * (t.rate * x).exp()).sum()
    }

    /// `n`-th derivative.
    pub fn derivative(&self, x: f64, n: i32) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * t.rate.powi(n) * (t.rate * x).exp())
            .sum()
    }

    /// `∫₀^x` of the sum.
    pub fn integral(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * expm1_over(t.rate, x))
            .sum()
    }

    /// The sum multiplied by `e^{−β x}`.
    pub fn damped(&self, beta: f64) -> ExpSum {
        ExpSum::new(
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    coef: t.coef,
                    rate: t.rate - beta,
                })
                .collect(),
        )
    }
}

/// Scale functions of a model at discount rate `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleEval {
    model: RiskModel,
    q: f64,
    constants: ModelConstants,
    w: ExpSum,
}

impl ScaleEval {
    pub fn new(model: RiskModel, q: f64) -> Result<Self> {
        let constants = model.phi(q)?;
        let w = match (model, constants.variant) {
            (
                RiskModel::CramerLundbergExp { premium, .. },
                VariantConstants::CramerLundberg {
                    q_plus,
                    q_minus,
                    a_plus,
                    a_minus,
                    ..
                },
            ) => ExpSum::new(vec![
                ExpTerm {
                    coef: a_plus / premium,
                    rate: q_plus,
                },
                ExpTerm {
                    coef: -a_minus / premium,
                    rate: q_minus,
                },
            ]),
            (
                RiskModel::BrownianDrift { volatility, .. },
                VariantConstants::Brownian { delta, omega, .. },
            ) => {
                let k = 1.0 / (volatility * volatility * delta);
                ExpSum::new(vec![
                    ExpTerm {
                        coef: k,
                        rate: delta - omega,
                    },
                    ExpTerm {
                        coef: -k,
                        rate: -(omega + delta),
                    },
                ])
            }
            _ => unreachable!("constants always match the model variant"),
        };
        Ok(Self {
            model,
            q,
            constants,
            w,
        })
    }

    pub fn model(&self) -> &RiskModel {
        &self.model
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    pub fn phi_q(&self) -> f64 {
        self.constants.phi_q
    }

    /// `W^{(q)}` on `[0, ∞)` as an exponential sum (the first term carries
    /// the rate Φ(q)).
    pub fn exponential_sum(&self) -> &ExpSum {
        &self.w
    }

    #[allow(non_snake_case)]
    pub fn W(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.w.eval(x)
        }
    }

    /// Right derivative of `W^{(q)}`.
    pub fn w_prime(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.w.derivative(x, 1)
        }
    }

    pub fn w_second(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.w.derivative(x, 2)
        }
    }

    /// `∫₀^x W^{(q)}(y) dy`.
    pub fn w_bar(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.w.integral(x)
        }
    }

    #[allow(non_snake_case)]
    pub fn Z(&self, x: f64) -> f64 {
        1.0 + self.q * self.w_bar(x)
    }

    /// `E_z[e^{−q τ_a⁺}; τ_a⁺ < τ_0⁻] = W(z)/W(a)`.
    pub fn exit_up(&self, z: f64, a: f64) -> Result<f64> {
        let wa = self.check_exit(z, a)?;
        Ok(self.W(z) / wa)
    }

    /// `E_z[e^{−q τ_0⁻}; τ_0⁻ < τ_a⁺] = Z(z) − Z(a) W(z)/W(a)`.
    pub fn exit_down(&self, z: f64, a: f64) -> Result<f64> {
        let wa = self.check_exit(z, a)?;
        let v = self.Z(z) - self.Z(a) * self.W(z) / wa;
        Ok(v.max(0.0))
    }

    fn check_exit(&self, z: f64, a: f64) -> Result<f64> {
        if !(a >= 0.0) || !(z >= 0.0 && z <= a) {
            return Err(invalid(format!(
                "exit identities need 0 ≤ z ≤ a, got z={z}, a={a}"
            )));
        }
        let wa = self.W(a);
        if wa <= 0.0 {
            return Err(invalid(format!("W({a}) = 0, exit problem is degenerate")));
        }
        Ok(wa)
    }
}

/// Scale functions of the tilted measure `P^β` at rate `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedScale {
    beta: f64,
    u: f64,
    base: ScaleEval,
    damped: ExpSum,
}

impl TiltedScale {
    /// Requires `p = u + ψ(β) ≥ 0`.
    pub fn new(model: RiskModel, beta: f64, u: f64) -> Result<Self> {
        let psi_beta = model.laplace_exponent(beta)?;
        let p = u + psi_beta;
        if p < -1e-14 {
            return Err(invalid(format!("u + ψ(β) must be ≥ 0, got {p}")));
        }
        let base = ScaleEval::new(model, p.max(0.0))?;
        let damped = base.exponential_sum().damped(beta);
        Ok(Self {
            beta,
            u,
            base,
            damped,
        })
    }

    /// The untilted scale functions at `p = u + ψ(β)`.
    pub fn base(&self) -> &ScaleEval {
        &self.base
    }

    #[allow(non_snake_case)]
    pub fn W(&self, z: f64) -> f64 {
        if z < 0.0 {
            0.0
        } else {
            (-self.beta * z).exp() * self.base.W(z)
        }
    }

    /// `1 + u ∫₀^z e^{−β y} W^{(p)}(y) dy`.
    #[allow(non_snake_case)]
    pub fn Z(&self, z: f64) -> f64 {
        if z <= 0.0 {
            1.0
        } else {
            1.0 + self.u * self.damped.integral(z)
        }
    }
}

/// `u/Φ_β(u)` for the tilted process, where `u = p − ψ(β)` and
/// `Φ_β(u) = Φ(p) − β`; at `u = 0` the limit `ψ′(Φ(p))` is taken.
fn tilted_ratio(model: &RiskModel, p: f64, phi_p: f64, beta: f64) -> f64 {
    let h = phi_p - beta;
    if h.abs() < 1e-6 {
        // u/h = ψ′(Φ) − ψ″(Φ) h / 2 + O(h²)
        model.psi_prime(phi_p) - 0.5 * model.psi_second(phi_p) * h
    } else {
        (p - model.psi(beta)) / h
    }
}

/// `α·H` for the discount `p = α + q`; β may be slightly negative here
/// (finite differences), as long as ψ(β) is finite.
fn scaled_transform(model: &RiskModel, p: f64, beta: f64, z: f64) -> Result<f64> {
    let scale = ScaleEval::new(*model, p)?;
    let phi_p = scale.phi_q();
    let u = p - model.psi(beta);
    let kappa = tilted_ratio(model, p, phi_p, beta);
    let terms = &scale.exponential_sum().terms;
    // The Φ(p) term of e^{βz}Z_β − κ W cancels exactly; only its constant
    // part survives.
    let dominant = terms[0];
    let mut constant = 1.0 - dominant.coef * kappa;
    let mut tail = 0.0;
    for t in &terms[1..] {
        let shift = t.rate - beta;
        constant -= u * t.coef / shift;
        tail += t.coef * (u / shift - kappa) * (t.rate * z).exp();
    }
    Ok((beta * z).exp() * constant + tail)
}

/// `H_q(β, z) = α⁻¹ E_z[e^{−(α+q) τ_0⁻ + β X_{τ_0⁻}}; τ_0⁻ < ∞]`, the double
/// Laplace transform (in time and undershoot) of the discounted ruin event.
pub fn one_sided_down_transform(
    model: &RiskModel,
    q: f64,
    alpha: f64,
    beta: f64,
    z: f64,
) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("α must be positive, got {alpha}")));
    }
    if !(q >= 0.0) || !(beta >= 0.0) || !(z >= 0.0) {
        return Err(invalid(format!(
            "need q ≥ 0, β ≥ 0, z ≥ 0, got q={q}, β={beta}, z={z}"
        )));
    }
    Ok(scaled_transform(model, alpha + q, beta, z)? / alpha)
}

/// Step of the central difference in β.
pub const POSITION_TRANSFORM_STEP: f64 = 1e-5;

/// `∫₀^∞ e^{−α s} E_z[X_s; τ_0⁻ > s] ds`.
///
/// After ruin the path keeps drifting at `μ = ψ′(0+)`, so
/// `E_z[X_s; τ > s] = z + μs − E_z[X_τ + μ(s − τ); τ ≤ s]`, which transforms to
/// `z/α + μ(1 − E_z[e^{−ατ}])/α² − ∂_β H_0(β, z)|_{β=0}`.
pub fn expected_position_transform(model: &RiskModel, alpha: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("α must be positive, got {alpha}")));
    }
    if !(z >= 0.0) {
        return Err(invalid(format!("z must be ≥ 0, got {z}")));
    }
    let h = POSITION_TRANSFORM_STEP;
    let d = differentiate(
        |b| scaled_transform(model, alpha, b, z).unwrap_or(f64::NAN) / alpha,
        0.0,
        DerivativeOrder::First,
        h,
    )?;
    let passage = scaled_transform(model, alpha, 0.0, z)?;
    Ok(z / alpha + model.mean_drift() * (1.0 - passage) / (alpha * alpha) - d)
}

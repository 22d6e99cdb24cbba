//! The driving spectrally negative Lévy process.
//!
//! Both variants are closed under exponential tilting, so [`RiskModel::tilt`]
//! returns another `RiskModel` rather than an opaque exponent.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskModel {
    /// `X_t = x + c t − Σ_{i ≤ N_t} U_i` with `N` Poisson(λ) and `U_i ~ Exp(ξ)`.
    /// Lévy measure `ν(dy) = λ ξ e^{ξ y} dy` on `y < 0`.
    CramerLundbergExp {
        premium: f64,
        intensity: f64,
        claim_rate: f64,
    },
    /// `X_t = x + c t + σ B_t`.
    BrownianDrift { drift: f64, volatility: f64 },
}

/// Constants derived from a model and a discount rate `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConstants {
    pub q: f64,
    /// Φ(q), the largest root of ψ(θ) = q.
    pub phi_q: f64,
    pub variant: VariantConstants,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariantConstants {
    CramerLundberg {
        /// ξ + Φ(q)
        xi_q: f64,
        /// λ ξ / ξ_q
        lambda_q: f64,
        q_plus: f64,
        /// Smallest root of ψ(θ) = q (below −ξ when q > 0).
        q_minus: f64,
        a_plus: f64,
        a_minus: f64,
    },
    Brownian {
        /// √(c² + 2 q σ²)
        c_q: f64,
        /// σ⁻² √(c² + 2 q σ²)
        delta: f64,
        /// c / σ²
        omega: f64,
    },
}

impl ModelConstants {
    /// The other real root of ψ(θ) = q.
    pub fn second_root(&self) -> f64 {
        match self.variant {
            VariantConstants::CramerLundberg { q_minus, .. } => q_minus,
            VariantConstants::Brownian { delta, omega, .. } => -(omega + delta),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl RiskModel {
    /// Cramér–Lundberg model; requires the net profit condition `λ < c ξ`.
    pub fn cramer_lundberg(premium: f64, intensity: f64, claim_rate: f64) -> Result<Self> {
        let m = RiskModel::CramerLundbergExp {
            premium,
            intensity,
            claim_rate,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn brownian(drift: f64, volatility: f64) -> Result<Self> {
        let m = RiskModel::BrownianDrift { drift, volatility };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RiskModel::CramerLundbergExp {
                premium,
                intensity,
                claim_rate,
            } => {
                positive("premium rate c", premium)?;
                positive("claim intensity λ", intensity)?;
                positive("claim rate ξ", claim_rate)?;
                if intensity / (premium * claim_rate) >= 1.0 {
                    return Err(invalid(format!(
                        "net profit condition violated: λ/(cξ) = {} ≥ 1",
                        intensity / (premium * claim_rate)
                    )));
                }
                Ok(())
            }
            RiskModel::BrownianDrift { drift, volatility } => {
                positive("drift c", drift)?;
                positive("volatility σ", volatility)
            }
        }
    }

    /// Bounded variation paths (no Gaussian part). Then `W^{(q)}(0) = 1/c`.
    pub fn has_bounded_variation(&self) -> bool {
        matches!(self, RiskModel::CramerLundbergExp { .. })
    }

    /// Compound Poisson jump part. The scale functions are still C¹ on
    /// `(0, ∞)` here because the Lévy measure has a density.
    pub fn is_compound_poisson(&self) -> bool {
        self.has_bounded_variation()
    }

    /// `σ > 0`, or an absolutely continuous Lévy measure. Both supported
    /// variants satisfy it.
    pub fn satisfies_regularity(&self) -> bool {
        true
    }

    pub fn gaussian_coefficient(&self) -> f64 {
        match *self {
            RiskModel::CramerLundbergExp { .. } => 0.0,
            RiskModel::BrownianDrift { volatility, .. } => volatility,
        }
    }

    /// Laplace exponent ψ(θ) = log E e^{θ X_1}.
    pub fn laplace_exponent(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(invalid(format!(
                "Laplace exponent needs finite θ ≥ 0, got {theta}"
            )));
        }
        Ok(self.psi(theta))
    }

    /// ψ without the domain check; valid for θ > −ξ (CL) or any θ (BM).
    pub(crate) fn psi(&self, theta: f64) -> f64 {
        match *self {
            RiskModel::CramerLundbergExp {
                premium,
                intensity,
                claim_rate,
            } => premium * theta - intensity * theta / (claim_rate + theta),
            RiskModel::BrownianDrift { drift, volatility } => {
                drift * theta + 0.5 * volatility * volatility * theta * theta
            }
        }
    }

    pub fn psi_prime(&self, theta: f64) -> f64 {
        match *self {
            RiskModel::CramerLundbergExp {
                premium,
                intensity,
                claim_rate,
            } => {
                let s = claim_rate + theta;
                premium - intensity * claim_rate / (s * s)
            }
            RiskModel::BrownianDrift { drift, volatility } => {
                drift + volatility * volatility * theta
            }
        }
    }

    pub fn psi_second(&self, theta: f64) -> f64 {
        match *self {
            RiskModel::CramerLundbergExp {
                intensity,
                claim_rate,
                ..
            } => {
                let s = claim_rate + theta;
                2.0 * intensity * claim_rate / (s * s * s)
            }
            RiskModel::BrownianDrift { volatility, .. } => volatility * volatility,
        }
    }

    /// ψ′(0+) = E X_1 − X_0.
    pub fn mean_drift(&self) -> f64 {
        self.psi_prime(0.0)
    }

    /// Φ(q) and the variant-specific constants used by the scale functions.
    pub fn phi(&self, q: f64) -> Result<ModelConstants> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(invalid(format!(
                "discount rate must be finite and ≥ 0, got {q}"
            )));
        }
        self.validate()?;
        Ok(match *self {
            RiskModel::CramerLundbergExp {
                premium: c,
                intensity: lambda,
                claim_rate: xi,
            } => {
                let b = q + lambda - xi * c;
                let s = (b * b + 4.0 * c * q * xi).sqrt();
                // Rationalised forms avoid cancellation for small q.
                let (q_plus, q_minus) = if b <= 0.0 {
                    (2.0 * q * xi / (s - b), (b - s) / (2.0 * c))
                } else {
                    ((b + s) / (2.0 * c), -2.0 * q * xi / (b + s))
                };
                let spread = q_plus - q_minus;
                ModelConstants {
                    q,
                    phi_q: q_plus,
                    variant: VariantConstants::CramerLundberg {
                        xi_q: xi + q_plus,
                        lambda_q: lambda * xi / (xi + q_plus),
                        q_plus,
                        q_minus,
                        a_plus: (xi + q_plus) / spread,
                        a_minus: (xi + q_minus) / spread,
                    },
                }
            }
            RiskModel::BrownianDrift {
                drift: c,
                volatility: sigma,
            } => {
                let s2 = sigma * sigma;
                let c_q = (c * c + 2.0 * q * s2).sqrt();
                ModelConstants {
                    q,
                    phi_q: 2.0 * q / (c_q + c),
                    variant: VariantConstants::Brownian {
                        c_q,
                        delta: c_q / s2,
                        omega: c / s2,
                    },
                }
            }
        })
    }

    /// Esscher transform: the model whose exponent is `ψ(s + θ) − ψ(θ)`.
    pub fn tilt(&self, theta: f64) -> Result<RiskModel> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(invalid(format!(
                "tilt parameter must be finite and ≥ 0, got {theta}"
            )));
        }
        Ok(match *self {
            RiskModel::CramerLundbergExp {
                premium,
                intensity,
                claim_rate,
            } => RiskModel::CramerLundbergExp {
                premium,
                intensity: intensity * claim_rate / (claim_rate + theta),
                claim_rate: claim_rate + theta,
            },
            RiskModel::BrownianDrift { drift, volatility } => RiskModel::BrownianDrift {
                drift: drift + volatility * volatility * theta,
                volatility,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{find_root_increasing, Tolerance};

    fn cl() -> RiskModel {
        RiskModel::cramer_lundberg(2.0, 1.0, 1.0).unwrap()
    }
    fn bm() -> RiskModel {
        RiskModel::brownian(1.0, 1.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(RiskModel::cramer_lundberg(1.0, 1.0, 1.0).is_err());
        assert!(RiskModel::cramer_lundberg(-1.0, 1.0, 1.0).is_err());
        assert!(RiskModel::brownian(1.0, 0.0).is_err());
        assert!(RiskModel::brownian(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn exponent_values() {
        assert_eq!(bm().laplace_exponent(0.0).unwrap(), 0.0);
        assert!((cl().laplace_exponent(1.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((bm().laplace_exponent(2.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(cl().laplace_exponent(-0.1).is_err());
    }

    #[test]
    fn phi_zero_under_net_profit() {
        assert_eq!(cl().phi(0.0).unwrap().phi_q, 0.0);
        assert_eq!(bm().phi(0.0).unwrap().phi_q, 0.0);
        assert!(cl().phi(-1.0).is_err());
    }

    #[test]
    fn phi_matches_bisection() {
        let tol = Tolerance::new(1e-13, 1e-13, 500).unwrap();
        let k = cl().phi(0.1).unwrap();
        let oracle =
            find_root_increasing(|t| 2.0 * t - t / (1.0 + t) - 0.1, 0.0, 1.0, tol).unwrap();
        assert!((k.phi_q - oracle).abs() < 1e-10);
        assert!((k.phi_q - 0.092_214_438_511_238).abs() < 1e-12);

        let k = bm().phi(0.05).unwrap();
        let oracle = find_root_increasing(|t| t + 0.5 * t * t - 0.05, 0.0, 1.0, tol).unwrap();
        assert!((k.phi_q - oracle).abs() < 1e-10);
        match k.variant {
            VariantConstants::Brownian { c_q, delta, omega } => {
                assert!((c_q - 1.1f64.sqrt()).abs() < 1e-15);
                assert!(c_q >= 1.0 && delta >= omega);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn roots_solve_exponent() {
        for m in [cl(), bm()] {
            for q in [0.0, 0.01, 0.05, 0.1, 1.0] {
                let k = m.phi(q).unwrap();
                assert!((m.psi(k.phi_q) - q).abs() < 1e-10);
                assert!((m.psi(k.second_root()) - q).abs() < 1e-10, "{m:?} q={q}");
                if q > 0.0 {
                    assert!(k.second_root() < 0.0 && k.phi_q > 0.0);
                }
            }
        }
    }

    #[test]
    fn tilt_examples() {
        assert_eq!(cl().tilt(0.0).unwrap(), cl());
        let th = cl().phi(0.1).unwrap().phi_q;
        match cl().tilt(th).unwrap() {
            RiskModel::CramerLundbergExp {
                premium,
                intensity,
                claim_rate,
            } => {
                assert_eq!(premium, 2.0);
                assert!((claim_rate - 1.092_214_438_511_238).abs() < 1e-12);
                assert!((intensity - 0.915_571_122_977_524).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
        let k = bm().phi(0.05).unwrap();
        match (bm().tilt(k.phi_q).unwrap(), k.variant) {
            (RiskModel::BrownianDrift { drift, .. }, VariantConstants::Brownian { c_q, .. }) => {
                assert!((drift - c_q).abs() < 1e-14)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn tilted_drift_positive() {
        for m in [cl(), bm()] {
            let phi = m.phi(0.1).unwrap().phi_q;
            assert!(m.tilt(phi).unwrap().mean_drift() > 0.0);
        }
    }
}

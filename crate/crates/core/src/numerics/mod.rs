//! Special functions, quadrature, root finding and finite differences shared
//! by the analytic modules.

mod bessel;
mod diff;
mod normal;
mod quadrature;
mod roots;

pub use bessel::{bessel_i1, bessel_i1_scaled};
pub(crate) use bessel::{i0_scaled, i1_over_x_scaled};
pub use diff::{differentiate, DerivativeOrder};
pub(crate) use normal::normal_cdf;
pub use normal::{std_normal_cdf, std_normal_pdf};
pub use quadrature::{integrate, integrate_pieces};
pub use roots::find_root_increasing;

use crate::error::{invalid, Result};

/// Accuracy targets for the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of iterations (root finding) or integrand evaluations
    /// (quadrature).
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(invalid(format!("abs_tol must be positive, got {abs_tol}")));
        }
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(invalid(format!("rel_tol must be positive, got {rel_tol}")));
        }
        if max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }

    /// Tighter tolerance used internally where results feed into finite
    /// differences.
    pub(crate) const fn fine() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_iter: 1_000_000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_iter: 1_000_000,
        }
    }
}

/// `(1 - e^{-k L}) / k`, continuous at `k = 0`.
pub(crate) fn one_minus_exp_over(k: f64, len: f64) -> f64 {
    if (k * len).abs() < 1e-8 {
        len * (1.0 - 0.5 * k * len)
    } else {
        -(-k * len).exp_m1() / k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_rejects_nonpositive() {
        assert!(Tolerance::new(0.0, 1e-8, 10).is_err());
        assert!(Tolerance::new(1e-8, -1.0, 10).is_err());
        assert!(Tolerance::new(1e-8, 1e-8, 0).is_err());
        assert!(Tolerance::new(1e-8, 1e-8, 1).is_ok());
    }

    #[test]
    fn one_minus_exp_over_limits() {
        assert!((one_minus_exp_over(0.0, 2.0) - 2.0).abs() < 1e-15);
        let k = 0.3;
        let exact = (1.0 - (-k * 2.0f64).exp()) / k;
        assert!((one_minus_exp_over(k, 2.0) - exact).abs() < 1e-15);
    }
}

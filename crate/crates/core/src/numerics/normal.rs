use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{invalid, Result};

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid(format!(
            "normal cdf argument must be finite, got {x}"
        )));
    }
    Ok(normal_cdf(x))
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

use crate::error::{invalid, Result};

// Below this the ascending series is summed directly; above it the
// large-argument expansion is accurate to better than 1e-16.
const SERIES_LIMIT: f64 = 20.0;

/// Modified Bessel function of the first kind of order one.
pub fn bessel_i1(x: f64) -> Result<f64> {
    check(x)?;
    if x <= SERIES_LIMIT {
        Ok(series(x))
    } else {
        Ok(asymptotic_scaled(x) * x.exp())
    }
}

/// `e^{-x} I₁(x)`, finite for every finite `x ≥ 0`.
pub fn bessel_i1_scaled(x: f64) -> Result<f64> {
    check(x)?;
    Ok(i1_scaled(x))
}

fn check(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(invalid(format!("Bessel argument must be finite, got {x}")));
    }
    if x < 0.0 {
        return Err(invalid(format!(
            "Bessel argument must be nonnegative, got {x}"
        )));
    }
    Ok(())
}

pub(crate) fn i1_scaled(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        series(x) * (-x).exp()
    } else {
        asymptotic_scaled(x)
    }
}

/// `e^{-x} I₁(x) / x`, with the limit 1/2 at the origin.
pub(crate) fn i1_over_x_scaled(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        series_over_x(x) * (-x).exp()
    } else {
        asymptotic_scaled(x) / x
    }
}

fn series(x: f64) -> f64 {
    x * series_over_x(x)
}

// Σ_k (x/2)^{2k} / (2 k! (k+1)!)
fn series_over_x(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 0.5;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= y / (k * (k + 1.0));
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
    }
}

/// `e^{-x} I₀(x)`.
pub(crate) fn i0_scaled(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        let y = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        while term >= sum * 1e-17 {
            k += 1.0;
            term *= y / (k * k);
            sum += term;
        }
        sum * (-x).exp()
    } else {
        asymptotic(x, 0.0)
    }
}

fn asymptotic_scaled(x: f64) -> f64 {
    asymptotic(x, 4.0)
}

// e^{-x} I_ν(x) ≈ (2πx)^{-1/2} Σ_k t_k, t_k = -t_{k-1} (4ν² - (2k-1)²) / (8kx).
fn asymptotic(x: f64, four_nu_sq: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (four_nu_sq - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

/// Central-difference derivative of `f` at `x` with step `h`.
pub fn differentiate<F: Fn(f64) -> f64>(
    f: F,
    x: f64,
    order: DerivativeOrder,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("step must be positive, got {h}")));
    }
    let fp = f(x + h);
    let fm = f(x - h);
    let value = match order {
        DerivativeOrder::First => (fp - fm) / (2.0 * h),
        DerivativeOrder::Second => {
            let f0 = f(x);
            (fp - 2.0 * f0 + fm) / (h * h)
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation(format!("finite difference at {x}")))
    }
}

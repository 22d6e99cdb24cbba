use super::Tolerance;
use crate::error::{invalid, Error, Result};

/// Root of a strictly increasing function bracketed by `[lo, hi]`.
///
/// Illinois-modified regula falsi, with a bisection step whenever the
/// bracket fails to halve. Terminates once the bracket is narrower than
/// `abs_tol` and `|f(x)| ≤ abs_tol`, so the returned `x` satisfies
/// `f(x - abs_tol) ≤ 0 ≤ f(x + abs_tol)`.
pub fn find_root_increasing<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(invalid(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::Evaluation("root-finding bracket endpoints".into()));
    }
    if fa > 0.0 || fb < 0.0 {
        return Err(invalid(format!(
            "bracket does not straddle a root: f({lo}) = {fa}, f({hi}) = {fb}"
        )));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    // 0 = last update moved a, 1 = moved b
    let mut side = -1i8;
    for _ in 0..tol.max_iter.max(200) {
        let width = b - a;
        let x = if side == 2 {
            0.5 * (a + b)
        } else {
            let t = a - fa * width / (fb - fa);
            if t > a && t < b {
                t
            } else {
                0.5 * (a + b)
            }
        };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Evaluation(format!("root-finding at {x}")));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == 0 {
                fb *= 0.5;
            }
            side = 0;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if b - a > 0.5 * width {
            side = 2;
        }
        let mid = 0.5 * (a + b);
        let done = b - a <= tol.abs_tol && fx.abs() <= tol.abs_tol;
        let stalled = b - a <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE);
        if done || stalled {
            return Ok(if fx.abs() <= f(mid).abs() { x } else { mid });
        }
    }
    Err(Error::Convergence {
        estimate: 0.5 * (a + b),
        error_estimate: b - a,
        evaluations: tol.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        let tol = Tolerance::default();
        let r = find_root_increasing(|x| x - 1.0, 0.0, 2.0, tol).unwrap();
        assert!((r - 1.0).abs() <= 1e-10);
        let r = find_root_increasing(|x| x * x - 2.0, 0.0, 2.0, tol).unwrap();
        assert!((r - 2f64.sqrt()).abs() <= 1e-10);
    }

    #[test]
    fn bracket_violation() {
        let tol = Tolerance::default();
        assert!(matches!(
            find_root_increasing(|x| x - 5.0, 0.0, 2.0, tol),
            Err(Error::InvalidArgument(_))
        ));
        assert!(find_root_increasing(|x| x, 2.0, 0.0, tol).is_err());
    }

    #[test]
    fn flat_slope_still_brackets() {
        let tol = Tolerance::default();
        let f = |x: f64| 1e-3 * (x - 0.7);
        let r = find_root_increasing(f, 0.0, 1.0, tol).unwrap();
        assert!(f(r - tol.abs_tol) <= 0.0 && f(r + tol.abs_tol) >= 0.0);
    }
}

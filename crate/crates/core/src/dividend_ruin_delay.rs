//! Barrier strategies under Parisian ruin: value function, optimal barrier
//! and a numerical check of the variational inequalities.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy_model::RiskModel;
use crate::numerics::{
    differentiate, find_root_increasing, integrate_pieces, DerivativeOrder, Tolerance,
};
use crate::parisian_ruin::{ParisianScale, ParisianSpec};

/// Reflect the surplus at `a` and pay out everything above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierPolicy {
    pub a: f64,
}

impl BarrierPolicy {
    pub fn new(a: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(invalid(format!("barrier must be finite and ≥ 0, got {a}")));
        }
        Ok(Self { a })
    }
}

/// A function together with its first two derivatives.
pub trait Smooth: Sync {
    fn value(&self, x: f64) -> f64;
    fn first(&self, x: f64) -> f64;
    fn second(&self, x: f64) -> f64;

    /// Points where the function or one of its derivatives is discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `∫₀^∞ f(−y) e^{−rate·y} dy` when it is cheaper to provide than to
    /// integrate.
    fn lower_moment(&self, _rate: f64) -> Option<f64> {
        None
    }
}

/// Wraps a closure; derivatives by central differences with step
/// `h·max(1, |x|)`.
pub struct NumericSmooth<F> {
    f: F,
    h: f64,
}

impl<F: Fn(f64) -> f64 + Sync> NumericSmooth<F> {
    pub fn new(f: F) -> Self {
        Self { f, h: 1e-4 }
    }
}

impl<F: Fn(f64) -> f64 + Sync> Smooth for NumericSmooth<F> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn first(&self, x: f64) -> f64 {
        let h = self.h * x.abs().max(1.0);
        differentiate(&self.f, x, DerivativeOrder::First, h).unwrap_or(f64::NAN)
    }
    fn second(&self, x: f64) -> f64 {
        let h = 10.0 * self.h * x.abs().max(1.0);
        differentiate(&self.f, x, DerivativeOrder::Second, h).unwrap_or(f64::NAN)
    }
}

/// Claims larger than this many mean sizes are ignored by the generator
/// (`e^{−ξz} < 1e−12`).
const JUMP_TRUNCATION: f64 = 27.631021115928547;

fn generator_tolerance() -> Tolerance {
    Tolerance::new(1e-12, 1e-12, 200_000).expect("valid tolerance")
}

fn accept_near_converged(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::Convergence {
            estimate,
            error_estimate,
            ..
        }) if error_estimate < 1e-9 => Ok(estimate),
        other => other,
    }
}

/// Extended generator `Γf(x)` of the risk process.
pub fn generator_apply_smooth<S: Smooth + ?Sized>(model: &RiskModel, f: &S, x: f64) -> Result<f64> {
    match *model {
        RiskModel::BrownianDrift { drift, volatility } => {
            Ok(0.5 * volatility * volatility * f.second(x) + drift * f.first(x))
        }
        RiskModel::CramerLundbergExp {
            premium,
            intensity,
            claim_rate: xi,
        } => {
            let jumps = expected_after_claim(f, xi, x)?;
            Ok(premium * f.first(x) + intensity * (jumps - f.value(x)))
        }
    }
}

/// `Γf(x)` for a plain closure, derivatives by finite differences.
pub fn generator_apply<F: Fn(f64) -> f64 + Sync>(model: &RiskModel, f: F, x: f64) -> Result<f64> {
    generator_apply_smooth(model, &NumericSmooth::new(f), x)
}

/// `∫₀^Z f(x − z) ξe^{−ξz} dz`, split at the breakpoints of `f`.
fn expected_after_claim<S: Smooth + ?Sized>(f: &S, xi: f64, x: f64) -> Result<f64> {
    let zmax = JUMP_TRUNCATION / xi;
    let breaks = f.breakpoints();
    let tol = generator_tolerance();
    let density = |z: f64| xi * (-xi * z).exp();
    if x >= 0.0 {
        if let Some(m) = f.lower_moment(xi) {
            let mut pts = vec![0.0];
            pts.extend(breaks.iter().map(|b| x - b).filter(|&z| z > 0.0 && z < x));
            pts.push(x);
            sort_dedup(&mut pts);
            let upper = if x > 0.0 {
                accept_near_converged(integrate_pieces(|z| f.value(x - z) * density(z), &pts, tol))?
            } else {
                0.0
            };
            return Ok(upper + xi * (-xi * x).exp() * m);
        }
    }
    let mut pts = vec![0.0, zmax];
    pts.extend(
        breaks
            .iter()
            .map(|b| x - b)
            .filter(|&z| z > 0.0 && z < zmax),
    );
    sort_dedup(&mut pts);
    accept_near_converged(integrate_pieces(|z| f.value(x - z) * density(z), &pts, tol))
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
}

/// `v_a` for the barrier strategy at `a` under Parisian ruin.
#[derive(Debug)]
pub struct RuinDelayValue {
    scale: ParisianScale,
    a: f64,
    slope_at_a: f64,
    lower_moment: OnceLock<Result<f64>>,
}

impl RuinDelayValue {
    pub fn new(
        model: RiskModel,
        q: f64,
        spec: ParisianSpec,
        policy: BarrierPolicy,
    ) -> Result<Self> {
        Self::from_scale(ParisianScale::new(model, q, spec)?, policy)
    }

    pub fn from_scale(scale: ParisianScale, policy: BarrierPolicy) -> Result<Self> {
        if !(scale.q() > 0.0) {
            return Err(invalid(format!("q must be positive, got {}", scale.q())));
        }
        let policy = BarrierPolicy::new(policy.a)?;
        let slope_at_a = scale.derivative(policy.a, 1);
        if !(slope_at_a > 0.0) || !slope_at_a.is_finite() {
            return Err(Error::InternalConsistency(format!(
                "V′({}) = {slope_at_a} is not positive",
                policy.a
            )));
        }
        Ok(Self {
            scale,
            a: policy.a,
            slope_at_a,
            lower_moment: OnceLock::new(),
        })
    }

    pub fn barrier(&self) -> f64 {
        self.a
    }

    pub fn scale(&self) -> &ParisianScale {
        &self.scale
    }

    /// `V′(a)`.
    pub fn slope_at_barrier(&self) -> f64 {
        self.slope_at_a
    }

    /// `v(a) = V(a)/V′(a)`.
    pub fn at_barrier(&self) -> f64 {
        self.scale.value(self.a) / self.slope_at_a
    }
}

impl Smooth for RuinDelayValue {
    fn value(&self, x: f64) -> f64 {
        if x <= self.a {
            self.scale.value(x) / self.slope_at_a
        } else {
            x - self.a + self.at_barrier()
        }
    }

    fn first(&self, x: f64) -> f64 {
        if x > self.a {
            1.0
        } else if x >= 0.0 {
            self.scale.derivative(x, 1) / self.slope_at_a
        } else {
            let h = 1e-5;
            differentiate(|y| self.value(y), x, DerivativeOrder::First, h).unwrap_or(f64::NAN)
        }
    }

    fn second(&self, x: f64) -> f64 {
        if x > self.a {
            0.0
        } else if x >= 0.0 {
            self.scale.derivative(x, 2) / self.slope_at_a
        } else {
            let h = 1e-4;
            differentiate(|y| self.value(y), x, DerivativeOrder::Second, h).unwrap_or(f64::NAN)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![0.0, self.a];
        if let RiskModel::CramerLundbergExp { premium, .. } = self.scale.model() {
            b.push(-premium * self.scale.zeta());
        }
        b
    }

    fn lower_moment(&self, rate: f64) -> Option<f64> {
        let RiskModel::CramerLundbergExp {
            premium,
            claim_rate,
            ..
        } = *self.scale.model()
        else {
            return None;
        };
        if rate != claim_rate {
            return None;
        }
        // V vanishes below −cζ: the grace period is too short to climb back.
        let reach = premium * self.scale.zeta();
        let m = self.lower_moment.get_or_init(|| {
            if reach == 0.0 {
                return Ok(0.0);
            }
            let tol = Tolerance::new(1e-12, 1e-11, 200_000).expect("valid tolerance");
            accept_near_converged(integrate_pieces(
                |y| self.scale.value(-y) * (-rate * y).exp(),
                &[0.0, reach],
                tol,
            ))
            .map(|v| v / self.slope_at_a)
        });
        m.as_ref().ok().copied()
    }
}

/// Expected discounted dividends under the barrier strategy at `a`.
pub fn value_ruin_delay(
    model: &RiskModel,
    q: f64,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    x: f64,
) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid(format!("x must be finite, got {x}")));
    }
    Ok(RuinDelayValue::new(*model, q, spec, policy)?
        .value(x)
        .max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierMethod {
    ClosedForm,
    Grid,
}

impl BarrierMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BarrierMethod::ClosedForm => "closed_form",
            BarrierMethod::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalBarrier {
    pub a_star: f64,
    pub v_second_at_a_star: f64,
    pub method: BarrierMethod,
}

/// Step of the fallback grid search.
pub const BARRIER_GRID_STEP: f64 = 1e-3;

/// Minimizer of `V′` over `[0, ∞)`.
pub fn optimal_barrier(model: &RiskModel, q: f64, spec: ParisianSpec) -> Result<f64> {
    Ok(optimal_barrier_report(model, q, spec)?.a_star)
}

pub fn optimal_barrier_report(
    model: &RiskModel,
    q: f64,
    spec: ParisianSpec,
) -> Result<OptimalBarrier> {
    if !(q > 0.0) {
        return Err(invalid(format!("q must be positive, got {q}")));
    }
    let scale = ParisianScale::new(*model, q, spec)?;
    Ok(minimize_slope(&scale))
}

pub(crate) fn minimize_slope(scale: &ParisianScale) -> OptimalBarrier {
    // V″ is increasing, so V′ has a unique minimizer: 0 if V″(0) ≥ 0, the
    // zero of V″ otherwise.
    let report = |a: f64, method| OptimalBarrier {
        a_star: a,
        v_second_at_a_star: scale.derivative(a, 2),
        method,
    };
    if scale.derivative(0.0, 2) >= 0.0 {
        return report(0.0, BarrierMethod::ClosedForm);
    }
    if let Some(a) = scale.inflection_point() {
        let size = scale.phi_q().powi(2) * (scale.phi_q() * a).exp();
        if a > 0.0 && scale.derivative(a, 2).abs() <= 1e-6 * size {
            return report(a, BarrierMethod::ClosedForm);
        }
    }
    report(grid_minimize_slope(scale), BarrierMethod::Grid)
}

fn grid_minimize_slope(scale: &ParisianScale) -> f64 {
    let mut hi = BARRIER_GRID_STEP;
    while scale.derivative(hi, 2) < 0.0 && hi < 1e6 {
        hi *= 2.0;
    }
    let n = (hi / BARRIER_GRID_STEP).ceil() as usize;
    let (mut best, mut best_v) = (0.0, scale.derivative(0.0, 1));
    for i in 1..=n {
        let x = i as f64 * BARRIER_GRID_STEP;
        let v = scale.derivative(x, 1);
        if v < best_v {
            best = x;
            best_v = v;
        }
    }
    let lo = (best - BARRIER_GRID_STEP).max(0.0);
    let up = best + BARRIER_GRID_STEP;
    let tol = Tolerance::new(1e-12, 1e-12, 10_000).expect("valid tolerance");
    find_root_increasing(|x| scale.derivative(x, 2), lo, up, tol).unwrap_or(best)
}

/// Accuracy targets for [`hjb_verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HjbTolerance {
    /// `|Γv − qv| ≤ equality` on `(0, a]`.
    pub equality: f64,
    /// `Γv − qv ≤ inequality` on `(a, ∞)`.
    pub inequality: f64,
    /// `v′ ≥ 1 − derivative`.
    pub derivative: f64,
}

impl Default for HjbTolerance {
    fn default() -> Self {
        Self {
            equality: 1e-6,
            inequality: 1e-8,
            derivative: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub grid: Vec<f64>,
    pub hjb_values: Vec<f64>,
    pub derivative_values: Vec<f64>,
    pub point_passed: Vec<bool>,
    pub max_violation: f64,
    pub passed: bool,
}

/// `n` points geometrically spaced on `(lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln();
    (1..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo * (r * i as f64 / n as f64).exp()
            }
        })
        .collect()
}

/// The default check grid, 200 points on `(0.01, a + 10]`.
pub fn default_verify_grid(a: f64) -> Vec<f64> {
    geometric_grid(0.01, a + 10.0, 200)
}

/// Evaluates `(Γv_a − qv_a)(x)` and `v_a′(x)` on `grid`.
pub fn hjb_verify(
    model: &RiskModel,
    q: f64,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    grid: &[f64],
    tol: HjbTolerance,
) -> Result<VerifyReport> {
    if grid.is_empty() {
        return Err(invalid("verification grid is empty"));
    }
    if let Some(x) = grid.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(invalid(format!("grid points must be positive, got {x}")));
    }
    let v = RuinDelayValue::new(*model, q, spec, policy)?;
    let a = v.barrier();
    let rows = grid
        .par_iter()
        .map(|&x| {
            let gen = generator_apply_smooth(model, &v, x)?;
            Ok((gen - q * v.value(x), v.first(x)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_violation: f64 = 0.0;
    let mut point_passed = Vec::with_capacity(grid.len());
    for (&x, &(h, d)) in grid.iter().zip(&rows) {
        let (hv, ok_h) = if x <= a {
            (h.abs(), h.abs() <= tol.equality)
        } else {
            (h.max(0.0), h <= tol.inequality)
        };
        let dv = (1.0 - d).max(0.0);
        max_violation = max_violation.max(hv).max(dv);
        point_passed.push(ok_h && d >= 1.0 - tol.derivative);
    }
    Ok(VerifyReport {
        grid: grid.to_vec(),
        hjb_values: rows.iter().map(|r| r.0).collect(),
        derivative_values: rows.iter().map(|r| r.1).collect(),
        passed: point_passed.iter().all(|&p| p),
        point_passed,
        max_violation,
    })
}

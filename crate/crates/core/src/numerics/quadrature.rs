use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::Tolerance;
use crate::error::{invalid, Error, Result};

// Nodes and weights of the 21-point Kronrod rule and its embedded 10-point
// Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const EVALS_PER_PANEL: usize = 21;

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Panel> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut values = [(0.0, 0.0); 10];
    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *slot = (f1, f2);
    }
    if !kron.is_finite() {
        return Err(Error::Evaluation(format!("integrand on [{lo}, {hi}]")));
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, (f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kron * half;
    let resabs = abs_sum * half.abs();
    let resasc = asc * half.abs();
    let mut error = ((kron - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel {
        lo,
        hi,
        value,
        error,
    })
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[lo, hi]`.
///
/// Panels are bisected in order of decreasing error estimate until the
/// summed estimate is below `max(abs_tol, rel_tol·|result|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64> {
    integrate_pieces(f, &[lo, hi], tol)
}

/// Like [`integrate`] over `[points[0], points[last]]`, with the interval
/// pre-split at every interior point (kinks, jumps, or peaks of `f`).
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Result<f64> {
    if points.len() < 2 {
        return Err(invalid("quadrature needs at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(invalid("quadrature limits must be finite"));
    }
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("quadrature limits must be nondecreasing"));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&f, w[0], w[1])?);
            evaluations += EVALS_PER_PANEL;
        }
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if error <= tol.abs_tol.max(tol.rel_tol * value.abs()) {
            return Ok(value);
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(0.0),
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        let exhausted = evaluations + 2 * EVALS_PER_PANEL > tol.max_iter;
        let too_narrow = mid <= worst.lo
            || mid >= worst.hi
            || (worst.hi - worst.lo) < 4.0 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs());
        if exhausted || too_narrow {
            return Err(Error::Convergence {
                estimate: value,
                error_estimate: error,
                evaluations,
            });
        }
        heap.push(kronrod(&f, worst.lo, mid)?);
        heap.push(kronrod(&f, mid, worst.hi)?);
        evaluations += 2 * EVALS_PER_PANEL;
    }
}

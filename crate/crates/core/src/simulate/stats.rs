use serde::{Deserialize, Serialize};

/// Result of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_effective: u64,
    /// Upper bound on the bias caused by stopping paths early.
    pub censoring_bias_bound: f64,
}

/// Running sums for pairs `(y, z)` plus a censoring total.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairMoments {
    pub n: u64,
    pub sy: f64,
    pub sz: f64,
    pub syy: f64,
    pub szz: f64,
    pub syz: f64,
    pub censored: f64,
}

impl PairMoments {
    pub fn push(&mut self, y: f64, z: f64, censored: f64) {
        self.n += 1;
        self.sy += y;
        self.sz += z;
        self.syy += y * y;
        self.szz += z * z;
        self.syz += y * z;
        self.censored += censored;
    }

    pub fn merge(&self, o: &PairMoments) -> PairMoments {
        PairMoments {
            n: self.n + o.n,
            sy: self.sy + o.sy,
            sz: self.sz + o.sz,
            syy: self.syy + o.syy,
            szz: self.szz + o.szz,
            syz: self.syz + o.syz,
            censored: self.censored + o.censored,
        }
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn mean_y(&self) -> f64 {
        self.sy / self.nf()
    }

    pub fn mean_z(&self) -> f64 {
        self.sz / self.nf()
    }

    /// Sample covariance matrix entries `(var y, var z, cov)`.
    pub fn covariance(&self) -> (f64, f64, f64) {
        let n = self.nf();
        if self.n < 2 {
            return (0.0, 0.0, 0.0);
        }
        let (my, mz) = (self.mean_y(), self.mean_z());
        let k = n / (n - 1.0);
        (
            ((self.syy / n - my * my) * k).max(0.0),
            ((self.szz / n - mz * mz) * k).max(0.0),
            (self.syz / n - my * mz) * k,
        )
    }

    /// Plain mean of `y`.
    pub fn estimate_y(&self) -> SimEstimate {
        let (vy, _, _) = self.covariance();
        SimEstimate {
            mean: self.mean_y(),
            std_error: (vy / self.nf()).sqrt(),
            n_effective: self.n,
            censoring_bias_bound: self.censored / self.nf(),
        }
    }

    /// Variance of the mean of `y + k·z`.
    pub fn var_of_mean_combination(&self, k: f64) -> f64 {
        let (vy, vz, c) = self.covariance();
        ((vy + k * k * vz + 2.0 * k * c) / self.nf()).max(0.0)
    }

    /// Renewal estimate `ȳ/(1 − z̄)` and its delta-method variance.
    pub fn renewal_ratio(&self) -> (f64, f64) {
        let den = 1.0 - self.mean_z();
        let r = self.mean_y() / den;
        // influence of one cycle: (y − r(1 − z)) / den
        let v = self.var_of_mean_combination(r) / (den * den);
        (r, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let mut p = PairMoments::default();
        for (y, z) in [(1.0, 0.5), (2.0, 0.1), (3.0, 0.3)] {
            p.push(y, z, 0.0);
        }
        let (vy, vz, c) = p.covariance();
        assert!((vy - 1.0).abs() < 1e-14);
        assert!((vz - 0.04).abs() < 1e-14);
        assert!((c - (-0.1)).abs() < 1e-14);
        let e = p.estimate_y();
        assert!((e.mean - 2.0).abs() < 1e-15);
        assert!((e.std_error - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
        let (r, _) = p.renewal_ratio();
        assert!((r - 2.0 / 0.7).abs() < 1e-14);
    }
}

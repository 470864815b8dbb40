//! Time-series statistics for correlated simulation output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Standard error of the mean from successive pairwise blocking. Each level
/// halves the series by averaging neighbours; the estimate is the largest
/// naive error over levels that still hold at least `min_blocks` blocks,
/// which is where the naive error plateaus for a correlated series.
pub fn blocked_standard_error(x: &[f64], min_blocks: usize) -> f64 {
    let min_blocks = min_blocks.max(2);
    if x.len() < 2 {
        return 0.0;
    }
    let mut cur = x.to_vec();
    let mut best = (variance(&cur) / cur.len() as f64).sqrt();
    while cur.len() / 2 >= min_blocks {
        cur = cur.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
        best = best.max((variance(&cur) / cur.len() as f64).sqrt());
    }
    best
}

pub const DEFAULT_MIN_BLOCKS: usize = 32;

/// Integrated autocorrelation time `1 + 2 sum rho(t)` with Sokal's
/// self-consistent window `W >= c tau`, in units of the sampling interval.
pub fn integrated_autocorrelation_time(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return 1.0;
    }
    let m = mean(x);
    let c0 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    const WINDOW: f64 = 5.0;
    let mut tau = 1.0;
    for t in 1..n / 2 {
        let ct = x[..n - t].iter().zip(&x[t..]).map(|(a, b)| (a - m) * (b - m)).sum::<f64>() / n as f64;
        tau += 2.0 * ct / c0;
        if t as f64 >= WINDOW * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Bias-corrected sample skewness `G1` and excess kurtosis `G2`. Both are
/// unbiased for Gaussian samples.
pub fn skewness_kurtosis(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.len() < 4 {
        return (0.0, 0.0);
    }
    let m = mean(x);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 == 0.0 {
        return (0.0, 0.0);
    }
    let g1 = m3 / m2.powf(1.5);
    let g2 = m4 / (m2 * m2) - 3.0;
    let big_g1 = g1 * (n * (n - 1.0)).sqrt() / (n - 2.0);
    let big_g2 = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
    (big_g1, big_g2)
}

/// Standard errors of `G1` and `G2` for `n` independent Gaussian samples.
pub fn skewness_kurtosis_se(n: usize) -> (f64, f64) {
    let n = n as f64;
    let ses = (6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0))).sqrt();
    let sek = 2.0 * ses * ((n * n - 1.0) / ((n - 3.0) * (n + 5.0))).sqrt();
    (ses, sek)
}

/// Mean of a series with its standard error and autocorrelation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub tau: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn of(x: &[f64]) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InsufficientSamples { have: x.len(), need: 2 });
        }
        let tau = integrated_autocorrelation_time(x);
        // blocking underestimates when blocks are shorter than the
        // correlation time, so take the larger of the two estimates
        let from_tau = (variance(x) * tau / x.len() as f64).sqrt();
        Ok(Estimate {
            mean: mean(x),
            std_error: blocked_standard_error(x, DEFAULT_MIN_BLOCKS).max(from_tau),
            tau,
            samples: x.len(),
        })
    }

    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Samples outside `[lo, hi)`.
    pub outside: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram { lo, hi, counts: vec![0; bins.max(1)], outside: 0 }
    }

    pub fn add(&mut self, v: f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        let k = ((v - self.lo) / w).floor();
        if k >= 0.0 && (k as usize) < self.counts.len() {
            self.counts[k as usize] += 1;
        } else {
            self.outside += 1;
        }
    }

    pub fn extend(&mut self, vs: &[f64]) {
        for &v in vs {
            self.add(v);
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (0..self.counts.len()).map(|k| self.lo + (k as f64 + 0.5) * w).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }
}

//! Descriptive statistics used by saturation detection and the ensembles.
//!
//! Estimator choices are fixed:
//!
//! - skewness is the biased moment estimator `g1 = m3 / m2^{3/2}` with
//!   central moments taken over `n` (no small-sample correction);
//! - percentiles interpolate linearly between closest ranks at position
//!   `q / 100 · (n − 1)` of the sorted sample;
//! - `R²` of a fit is `1 − SS_res / SS_tot`, and `0` when `SS_tot = 0`.

use alloc::vec::Vec;

/// Errors for inputs on which an estimator is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    /// Fewer samples than the estimator needs.
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples {
        /// Minimum sample count.
        needed: usize,
        /// Sample count supplied.
        got: usize,
    },
    /// Paired inputs of different length.
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    /// Zero variance where a spread is required.
    #[error("degenerate input: zero variance")]
    ZeroVariance,
}

/// Ordinary least-squares line `y = slope · x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegressionFit {
    /// Fitted slope.
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Coefficient of determination, in `[0, 1]`.
    pub r_squared: f64,
}

/// Median, 5th/95th percentiles and skewness of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleSummary {
    /// 50th percentile.
    pub median: f64,
    /// 5th percentile.
    pub p05: f64,
    /// 95th percentile.
    pub p95: f64,
    /// `g1` skewness; absent for fewer than three samples or zero variance.
    pub skewness: Option<f64>,
    /// Number of samples.
    pub count: usize,
}

impl SampleSummary {
    /// Summarizes a non-empty sample.
    pub fn from_samples(samples: &[f64]) -> Result<Self, StatsError> {
        if samples.is_empty() {
            return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(SampleSummary {
            median: percentile_sorted(&sorted, 50.0),
            p05: percentile_sorted(&sorted, 5.0),
            p95: percentile_sorted(&sorted, 95.0),
            skewness: skewness(samples).ok(),
            count: samples.len(),
        })
    }

    /// `(p95 − median) / (median − p05)`; infinite when the lower spread is 0.
    pub fn tail_ratio(&self) -> f64 {
        (self.p95 - self.median) / (self.median - self.p05)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: xs.len() });
    }
    Ok(())
}

/// Centered sums `(Sxx, Sxy, Syy)` and means.
fn co_moments(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64, f64) {
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    (mx, my, sxx, sxy, syy)
}

/// Least-squares fit of `ys` against `xs`.
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> Result<RegressionFit, StatsError> {
    check_pair(xs, ys)?;
    let (mx, my, sxx, sxy, syy) = co_moments(xs, ys);
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        0.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let e = y - (slope * x + intercept);
                e * e
            })
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(RegressionFit { slope, intercept, r_squared })
}

/// Sample skewness `g1 = m3 / m2^{3/2}`.
pub fn skewness(samples: &[f64]) -> Result<f64, StatsError> {
    if samples.len() < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, got: samples.len() });
    }
    let n = samples.len() as f64;
    let mu = mean(samples);
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in samples {
        let d = x - mu;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    // Relative cutoff so that constant samples with rounding noise in the
    // mean still count as zero variance.
    if m2 <= f64::EPSILON * f64::EPSILON * mu * mu || m2 == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(m3 / (m2 * libm::sqrt(m2)))
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = (q / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Percentile `q ∈ [0, 100]` with linear interpolation between closest ranks.
pub fn percentile(samples: &[f64], q: f64) -> Result<f64, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&sorted, q))
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_pair(xs, ys)?;
    let (_, _, sxx, sxy, syy) = co_moments(xs, ys);
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(samples: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| samples[a].total_cmp(&samples[b]));
    let mut out = alloc::vec![0.0; samples.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && samples[order[j + 1]] == samples[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson correlation of tie-averaged ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_pair(xs, ys)?;
    pearson(&ranks(xs), &ranks(ys))
}

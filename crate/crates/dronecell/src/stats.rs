//! Statistical tests used to compare Monte Carlo samples against analytic
//! laws: the Kolmogorov-Smirnov sup distance (atom-aware) and a Pearson
//! chi-square test of angular uniformity.

use crate::special::gamma_q;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct StatsError(pub String);

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "statistics error: {}", self.0)
    }
}

impl std::error::Error for StatsError {}

/// A cumulative distribution function that may carry atoms. `cdf` is the
/// right-continuous value `P[X <= x]`; `cdf_left` is the left limit
/// `P[X < x]`. The two differ exactly at atoms.
pub trait CdfEval {
    fn cdf(&self, x: f64) -> f64;

    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

/// Plain continuous cdf given as a closure.
pub struct FnCdf<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> CdfEval for FnCdf<F> {
    fn cdf(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Kolmogorov-Smirnov statistic: the sup distance between the empirical cdf
/// of `samples` and the analytic `cdf`.
///
/// At each sorted sample the empirical cdf jumps from `i/n` to `(i+1)/n`;
/// comparing the analytic right value against the post-jump level and the
/// analytic left limit against the pre-jump level bounds the sup exactly,
/// including at atoms shared by both distributions.
pub fn ks_statistic<C: CdfEval + ?Sized>(samples: &[f64], cdf: &C) -> Result<f64, StatsError> {
    if samples.len() < 100 {
        return Err(StatsError(format!(
            "KS needs at least 100 samples, got {}",
            samples.len()
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    let mut i = 0usize;
    while i < sorted.len() {
        let x = sorted[i];
        // Group tied samples so the empirical jump at an atom is one step.
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let above = j as f64 / n;
        sup = sup.max((cdf.cdf_left(x) - below).abs());
        sup = sup.max((cdf.cdf(x) - above).abs());
        i = j;
    }
    Ok(sup)
}

/// Pearson chi-square test that `angles` are uniform on `[0, 2pi)`. Returns
/// the tail probability under the chi-square law with `bins - 1` degrees of
/// freedom.
pub fn chi_square_uniformity(angles: &[f64], bins: usize) -> Result<f64, StatsError> {
    if bins < 10 {
        return Err(StatsError(format!("need at least 10 bins, got {bins}")));
    }
    if angles.len() < 50 * bins {
        return Err(StatsError(format!(
            "need at least {} samples for {bins} bins, got {}",
            50 * bins,
            angles.len()
        )));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut counts = vec![0u64; bins];
    for &a in angles {
        let mut w = a.rem_euclid(two_pi) / two_pi;
        if w >= 1.0 {
            w = 0.0;
        }
        counts[(w * bins as f64) as usize] += 1;
    }
    let expect = angles.len() as f64 / bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    Ok(gamma_q((bins - 1) as f64 / 2.0, chi2 / 2.0))
}

/// Sample mean and variance (denominator `n`), plus the dispersion ratio
/// variance/mean used by the Poisson dispersion check.
pub fn dispersion(counts: &[u64]) -> (f64, f64, f64) {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
    (mean, var, var / mean)
}

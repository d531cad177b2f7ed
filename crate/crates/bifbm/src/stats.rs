//! Small statistical toolbox: log-log regression, two-sample
//! Kolmogorov-Smirnov test, Monte Carlo summaries.

use serde::{Deserialize, Serialize};

use crate::error::{BifbmError, Result};

/// Least-squares line through log-scale samples, the common currency of
/// every exponent check in the crate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub abscissae: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl ScalingFit {
    /// Fit `ordinates ~ slope * abscissae + intercept` on already
    /// log-transformed samples. Abscissae must be strictly monotone.
    pub fn fit(abscissae: Vec<f64>, ordinates: Vec<f64>) -> Result<Self> {
        let n = abscissae.len();
        if n < 2 || ordinates.len() != n {
            return Err(BifbmError::DimensionMismatch(
                "regression needs >= 2 paired samples".into(),
            ));
        }
        let increasing = abscissae.windows(2).all(|w| w[0] < w[1]);
        let decreasing = abscissae.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(BifbmError::InvalidParams(
                "abscissae must be strictly monotone".into(),
            ));
        }
        let nf = n as f64;
        let mx = abscissae.iter().sum::<f64>() / nf;
        let my = ordinates.iter().sum::<f64>() / nf;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut syy = 0.0;
        for (x, y) in abscissae.iter().zip(&ordinates) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
            syy += (y - my) * (y - my);
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r_squared = if syy == 0.0 {
            1.0
        } else {
            ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0)
        };
        Ok(Self {
            abscissae,
            ordinates,
            slope,
            intercept,
            r_squared,
        })
    }
}

/// Log-log fit of positive raw samples.
pub fn fit_log_log(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(BifbmError::InvalidParams(
            "log-log fit needs positive samples".into(),
        ));
    }
    ScalingFit::fit(
        xs.iter().map(|x| x.ln()).collect(),
        ys.iter().map(|y| y.ln()).collect(),
    )
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 8 || b.len() < 8 {
        return Err(BifbmError::InvalidParams(
            "KS test needs at least 8 samples per side".into(),
        ));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len(), sb.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = sa[i].min(sb[j]);
        while i < na && sa[i] <= x {
            i += 1;
        }
        while j < nb && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok((d, ks_survival(lambda)))
}

/// Kolmogorov distribution tail `Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}`.
fn ks_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

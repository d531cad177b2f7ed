//! Spectral density of the stationary Lamperti transform,
//! `f(lambda) = (1/pi) int_0^inf r(t) cos(t lambda) dt`,
//! and the truncated spectral masses derived from it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::lamperti_cov;
use crate::error::{BifbmError, Result};
use crate::params::BifBmParams;

/// 8-point Gauss-Legendre rule on [-1, 1].
const GL8_X: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_W: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// 8-point Gauss-Legendre rule on [a, b].
fn gl8_panel(g: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut panel = 0.0;
    for (x, w) in GL8_X.iter().zip(&GL8_W) {
        panel += w * g(mid + half * x);
    }
    panel * half
}

/// Composite Gauss-Legendre integral of `g` over [0, upper] with panels of
/// width at most `h`. The first panel is subdivided geometrically toward 0,
/// where the integrands of this module have a fractional-power kink that
/// would otherwise cap the convergence rate at `h^{1 + 2HK}`.
fn composite_gl(g: impl Fn(f64) -> f64, upper: f64, h: f64) -> f64 {
    let n_panels = (upper / h).ceil().max(1.0) as usize;
    let width = upper / n_panels as f64;
    let mut acc = 0.0;
    // graded first panel: [0, w 2^-50], then dyadic segments up to [w/2, w]
    let mut b = width * 0.5f64.powi(50);
    acc += gl8_panel(&g, 0.0, b);
    while b < width {
        let next = (2.0 * b).min(width);
        acc += gl8_panel(&g, b, next);
        b = next;
    }
    for p in 1..n_panels {
        let a = p as f64 * width;
        acc += gl8_panel(&g, a, a + width);
    }
    acc
}

fn truncation_point(p: &BifBmParams, tol: f64) -> f64 {
    (20.0f64).max((1.0 / tol).ln() / p.beta_decay())
}

/// Spectral density `f(lambda)` by oscillation-aware quadrature.
///
/// The integrand is integrated per half-period of the cosine (panels of
/// width `min(0.5, pi/|lambda|)`), truncating at `T = max(20, ln(1/tol)/beta)`
/// where the exponential bound on r keeps the neglected tail below `tol`.
/// The panel width is halved until two successive results agree to `tol`.
pub fn spectral_density(lambda: f64, p: &BifBmParams, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(BifbmError::InvalidParams("tol must be positive".into()));
    }
    let lam = lambda.abs();
    let upper = truncation_point(p, tol);
    let g = |t: f64| lamperti_cov(t, p) * (t * lam).cos();
    let mut h = (0.5f64).min(std::f64::consts::PI / lam.max(1e-300));
    let mut prev = composite_gl(g, upper, h);
    for _ in 0..5 {
        h *= 0.5;
        let cur = composite_gl(g, upper, h);
        if (cur - prev).abs() <= tol {
            let f = cur / std::f64::consts::PI;
            if f <= 0.0 {
                return Err(BifbmError::QuadratureNonConvergence { tol });
            }
            return Ok(f);
        }
        prev = cur;
    }
    Err(BifbmError::QuadratureNonConvergence { tol })
}

/// `spectral_density` over many frequencies, in parallel.
pub fn spectral_density_batch(lambdas: &[f64], p: &BifBmParams, tol: f64) -> Result<Vec<f64>> {
    lambdas
        .par_iter()
        .map(|&lam| spectral_density(lam, p, tol))
        .collect()
}

/// `int_{|lambda| < u} f(lambda) d lambda`. The total spectral mass is
/// `r(0) = 1`, so the tail mass above `u` is one minus this.
pub fn spectral_mass_below(u: f64, p: &BifBmParams, tol: f64) -> Result<f64> {
    let vals = std::cell::RefCell::new(Ok(()));
    let mass = 2.0
        * composite_gl(
            |lam| match spectral_density(lam, p, tol) {
                Ok(f) => f,
                Err(e) => {
                    *vals.borrow_mut() = Err(e);
                    0.0
                }
            },
            u,
            0.25,
        );
    vals.into_inner()?;
    Ok(mass)
}

/// `int_{|lambda| < u} lambda^2 f(lambda) d lambda`.
pub fn spectral_second_moment_below(u: f64, p: &BifBmParams, tol: f64) -> Result<f64> {
    let status = std::cell::RefCell::new(Ok(()));
    let m = 2.0
        * composite_gl(
            |lam| match spectral_density(lam, p, tol) {
                Ok(f) => lam * lam * f,
                Err(e) => {
                    *status.borrow_mut() = Err(e);
                    0.0
                }
            },
            u,
            0.25,
        );
    status.into_inner()?;
    Ok(m)
}

/// Tabulated spectral density with the decay rate of r attached.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralTable {
    lambdas: Vec<f64>,
    values: Vec<f64>,
    beta_decay: f64,
}

impl SpectralTable {
    pub fn new(lambdas: Vec<f64>, values: Vec<f64>, p: &BifBmParams) -> Result<Self> {
        if lambdas.len() != values.len() || lambdas.is_empty() {
            return Err(BifbmError::DimensionMismatch(
                "lambdas and values must be nonempty and equal length".into(),
            ));
        }
        if lambdas.windows(2).any(|w| w[0] >= w[1]) || lambdas[0] <= 0.0 {
            return Err(BifbmError::InvalidParams(
                "lambdas must be increasing and positive".into(),
            ));
        }
        if values.iter().any(|&v| v <= 0.0) {
            return Err(BifbmError::InvalidParams(
                "spectral values must be positive".into(),
            ));
        }
        Ok(Self {
            lambdas,
            values,
            beta_decay: p.beta_decay(),
        })
    }

    /// Evaluate f on the given frequencies.
    pub fn build(lambdas: Vec<f64>, p: &BifBmParams, tol: f64) -> Result<Self> {
        let values = spectral_density_batch(&lambdas, p, tol)?;
        Self::new(lambdas, values, p)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn beta_decay(&self) -> f64 {
        self.beta_decay
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::fit_log_log;
    use approx::assert_relative_eq;

    fn p(h: f64, k: f64) -> BifBmParams {
        BifBmParams::scalar(h, k).unwrap()
    }

    #[test]
    fn evenness() {
        let pp = p(0.6, 0.7);
        let a = spectral_density(3.7, &pp, 1e-10).unwrap();
        let b = spectral_density(-3.7, &pp, 1e-10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn total_mass_is_one() {
        // int_R f = r(0) = 1: finite part plus the power-law tail
        // 2 int_u^inf f ~ 2 f(u) u / (2HK)
        let pp = p(0.5, 0.8);
        let u = 80.0;
        let below = spectral_mass_below(u, &pp, 1e-10).unwrap();
        let tail = 2.0 * spectral_density(u, &pp, 1e-10).unwrap() * u / (2.0 * pp.hk());
        let total = below + tail;
        assert!((total - 1.0).abs() < 5e-3, "total mass was {total}");
        assert!(below < 1.0);
    }

    #[test]
    fn tail_slope_matches_power_law() {
        // log-log slope of f over [1e2, 1e4] approaches -(1 + 2HK)
        let pp = p(0.5, 0.5);
        let lambdas: Vec<f64> = (0..13)
            .map(|i| 100.0 * 10f64.powf(i as f64 / 6.0))
            .collect();
        let table = SpectralTable::build(lambdas.clone(), &pp, 1e-12).unwrap();
        let fit = fit_log_log(&lambdas, table.values()).unwrap();
        assert!(
            (fit.slope + (1.0 + 2.0 * pp.hk())).abs() < 0.05,
            "slope {} vs expected {}",
            fit.slope,
            -(1.0 + 2.0 * pp.hk())
        );
    }

    #[test]
    fn truncated_masses_obey_lemma_bounds() {
        let pp = p(0.6, 0.6);
        let hk = pp.hk();
        // fit the constants at u = 8, then check the bound shape up to u = 64
        let tail8 = 1.0 - spectral_mass_below(8.0, &pp, 1e-10).unwrap();
        let c_tail = tail8 / 8f64.powf(-2.0 * hk) * 1.1;
        let m8 = spectral_second_moment_below(8.0, &pp, 1e-10).unwrap();
        let c_mom = m8 / 8f64.powf(2.0 * (1.0 - hk)) * 1.1;
        for &u in &[16.0, 32.0, 64.0] {
            let tail = 1.0 - spectral_mass_below(u, &pp, 1e-10).unwrap();
            assert!(tail <= c_tail * u.powf(-2.0 * hk), "tail bound failed at u={u}");
            let m = spectral_second_moment_below(u, &pp, 1e-10).unwrap();
            assert!(m <= c_mom * u.powf(2.0 * (1.0 - hk)), "moment bound failed at u={u}");
        }
    }

    #[test]
    fn table_invariants() {
        let pp = p(0.5, 1.0);
        assert_relative_eq!(pp.beta_decay(), 0.5, epsilon = 1e-15);
        let t = SpectralTable::build(vec![0.5, 1.0, 2.0], &pp, 1e-9).unwrap();
        assert_eq!(t.values().len(), 3);
        assert!(t.values().iter().all(|&v| v > 0.0));
        assert!(SpectralTable::new(vec![1.0, 1.0], vec![0.1, 0.1], &pp).is_err());
        assert!(SpectralTable::new(vec![1.0, 2.0], vec![0.1, -0.1], &pp).is_err());
    }
}

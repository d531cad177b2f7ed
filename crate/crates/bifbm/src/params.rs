//! Hurst-type exponent data and sampling grids.

use serde::{Deserialize, Serialize};

use crate::error::{BifbmError, Result};

/// Exponents of a bifractional Brownian motion in `R^d`.
///
/// `h` lies in (0, 1), `k` in (0, 1], and the composite self-similarity
/// index `hk = h * k` always lies in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifBmParams {
    h: f64,
    k: f64,
    d: usize,
}

impl BifBmParams {
    pub fn new(h: f64, k: f64, d: usize) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(BifbmError::InvalidParams(format!(
                "h = {h} must lie in (0, 1)"
            )));
        }
        if !(k > 0.0 && k <= 1.0) {
            return Err(BifbmError::InvalidParams(format!(
                "k = {k} must lie in (0, 1]"
            )));
        }
        if d == 0 {
            return Err(BifbmError::InvalidParams("d must be >= 1".into()));
        }
        Ok(Self { h, k, d })
    }

    /// One-dimensional process with the given exponents.
    pub fn scalar(h: f64, k: f64) -> Result<Self> {
        Self::new(h, k, 1)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Self-similarity index HK.
    pub fn hk(&self) -> f64 {
        self.h * self.k
    }

    /// Exponential decay rate of the Lamperti covariance. Expanding
    /// `r(tau) = 2^{-K} e^{HK tau} [(1 + e^{-2H tau})^K - (1 - e^{-tau})^{2HK}]`
    /// for large tau gives leading terms `K e^{-H(2-K) tau}` and
    /// `2HK e^{-(1-HK) tau}`, so the safe lower bound on the decay is
    /// `beta = min{H(2 - K), 1 - HK, HK}`.
    pub fn beta_decay(&self) -> f64 {
        (self.h * (2.0 - self.k))
            .min(1.0 - self.hk())
            .min(self.hk())
    }

    /// True when the local time of the d-dimensional process exists
    /// (`HK * d < 1`).
    pub fn local_time_exists(&self) -> bool {
        self.hk() * (self.d as f64) < 1.0
    }
}

/// Exponent matrices of an (N, d) bifractional Brownian sheet.
///
/// Row `i` holds the per-axis exponents of component `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetParams {
    hbar: Vec<Vec<f64>>,
    kbar: Vec<Vec<f64>>,
    n_params: usize,
}

impl SheetParams {
    /// `hbar` and `kbar` are d x N matrices (one row per component).
    pub fn new(hbar: Vec<Vec<f64>>, kbar: Vec<Vec<f64>>) -> Result<Self> {
        if hbar.is_empty() || hbar.len() != kbar.len() {
            return Err(BifbmError::InvalidParams(
                "hbar and kbar must be nonempty with equal row counts".into(),
            ));
        }
        let n_params = hbar[0].len();
        if n_params == 0 {
            return Err(BifbmError::InvalidParams("N must be >= 1".into()));
        }
        for (hr, kr) in hbar.iter().zip(&kbar) {
            if hr.len() != n_params || kr.len() != n_params {
                return Err(BifbmError::InvalidParams(
                    "ragged exponent matrix".into(),
                ));
            }
            for (&h, &k) in hr.iter().zip(kr) {
                if !(h > 0.0 && h < 1.0) {
                    return Err(BifbmError::InvalidParams(format!(
                        "H entry {h} must lie in (0, 1)"
                    )));
                }
                if !(k > 0.0 && k <= 1.0) {
                    return Err(BifbmError::InvalidParams(format!(
                        "K entry {k} must lie in (0, 1]"
                    )));
                }
            }
        }
        Ok(Self {
            hbar,
            kbar,
            n_params,
        })
    }

    /// Sheet whose components all share the same per-axis exponents.
    pub fn isotropic(h: &[f64], k: &[f64], d: usize) -> Result<Self> {
        Self::new(vec![h.to_vec(); d], vec![k.to_vec(); d])
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn d(&self) -> usize {
        self.hbar.len()
    }

    pub fn h(&self, component: usize, axis: usize) -> f64 {
        self.hbar[component][axis]
    }

    pub fn k(&self, component: usize, axis: usize) -> f64 {
        self.kbar[component][axis]
    }

    /// Scalar parameters of component `i` along `axis`.
    pub fn axis_params(&self, component: usize, axis: usize) -> BifBmParams {
        BifBmParams {
            h: self.hbar[component][axis],
            k: self.kbar[component][axis],
            d: 1,
        }
    }

    /// `H*_j = max_i H_{i,j}`.
    pub fn h_star(&self, axis: usize) -> f64 {
        self.hbar.iter().map(|r| r[axis]).fold(f64::MIN, f64::max)
    }

    /// `K*_j = max_i K_{i,j}`.
    pub fn k_star(&self, axis: usize) -> f64 {
        self.kbar.iter().map(|r| r[axis]).fold(f64::MIN, f64::max)
    }

    /// `sum_j 1/(H*_j K*_j)`, the quantity controlling L^2 existence of the
    /// sheet local time.
    pub fn existence_sum(&self) -> f64 {
        (0..self.n_params)
            .map(|j| 1.0 / (self.h_star(j) * self.k_star(j)))
            .sum()
    }
}

/// Strictly increasing sequence of nonnegative time points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(BifbmError::InvalidGrid("grid must be nonempty".into()));
        }
        if points[0] < 0.0 {
            return Err(BifbmError::InvalidGrid("grid points must be >= 0".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BifbmError::InvalidGrid(
                "grid points must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// `n` equally spaced points from `t0` to `t1` inclusive.
    pub fn uniform(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if n < 1 || t1 <= t0 {
            return Err(BifbmError::InvalidGrid(format!(
                "uniform grid needs n >= 1 and t1 > t0 (got n = {n}, [{t0}, {t1}])"
            )));
        }
        if n == 1 {
            return Self::new(vec![t0]);
        }
        let step = (t1 - t0) / (n - 1) as f64;
        Self::new((0..n).map(|i| t0 + step * i as f64).collect())
    }

    /// `n` points geometrically spaced from `t0 > 0` to `t1`, i.e. uniform in
    /// log time. This is the natural grid for the Lamperti samplers.
    pub fn log_uniform(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if t0 <= 0.0 || t1 <= t0 || n < 2 {
            return Err(BifbmError::InvalidGrid(format!(
                "log-uniform grid needs 0 < t0 < t1 and n >= 2 (got n = {n}, [{t0}, {t1}])"
            )));
        }
        let (u0, u1) = (t0.ln(), t1.ln());
        let step = (u1 - u0) / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|i| (u0 + step * i as f64).exp()).collect();
        // endpoints exactly, to keep interval arithmetic predictable
        pts[0] = t0;
        pts[n - 1] = t1;
        Self::new(pts)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        *self.points.last().unwrap()
    }

    pub fn starts_at_zero(&self) -> bool {
        self.points[0] == 0.0
    }

    /// Largest gap between consecutive points (0 for a single point).
    pub fn max_spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// True when the log-spacings agree to relative tolerance `rel_tol`.
    pub fn is_log_uniform(&self, rel_tol: f64) -> bool {
        if self.points[0] <= 0.0 || self.len() < 2 {
            return false;
        }
        let logs: Vec<f64> = self.points.iter().map(|t| t.ln()).collect();
        let d0 = logs[1] - logs[0];
        logs.windows(2).all(|w| ((w[1] - w[0]) - d0).abs() <= rel_tol * d0)
    }
}

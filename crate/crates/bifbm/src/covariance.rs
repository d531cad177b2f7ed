//! Closed-form kernels of the bifractional family and exact Gaussian
//! conditioning on grids.

use faer::linalg::solvers::Llt;
use faer::{Mat, Side};

use crate::error::{BifbmError, Result};
use crate::params::{BifBmParams, SheetParams, TimeGrid};

/// Diagonal jitter ladder used whenever a Gram matrix fails to factorize.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];

/// Covariance of bi-fBm,
/// `R(s, t) = 2^{-K} [ (t^{2H} + s^{2H})^K - |t - s|^{2HK} ]`.
pub fn cov_bifbm(s: f64, t: f64, p: &BifBmParams) -> f64 {
    let (h, k) = (p.h(), p.k());
    let sum = t.powf(2.0 * h) + s.powf(2.0 * h);
    0.5f64.powf(k) * (sum.powf(k) - (t - s).abs().powf(2.0 * h * k))
}

/// Covariance of component `i` of a bifractional Brownian sheet: the product
/// over axes of the scalar kernel with that component's axis exponents.
pub fn cov_sheet(s: &[f64], t: &[f64], i: usize, p: &SheetParams) -> Result<f64> {
    let n = p.n_params();
    if s.len() != n || t.len() != n {
        return Err(BifbmError::DimensionMismatch(format!(
            "expected {}-vectors, got lengths {} and {}",
            n,
            s.len(),
            t.len()
        )));
    }
    if i >= p.d() {
        return Err(BifbmError::DimensionMismatch(format!(
            "component index {i} out of range for d = {}",
            p.d()
        )));
    }
    Ok((0..n)
        .map(|j| cov_bifbm(s[j], t[j], &p.axis_params(i, j)))
        .product())
}

/// `E[(B(t) - B(s))^2] = t^{2HK} + s^{2HK} - 2 R(s, t)`.
pub fn increment_variance(s: f64, t: f64, p: &BifBmParams) -> f64 {
    let hk2 = 2.0 * p.hk();
    let v = t.powf(hk2) + s.powf(hk2) - 2.0 * cov_bifbm(s, t, p);
    // exact value is nonnegative; clamp roundoff
    v.max(0.0)
}

/// Stationary covariance of the Lamperti transform `Y(u) = e^{-HK u} B(e^u)`,
///
/// `r(tau) = 2^{-K} e^{-HK tau} [ (e^{2H tau} + 1)^K - |e^tau - 1|^{2HK} ]`.
///
/// Evaluated in the algebraically equivalent form
/// `2^{-K} e^{HK|tau|} [ (1 + e^{-2H|tau|})^K - (1 - e^{-|tau|})^{2HK} ]`
/// with both bracket terms computed through `ln_1p`/`exp_m1`. The two terms
/// have opposite signs relative to 1, so their difference never cancels and
/// the value stays accurate out to where r has decayed below 1e-300.
pub fn lamperti_cov(tau: f64, p: &BifBmParams) -> f64 {
    let t = tau.abs();
    let (h, k) = (p.h(), p.k());
    let hk = p.hk();
    // a = (1 + e^{-2Ht})^K - 1  >= 0
    let a = (k * (-2.0 * h * t).exp().ln_1p()).exp_m1();
    // b = (1 - e^{-t})^{2HK} - 1 <= 0
    let b = if t == 0.0 {
        -1.0
    } else {
        (2.0 * hk * (-(-t).exp()).ln_1p()).exp_m1()
    };
    0.5f64.powf(k) * (hk * t).exp() * (a - b)
}

/// `Q_{H,K}(z) = R(1, z) / z^{HK}` on [0, 1], with `Q(0) = 0`.
pub fn q_function(z: f64, h: f64, k: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let p = BifBmParams::scalar(h, k).expect("valid exponents");
    cov_bifbm(1.0, z, &p) / z.powf(h * k)
}

/// Symmetric positive semi-definite Gram matrix of a kernel on a grid,
/// together with its lower-triangular Cholesky factor.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    entries: Mat<f64>,
    jitter_applied: f64,
    factor: Option<Mat<f64>>,
}

impl CovarianceMatrix {
    /// Build from an explicit symmetric kernel and factorize with the jitter
    /// ladder. Fails loudly if the largest jitter does not help.
    pub fn from_kernel(points: &[f64], kernel: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(BifbmError::InvalidGrid("grid must be nonempty".into()));
        }
        let entries = Mat::from_fn(n, n, |i, j| {
            if i <= j {
                kernel(points[i], points[j])
            } else {
                kernel(points[j], points[i])
            }
        });
        Self::factorize(entries)
    }

    fn factorize(entries: Mat<f64>) -> Result<Self> {
        let n = entries.nrows();
        for &jitter in &JITTER_LADDER {
            let mut m = entries.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            if let Ok(llt) = m.llt(Side::Lower) {
                let factor = llt.L().to_owned();
                return Ok(Self {
                    entries,
                    jitter_applied: jitter,
                    factor: Some(factor),
                });
            }
        }
        Err(BifbmError::NotPositiveSemiDefinite {
            max_jitter: *JITTER_LADDER.last().unwrap(),
        })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat<f64> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn jitter_applied(&self) -> f64 {
        self.jitter_applied
    }

    /// Lower-triangular factor L with `L L^T = entries + jitter I`.
    pub fn factor(&self) -> &Mat<f64> {
        self.factor.as_ref().expect("factor is computed at construction")
    }
}

/// Gram matrix of the bi-fBm kernel on a grid.
pub fn cov_matrix(grid: &TimeGrid, p: &BifBmParams) -> Result<CovarianceMatrix> {
    let p = *p;
    CovarianceMatrix::from_kernel(grid.points(), move |s, t| cov_bifbm(s, t, &p))
}

/// Exact conditional variance
/// `Var(B(t_target) | B(t_s), s in conditioners)` by Schur complement.
pub fn conditional_variance(
    target: usize,
    conditioners: &[usize],
    cov: &CovarianceMatrix,
) -> Result<f64> {
    let n = cov.n();
    if target >= n || conditioners.iter().any(|&c| c >= n) {
        return Err(BifbmError::DimensionMismatch(
            "index out of range for covariance matrix".into(),
        ));
    }
    if conditioners.contains(&target) {
        return Err(BifbmError::InvalidParams(
            "target must not be in the conditioning set".into(),
        ));
    }
    let var_t = cov.entry(target, target);
    if conditioners.is_empty() {
        return Ok(var_t);
    }
    let m = conditioners.len();
    let cross = Mat::from_fn(m, 1, |i, _| cov.entry(conditioners[i], target));

    for &jitter in &JITTER_LADDER {
        let sigma_cc = Mat::from_fn(m, m, |i, j| {
            cov.entry(conditioners[i], conditioners[j]) + if i == j { jitter } else { 0.0 }
        });
        if let Ok(llt) = Llt::new(sigma_cc.as_ref(), Side::Lower) {
            use faer::linalg::solvers::Solve;
            let x = llt.solve(&cross);
            let mut quad = 0.0;
            for i in 0..m {
                quad += cross[(i, 0)] * x[(i, 0)];
            }
            return Ok((var_t - quad).max(0.0));
        }
    }
    Err(BifbmError::SingularConditioners)
}

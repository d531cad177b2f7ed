//! Sample-path generation: exact Cholesky sampling, Lamperti-transform
//! samplers (exact Toeplitz and circulant embedding), the spectral
//! approximation, and Kronecker-factorized sheet sampling.

use faer::Mat;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::covariance::{cov_bifbm, cov_matrix, lamperti_cov, CovarianceMatrix};
use crate::error::{BifbmError, Result};
use crate::params::{BifBmParams, SheetParams, TimeGrid};
use crate::rng::{fill_standard_normal, path_rng};
use crate::spectral::spectral_density_batch;

/// Default cap on the total number of product-grid points for sheets.
pub const PRODUCT_GRID_CAP: usize = 1 << 16;

/// Tolerated relative magnitude of negative embedding eigenvalues (treated
/// as roundoff zeros); anything below is a hard error.
const EMBEDDING_EIG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMethod {
    Cholesky,
    Lamperti,
    Spectral,
}

impl SampleMethod {
    pub fn code(&self) -> u8 {
        match self {
            SampleMethod::Cholesky => 0,
            SampleMethod::Lamperti => 1,
            SampleMethod::Spectral => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(SampleMethod::Cholesky),
            1 => Some(SampleMethod::Lamperti),
            2 => Some(SampleMethod::Spectral),
            _ => None,
        }
    }
}

/// Realized Gaussian values on a grid, one column per component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplePath {
    grid: TimeGrid,
    /// `components[c][i]` is component `c` at grid point `i`.
    components: Vec<Vec<f64>>,
    method: SampleMethod,
    seed: u64,
    params: BifBmParams,
}

impl SamplePath {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn d(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn value(&self, i: usize, c: usize) -> f64 {
        self.components[c][i]
    }

    pub fn method(&self) -> SampleMethod {
        self.method
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &BifBmParams {
        &self.params
    }

    /// Build a path from explicit component columns (used by estimator tests
    /// that need synthetic inputs such as constant or linear paths).
    pub fn from_components(
        grid: TimeGrid,
        components: Vec<Vec<f64>>,
        params: BifBmParams,
    ) -> Result<Self> {
        if components.is_empty() || components.iter().any(|c| c.len() != grid.len()) {
            return Err(BifbmError::DimensionMismatch(
                "component length must match grid length".into(),
            ));
        }
        Ok(Self {
            grid,
            components,
            method: SampleMethod::Cholesky,
            seed: 0,
            params,
        })
    }

    /// Reassemble a path with full provenance (used by deserialization).
    pub fn from_parts(
        grid: TimeGrid,
        components: Vec<Vec<f64>>,
        method: SampleMethod,
        seed: u64,
        params: BifBmParams,
    ) -> Result<Self> {
        let mut p = Self::from_components(grid, components, params)?;
        p.method = method;
        p.seed = seed;
        Ok(p)
    }
}

/// Draw a matrix of standard normals where column `c` comes from the
/// deterministic stream of (path, component) = `col_key(c)`.
fn gaussian_matrix(n: usize, cols: usize, seed: u64, col_key: impl Fn(usize) -> (u64, u64)) -> Mat<f64> {
    let mut z = Mat::<f64>::zeros(n, cols);
    let mut buf = vec![0.0; n];
    for c in 0..cols {
        let (path, comp) = col_key(c);
        fill_standard_normal(&mut path_rng(seed, path, comp), &mut buf);
        for i in 0..n {
            z[(i, c)] = buf[i];
        }
    }
    z
}

fn split_columns(
    y: &Mat<f64>,
    grid: &TimeGrid,
    leading_zero: bool,
    d: usize,
    n_paths: usize,
    method: SampleMethod,
    seed: u64,
    p: &BifBmParams,
) -> Vec<SamplePath> {
    let n_sub = y.nrows();
    (0..n_paths)
        .map(|ipath| {
            let components = (0..d)
                .map(|c| {
                    let col = ipath * d + c;
                    let mut v = Vec::with_capacity(grid.len());
                    if leading_zero {
                        v.push(0.0);
                    }
                    for i in 0..n_sub {
                        v.push(y[(i, col)]);
                    }
                    v
                })
                .collect();
            SamplePath {
                grid: grid.clone(),
                components,
                method,
                seed,
                params: *p,
            }
        })
        .collect()
}

/// Exact sampling: each component is `L xi` with `L` the Cholesky factor of
/// the Gram matrix. A leading grid point t = 0 is routed around the
/// factorization and set to exactly 0.
pub fn sample_cholesky(
    grid: &TimeGrid,
    p: &BifBmParams,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<SamplePath>> {
    if n_paths == 0 {
        return Err(BifbmError::InvalidParams("n_paths must be >= 1".into()));
    }
    let leading_zero = grid.starts_at_zero();
    let sub: Vec<f64> = if leading_zero {
        grid.points()[1..].to_vec()
    } else {
        grid.points().to_vec()
    };
    if sub.is_empty() {
        // grid = {0}
        return Ok((0..n_paths)
            .map(|_| SamplePath {
                grid: grid.clone(),
                components: vec![vec![0.0]; p.d()],
                method: SampleMethod::Cholesky,
                seed,
                params: *p,
            })
            .collect());
    }
    let sub_grid = TimeGrid::new(sub)?;
    let cov = cov_matrix(&sub_grid, p)?;
    let l = cov.factor();
    let d = p.d();
    let z = gaussian_matrix(sub_grid.len(), n_paths * d, seed, |c| {
        ((c / d) as u64, (c % d) as u64)
    });
    let y = l * &z;
    Ok(split_columns(&y, grid, leading_zero, d, n_paths, SampleMethod::Cholesky, seed, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LampertiMode {
    ToeplitzExact,
    Circulant,
}

/// Output of the Lamperti samplers, with the realized embedding eigenvalue
/// floor when circulant embedding was used.
#[derive(Debug, Clone)]
pub struct LampertiOutput {
    pub paths: Vec<SamplePath>,
    pub embedding_min_eig: Option<f64>,
    pub embedding_size: Option<usize>,
}

/// Sample through the Lamperti transform: the stationary process
/// `Y(u) = e^{-HK u} B(e^u)` is sampled on the uniform log-time grid, then
/// mapped back via `B(t) = t^{HK} Y(log t)`.
///
/// The grid must be log-uniform (and positive, except for an optional
/// leading 0 which is routed around and set to exactly 0).
pub fn sample_lamperti(
    grid: &TimeGrid,
    p: &BifBmParams,
    n_paths: usize,
    seed: u64,
    mode: LampertiMode,
) -> Result<LampertiOutput> {
    if n_paths == 0 {
        return Err(BifbmError::InvalidParams("n_paths must be >= 1".into()));
    }
    let leading_zero = grid.starts_at_zero();
    let sub: Vec<f64> = if leading_zero {
        grid.points()[1..].to_vec()
    } else {
        grid.points().to_vec()
    };
    if sub.len() < 2 {
        return Err(BifbmError::InvalidGrid(
            "lamperti sampler needs at least 2 positive grid points".into(),
        ));
    }
    let sub_grid = TimeGrid::new(sub.clone())?;
    if !sub_grid.is_log_uniform(1e-8) {
        return Err(BifbmError::InvalidGrid(
            "lamperti sampler requires a log-uniform grid of positive points".into(),
        ));
    }
    let n = sub.len();
    let d = p.d();
    let hk = p.hk();
    let scale: Vec<f64> = sub.iter().map(|t| t.powf(hk)).collect();

    let (y0, min_eig, emb_size): (Mat<f64>, Option<f64>, Option<usize>) = match mode {
        LampertiMode::ToeplitzExact => {
            let u: Vec<f64> = sub.iter().map(|t| t.ln()).collect();
            let cov = CovarianceMatrix::from_kernel(&u, |a, b| lamperti_cov(b - a, p))?;
            let z = gaussian_matrix(n, n_paths * d, seed, |c| ((c / d) as u64, (c % d) as u64));
            (cov.factor() * &z, None, None)
        }
        LampertiMode::Circulant => {
            let delta = sub[1].ln() - sub[0].ln();
            let (eigs, m, min_eig) = circulant_eigenvalues(p, delta, n)?;
            let y = circulant_sample_matrix(&eigs, m, n, n_paths * d, seed, d);
            (y, Some(min_eig), Some(m))
        }
    };

    let mut y = y0;
    for i in 0..n {
        for c in 0..y.ncols() {
            y[(i, c)] *= scale[i];
        }
    }
    Ok(LampertiOutput {
        paths: split_columns(&y, grid, leading_zero, d, n_paths, SampleMethod::Lamperti, seed, p),
        embedding_min_eig: min_eig,
        embedding_size: emb_size,
    })
}

/// Eigenvalues of the circulant embedding of the Toeplitz covariance
/// `r(|i-j| delta)`, doubling the embedding size up to 8x if needed.
/// Returns (eigenvalues, embedding size, min eigenvalue before clamping).
fn circulant_eigenvalues(p: &BifBmParams, delta: f64, n: usize) -> Result<(Vec<f64>, usize, f64)> {
    let mut m = (2 * (n - 1)).next_power_of_two().max(4);
    let mut last_min = f64::NEG_INFINITY;
    for _ in 0..4 {
        let half = m / 2;
        let mut c: Vec<Complex64> = (0..m)
            .map(|j| {
                let lag = if j <= half { j } else { m - j };
                Complex64::new(lamperti_cov(lag as f64 * delta, p), 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut c);
        let eigs: Vec<f64> = c.iter().map(|z| z.re).collect();
        let max_eig = eigs.iter().cloned().fold(0.0, f64::max);
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        last_min = min_eig;
        if min_eig >= -EMBEDDING_EIG_FLOOR * max_eig {
            let clamped = eigs.iter().map(|&e| e.max(0.0)).collect();
            return Ok((clamped, m, min_eig));
        }
        m *= 2;
    }
    Err(BifbmError::CirculantNotNonnegative {
        min_eig: last_min,
        rel_floor: EMBEDDING_EIG_FLOOR,
    })
}

/// Davies-Harte synthesis: one column per (path, component) stream.
fn circulant_sample_matrix(
    eigs: &[f64],
    m: usize,
    n: usize,
    cols: usize,
    seed: u64,
    d: usize,
) -> Mat<f64> {
    let half = m / 2;
    let mf = m as f64;
    let sq_half: Vec<f64> = eigs.iter().map(|&e| (e / (2.0 * mf)).sqrt()).collect();
    let planner_fft = FftPlanner::new().plan_fft_forward(m);

    let columns: Vec<Vec<f64>> = (0..cols)
        .into_par_iter()
        .map(|c| {
            let mut rng = path_rng(seed, (c / d) as u64, (c % d) as u64);
            let mut g = vec![0.0; m];
            fill_standard_normal(&mut rng, &mut g);
            let mut w = vec![Complex64::new(0.0, 0.0); m];
            // draw order: g[0] -> k=0, g[1] -> k=half, then pairs for 1..half
            w[0] = Complex64::new((eigs[0] / mf).sqrt() * g[0], 0.0);
            w[half] = Complex64::new((eigs[half] / mf).sqrt() * g[1], 0.0);
            for k in 1..half {
                let a = g[2 * k];
                let b = g[2 * k + 1];
                w[k] = Complex64::new(sq_half[k] * a, sq_half[k] * b);
                w[m - k] = w[k].conj();
            }
            planner_fft.process(&mut w);
            w.iter().take(n).map(|z| z.re).collect()
        })
        .collect();

    let mut y = Mat::<f64>::zeros(n, cols);
    for (c, col) in columns.iter().enumerate() {
        for i in 0..n {
            y[(i, c)] = col[i];
        }
    }
    y
}

/// Circulant embedding with automatic fallback to the exact Toeplitz
/// factorization when the embedding is not nonnegative definite.
pub fn sample_lamperti_auto(
    grid: &TimeGrid,
    p: &BifBmParams,
    n_paths: usize,
    seed: u64,
) -> Result<LampertiOutput> {
    match sample_lamperti(grid, p, n_paths, seed, LampertiMode::Circulant) {
        Err(BifbmError::CirculantNotNonnegative { .. }) => {
            sample_lamperti(grid, p, n_paths, seed, LampertiMode::ToeplitzExact)
        }
        other => other,
    }
}

/// Output of the spectral sampler with its truncation-bias bound.
#[derive(Debug, Clone)]
pub struct SpectralOutput {
    pub paths: Vec<SamplePath>,
    /// Spectral mass left outside [-lambda_max, lambda_max].
    pub tail_mass_bound: f64,
}

/// Frequency cells used by the spectral sampler: uniform near zero where f
/// is peaked, geometric further out where only the power tail remains.
fn spectral_cells(n_modes: usize, lambda_max: f64) -> (Vec<f64>, Vec<f64>) {
    let mut bounds = Vec::with_capacity(n_modes + 1);
    let lambda_c = 8.0f64.min(lambda_max / 2.0);
    if lambda_max <= 16.0 {
        for i in 0..=n_modes {
            bounds.push(lambda_max * i as f64 / n_modes as f64);
        }
    } else {
        let n_u = n_modes / 2;
        let n_g = n_modes - n_u;
        for i in 0..n_u {
            bounds.push(lambda_c * i as f64 / n_u as f64);
        }
        let rho = (lambda_max / lambda_c).powf(1.0 / n_g as f64);
        for i in 0..=n_g {
            bounds.push(lambda_c * rho.powi(i as i32));
        }
    }
    let mids: Vec<f64> = bounds.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let widths: Vec<f64> = bounds.windows(2).map(|w| w[1] - w[0]).collect();
    (mids, widths)
}

/// Approximate sampling via the spectral representation:
/// `B(t) ~ t^{HK} sum_j sqrt(2 f(lambda_j) dlambda_j)
///   (xi_j cos(lambda_j log t) + eta_j sin(lambda_j log t))`.
pub fn sample_spectral(
    grid: &TimeGrid,
    p: &BifBmParams,
    n_modes: usize,
    lambda_max: f64,
    tail_tol: f64,
    n_paths: usize,
    seed: u64,
) -> Result<SpectralOutput> {
    if n_modes < 8 {
        return Err(BifbmError::InvalidParams("n_modes must be >= 8".into()));
    }
    if !(lambda_max > 0.0) {
        return Err(BifbmError::InvalidParams("lambda_max must be positive".into()));
    }
    let (mids, widths) = spectral_cells(n_modes, lambda_max);
    let fvals = spectral_density_batch(&mids, p, 1e-9)?;
    spectral_paths_given(grid, p, &mids, &widths, &fvals, tail_tol, n_paths, seed)
}

/// Sampler core with an explicit density table (separated so tests can drive
/// it with synthetic densities).
#[allow(clippy::too_many_arguments)]
pub(crate) fn spectral_paths_given(
    grid: &TimeGrid,
    p: &BifBmParams,
    mids: &[f64],
    widths: &[f64],
    fvals: &[f64],
    tail_tol: f64,
    n_paths: usize,
    seed: u64,
) -> Result<SpectralOutput> {
    if n_paths == 0 {
        return Err(BifbmError::InvalidParams("n_paths must be >= 1".into()));
    }
    let leading_zero = grid.starts_at_zero();
    let sub: Vec<f64> = if leading_zero {
        grid.points()[1..].to_vec()
    } else {
        grid.points().to_vec()
    };
    if sub.is_empty() {
        return Err(BifbmError::InvalidGrid(
            "spectral sampler needs at least one positive grid point".into(),
        ));
    }
    let covered: f64 = fvals
        .iter()
        .zip(widths)
        .map(|(&f, &w)| 2.0 * f * w)
        .sum();
    let tail = (1.0 - covered).max(0.0);
    if tail > tail_tol {
        return Err(BifbmError::TailMassTooLarge { tail, tol: tail_tol });
    }
    let amps: Vec<f64> = fvals
        .iter()
        .zip(widths)
        .map(|(&f, &w)| (2.0 * f * w).sqrt())
        .collect();
    let n = sub.len();
    let m = mids.len();
    let d = p.d();
    let hk = p.hk();
    let logs: Vec<f64> = sub.iter().map(|t| t.ln()).collect();
    let scale: Vec<f64> = sub.iter().map(|t| t.powf(hk)).collect();

    // trig matrices n x m, then one gemm per (cos, sin) block
    let ccos = Mat::from_fn(n, m, |i, j| (mids[j] * logs[i]).cos());
    let csin = Mat::from_fn(n, m, |i, j| (mids[j] * logs[i]).sin());

    let cols = n_paths * d;
    let mut zc = Mat::<f64>::zeros(m, cols);
    let mut zs = Mat::<f64>::zeros(m, cols);
    let mut buf = vec![0.0; 2 * m];
    for c in 0..cols {
        let mut rng = path_rng(seed, (c / d) as u64, (c % d) as u64);
        fill_standard_normal(&mut rng, &mut buf);
        // draw order per mode: (xi_j, eta_j)
        for j in 0..m {
            zc[(j, c)] = amps[j] * buf[2 * j];
            zs[(j, c)] = amps[j] * buf[2 * j + 1];
        }
    }
    let mut y = &ccos * &zc + &csin * &zs;
    for i in 0..n {
        for c in 0..cols {
            y[(i, c)] *= scale[i];
        }
    }
    Ok(SpectralOutput {
        paths: split_columns(&y, grid, leading_zero, d, n_paths, SampleMethod::Spectral, seed, p),
        tail_mass_bound: tail,
    })
}

/// Realized Gaussian field on a product grid, one row-major tensor per
/// component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleField {
    grids: Vec<TimeGrid>,
    shape: Vec<usize>,
    components: Vec<Vec<f64>>,
    seed: u64,
    params: SheetParams,
}

impl SampleField {
    pub fn grids(&self) -> &[TimeGrid] {
        &self.grids
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn d(&self) -> usize {
        self.components.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &SheetParams {
        &self.params
    }

    /// Flat row-major tensor of component `c`.
    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (k, &i) in idx.iter().enumerate() {
            flat = flat * self.shape[k] + i;
        }
        flat
    }

    pub fn value(&self, idx: &[usize], c: usize) -> f64 {
        self.components[c][self.flat_index(idx)]
    }
}

/// Multiply factor `l` along tensor axis `axis` of the row-major tensor `x`
/// with the given shape.
fn mode_multiply(l: &Mat<f64>, x: &[f64], shape: &[usize], axis: usize) -> Vec<f64> {
    let n_a = shape[axis];
    let post: usize = shape[axis + 1..].iter().product();
    let pre: usize = shape[..axis].iter().product();
    let mut out = vec![0.0; x.len()];
    let mut v = vec![0.0; n_a];
    let mut w = vec![0.0; n_a];
    for p_idx in 0..pre {
        for q in 0..post {
            let base = p_idx * n_a * post + q;
            for i in 0..n_a {
                v[i] = x[base + i * post];
            }
            // lower-triangular matvec
            for i in 0..n_a {
                let mut acc = 0.0;
                for j in 0..=i {
                    acc += l[(i, j)] * v[j];
                }
                w[i] = acc;
            }
            for i in 0..n_a {
                out[base + i * post] = w[i];
            }
        }
    }
    out
}

/// Exact sheet sampling: the Gram matrix of the product covariance on a
/// product grid is the Kronecker product of per-axis Gram matrices, so its
/// Cholesky factor is applied axis by axis without ever forming it.
pub fn sample_sheet(
    grids: &[TimeGrid],
    p: &SheetParams,
    n_fields: usize,
    seed: u64,
) -> Result<Vec<SampleField>> {
    if grids.len() != p.n_params() {
        return Err(BifbmError::DimensionMismatch(format!(
            "expected {} axis grids, got {}",
            p.n_params(),
            grids.len()
        )));
    }
    if n_fields == 0 {
        return Err(BifbmError::InvalidParams("n_fields must be >= 1".into()));
    }
    let full_shape: Vec<usize> = grids.iter().map(|g| g.len()).collect();
    let total: usize = full_shape.iter().product();
    if total > PRODUCT_GRID_CAP {
        return Err(BifbmError::GridSizeCap {
            total,
            cap: PRODUCT_GRID_CAP,
        });
    }
    let d = p.d();
    let n_axes = grids.len();
    // strip a leading zero per axis; the field vanishes on those faces
    let leading_zero: Vec<bool> = grids.iter().map(|g| g.starts_at_zero()).collect();
    let sub_points: Vec<Vec<f64>> = grids
        .iter()
        .zip(&leading_zero)
        .map(|(g, &lz)| {
            if lz {
                g.points()[1..].to_vec()
            } else {
                g.points().to_vec()
            }
        })
        .collect();
    if sub_points.iter().any(|s| s.is_empty()) {
        // some axis is the single point {0}: the whole field is 0
        return Ok((0..n_fields)
            .map(|_| SampleField {
                grids: grids.to_vec(),
                shape: full_shape.clone(),
                components: vec![vec![0.0; total]; d],
                seed,
                params: p.clone(),
            })
            .collect());
    }
    let sub_shape: Vec<usize> = sub_points.iter().map(|s| s.len()).collect();
    let sub_total: usize = sub_shape.iter().product();

    // per-component, per-axis Cholesky factors
    let mut factors: Vec<Vec<Mat<f64>>> = Vec::with_capacity(d);
    for i in 0..d {
        let mut axis_factors = Vec::with_capacity(n_axes);
        for j in 0..n_axes {
            let ap = p.axis_params(i, j);
            let cov = CovarianceMatrix::from_kernel(&sub_points[j], move |s, t| {
                cov_bifbm(s, t, &ap)
            })?;
            axis_factors.push(cov.factor().clone());
        }
        factors.push(axis_factors);
    }

    let fields: Vec<SampleField> = (0..n_fields)
        .into_par_iter()
        .map(|ifield| {
            let components: Vec<Vec<f64>> = (0..d)
                .map(|c| {
                    let mut rng = path_rng(seed, ifield as u64, c as u64);
                    let mut z = vec![0.0; sub_total];
                    fill_standard_normal(&mut rng, &mut z);
                    for (axis, l) in factors[c].iter().enumerate() {
                        z = mode_multiply(l, &z, &sub_shape, axis);
                    }
                    embed_with_zero_faces(&z, &sub_shape, &full_shape, &leading_zero)
                })
                .collect();
            SampleField {
                grids: grids.to_vec(),
                shape: full_shape.clone(),
                components,
                seed,
                params: p.clone(),
            }
        })
        .collect();
    Ok(fields)
}

/// Embed a sub-tensor into the full shape, filling stripped zero faces.
fn embed_with_zero_faces(
    sub: &[f64],
    sub_shape: &[usize],
    full_shape: &[usize],
    leading_zero: &[bool],
) -> Vec<f64> {
    if leading_zero.iter().all(|&b| !b) {
        return sub.to_vec();
    }
    let total: usize = full_shape.iter().product();
    let mut out = vec![0.0; total];
    let n_axes = full_shape.len();
    let mut idx = vec![0usize; n_axes];
    for (flat_sub, &v) in sub.iter().enumerate() {
        // decode sub index
        let mut rem = flat_sub;
        for a in (0..n_axes).rev() {
            idx[a] = rem % sub_shape[a];
            rem /= sub_shape[a];
        }
        let mut flat_full = 0;
        for a in 0..n_axes {
            let off = if leading_zero[a] { 1 } else { 0 };
            flat_full = flat_full * full_shape[a] + idx[a] + off;
        }
        out[flat_full] = v;
    }
    out
}

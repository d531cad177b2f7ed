//! Path statistics: variations, small-deviation scalings, occupation
//! densities, level-set and graph dimensions, oscillations, crossings and
//! the renormalized occupation functional.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{BifbmError, Result};
use crate::params::{BifBmParams, TimeGrid};
use crate::sampler::{sample_lamperti_auto, SampleField, SamplePath};
use crate::stats::ScalingFit;

/// Binned occupation density over an observation window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalTimeEstimate {
    /// Bin centers, each a point in state space; bins are cubes of side
    /// `bandwidth` centered at integer multiples of it, so 0 is a center.
    pub x_centers: Vec<Vec<f64>>,
    /// Realized observation window [t0, t1] on the path's grid.
    pub interval: (f64, f64),
    /// Occupation density per bin (time per unit volume).
    pub values: Vec<f64>,
    pub bandwidth: f64,
    /// Number of grid points inside the window.
    pub n_grid: usize,
    /// Set when the existence condition HK d < 1 fails; the histogram is
    /// still returned.
    pub existence_warning: bool,
}

impl LocalTimeEstimate {
    /// Density of the bin containing `x`, 0 if `x` falls in an empty bin.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let key: Vec<i64> = x.iter().map(|&c| (c / self.bandwidth).round() as i64).collect();
        for (center, &v) in self.x_centers.iter().zip(&self.values) {
            let ck: Vec<i64> = center
                .iter()
                .map(|&c| (c / self.bandwidth).round() as i64)
                .collect();
            if ck == key {
                return v;
            }
        }
        0.0
    }

    /// Largest bin density, the discrete stand-in for `sup_x L(x, I)`.
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Total occupation mass `sum values * bandwidth^d`.
    pub fn total_mass(&self) -> f64 {
        let d = self.x_centers.first().map_or(1, |c| c.len());
        let cell = self.bandwidth.powi(d as i32);
        self.values.iter().map(|v| v * cell).sum()
    }
}

/// Default spatial bin width for a window resolved by `n_grid` points:
/// `n_grid^{-HK}`, the scale of the path's modulus of continuity.
pub fn default_bandwidth(n_grid: usize, hk: f64) -> f64 {
    (n_grid as f64).powf(-hk)
}

/// Indices of the grid points lying in [a, b] (inclusive, with a small
/// relative tolerance at the endpoints).
fn window_indices(grid: &TimeGrid, a: f64, b: f64) -> Vec<usize> {
    let tol = 1e-12 * grid.last().max(1.0);
    grid.points()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= a - tol && t <= b + tol)
        .map(|(i, _)| i)
        .collect()
}

/// `sum (B(t_{i+1}) - B(t_i))^2` over the grid points inside `interval`.
pub fn quadratic_variation(path: &SamplePath, interval: (f64, f64)) -> Result<f64> {
    if path.d() != 1 {
        return Err(BifbmError::DimensionMismatch(
            "quadratic variation is defined for d = 1".into(),
        ));
    }
    let idx = window_indices(path.grid(), interval.0, interval.1);
    if idx.len() < 2 {
        return Err(BifbmError::EmptyInterval);
    }
    let b = path.component(0);
    Ok(idx
        .windows(2)
        .map(|w| {
            let d = b[w[1]] - b[w[0]];
            d * d
        })
        .sum())
}

fn norm_at(path: &SamplePath, i: usize) -> f64 {
    (0..path.d()).map(|c| path.value(i, c).powi(2)).sum::<f64>().sqrt()
}

/// Chung-type statistic `max_{[0,r]} |B| * (log log(1/r))^{HK} / r^{HK}` for
/// each radius. Radii must be decreasing and below 1/e so the double
/// logarithm is positive.
pub fn chung_statistic(path: &SamplePath, radii: &[f64]) -> Result<Vec<f64>> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] <= w[1]) {
        return Err(BifbmError::InvalidParams("radii must be strictly decreasing".into()));
    }
    let e_inv = (-1.0f64).exp();
    if let Some(&r) = radii.iter().find(|&&r| r <= 0.0 || r >= e_inv) {
        return Err(BifbmError::RadiusOutOfRange(r));
    }
    if path.grid().last() < radii[0] {
        return Err(BifbmError::InvalidGrid(
            "path must cover [0, max radius]".into(),
        ));
    }
    let hk = path.params().hk();
    let grid = path.grid();
    // single forward pass: snapshot the running max of |B| each time the
    // smallest pending radius is passed
    let mut out = vec![0.0; radii.len()];
    let mut run_max: f64 = 0.0;
    let mut snapshots = vec![0.0; radii.len()];
    let mut ri = radii.len(); // index (plus one) of the smallest unfilled radius
    for (i, &t) in grid.points().iter().enumerate() {
        while ri > 0 && t > radii[ri - 1] + 1e-15 {
            snapshots[ri - 1] = run_max;
            ri -= 1;
        }
        run_max = run_max.max(norm_at(path, i));
        if ri == 0 {
            break;
        }
    }
    while ri > 0 {
        snapshots[ri - 1] = run_max;
        ri -= 1;
    }
    for (k, &r) in radii.iter().enumerate() {
        let ll = (1.0 / r).ln().ln();
        out[k] = snapshots[k] * ll.powf(hk) / r.powf(hk);
    }
    Ok(out)
}

/// Monte Carlo small-ball exponent: simulates `n_paths` on a fine grid over
/// [0, 1], estimates `P{max |B| <= x}` for each x and fits
/// `log(-log P)` against `log(1/x)`. The slope estimates `1/(HK)`.
pub fn small_ball_mc(
    p: &BifBmParams,
    x_values: &[f64],
    n_paths: usize,
    n_grid: usize,
    seed: u64,
) -> Result<ScalingFit> {
    if p.d() != 1 {
        return Err(BifbmError::DimensionMismatch("small-ball fit needs d = 1".into()));
    }
    if x_values.is_empty()
        || x_values.windows(2).any(|w| w[0] <= w[1])
        || x_values.iter().any(|&x| x <= 0.0 || x >= 1.0)
    {
        return Err(BifbmError::InvalidParams(
            "x_values must be strictly decreasing in (0, 1)".into(),
        ));
    }
    if n_grid < 1 << 12 {
        return Err(BifbmError::InvalidParams(
            "n_grid must be at least 4096 to dominate discretization bias".into(),
        ));
    }
    let grid = TimeGrid::log_uniform((-10.0f64).exp(), 1.0, n_grid)?;
    let paths = sample_lamperti_auto(&grid, p, n_paths, seed)?.paths;
    let maxima: Vec<f64> = paths
        .iter()
        .map(|sp| sp.component(0).iter().fold(0.0f64, |m, &v| m.max(v.abs())))
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &x in x_values {
        let count = maxima.iter().filter(|&&m| m <= x).count();
        if count == 0 {
            return Err(BifbmError::ZeroCount(x));
        }
        let prob = count as f64 / n_paths as f64;
        if prob >= 1.0 {
            continue;
        }
        xs.push((1.0 / x).ln());
        ys.push((-prob.ln()).ln());
    }
    ScalingFit::fit(xs, ys)
}

/// Discrete Holder seminorm `sup_{s != t} |y(s) - y(t)| / |s - t|^alpha`
/// over all grid pairs. Defined for alpha below the regularity index HK.
pub fn holder_norm(path: &SamplePath, alpha: f64) -> Result<f64> {
    if path.d() != 1 {
        return Err(BifbmError::DimensionMismatch("holder norm needs d = 1".into()));
    }
    let hk = path.params().hk();
    if !(alpha > 0.0 && alpha < hk) {
        return Err(BifbmError::AlphaOutOfRange { alpha, hk });
    }
    let t = path.grid().points();
    let y = path.component(0);
    let n = t.len();
    let mut sup: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let ratio = (y[j] - y[i]).abs() / (t[j] - t[i]).powf(alpha);
            sup = sup.max(ratio);
        }
    }
    Ok(sup)
}

/// Histogram estimate of the occupation density over `interval`: each grid
/// step contributes its length to the bin of the path's current position.
/// Mass conservation `sum values * bandwidth^d = |I|` holds by construction.
pub fn occupation_local_time(
    path: &SamplePath,
    interval: (f64, f64),
    bandwidth: f64,
) -> Result<LocalTimeEstimate> {
    if !(bandwidth > 0.0) {
        return Err(BifbmError::InvalidParams("bandwidth must be positive".into()));
    }
    let idx = window_indices(path.grid(), interval.0, interval.1);
    if idx.len() < 2 {
        return Err(BifbmError::EmptyInterval);
    }
    let d = path.d();
    let grid = path.grid();
    let mut mass: HashMap<Vec<i64>, f64> = HashMap::new();
    for w in idx.windows(2) {
        let dt = grid.point(w[1]) - grid.point(w[0]);
        let key: Vec<i64> = (0..d)
            .map(|c| (path.value(w[0], c) / bandwidth).round() as i64)
            .collect();
        *mass.entry(key).or_insert(0.0) += dt;
    }
    let cell = bandwidth.powi(d as i32);
    let mut entries: Vec<(Vec<i64>, f64)> = mass.into_iter().collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let x_centers = entries
        .iter()
        .map(|(k, _)| k.iter().map(|&j| j as f64 * bandwidth).collect())
        .collect();
    let values = entries.iter().map(|(_, m)| m / cell).collect();
    Ok(LocalTimeEstimate {
        x_centers,
        interval: (grid.point(idx[0]), grid.point(*idx.last().unwrap())),
        values,
        bandwidth,
        n_grid: idx.len(),
        existence_warning: !path.params().local_time_exists(),
    })
}

/// Growth of the maximal local time over shrinking windows around `t0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalTimeHolderResult {
    pub radii: Vec<f64>,
    /// log-log fit of the mean maximal local time against r; the slope
    /// estimates 1 - HK d up to the double-log correction.
    pub fit: ScalingFit,
    /// Mean maximal local time divided by
    /// `phi_1(r) = r^{1 - HKd} (log log 1/r)^{HKd}` for each radius.
    pub ratios: Vec<f64>,
}

/// Maximal local time of windows [t0, t0 + r] averaged over paths, with its
/// growth rate and the ratio against the exact modulus `phi_1`.
pub fn local_time_holder(
    paths: &[SamplePath],
    t0: f64,
    radii: &[f64],
) -> Result<LocalTimeHolderResult> {
    if paths.is_empty() {
        return Err(BifbmError::InvalidParams("need at least one path".into()));
    }
    let e_inv = (-1.0f64).exp();
    if radii.is_empty() || radii.windows(2).any(|w| w[0] <= w[1]) {
        return Err(BifbmError::InvalidParams("radii must be strictly decreasing".into()));
    }
    if let Some(&r) = radii.iter().find(|&&r| r <= 0.0 || r >= e_inv) {
        return Err(BifbmError::RadiusOutOfRange(r));
    }
    let p = paths[0].params();
    let hkd = p.hk() * p.d() as f64;
    let mut means = Vec::with_capacity(radii.len());
    for &r in radii {
        // bins resolve the spatial extent r^{HK} of the window
        let bw = r.powf(p.hk()) / 8.0;
        let mut acc = 0.0;
        for sp in paths {
            let est = occupation_local_time(sp, (t0, t0 + r), bw)?;
            acc += est.max_value();
        }
        means.push(acc / paths.len() as f64);
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let fit = ScalingFit::fit(xs, ys)?;
    let ratios = radii
        .iter()
        .zip(&means)
        .map(|(&r, &m)| m / (r.powf(1.0 - hkd) * (1.0 / r).ln().ln().powf(hkd)))
        .collect();
    Ok(LocalTimeHolderResult {
        radii: radii.to_vec(),
        fit,
        ratios,
    })
}

/// Occupied-box count of a point cloud at box side `delta`.
fn box_count(points: &[Vec<f64>], delta: f64) -> usize {
    let mut boxes: HashSet<Vec<i64>> = HashSet::new();
    for pt in points {
        boxes.insert(pt.iter().map(|&c| (c / delta).floor() as i64).collect());
    }
    boxes.len()
}

/// Box-counting regression over the middle scales: the two coarsest and two
/// finest dyadic scales are dropped to control bias at both ends.
fn box_dimension_fit(points: &[Vec<f64>], scales: &[f64]) -> Result<ScalingFit> {
    if points.is_empty() {
        return Err(BifbmError::DegenerateCloud("empty point cloud".into()));
    }
    if scales.len() < 5 || scales.windows(2).any(|w| w[0] <= w[1]) {
        return Err(BifbmError::InvalidParams(
            "need at least 5 strictly decreasing scales".into(),
        ));
    }
    let trimmed = &scales[2..scales.len() - 2];
    let xs: Vec<f64> = trimmed.iter().map(|&d| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = trimmed
        .iter()
        .map(|&d| (box_count(points, d) as f64).ln())
        .collect();
    ScalingFit::fit(xs, ys)
}

/// Box-dimension estimate of the approximate level set
/// `{t : |B(t) - x| < epsilon}`.
pub fn level_set_dimension(
    path: &SamplePath,
    x: f64,
    epsilon: f64,
    scales: &[f64],
) -> Result<ScalingFit> {
    if path.d() != 1 {
        return Err(BifbmError::DimensionMismatch("level sets are taken for d = 1".into()));
    }
    let b = path.component(0);
    let times: Vec<Vec<f64>> = path
        .grid()
        .points()
        .iter()
        .zip(b)
        .filter(|(_, &v)| (v - x).abs() < epsilon)
        .map(|(&t, _)| vec![t])
        .collect();
    if times.is_empty() {
        return Err(BifbmError::EmptyLevelSet { level: x, epsilon });
    }
    box_dimension_fit(&times, scales)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimensionTarget {
    Image,
    Graph,
}

/// Box-dimension estimate of the image `B([0,1]^N)` or the graph
/// `{(t, B(t))}` of a single path (N = 1).
pub fn graph_image_dimension_path(
    path: &SamplePath,
    target: DimensionTarget,
    scales: &[f64],
) -> Result<ScalingFit> {
    let n = path.len();
    let cloud: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut pt = Vec::new();
            if target == DimensionTarget::Graph {
                pt.push(path.grid().point(i));
            }
            for c in 0..path.d() {
                pt.push(path.value(i, c));
            }
            pt
        })
        .collect();
    box_dimension_fit(&cloud, scales)
}

/// Same as `graph_image_dimension_path` for a sheet sample.
pub fn graph_image_dimension_field(
    field: &SampleField,
    target: DimensionTarget,
    scales: &[f64],
) -> Result<ScalingFit> {
    let shape = field.shape().to_vec();
    let total: usize = shape.iter().product();
    let n_axes = shape.len();
    let mut cloud = Vec::with_capacity(total);
    let mut idx = vec![0usize; n_axes];
    for flat in 0..total {
        let mut rem = flat;
        for a in (0..n_axes).rev() {
            idx[a] = rem % shape[a];
            rem /= shape[a];
        }
        let mut pt = Vec::new();
        if target == DimensionTarget::Graph {
            for a in 0..n_axes {
                pt.push(field.grids()[a].point(idx[a]));
            }
        }
        for c in 0..field.d() {
            pt.push(field.value(&idx, c));
        }
        cloud.push(pt);
    }
    box_dimension_fit(&cloud, scales)
}

/// Renormalized occupation functional `T^{HK - 1} int_0^T F(B(u)) du` by
/// trapezoidal quadrature on the path's grid.
pub fn renormalization_functional(
    path: &SamplePath,
    f: impl Fn(&[f64]) -> f64,
) -> f64 {
    let grid = path.grid();
    let n = grid.len();
    let d = path.d();
    let eval = |i: usize| {
        let x: Vec<f64> = (0..d).map(|c| path.value(i, c)).collect();
        f(&x)
    };
    let mut integral = 0.0;
    let mut prev = eval(0);
    for i in 1..n {
        let cur = eval(i);
        integral += 0.5 * (prev + cur) * (grid.point(i) - grid.point(i - 1));
        prev = cur;
    }
    let t = grid.last();
    t.powf(path.params().hk() - 1.0) * integral
}

/// Linear interpolation of component `c` at time `t`.
fn value_interp(path: &SamplePath, c: usize, t: f64) -> f64 {
    let pts = path.grid().points();
    match pts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => path.value(i, c),
        Err(i) => {
            let (i0, i1) = (i - 1, i);
            let (t0, t1) = (pts[i0], pts[i1]);
            let w = (t - t0) / (t1 - t0);
            path.value(i0, c) * (1.0 - w) + path.value(i1, c) * w
        }
    }
}

/// Time-averaged powers of the normalized oscillation
/// `Z_eps(t) = (B(t + eps) - B(t)) / eps^{HK}`: trapezoidal
/// `int_0^1 Z_eps(t)^k dt` for k = 1..k_max.
pub fn oscillation_moments(path: &SamplePath, epsilon: f64, k_max: usize) -> Result<Vec<f64>> {
    if path.d() != 1 {
        return Err(BifbmError::DimensionMismatch("oscillations need d = 1".into()));
    }
    let spacing = path.grid().max_spacing();
    if spacing > epsilon / 8.0 {
        return Err(BifbmError::GridTooCoarse { spacing, epsilon });
    }
    if path.grid().last() < 1.0 + epsilon {
        return Err(BifbmError::InvalidGrid(
            "path must cover [0, 1 + epsilon]".into(),
        ));
    }
    let hk = path.params().hk();
    let scale = epsilon.powf(hk);
    let pts = path.grid().points();
    let b = path.component(0);
    let zs: Vec<(f64, f64)> = pts
        .iter()
        .enumerate()
        .take_while(|(_, &t)| t <= 1.0 + 1e-12)
        .map(|(i, &t)| (t, (value_interp(path, 0, t + epsilon) - b[i]) / scale))
        .collect();
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut acc = 0.0;
        for w in zs.windows(2) {
            acc += 0.5 * (w[0].1.powi(k as i32) + w[1].1.powi(k as i32)) * (w[1].0 - w[0].0);
        }
        out.push(acc);
    }
    Ok(out)
}

/// One mollification level of the crossing comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingComparison {
    pub epsilon: f64,
    /// `(pi/2)^{1/2} eps^{1 - HK} sum_u f(u) N_u du`.
    pub crossing_integral: f64,
    /// `sum_u f(u) Lhat(u, I) du` from the occupation histogram.
    pub local_time_integral: f64,
    pub ratio: f64,
}

/// Level crossings of the mollified path `B_eps(t) = (1/eps) int_t^{t+eps} B`
/// against the occupation density, integrated against the test function `f`
/// over `u_grid`. Crossings are strict sign changes; exact zeros count once.
pub fn crossing_count_localtime(
    path: &SamplePath,
    f: impl Fn(f64) -> f64,
    epsilons: &[f64],
    u_grid: &[f64],
) -> Result<Vec<CrossingComparison>> {
    if path.d() != 1 {
        return Err(BifbmError::DimensionMismatch("crossing counts need d = 1".into()));
    }
    if epsilons.is_empty() || epsilons.windows(2).any(|w| w[0] <= w[1]) {
        return Err(BifbmError::InvalidParams("epsilons must be strictly decreasing".into()));
    }
    if u_grid.len() < 2 || u_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BifbmError::InvalidParams("u_grid must be increasing with >= 2 points".into()));
    }
    let spacing = path.grid().max_spacing();
    let eps_min = *epsilons.last().unwrap();
    if spacing > eps_min / 8.0 {
        return Err(BifbmError::GridTooCoarse { spacing, epsilon: eps_min });
    }
    let du = (u_grid[u_grid.len() - 1] - u_grid[0]) / (u_grid.len() - 1) as f64;
    let hk = path.params().hk();
    let pts = path.grid().points();
    let b = path.component(0);
    let t_end = path.grid().last();
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        // mollified values on grid points with t + eps inside the domain
        let mut mt = Vec::new();
        let mut mv = Vec::new();
        for (i, &t) in pts.iter().enumerate() {
            if t + eps > t_end + 1e-12 {
                break;
            }
            // trapezoid of B over [t, t + eps]
            let mut acc = 0.0;
            let mut tp = t;
            let mut vp = b[i];
            let mut j = i + 1;
            while j < pts.len() && pts[j] < t + eps {
                acc += 0.5 * (vp + b[j]) * (pts[j] - tp);
                tp = pts[j];
                vp = b[j];
                j += 1;
            }
            let v_end = value_interp(path, 0, (t + eps).min(t_end));
            acc += 0.5 * (vp + v_end) * (t + eps - tp);
            mt.push(t);
            mv.push(acc / eps);
        }
        if mv.len() < 2 {
            return Err(BifbmError::EmptyInterval);
        }
        let interval = (mt[0], *mt.last().unwrap());
        let crossing_integral: f64 = u_grid
            .iter()
            .map(|&u| {
                let mut n_u = 0usize;
                for w in mv.windows(2) {
                    if (w[0] - u) * (w[1] - u) < 0.0 {
                        n_u += 1;
                    }
                }
                // documented tie rule: an exact hit counts one crossing
                n_u += mv.iter().filter(|&&v| v == u).count();
                f(u) * n_u as f64 * du
            })
            .sum::<f64>()
            * (std::f64::consts::PI / 2.0).sqrt()
            * eps.powf(1.0 - hk);
        let lt = occupation_local_time(path, interval, du)?;
        let local_time_integral: f64 = u_grid.iter().map(|&u| f(u) * lt.value_at(&[u]) * du).sum();
        out.push(CrossingComparison {
            epsilon: eps,
            crossing_integral,
            local_time_integral,
            ratio: crossing_integral / local_time_integral,
        });
    }
    Ok(out)
}

/// Monte Carlo tail of the local time at 0: regression of
/// `log(-log P{Lhat(0, [0,1]) > x})` on `log x`. Points with zero
/// exceedance count are omitted. Report-only at desk scale.
pub fn local_time_tail(
    p: &BifBmParams,
    x_values: &[f64],
    n_paths: usize,
    n_grid: usize,
    seed: u64,
) -> Result<ScalingFit> {
    if x_values.is_empty() || x_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BifbmError::InvalidParams("x_values must be increasing".into()));
    }
    let grid = TimeGrid::log_uniform(1e-5, 1.0, n_grid)?;
    let paths = sample_lamperti_auto(&grid, p, n_paths, seed)?.paths;
    let bw = default_bandwidth(n_grid, p.hk());
    let lhat: Vec<f64> = paths
        .iter()
        .map(|sp| occupation_local_time(sp, (grid.first(), 1.0), bw).map(|e| e.value_at(&[0.0])))
        .collect::<Result<_>>()?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &x in x_values {
        let count = lhat.iter().filter(|&&v| v > x).count();
        if count == 0 || count == n_paths {
            continue;
        }
        let prob = count as f64 / n_paths as f64;
        xs.push(x.ln());
        ys.push((-prob.ln()).ln());
    }
    ScalingFit::fit(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::sample_cholesky;
    use crate::stats::{ks_two_sample, mean_and_stderr};

    fn p(h: f64, k: f64) -> BifBmParams {
        BifBmParams::scalar(h, k).unwrap()
    }

    fn constant_path(value: f64, n: usize, pp: BifBmParams) -> SamplePath {
        let grid = TimeGrid::uniform(0.0, 1.0, n).unwrap();
        SamplePath::from_components(grid, vec![vec![value; n]], pp).unwrap()
    }

    fn linear_path(n: usize, t1: f64, pp: BifBmParams) -> SamplePath {
        let grid = TimeGrid::uniform(0.0, t1, n).unwrap();
        let vals = grid.points().to_vec();
        SamplePath::from_components(grid, vec![vals], pp).unwrap()
    }

    #[test]
    fn qv_constant_path_is_zero() {
        let sp = constant_path(3.0, 64, p(0.5, 0.5));
        assert_eq!(quadratic_variation(&sp, (0.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn qv_empty_interval_rejected() {
        let sp = constant_path(0.0, 64, p(0.5, 0.5));
        assert!(matches!(
            quadratic_variation(&sp, (0.5, 0.5001)),
            Err(BifbmError::EmptyInterval)
        ));
    }

    #[test]
    fn qv_brownian_mean() {
        // E QV = 1 on any partition of [0, 1] for Brownian motion
        let pp = p(0.5, 1.0);
        let grid = TimeGrid::log_uniform((-8.0f64).exp(), 1.0, 1 << 12).unwrap();
        let paths = sample_lamperti_auto(&grid, &pp, 60, 31).unwrap().paths;
        let qvs: Vec<f64> = paths
            .iter()
            .map(|sp| quadratic_variation(sp, (0.0, 1.0)).unwrap())
            .collect();
        let (mean, se) = mean_and_stderr(&qvs);
        // E QV = 1 - t_min since the grid starts at e^{-8}
        let expect = 1.0 - (-8.0f64).exp();
        assert!((mean - expect).abs() < 4.0 * se.max(0.01), "mean {mean}");
    }

    #[test]
    fn chung_zero_path_and_radius_domain() {
        let sp = constant_path(0.0, 256, p(0.5, 0.5));
        let radii = [0.3, 0.1, 0.05];
        let stats = chung_statistic(&sp, &radii).unwrap();
        assert!(stats.iter().all(|&s| s == 0.0));
        assert!(matches!(
            chung_statistic(&sp, &[0.5]),
            Err(BifbmError::RadiusOutOfRange(_))
        ));
        assert!(chung_statistic(&sp, &[0.05, 0.1]).is_err());
    }

    #[test]
    fn chung_self_similarity_ks() {
        // statistic at radius r vs the rescaled path's statistic at r/e
        let pp = p(0.5, 0.8);
        let grid = TimeGrid::log_uniform((-14.0f64).exp(), 0.35, 1 << 10).unwrap();
        let paths = sample_lamperti_auto(&grid, &pp, 200, 404).unwrap().paths;
        let r = 0.3;
        let hk = pp.hk();
        let a = 1f64.exp();
        // invariance holds at a common radius argument: the rescaled path
        // evaluated at r/a matches the original evaluated at r/a in law
        let s1: Vec<f64> = paths[..100]
            .iter()
            .map(|sp| chung_statistic(sp, &[r / a]).unwrap()[0])
            .collect();
        let s2: Vec<f64> = paths[100..]
            .iter()
            .map(|sp| {
                let scaled_grid =
                    TimeGrid::new(sp.grid().points().iter().map(|&t| t / a).collect()).unwrap();
                let vals: Vec<f64> = sp
                    .component(0)
                    .iter()
                    .map(|&v| v * a.powf(-hk))
                    .collect();
                let scaled = SamplePath::from_components(scaled_grid, vec![vals], pp).unwrap();
                chung_statistic(&scaled, &[r / a]).unwrap()[0]
            })
            .collect();
        let (_, pval) = ks_two_sample(&s1, &s2).unwrap();
        assert!(pval > 0.01, "KS p-value {pval}");
    }

    #[test]
    fn chung_depends_only_on_running_max() {
        let pp = p(0.5, 0.8);
        let grid = TimeGrid::uniform(0.0, 0.4, 9).unwrap();
        let vals = vec![0.0, 0.5, -1.0, 2.0, 0.3, -0.1, 0.8, 0.2, -0.4];
        let sp = SamplePath::from_components(grid.clone(), vec![vals.clone()], pp).unwrap();
        // permute the values after the running maximum is attained (index 3)
        let mut perm = vals.clone();
        perm.swap(5, 8);
        perm.swap(6, 7);
        let sq = SamplePath::from_components(grid, vec![perm], pp).unwrap();
        let radii = [0.35, 0.2];
        assert_eq!(
            chung_statistic(&sp, &radii).unwrap(),
            chung_statistic(&sq, &radii).unwrap()
        );
    }

    #[test]
    fn small_ball_brownian_slope() {
        let pp = p(0.5, 1.0);
        let xs = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4];
        let fit = small_ball_mc(&pp, &xs, 4000, 1 << 12, 808).unwrap();
        assert!(
            (fit.slope - 2.0).abs() < 0.3,
            "small-ball slope {} vs 2",
            fit.slope
        );
        // P nonincreasing as x shrinks is implied by log(-log P) increasing
        assert!(fit.ordinates.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn small_ball_determinism_and_zero_count() {
        let pp = p(0.5, 0.8);
        let xs = [0.95, 0.85, 0.75];
        let a = small_ball_mc(&pp, &xs, 2000, 1 << 12, 7).unwrap();
        let b = small_ball_mc(&pp, &xs, 2000, 1 << 12, 7).unwrap();
        assert_eq!(a.slope, b.slope);
        assert_eq!(a.ordinates, b.ordinates);
        assert!(matches!(
            small_ball_mc(&pp, &[0.01], 50, 1 << 12, 7),
            Err(BifbmError::ZeroCount(_))
        ));
    }

    #[test]
    fn holder_norm_examples() {
        let pp = p(0.75, 0.8); // HK = 0.6
        let lin = linear_path(101, 1.0, pp);
        let norm = holder_norm(&lin, 0.5).unwrap();
        assert!((norm - 1.0).abs() < 1e-12, "norm {norm}");
        let zero = constant_path(0.0, 101, pp);
        assert_eq!(holder_norm(&zero, 0.5).unwrap(), 0.0);
        assert!(matches!(
            holder_norm(&lin, pp.hk()),
            Err(BifbmError::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn holder_small_ball_slope() {
        // P{||B||_alpha <= eps} tail exponent 1/(HK - alpha)
        let pp = p(0.75, 0.8);
        let alpha = 0.2;
        let n = 400;
        let grid = TimeGrid::uniform(0.0, 1.0, n).unwrap();
        let n_paths = 8000;
        let paths = sample_cholesky(&grid, &pp, n_paths, 117).unwrap();
        let mut norms: Vec<f64> = paths
            .iter()
            .map(|sp| holder_norm(sp, alpha).unwrap())
            .collect();
        norms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // epsilons at fixed quantiles of the norm distribution; the slope is
        // read deep in the lower tail where the asymptotic regime sets in
        let quantiles = [0.06, 0.04, 0.025, 0.015, 0.008];
        let eps: Vec<f64> = quantiles
            .iter()
            .map(|&q| norms[(q * n_paths as f64) as usize])
            .collect();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &e in &eps {
            let prob = norms.iter().filter(|&&v| v <= e).count() as f64 / n_paths as f64;
            xs.push((1.0 / e).ln());
            ys.push((-prob.ln()).ln());
        }
        let fit = ScalingFit::fit(xs, ys).unwrap();
        let expect = 1.0 / (pp.hk() - alpha);
        assert!(
            (fit.slope - expect).abs() < 0.2 * expect,
            "holder small-ball slope {} vs {}",
            fit.slope,
            expect
        );
    }

    #[test]
    fn occupation_constant_path() {
        let sp = constant_path(0.0, 257, p(0.5, 0.8));
        let bw = 0.05;
        let est = occupation_local_time(&sp, (0.0, 1.0), bw).unwrap();
        assert_eq!(est.values.len(), 1);
        assert!((est.values[0] - 1.0 / bw).abs() < 1e-9);
        assert!((est.total_mass() - 1.0).abs() < 1e-9);
        assert!(!est.existence_warning);
    }

    #[test]
    fn occupation_mass_conservation() {
        let pp = p(0.5, 0.8);
        let grid = TimeGrid::log_uniform(1e-4, 1.0, 1 << 11).unwrap();
        let paths = sample_lamperti_auto(&grid, &pp, 5, 3).unwrap().paths;
        for sp in &paths {
            let est = occupation_local_time(sp, (1e-4, 1.0), 0.02).unwrap();
            let expect = est.interval.1 - est.interval.0;
            assert!((est.total_mass() - expect).abs() < 1e-9);
            assert!(est.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn occupation_existence_warning() {
        let pp = p(0.9, 1.0); // HK = 0.9 < 1 but with d = 2 fails
        let pp2 = BifBmParams::new(0.9, 1.0, 2).unwrap();
        let grid = TimeGrid::uniform(0.0, 1.0, 64).unwrap();
        let sp = SamplePath::from_components(
            grid,
            vec![vec![0.0; 64], vec![0.0; 64]],
            pp2,
        )
        .unwrap();
        let est = occupation_local_time(&sp, (0.0, 1.0), 0.1).unwrap();
        assert!(est.existence_warning);
        let _ = pp;
    }

    #[test]
    fn occupation_mean_matches_oracle() {
        // E Lhat(0, [0,1]) vs (2 pi)^{-1/2} / (1 - HK) for HK = 0.4
        let pp = p(0.5, 0.8);
        let n_grid = 1 << 14;
        let grid = TimeGrid::log_uniform(1e-5, 1.0, n_grid).unwrap();
        let n_paths = 200;
        let paths = sample_lamperti_auto(&grid, &pp, n_paths, 90).unwrap().paths;
        let bw = default_bandwidth(n_grid, pp.hk());
        let vals: Vec<f64> = paths
            .iter()
            .map(|sp| {
                occupation_local_time(sp, (1e-5, 1.0), bw)
                    .unwrap()
                    .value_at(&[0.0])
            })
            .collect();
        let (mean, se) = mean_and_stderr(&vals);
        let oracle = (2.0 * std::f64::consts::PI).sqrt().recip() / (1.0 - pp.hk());
        assert!(
            (mean - oracle).abs() < (0.08 * oracle).max(3.0 * se),
            "mean {mean} vs oracle {oracle} (se {se})"
        );
    }

    #[test]
    fn local_time_scaling_property() {
        // L(x, c t) scaled by c^{-(1 - HKd)} matches L(c^{-HK} x, t) of the
        // time-and-space rescaled path within discretization error
        let pp = p(0.5, 0.8);
        let grid = TimeGrid::log_uniform(1e-4, 2.0, 1 << 12).unwrap();
        let sp = &sample_lamperti_auto(&grid, &pp, 1, 55).unwrap().paths[0];
        let c = 2.0f64;
        let hk = pp.hk();
        let bw = 0.05;
        // rescaled path Bc(t) = c^{-HK} B(c t) on [1e-4/c, 1]
        let scaled_grid =
            TimeGrid::new(sp.grid().points().iter().map(|&t| t / c).collect()).unwrap();
        let scaled_vals: Vec<f64> =
            sp.component(0).iter().map(|&v| v * c.powf(-hk)).collect();
        let sc = SamplePath::from_components(scaled_grid, vec![scaled_vals], pp).unwrap();
        let l_orig = occupation_local_time(sp, (1e-4, 2.0), bw).unwrap();
        let l_scaled = occupation_local_time(&sc, (1e-4 / c, 1.0), bw * c.powf(-hk)).unwrap();
        for x in [-0.4f64, 0.0, 0.4] {
            let lhs = c.powf(-(1.0 - hk)) * l_orig.value_at(&[x]);
            let rhs = l_scaled.value_at(&[x * c.powf(-hk)]) * c.powf(-hk) / c.powf(-hk);
            // compare within a couple of bandwidths of spatial slack
            let slack = 2.0 * (lhs.max(rhs)).max(1.0) * bw.powf(0.5);
            assert!(
                (lhs - rhs).abs() <= slack,
                "x = {x}: {lhs} vs {rhs} (slack {slack})"
            );
        }
    }

    #[test]
    fn local_time_holder_brownian_exponent() {
        let pp = p(0.5, 1.0);
        let grid = TimeGrid::log_uniform((-10.0f64).exp(), 0.4, 1 << 12).unwrap();
        let paths = sample_lamperti_auto(&grid, &pp, 60, 66).unwrap().paths;
        let radii: Vec<f64> = (2..=8).map(|k| (-(k as f64)).exp()).collect();
        let res = local_time_holder(&paths, 0.0, &radii).unwrap();
        assert!(
            (res.fit.slope - 0.5).abs() < 0.1,
            "local time growth slope {} vs 0.5",
            res.fit.slope
        );
        assert!(res.ratios.iter().all(|&r| r > 0.0 && r.is_finite()));
    }

    #[test]
    fn local_time_holder_rejects_bad_radii() {
        let pp = p(0.5, 1.0);
        let sp = constant_path(0.0, 64, pp);
        assert!(local_time_holder(&[sp.clone()], 0.0, &[0.5]).is_err());
        assert!(local_time_holder(&[], 0.0, &[0.1]).is_err());
        let _ = sp;
    }

    #[test]
    fn level_set_monotone_path() {
        let pp = p(0.5, 0.5);
        let sp = linear_path(1 << 12, 1.0, pp);
        let scales: Vec<f64> = (1..=10).map(|k| 0.5f64.powi(k)).collect();
        let fit = level_set_dimension(&sp, 0.5, 2e-4, &scales).unwrap();
        assert!(fit.slope.abs() < 0.15, "slope {}", fit.slope);
    }

    #[test]
    fn level_set_empty_error() {
        let pp = p(0.5, 0.5);
        let sp = constant_path(0.0, 64, pp);
        assert!(matches!(
            level_set_dimension(&sp, 5.0, 0.01, &[0.5, 0.25, 0.125, 0.06, 0.03]),
            Err(BifbmError::EmptyLevelSet { .. })
        ));
    }

    #[test]
    fn level_set_brownian_dimension() {
        let pp = p(0.5, 1.0);
        let n = 1 << 14;
        let grid = TimeGrid::log_uniform(1e-4, 1.0, n).unwrap();
        let paths = sample_lamperti_auto(&grid, &pp, 8, 12).unwrap().paths;
        let scales: Vec<f64> = (1..=11).map(|k| 0.5f64.powi(k)).collect();
        let eps = (n as f64).powf(-pp.hk());
        let mut slopes = Vec::new();
        for sp in &paths {
            if let Ok(fit) = level_set_dimension(sp, 0.0, eps, &scales) {
                slopes.push(fit.slope);
            }
        }
        let (mean, _) = mean_and_stderr(&slopes);
        assert!((mean - 0.5).abs() < 0.15, "level-set dimension {mean}");
    }

    #[test]
    fn graph_dimension_constant_field() {
        let pp = p(0.5, 0.5);
        let sp = constant_path(0.7, 4096, pp);
        let scales: Vec<f64> = (1..=9).map(|k| 0.5f64.powi(k)).collect();
        let fit = graph_image_dimension_path(&sp, DimensionTarget::Image, &scales).unwrap();
        assert!(fit.slope.abs() < 0.05, "constant image slope {}", fit.slope);
    }

    #[test]
    fn graph_dimension_brownian() {
        let pp = p(0.5, 1.0);
        let n = 1 << 12;
        let grid = TimeGrid::uniform(0.0, 1.0, n).unwrap();
        let paths = sample_cholesky(&grid, &pp, 6, 19).unwrap();
        let scales: Vec<f64> = (2..=8).map(|k| 0.5f64.powi(k)).collect();
        let mut slopes = Vec::new();
        for sp in &paths {
            let fit = graph_image_dimension_path(sp, DimensionTarget::Graph, &scales).unwrap();
            slopes.push(fit.slope);
        }
        let (mean, _) = mean_and_stderr(&slopes);
        assert!((mean - 1.5).abs() < 0.15, "graph dimension {mean}");
    }

    #[test]
    fn renormalization_zero_and_linearity() {
        let pp = p(0.5, 0.8);
        let grid = TimeGrid::log_uniform(0.01, 10.0, 256).unwrap();
        let sp = &sample_lamperti_auto(&grid, &pp, 1, 2).unwrap().paths[0];
        assert_eq!(renormalization_functional(sp, |_| 0.0), 0.0);
        let f1 = renormalization_functional(sp, |x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 });
        let f2 = renormalization_functional(sp, |x| if x[0].abs() <= 1.0 { 2.0 } else { 0.0 });
        assert!((f2 - 2.0 * f1).abs() < 1e-12 * f1.abs().max(1.0));
    }

    #[test]
    fn oscillation_moments_examples() {
        let pp = p(0.625, 0.8); // HK = 0.5
        let eps = 0.5f64.powi(6);
        let n = 1 << 10; // spacing ~ 2^{-10} + slack
        let grid = TimeGrid::uniform(0.0, 1.0 + eps, n).unwrap();
        let n_paths = 40;
        let paths = sample_cholesky(&grid, &pp, n_paths, 313).unwrap();
        let mut m1 = Vec::new();
        let mut m2 = Vec::new();
        for sp in &paths {
            let m = oscillation_moments(sp, eps, 2).unwrap();
            m1.push(m[0]);
            m2.push(m[1]);
        }
        let (mean1, se1) = mean_and_stderr(&m1);
        let (mean2, se2) = mean_and_stderr(&m2);
        assert!(mean1.abs() < 3.0 * se1, "first moment {mean1} (se {se1})");
        let sigma2 = 2f64.powf(1.0 - pp.k());
        assert!(
            (mean2 - sigma2).abs() < (0.08 * sigma2).max(3.0 * se2),
            "second moment {mean2} vs {sigma2}"
        );
    }

    #[test]
    fn oscillation_grid_too_coarse() {
        let pp = p(0.5, 0.5);
        let grid = TimeGrid::uniform(0.0, 1.1, 32).unwrap();
        let sp = SamplePath::from_components(grid, vec![vec![0.0; 32]], pp).unwrap();
        assert!(matches!(
            oscillation_moments(&sp, 0.01, 2),
            Err(BifbmError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn crossing_monotone_path() {
        let pp = p(0.5, 0.5);
        let sp = linear_path(2048, 1.2, pp);
        let eps = 0.02;
        // single interior level: the mollified ramp crosses it exactly once
        let u = [0.45, 0.55];
        let res = crossing_count_localtime(&sp, |_| 1.0, &[eps], &u).unwrap();
        let du = 0.1;
        let expect = (std::f64::consts::PI / 2.0).sqrt() * eps.powf(1.0 - pp.hk()) * 2.0 * du;
        assert!(
            (res[0].crossing_integral - expect).abs() < 1e-9,
            "crossing integral {} vs {}",
            res[0].crossing_integral,
            expect
        );
    }

    #[test]
    fn crossing_brownian_ratio_rough() {
        let pp = p(0.5, 1.0);
        let n = 3000;
        let grid = TimeGrid::uniform(0.0, 1.0, n).unwrap();
        let paths = sample_cholesky(&grid, &pp, 8, 23).unwrap();
        let u_grid: Vec<f64> = (-6..=6).map(|i| i as f64 * 0.1).collect();
        let eps = [1.0 / 64.0];
        let mut num = 0.0;
        let mut den = 0.0;
        for sp in &paths {
            let res = crossing_count_localtime(sp, |_| 1.0, &eps, &u_grid).unwrap();
            num += res[0].crossing_integral;
            den += res[0].local_time_integral;
        }
        let ratio = num / den;
        assert!(
            (0.6..1.6).contains(&ratio),
            "aggregate crossing ratio {ratio}"
        );
    }

    #[test]
    fn local_time_tail_monotone() {
        let pp = p(0.5, 1.0);
        let xs = [0.2, 0.4, 0.6, 0.9, 1.3];
        let fit = local_time_tail(&pp, &xs, 400, 1 << 12, 5).unwrap();
        // -log P nondecreasing in x and positive overall slope
        assert!(fit.ordinates.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        assert!(fit.slope > 0.0);
    }
}

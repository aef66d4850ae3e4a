//! Norm estimators over the periodic grid: BMO-type oscillation norms, the
//! weighted space X_w, Hardy-space norms, Morrey norms, and Carleson box
//! norms of Littlewood-Paley families.
//!
//! Cube suprema range over all positioned dyadic cubes: every dyadic side
//! length h * 2^k up to the full period, anchored at every grid point, with
//! periodic wraparound.

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::bumps::{apply_qt_spectrum, pt_sup_ratio, BumpPair, Plateau};
use crate::error::{Error, Result};
use crate::field::{
    apply_multiplier, forward_transform, inverse_transform, multiply_spectrum_radial, GridSpec,
    SampledField,
};
use crate::par;
use crate::scale::ScaleGrid;
use crate::sigma::SigmaSymbol;
use crate::weights::AdmissibleWeight;

/// Shared knobs for the norm estimators: the low-pass profile used by the
/// local (bmo / h1) norms and the scale nodes used by scale suprema.
#[derive(Debug, Clone)]
pub struct NormConfig {
    pub theta: Plateau,
    pub scales: ScaleGrid,
}

impl NormConfig {
    pub fn new(theta: Plateau, scales: ScaleGrid) -> Self {
        NormConfig { theta, scales }
    }

    /// Default configuration: unit-ball plateau low-pass and a scan grid of
    /// 16 nodes per octave covering the pair's annulus on this grid.
    pub fn standard(grid: &GridSpec, pair: &BumpPair) -> Result<Self> {
        let scales = ScaleGrid::covering(grid, pair.alpha(), pair.beta(), 16)?;
        Ok(NormConfig { theta: Plateau::ball(1.0, 2.0), scales })
    }
}

/// Dyadic cube side lengths in grid points: 1, 2, 4, ..., N.
pub fn cube_widths(grid: &GridSpec) -> Vec<usize> {
    let mut w = 1;
    let mut out = Vec::new();
    while w <= grid.points_per_axis() {
        out.push(w);
        w *= 2;
    }
    out
}

/// Prefix sums over the periodically duplicated grid, giving O(1) box sums
/// for any anchored cube of side width <= N.
struct Prefix {
    dim: usize,
    n: usize,
    p: Vec<f64>,
}

impl Prefix {
    fn new(grid: &GridSpec, vals: impl Fn(usize) -> f64) -> Self {
        let n = grid.points_per_axis();
        let m = 2 * n;
        match grid.dim() {
            1 => {
                let mut p = vec![0.0; m + 1];
                for i in 0..m {
                    p[i + 1] = p[i] + vals(i % n);
                }
                Prefix { dim: 1, n, p }
            }
            _ => {
                let stride = m + 1;
                let mut p = vec![0.0; stride * stride];
                for i in 0..m {
                    for j in 0..m {
                        let v = vals((i % n) * n + (j % n));
                        p[(i + 1) * stride + (j + 1)] =
                            v + p[i * stride + (j + 1)] + p[(i + 1) * stride + j]
                                - p[i * stride + j];
                    }
                }
                Prefix { dim: 2, n, p }
            }
        }
    }

    /// Sum over the cube anchored at flat position `pos` with side `w` points.
    fn box_sum(&self, pos: usize, w: usize) -> f64 {
        if self.dim == 1 {
            self.p[pos + w] - self.p[pos]
        } else {
            let stride = 2 * self.n + 1;
            let (i, j) = (pos / self.n, pos % self.n);
            self.p[(i + w) * stride + (j + w)] - self.p[i * stride + (j + w)]
                - self.p[(i + w) * stride + j]
                + self.p[i * stride + j]
        }
    }
}

fn cube_count(dim: usize, w: usize) -> f64 {
    (w as f64).powi(dim as i32)
}

/// BMO seminorm: sup over positioned dyadic cubes of the L1 oscillation
/// mean_Q |f - mean_Q f|.
pub fn bmo_seminorm(f: &SampledField, cfg: &NormConfig) -> f64 {
    bmo_core(f, cfg, true)
}

/// Single-threaded variant of [`bmo_seminorm`]; kept for the benchmark suite.
pub fn bmo_seminorm_seq(f: &SampledField, cfg: &NormConfig) -> f64 {
    bmo_core(f, cfg, false)
}

fn bmo_core(f: &SampledField, _cfg: &NormConfig, parallel: bool) -> f64 {
    let grid = f.grid;
    let n = grid.points_per_axis();
    let dim = grid.dim();
    let pre_re = Prefix::new(&grid, |i| f.values[i].re);
    let pre_im = Prefix::new(&grid, |i| f.values[i].im);
    let mut best = 0.0f64;
    for w in cube_widths(&grid) {
        if w < 2 {
            continue; // single-point cubes oscillate trivially
        }
        let cnt = cube_count(dim, w);
        let eval = |pos: usize| {
            let mean = Complex64::new(pre_re.box_sum(pos, w), pre_im.box_sum(pos, w)) / cnt;
            let mut osc = 0.0;
            if dim == 1 {
                for di in 0..w {
                    osc += (f.values[(pos + di) % n] - mean).norm();
                }
            } else {
                let (i0, j0) = (pos / n, pos % n);
                for di in 0..w {
                    let row = ((i0 + di) % n) * n;
                    for dj in 0..w {
                        osc += (f.values[row + (j0 + dj) % n] - mean).norm();
                    }
                }
            }
            osc / cnt
        };
        let m = if parallel {
            par::max_indexed(grid.len(), eval)
        } else {
            par::max_indexed_seq(grid.len(), eval)
        };
        best = best.max(m);
    }
    best
}

/// Apply the low-pass theta-hat(tD) at t = 1 and return the sup norm.
fn theta_sup(f: &SampledField, theta: &Plateau) -> f64 {
    let spec = forward_transform(f);
    inverse_transform(&multiply_spectrum_radial(&spec, theta.eval(0.0), |r| theta.eval(r)))
        .max_abs()
}

/// Local (nonhomogeneous) BMO norm: seminorm plus the low-pass sup.
pub fn bmo_local_norm(f: &SampledField, cfg: &NormConfig) -> f64 {
    bmo_seminorm(f, cfg) + theta_sup(f, &cfg.theta)
}

/// X_w norm: BMO seminorm plus sup_t ||P_t f||_inf / w(t) over the scale
/// nodes.
pub fn xw_norm(
    f: &SampledField,
    w: &AdmissibleWeight,
    pair: &BumpPair,
    cfg: &NormConfig,
) -> f64 {
    bmo_seminorm(f, cfg) + pt_sup_ratio(pair, f, w, &cfg.scales)
}

/// BMO_{sigma_w} norm: the seminorm of I_{1/sigma_w} f.
pub fn bmo_sigma_norm(f: &SampledField, sym: &SigmaSymbol, cfg: &NormConfig) -> Result<f64> {
    Ok(bmo_seminorm(&sym.apply_i_inv_sigma(f)?, cfg))
}

/// Local Hardy space norm via local Riesz transforms: ||f||_L1 plus the L1
/// norms of the multipliers -i xi_j / |xi| (1 - theta-hat(xi)).
pub fn h1_norm(f: &SampledField, cfg: &NormConfig) -> f64 {
    let grid = f.grid;
    let mut total = f.l1_norm();
    for j in 0..grid.dim() {
        let r = apply_multiplier(f, Complex64::new(0.0, 0.0), |xi| {
            let mag = match xi.len() {
                1 => xi[0].abs(),
                _ => xi[0].hypot(xi[1]),
            };
            if mag == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, -xi[j] / mag * (1.0 - cfg.theta.eval(mag)))
        })
        .expect("local Riesz symbol is finite");
        total += r.l1_norm();
    }
    total
}

/// Periodic sliding maximum with window x-r..=x+r along a 1D slice.
fn sliding_max_periodic(row: &[f64], r: usize) -> Vec<f64> {
    let n = row.len();
    if r == 0 {
        return row.to_vec();
    }
    if 2 * r + 1 >= n {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return vec![m; n];
    }
    let ext = |i: usize| row[(i + n - r) % n];
    let win = 2 * r + 1;
    let mut out = vec![0.0; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    for i in 0..n + 2 * r {
        while let Some(&b) = dq.back() {
            if ext(b) <= ext(i) {
                dq.pop_back();
            } else {
                break;
            }
        }
        dq.push_back(i);
        if i + 1 >= win {
            while *dq.front().unwrap() + win <= i {
                dq.pop_front();
            }
            out[i + 1 - win] = ext(*dq.front().unwrap());
        }
    }
    out
}

/// Windowed max of a nonnegative scalar field over |x - y| < t (separable in
/// 2D).
fn windowed_max(grid: &GridSpec, vals: &[f64], radius: usize) -> Vec<f64> {
    let n = grid.points_per_axis();
    if grid.dim() == 1 {
        return sliding_max_periodic(vals, radius.min(n / 2));
    }
    let r = radius.min(n / 2);
    let mut rowpass = vec![0.0; vals.len()];
    for i in 0..n {
        let m = sliding_max_periodic(&vals[i * n..(i + 1) * n], r);
        rowpass[i * n..(i + 1) * n].copy_from_slice(&m);
    }
    let mut out = vec![0.0; vals.len()];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = rowpass[i * n + j];
        }
        let m = sliding_max_periodic(&col, r);
        for i in 0..n {
            out[i * n + j] = m[i];
        }
    }
    out
}

/// Grand maximal H1 norm: L1 norm of x -> max over scale nodes t and points
/// y with |x - y| < t of |theta-hat(tD) f(y)|.
pub fn hardy_maximal_norm(f: &SampledField, cfg: &NormConfig) -> f64 {
    let grid = f.grid;
    let h = grid.spacing();
    let spec = forward_transform(f);
    let nodes = cfg.scales.nodes();
    let per_node: Vec<Vec<f64>> = par::map_indexed(nodes.len(), |j| {
        let t = nodes[j];
        let g = inverse_transform(&multiply_spectrum_radial(&spec, cfg.theta.eval(0.0), |r| {
            cfg.theta.eval(t * r)
        }));
        let abs: Vec<f64> = g.values.iter().map(|v| v.norm()).collect();
        // largest offset o with o * h < t
        let mut radius = (t / h).floor() as usize;
        if radius as f64 * h >= t {
            radius = radius.saturating_sub(1);
        }
        windowed_max(&grid, &abs, radius)
    });
    let mut maxfield = vec![0.0f64; grid.len()];
    for node in &per_node {
        for (m, v) in maxfield.iter_mut().zip(node) {
            *m = m.max(*v);
        }
    }
    maxfield.iter().sum::<f64>() * grid.cell_volume()
}

/// Morrey norm with modulus eta: sup over positioned cubes of
/// eta(side) * mean_Q |f|.
pub fn morrey_norm(
    f: &SampledField,
    eta: impl Fn(f64) -> f64,
    _cfg: &NormConfig,
) -> Result<f64> {
    let grid = f.grid;
    let h = grid.spacing();
    let pre = Prefix::new(&grid, |i| f.values[i].norm());
    let mut best = 0.0f64;
    for w in cube_widths(&grid) {
        let side = w as f64 * h;
        let e = eta(side);
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eta must be positive and finite on cube sides, got eta({side}) = {e}"
            )));
        }
        let cnt = cube_count(grid.dim(), w);
        let m = par::max_indexed(grid.len(), |pos| pre.box_sum(pos, w) / cnt * e);
        best = best.max(m);
    }
    Ok(best)
}

/// Sup over positioned cubes of |mean_Q f| / w(side); together with the BMO
/// seminorm this gives the averaged variant of the X_w norm.
pub fn average_sup(f: &SampledField, w: &AdmissibleWeight, _cfg: &NormConfig) -> f64 {
    let grid = f.grid;
    let h = grid.spacing();
    let pre_re = Prefix::new(&grid, |i| f.values[i].re);
    let pre_im = Prefix::new(&grid, |i| f.values[i].im);
    let mut best = 0.0f64;
    for wd in cube_widths(&grid) {
        let side = wd as f64 * h;
        let cnt = cube_count(grid.dim(), wd);
        let denom = w.eval(side);
        let m = par::max_indexed(grid.len(), |pos| {
            Complex64::new(pre_re.box_sum(pos, wd), pre_im.box_sum(pos, wd)).norm() / cnt / denom
        });
        best = best.max(m);
    }
    best
}

/// Centered moving average over the points |x - y| < t (discrete ball mean).
pub fn ball_average(f: &SampledField, t: f64) -> SampledField {
    let grid = f.grid;
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let mut radius = (t / h).ceil() as usize;
    while radius > 0 && radius as f64 * h >= t {
        radius -= 1;
    }
    let radius = radius.min(n / 2);
    let w = 2 * radius + 1;
    let pre_re = Prefix::new(&grid, |i| f.values[i].re);
    let pre_im = Prefix::new(&grid, |i| f.values[i].im);
    let cnt = cube_count(grid.dim(), w);
    let values = par::map_indexed(grid.len(), |pos| {
        // anchor the summation cube so the window is centered at pos
        let anchor = if grid.dim() == 1 {
            (pos + n - radius) % n
        } else {
            let (i, j) = (pos / n, pos % n);
            ((i + n - radius) % n) * n + (j + n - radius) % n
        };
        Complex64::new(pre_re.box_sum(anchor, w), pre_im.box_sum(anchor, w)) / cnt
    });
    SampledField { grid, values }
}

fn carleson_box_max(grid: &GridSpec, squares: &[(f64, Vec<f64>)], log_step: f64) -> f64 {
    let h = grid.spacing();
    let mut acc = vec![0.0f64; grid.len()];
    let mut next = 0usize;
    let mut best = 0.0f64;
    for w in cube_widths(grid) {
        let side = w as f64 * h;
        while next < squares.len() && squares[next].0 <= side {
            for (a, v) in acc.iter_mut().zip(&squares[next].1) {
                *a += v * log_step;
            }
            next += 1;
        }
        if next == 0 {
            continue;
        }
        let pre = Prefix::new(grid, |i| acc[i]);
        let cnt = cube_count(grid.dim(), w);
        let m = par::max_indexed(grid.len(), |pos| pre.box_sum(pos, w) / cnt);
        best = best.max(m);
    }
    best
}

/// Carleson norm of the measure |Q_t b(x)|^2 dx dt/t: sup over positioned
/// cubes Q of the mean over Q of sum_{t_j <= side} |Q_{t_j} b|^2 Delta.
pub fn carleson_norm(b: &SampledField, pair: &BumpPair, cfg: &NormConfig) -> f64 {
    let spec = forward_transform(b);
    let nodes = cfg.scales.nodes();
    let squares: Vec<(f64, Vec<f64>)> = par::map_indexed(nodes.len(), |j| {
        let t = nodes[j];
        let g = inverse_transform(&apply_qt_spectrum(pair, t, &spec));
        (t, g.values.iter().map(|v| v.norm_sqr()).collect())
    });
    carleson_box_max(&b.grid, &squares, cfg.scales.log_step())
}

/// Carleson norm of a supplied Littlewood-Paley family, one field per scale
/// node of cfg.scales.
pub fn carleson_norm_general(family: &[SampledField], cfg: &NormConfig) -> Result<f64> {
    let nodes = cfg.scales.nodes();
    if family.len() != nodes.len() {
        return Err(Error::InvalidParameter(format!(
            "family has {} fields for {} scale nodes",
            family.len(),
            nodes.len()
        )));
    }
    let grid = match family.first() {
        Some(f) => f.grid,
        None => return Ok(0.0),
    };
    if family.iter().any(|f| f.grid != grid) {
        return Err(Error::GridMismatch);
    }
    let squares: Vec<(f64, Vec<f64>)> = family
        .iter()
        .zip(nodes)
        .map(|(f, &t)| (t, f.values.iter().map(|v| v.norm_sqr()).collect()))
        .collect();
    Ok(carleson_box_max(&grid, &squares, cfg.scales.log_step()))
}

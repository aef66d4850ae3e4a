//! Bilinear operators: constant- and variable-coefficient paraproducts, the
//! two-component paraproduct split, commutators with multiplication by a
//! variable symbol, bilinear frequency multipliers with cone splitting, and
//! the fractional Leibniz decomposition.

use std::sync::Arc;

use num_complex::Complex64;

use crate::bumps::{
    apply_profile_spectrum, apply_pt_spectrum, apply_qt_spectrum, smooth_step, AuxiliaryFamily,
    BumpPair,
};
use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, SampledField, Spectrum};
use crate::par;
use crate::scale::ScaleGrid;

/// Bounded scalar coefficient m(t) of a constant-coefficient paraproduct.
#[derive(Clone)]
pub struct ScalarSymbol {
    m: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    m_bound: f64,
}

impl ScalarSymbol {
    pub fn new(m_bound: f64, m: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        ScalarSymbol { m: Arc::new(m), m_bound }
    }

    pub fn constant(c: Complex64) -> Self {
        ScalarSymbol { m: Arc::new(move |_| c), m_bound: c.norm() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        (self.m)(t)
    }

    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    /// Check |m(t)| <= m_bound on the given scale nodes.
    pub fn validate(&self, scales: &ScaleGrid) -> Result<()> {
        for &t in scales.nodes() {
            let v = self.eval(t).norm();
            if !(v <= self.m_bound * (1.0 + 1e-12) + 1e-300) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "|m({t})| = {v} exceeds declared bound {}",
                    self.m_bound
                )));
            }
        }
        Ok(())
    }
}

/// Variable coefficient m(t, x) with declared sup and gradient bounds.
#[derive(Clone)]
pub struct VariableSymbol {
    m: Arc<dyn Fn(f64, &[f64]) -> Complex64 + Send + Sync>,
    m_bound: f64,
    grad_bound: f64,
}

impl VariableSymbol {
    pub fn new(
        m_bound: f64,
        grad_bound: f64,
        m: impl Fn(f64, &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        VariableSymbol { m: Arc::new(m), m_bound, grad_bound }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Complex64 {
        (self.m)(t, x)
    }

    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }

    /// Sample m(t, .) on the grid.
    pub fn field_at(&self, grid: crate::field::GridSpec, t: f64) -> SampledField {
        let dim = grid.dim();
        SampledField::from_fn(grid, |x| (self.m)(t, &x[..dim]))
    }

    /// Measure sup_t ||m(t,.)||_inf and sup_t ||grad_x m(t,.)||_inf on the
    /// grid (gradient by spectral differentiation) and check them against the
    /// declared bounds.
    pub fn certify(&self, grid: crate::field::GridSpec, scales: &ScaleGrid) -> Result<(f64, f64)> {
        let mut sup_m = 0.0f64;
        let mut sup_grad = 0.0f64;
        for &t in scales.nodes() {
            let field = self.field_at(grid, t);
            sup_m = sup_m.max(field.max_abs());
            let spec = forward_transform(&field);
            for j in 0..grid.dim() {
                let mut d = Spectrum::zeros(grid);
                for (idx, c) in spec.coeffs.iter().enumerate() {
                    let xi = grid.freq(idx);
                    d.coeffs[idx] = c * Complex64::new(0.0, xi[j]);
                }
                sup_grad = sup_grad.max(inverse_transform(&d).max_abs());
            }
        }
        let slack = 1.0 + 1e-6;
        if sup_m > self.m_bound * slack {
            return Err(Error::InvalidParameter(format!(
                "measured sup |m| = {sup_m} exceeds declared bound {}",
                self.m_bound
            )));
        }
        if sup_grad > self.grad_bound * slack {
            return Err(Error::InvalidParameter(format!(
                "measured sup |grad m| = {sup_grad} exceeds declared bound {}",
                self.grad_bound
            )));
        }
        Ok((sup_m, sup_grad))
    }
}

/// Bilinear frequency symbol sigma(xi, eta).
#[derive(Clone)]
pub struct BilinearSymbol {
    sigma: Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>,
}

impl BilinearSymbol {
    pub fn new(sigma: impl Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        BilinearSymbol { sigma: Arc::new(sigma) }
    }

    pub fn one() -> Self {
        Self::new(|_, _| Complex64::new(1.0, 0.0))
    }

    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> Complex64 {
        (self.sigma)(xi, eta)
    }
}

fn mag(v: &[f64]) -> f64 {
    match v.len() {
        1 => v[0].abs(),
        _ => v[0].hypot(v[1]),
    }
}

/// Constant-coefficient paraproduct sum_j Q_{t_j} f * P_{t_j} g * m(t_j) *
/// Delta, summed over ascending scale nodes.
pub fn paraproduct_const(
    f: &SampledField,
    g: &SampledField,
    sym: &ScalarSymbol,
    pair: &BumpPair,
    scales: &ScaleGrid,
) -> Result<SampledField> {
    paraproduct_const_core(f, g, sym, pair, scales, true)
}

/// Single-threaded variant of [`paraproduct_const`]; kept for the benchmark
/// suite.
pub fn paraproduct_const_seq(
    f: &SampledField,
    g: &SampledField,
    sym: &ScalarSymbol,
    pair: &BumpPair,
    scales: &ScaleGrid,
) -> Result<SampledField> {
    paraproduct_const_core(f, g, sym, pair, scales, false)
}

fn paraproduct_const_core(
    f: &SampledField,
    g: &SampledField,
    sym: &ScalarSymbol,
    pair: &BumpPair,
    scales: &ScaleGrid,
    parallel: bool,
) -> Result<SampledField> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid;
    let fs = forward_transform(f);
    let gs = forward_transform(g);
    let delta = scales.log_step();
    let nodes = scales.nodes();
    let node = |j: usize| -> Vec<Complex64> {
        let t = nodes[j];
        let qf = inverse_transform(&apply_qt_spectrum(pair, t, &fs));
        let pg = inverse_transform(&apply_pt_spectrum(pair, t, &gs));
        let mt = sym.eval(t) * delta;
        qf.values.iter().zip(&pg.values).map(|(a, b)| a * b * mt).collect()
    };
    let contribs: Vec<Vec<Complex64>> = if parallel {
        par::map_indexed(nodes.len(), node)
    } else {
        par::map_indexed_seq(nodes.len(), node)
    };
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for c in &contribs {
        for (o, v) in out.iter_mut().zip(c) {
            *o += v;
        }
    }
    Ok(SampledField { grid, values: out })
}

/// Result of the paraproduct split, with the spectral mass clipped by the
/// outer plateaus (zero when the plateaus fully cover the product spectra).
pub struct SplitResult {
    pub pi1: SampledField,
    pub pi2: SampledField,
    /// Clipped fraction of the product spectral mass for each component.
    pub clipped_fraction: [f64; 2],
}

/// Split the paraproduct as Pi_1 + Pi_2 with the outer localizations applied
/// to the products; exact reconstruction when the auxiliary plateaus cover
/// the product spectra.
pub fn paraproduct_split(
    f: &SampledField,
    g: &SampledField,
    sym: &ScalarSymbol,
    aux: &AuxiliaryFamily,
    scales: &ScaleGrid,
) -> Result<SplitResult> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid;
    let pair = aux.pair();
    let fs = forward_transform(f);
    let gs = forward_transform(g);
    let delta = scales.log_step();
    let nodes = scales.nodes();
    // per node: (pi1 contrib, pi2 contrib, clipped l1 masses, total l1 masses)
    type NodeOut = (Vec<Complex64>, Vec<Complex64>, [f64; 2], [f64; 2]);
    let parts: Vec<NodeOut> = par::map_indexed(nodes.len(), |j| {
        let t = nodes[j];
        let mt = sym.eval(t) * delta;
        let qf = inverse_transform(&apply_qt_spectrum(pair, t, &fs));
        let p1g = inverse_transform(&apply_profile_spectrum(|r| aux.phi1_hat(r), 1.0, t, &gs));
        let q1g = inverse_transform(&apply_profile_spectrum(|r| aux.psi1_hat(r), 0.0, t, &gs));
        let mut clipped = [0.0f64; 2];
        let mut total = [0.0f64; 2];
        let mut localized = |prod: SampledField, comp: usize, outer: &dyn Fn(f64) -> f64| {
            let spec = forward_transform(&prod);
            let mut out = Spectrum::zeros(grid);
            for (idx, c) in spec.coeffs.iter().enumerate() {
                let r = grid.freq_mag(idx);
                let p = outer(t * r);
                total[comp] += c.norm();
                clipped[comp] += c.norm() * (1.0 - p);
                out.coeffs[idx] = c * p;
            }
            inverse_transform(&out)
        };
        let prod1 = SampledField {
            grid,
            values: qf.values.iter().zip(&p1g.values).map(|(a, b)| a * b).collect(),
        };
        let prod2 = SampledField {
            grid,
            values: qf.values.iter().zip(&q1g.values).map(|(a, b)| a * b).collect(),
        };
        let pi1 = localized(prod1, 0, &|r| aux.psi2_hat(r));
        let pi2 = localized(prod2, 1, &|r| aux.phi2_hat(r));
        (
            pi1.values.iter().map(|v| v * mt).collect(),
            pi2.values.iter().map(|v| v * mt).collect(),
            clipped,
            total,
        )
    });
    let mut pi1 = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut pi2 = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut clipped = [0.0f64; 2];
    let mut total = [0.0f64; 2];
    for (c1, c2, cl, tot) in &parts {
        for (o, v) in pi1.iter_mut().zip(c1) {
            *o += v;
        }
        for (o, v) in pi2.iter_mut().zip(c2) {
            *o += v;
        }
        for k in 0..2 {
            clipped[k] += cl[k];
            total[k] += tot[k];
        }
    }
    let frac = [0, 1].map(|k| if total[k] > 0.0 { clipped[k] / total[k] } else { 0.0 });
    Ok(SplitResult {
        pi1: SampledField { grid, values: pi1 },
        pi2: SampledField { grid, values: pi2 },
        clipped_fraction: frac,
    })
}

/// Variable-coefficient paraproduct over scales restricted to t <= 1.
pub fn paraproduct_var(
    f: &SampledField,
    g: &SampledField,
    vsym: &VariableSymbol,
    pair: &BumpPair,
    scales: &ScaleGrid,
) -> Result<SampledField> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    if let Some(&t) = scales.nodes().iter().find(|&&t| t > 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "variable paraproduct requires scale nodes <= 1, got {t}"
        )));
    }
    let grid = f.grid;
    let fs = forward_transform(f);
    let gs = forward_transform(g);
    let delta = scales.log_step();
    let nodes = scales.nodes();
    let contribs: Vec<Vec<Complex64>> = par::map_indexed(nodes.len(), |j| {
        let t = nodes[j];
        let qf = inverse_transform(&apply_qt_spectrum(pair, t, &fs));
        let pg = inverse_transform(&apply_pt_spectrum(pair, t, &gs));
        let mf = vsym.field_at(grid, t);
        qf.values
            .iter()
            .zip(&pg.values)
            .zip(&mf.values)
            .map(|((a, b), m)| a * b * m * delta)
            .collect()
    });
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for c in &contribs {
        for (o, v) in out.iter_mut().zip(c) {
            *o += v;
        }
    }
    Ok(SampledField { grid, values: out })
}

/// Empirical L1 operator norm of the commutator [P_t, M_m]: the max over
/// probes H of ||P_t(mH) - m P_t(H)||_L1 / ||H||_L1.
pub fn commutator_l1_norm(
    vsym: &VariableSymbol,
    pair: &BumpPair,
    t: f64,
    probes: &[SampledField],
) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::InvalidParameter("commutator needs at least one probe".into()));
    }
    let mut best = 0.0f64;
    for h in probes {
        let denom = h.l1_norm();
        if denom == 0.0 {
            return Err(Error::InvalidParameter("zero probe field".into()));
        }
        let grid = h.grid;
        let mf = vsym.field_at(grid, t);
        let mh = SampledField {
            grid,
            values: h.values.iter().zip(&mf.values).map(|(a, m)| a * m).collect(),
        };
        let pt_mh = inverse_transform(&apply_pt_spectrum(pair, t, &forward_transform(&mh)));
        let pt_h = inverse_transform(&apply_pt_spectrum(pair, t, &forward_transform(h)));
        let comm = SampledField {
            grid,
            values: pt_mh
                .values
                .iter()
                .zip(&pt_h.values)
                .zip(&mf.values)
                .map(|((a, b), m)| a - m * b)
                .collect(),
        };
        best = best.max(comm.l1_norm() / denom);
    }
    Ok(best)
}

/// Output of a bilinear multiplier application, with the spectral mass of
/// out-of-band interactions that were dropped.
pub struct CmResult {
    pub field: SampledField,
    pub dropped_mass: f64,
    pub kept_mass: f64,
}

/// Apply a bilinear frequency multiplier by the exact double mode sum,
/// dropping out-of-band output modes.
pub fn coifman_meyer_apply(
    f: &SampledField,
    g: &SampledField,
    bsym: &BilinearSymbol,
) -> Result<CmResult> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid;
    let n = grid.points_per_axis();
    let limit = if grid.dim() == 1 { 4096 } else { 256 };
    if n > limit {
        return Err(Error::InvalidParameter(format!(
            "bilinear double sum limited to N <= {limit} in dim {}, got {n}",
            grid.dim()
        )));
    }
    let dim = grid.dim();
    let fs = forward_transform(f);
    let gs = forward_transform(g);
    let active: Vec<usize> = (0..grid.len()).filter(|&k| fs.coeffs[k].norm() > 0.0).collect();
    // in-band pairs, grouped by output mode
    let out_coeffs: Vec<Complex64> = par::map_indexed(grid.len(), |kappa| {
        let km = grid.mode(kappa);
        let xi_out = grid.freq(kappa);
        let _ = xi_out;
        let mut acc = Complex64::new(0.0, 0.0);
        for &k in &active {
            let fk = fs.coeffs[k];
            let kmode = grid.mode(k);
            let lmode = [km[0] - kmode[0], km[1] - kmode[1]];
            let li = match grid.index_of_mode(&lmode[..dim]) {
                Some(i) => i,
                None => continue,
            };
            let gl = gs.coeffs[li];
            if gl.norm() == 0.0 {
                continue;
            }
            let xi = grid.freq(k);
            let eta = grid.freq(li);
            acc += bsym.eval(&xi[..dim], &eta[..dim]) * fk * gl;
        }
        acc
    });
    // out-of-band pairs: dropped mass
    let dropped: f64 = active
        .iter()
        .map(|&k| {
            let fk = fs.coeffs[k];
            let kmode = grid.mode(k);
            let xi = grid.freq(k);
            let mut d = 0.0;
            for (li, gl) in gs.coeffs.iter().enumerate() {
                if gl.norm() == 0.0 {
                    continue;
                }
                let lmode = grid.mode(li);
                let sum = [kmode[0] + lmode[0], kmode[1] + lmode[1]];
                if grid.index_of_mode(&sum[..dim]).is_some() {
                    continue;
                }
                let eta = grid.freq(li);
                d += (bsym.eval(&xi[..dim], &eta[..dim]) * fk * gl).norm();
            }
            d
        })
        .sum();
    let kept: f64 = out_coeffs.iter().map(|c| c.norm()).sum();
    let spec = Spectrum { grid, coeffs: out_coeffs };
    Ok(CmResult { field: inverse_transform(&spec), dropped_mass: dropped, kept_mass: kept })
}

fn cm_low_factor(xi_mag: f64, eta_mag: f64) -> f64 {
    // 1 where |eta| <= 10 |xi|, 0 where |eta| >= 20 |xi|
    if eta_mag <= 10.0 * xi_mag {
        1.0
    } else if eta_mag >= 20.0 * xi_mag {
        0.0
    } else {
        smooth_step((20.0 * xi_mag - eta_mag) / (10.0 * xi_mag))
    }
}

/// Split a bilinear symbol into sigma_1 supported in |xi| >= |eta|/20 and
/// sigma_2 supported in 10 |xi| <= |eta| by a smooth cutoff in |eta|/|xi|.
pub fn cm_split(bsym: &BilinearSymbol) -> (BilinearSymbol, BilinearSymbol) {
    let a = bsym.clone();
    let b = bsym.clone();
    let s1 = BilinearSymbol::new(move |xi, eta| {
        let chi = cm_low_factor(mag(xi), mag(eta));
        if chi == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            a.eval(xi, eta) * chi
        }
    });
    let s2 = BilinearSymbol::new(move |xi, eta| {
        let chi = cm_low_factor(mag(xi), mag(eta));
        if chi == 1.0 {
            Complex64::new(0.0, 0.0)
        } else {
            b.eval(xi, eta) * (1.0 - chi)
        }
    });
    (s1, s2)
}

/// Finite-difference derivative decay report for a bilinear symbol.
#[derive(Debug, Clone)]
pub struct HMReport {
    /// sups[a][b] = sup over sampled pairs of
    /// |d^a_xi d^b_eta sigma| (|xi|+|eta|)^(a+b).
    pub sups: Vec<Vec<f64>>,
    pub max_order: usize,
    /// True when the coarse sampling disagreed with the refined one and the
    /// refined result was kept.
    pub refined: bool,
    pub samples: usize,
}

impl HMReport {
    /// Largest sup among all derivative pairs with a + b <= max_order.
    pub fn worst(&self) -> f64 {
        let mut w = 0.0f64;
        for (a, row) in self.sups.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if a + b <= self.max_order {
                    w = w.max(v);
                }
            }
        }
        w
    }
}

fn fd_stencil(order: usize) -> Vec<(i64, f64)> {
    match order {
        0 => vec![(0, 1.0)],
        1 => vec![(-1, -0.5), (1, 0.5)],
        2 => vec![(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => vec![(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => vec![(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => vec![(-3, -0.5), (-2, 2.0), (-1, -2.5), (1, 2.5), (2, -2.0), (3, 0.5)],
    }
}

fn hm_pass(bsym: &BilinearSymbol, max_order: usize, eps: f64) -> (Vec<Vec<f64>>, usize) {
    // geometric magnitudes with both signs, scale-relative step
    let mags: Vec<f64> = (-6..=14).map(|k| 2f64.powf(k as f64 * 0.5)).collect();
    let mut points = Vec::new();
    for &mx in &mags {
        for sx in [-1.0, 1.0] {
            for &my in &mags {
                for sy in [-1.0, 1.0] {
                    points.push((sx * mx, sy * my));
                }
            }
        }
    }
    let mut sups = vec![vec![0.0f64; max_order + 1]; max_order + 1];
    let per_point: Vec<Vec<Vec<f64>>> = par::map_indexed(points.len(), |p| {
        let (xi, eta) = points[p];
        let scale = xi.abs() + eta.abs();
        let h = eps * scale;
        let mut local = vec![vec![0.0f64; max_order + 1]; max_order + 1];
        for a in 0..=max_order {
            for b in 0..=max_order {
                if a + b > max_order {
                    continue;
                }
                let sa = fd_stencil(a);
                let sb = fd_stencil(b);
                let mut d = Complex64::new(0.0, 0.0);
                for &(i, ca) in &sa {
                    for &(j, cb) in &sb {
                        let x = xi + i as f64 * h;
                        let y = eta + j as f64 * h;
                        d += bsym.eval(&[x], &[y]) * (ca * cb);
                    }
                }
                let deriv = d.norm() / h.powi((a + b) as i32);
                local[a][b] = deriv * scale.powi((a + b) as i32);
            }
        }
        local
    });
    for local in &per_point {
        for a in 0..=max_order {
            for b in 0..=max_order {
                sups[a][b] = sups[a][b].max(local[a][b]);
            }
        }
    }
    (sups, points.len())
}

/// Check the derivative decay |d^a_xi d^b_eta sigma| <= C (|xi|+|eta|)^-(a+b)
/// by central finite differences on a geometric frequency sampling; retried
/// once at doubled resolution when the two passes disagree.
pub fn hm_symbol_check(bsym: &BilinearSymbol, max_order: usize) -> Result<HMReport> {
    if max_order > 5 {
        return Err(Error::InvalidParameter(
            "finite-difference stencils are tabulated up to order 5".into(),
        ));
    }
    let (coarse, samples) = hm_pass(bsym, max_order, 0.04);
    let (fine, _) = hm_pass(bsym, max_order, 0.02);
    let mut disagree = false;
    for a in 0..=max_order {
        for b in 0..=max_order {
            if a + b > max_order {
                continue;
            }
            let (c, f) = (coarse[a][b], fine[a][b]);
            if c.max(f) > 1e-8 && (c - f).abs() / c.max(f) > 0.2 {
                disagree = true;
            }
        }
    }
    Ok(HMReport { sups: fine, max_order, refined: disagree, samples })
}

fn kp_chi1(r: f64) -> f64 {
    if r <= 0.5 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        smooth_step((1.0 - r) / 0.5)
    }
}

fn kp_rho(r: f64) -> f64 {
    if r <= 2.0 {
        1.0
    } else if r >= 4.0 {
        0.0
    } else {
        smooth_step((4.0 - r) / 2.0)
    }
}

fn sum_mag(xi: &[f64], eta: &[f64]) -> f64 {
    match xi.len() {
        1 => (xi[0] + eta[0]).abs(),
        _ => (xi[0] + eta[0]).hypot(xi[1] + eta[1]),
    }
}

/// Conic decomposition for the fractional Leibniz rule: three symbols
/// (sigma_1, sigma_2, sigma_3) such that
/// D^s(fg) = sigma_1(D)(D^s f, g) + sigma_2(D)(f, D^s g) + sigma_3(D)(f, D^s g)
/// exactly at every frequency pair.
pub fn kato_ponce_decompose(
    s: f64,
) -> Result<(BilinearSymbol, BilinearSymbol, BilinearSymbol)> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("fractional order must be positive, got {s}")));
    }
    let s1 = BilinearSymbol::new(move |xi, eta| {
        let (mx, my) = (mag(xi), mag(eta));
        if mx == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let chi = kp_chi1(my / mx);
        if chi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(sum_mag(xi, eta).powf(s) * chi / mx.powf(s), 0.0)
    });
    let s2 = BilinearSymbol::new(move |xi, eta| {
        let (mx, my) = (mag(xi), mag(eta));
        if my == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let r = if mx == 0.0 { f64::INFINITY } else { my / mx };
        let c = (1.0 - kp_chi1(r)) * kp_rho(r);
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(sum_mag(xi, eta).powf(s) * c / my.powf(s), 0.0)
    });
    let s3 = BilinearSymbol::new(move |xi, eta| {
        let (mx, my) = (mag(xi), mag(eta));
        if my == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let r = if mx == 0.0 { f64::INFINITY } else { my / mx };
        let c = (1.0 - kp_chi1(r)) * (1.0 - kp_rho(r));
        if c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(sum_mag(xi, eta).powf(s) * c / my.powf(s), 0.0)
    });
    Ok((s1, s2, s3))
}

/// Discrete duality pairing sum u conj(v) h^dim.
pub fn duality_pairing(u: &SampledField, v: &SampledField) -> Result<Complex64> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    let acc: Complex64 = u.values.iter().zip(&v.values).map(|(a, b)| a * b.conj()).sum();
    Ok(acc * u.grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bumps::BumpProfile;
    use crate::field::{
        fractional_derivative, pointwise_product, GridSpec,
    };
    use crate::oracles;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::new(1, n, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn test_pair() -> BumpPair {
        BumpPair::new(1.0, 4.0, BumpProfile::Exponential).unwrap()
    }

    fn band_limited(grid: GridSpec, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = grid.points_per_axis() as i64;
        let mut spec = Spectrum::zeros(grid);
        for (idx, c) in spec.coeffs.iter_mut().enumerate() {
            let k = grid.mode(idx);
            if (0..grid.dim()).all(|a| k[a].abs() < n / 4) {
                *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        inverse_transform(&spec)
    }

    fn test_scales(grid: &GridSpec, pair: &BumpPair) -> ScaleGrid {
        ScaleGrid::covering(grid, pair.alpha(), pair.beta(), 16).unwrap()
    }

    fn rel_err(a: &SampledField, b: &SampledField) -> f64 {
        let denom = b.max_abs().max(1e-300);
        a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0f64, f64::max)
            / denom
    }

    #[test]
    fn paraproduct_zero_symbol_and_bilinearity() {
        let grid = grid1(64);
        let pair = test_pair();
        let scales = test_scales(&grid, &pair);
        let f = band_limited(grid, 1);
        let g = band_limited(grid, 2);
        let z = paraproduct_const(&f, &g, &ScalarSymbol::constant(Complex64::new(0.0, 0.0)), &pair, &scales)
            .unwrap();
        assert_eq!(z.max_abs(), 0.0);

        let lam = Complex64::new(2.0, -0.5);
        let a = paraproduct_const(&f.scaled(lam), &g, &ScalarSymbol::one(), &pair, &scales).unwrap();
        let b = paraproduct_const(&f, &g, &ScalarSymbol::one(), &pair, &scales)
            .unwrap()
            .scaled(lam);
        assert!(rel_err(&a, &b) < 1e-12);
    }

    #[test]
    fn paraproduct_matches_direct_sum() {
        let grid = grid1(64);
        let pair = test_pair();
        let scales = ScaleGrid::covering(&grid, pair.alpha(), pair.beta(), 8).unwrap();
        let f = band_limited(grid, 3);
        let g = band_limited(grid, 4);
        let fast = paraproduct_const(&f, &g, &ScalarSymbol::one(), &pair, &scales).unwrap();
        let slow = oracles::paraproduct_direct(&f, &g, |_| Complex64::new(1.0, 0.0), &pair, &scales);
        assert!(rel_err(&fast, &slow) < 1e-9, "error {}", rel_err(&fast, &slow));
    }

    #[test]
    fn split_reconstruction() {
        let grid = grid1(128);
        let pair = test_pair();
        let aux = AuxiliaryFamily::new(&pair);
        let scales = test_scales(&grid, &pair);
        let sym = ScalarSymbol::new(1.0, |t| Complex64::new((t.ln() * 0.7).cos(), 0.0));
        let f = band_limited(grid, 5);
        let g = band_limited(grid, 6);
        let whole = paraproduct_const(&f, &g, &sym, &pair, &scales).unwrap();
        let split = paraproduct_split(&f, &g, &sym, &aux, &scales).unwrap();
        let sum = split.pi1.add(&split.pi2).unwrap();
        assert!(rel_err(&sum, &whole) < 1e-9, "error {}", rel_err(&sum, &whole));
        assert!(split.clipped_fraction[0] < 1e-9 && split.clipped_fraction[1] < 1e-9);
    }

    #[test]
    fn split_pi2_vanishes_for_constant_g() {
        let grid = grid1(64);
        let pair = test_pair();
        let aux = AuxiliaryFamily::new(&pair);
        let scales = test_scales(&grid, &pair);
        let f = band_limited(grid, 7);
        let g = SampledField::constant(grid, Complex64::new(2.0, 0.0));
        let split = paraproduct_split(&f, &g, &ScalarSymbol::one(), &aux, &scales).unwrap();
        assert!(split.pi2.max_abs() < 1e-13, "psi1 kills the constant slot");
        let zero = paraproduct_split(
            &f,
            &g,
            &ScalarSymbol::constant(Complex64::new(0.0, 0.0)),
            &aux,
            &scales,
        )
        .unwrap();
        assert_eq!(zero.pi1.max_abs(), 0.0);
        assert_eq!(zero.pi2.max_abs(), 0.0);
    }

    #[test]
    fn variable_paraproduct_reduces_to_constant() {
        let grid = grid1(64);
        let pair = test_pair();
        let scales = test_scales(&grid, &pair).restricted(1.0);
        let f = band_limited(grid, 8);
        let g = band_limited(grid, 9);
        let c = Complex64::new(0.3, 0.7);
        let vsym = VariableSymbol::new(c.norm(), 1e-9, move |_, _| c);
        let a = paraproduct_var(&f, &g, &vsym, &pair, &scales).unwrap();
        let b = paraproduct_const(&f, &g, &ScalarSymbol::constant(c), &pair, &scales).unwrap();
        assert!(rel_err(&a, &b) < 1e-12);
    }

    #[test]
    fn variable_paraproduct_matches_direct_sum() {
        let grid = grid1(64);
        let pair = test_pair();
        let scales = ScaleGrid::covering(&grid, pair.alpha(), pair.beta(), 8)
            .unwrap()
            .restricted(1.0);
        let m = |t: f64, x: &[f64]| Complex64::new((x[0] + t.ln()).sin(), 0.0);
        let vsym = VariableSymbol::new(1.0, 1.0, m);
        let f = band_limited(grid, 10);
        let g = band_limited(grid, 11);
        let fast = paraproduct_var(&f, &g, &vsym, &pair, &scales).unwrap();
        let slow = oracles::paraproduct_var_direct(&f, &g, m, &pair, &scales);
        assert!(rel_err(&fast, &slow) < 1e-9, "error {}", rel_err(&fast, &slow));
    }

    #[test]
    fn variable_paraproduct_rejects_large_scales() {
        let grid = grid1(64);
        let pair = test_pair();
        let scales = test_scales(&grid, &pair);
        assert!(scales.nodes().iter().any(|&t| t > 1.0));
        let f = band_limited(grid, 12);
        let vsym = VariableSymbol::new(1.0, 1.0, |_, _| Complex64::new(1.0, 0.0));
        assert!(paraproduct_var(&f, &f, &vsym, &pair, &scales).is_err());
    }

    #[test]
    fn symbol_certification() {
        let grid = grid1(64);
        let pair = test_pair();
        let scales = test_scales(&grid, &pair).restricted(1.0);
        let good = VariableSymbol::new(1.0, 1.0, |_, x| Complex64::new(x[0].sin(), 0.0));
        let (sm, sg) = good.certify(grid, &scales).unwrap();
        assert!(sm <= 1.0 + 1e-9 && sg <= 1.0 + 1e-9);
        let lying = VariableSymbol::new(0.1, 1.0, |_, x| Complex64::new(x[0].sin(), 0.0));
        assert!(lying.certify(grid, &scales).is_err());
        let bad_m = ScalarSymbol::new(0.5, |_| Complex64::new(1.0, 0.0));
        assert!(bad_m.validate(&scales).is_err());
        assert!(ScalarSymbol::one().validate(&scales).is_ok());
    }

    #[test]
    fn commutator_vanishes_for_constant_symbol() {
        let grid = grid1(64);
        let pair = test_pair();
        let vsym = VariableSymbol::new(2.0, 1e-12, |_, _| Complex64::new(2.0, 0.0));
        let probes = vec![band_limited(grid, 13)];
        let v = commutator_l1_norm(&vsym, &pair, 0.5, &probes).unwrap();
        assert!(v < 1e-13, "got {v}");
    }

    #[test]
    fn commutator_linear_in_t() {
        let grid = grid1(128);
        let pair = test_pair();
        let vsym = VariableSymbol::new(1.0, 1.0, |_, x| Complex64::new(x[0].sin(), 0.0));
        // Spike probes sample the kernel moment directly, which is the
        // quantity with the clean O(t) scaling.  The scale range stays well
        // above the grid resolution so the kernel is actually resolved.
        let probes: Vec<SampledField> = [0usize, 37, 90]
            .iter()
            .map(|&i| {
                let mut s = SampledField::zeros(grid);
                s.values[i] = Complex64::new(1.0, 0.0);
                s
            })
            .collect();
        let ks: Vec<f64> = (1..=5).map(|k| k as f64).collect();
        let logs: Vec<f64> = ks
            .iter()
            .map(|&k| {
                commutator_l1_norm(&vsym, &pair, 2f64.powf(-k), &probes).unwrap().ln()
            })
            .collect();
        // least-squares slope of log ratio vs log t
        let xs: Vec<f64> = ks.iter().map(|&k| -k * 2f64.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = logs.iter().sum::<f64>() / n;
        let slope = xs
            .iter()
            .zip(&logs)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((0.8..=1.2).contains(&slope), "slope {slope}");
    }

    #[test]
    fn commutator_spike_matches_kernel_oracle() {
        let grid = grid1(64);
        let pair = test_pair();
        let m = |_t: f64, x: &[f64]| Complex64::new(x[0].sin(), 0.0);
        let vsym = VariableSymbol::new(1.0, 1.0, m);
        let mut spike = SampledField::zeros(grid);
        spike.values[17] = Complex64::new(1.0, 0.0);
        let fast = commutator_l1_norm(&vsym, &pair, 0.5, &[spike]).unwrap();
        let slow = oracles::commutator_kernel_ratio(&pair, m, 0.5, 17, grid);
        assert!((fast - slow).abs() < 1e-8 * slow.max(1.0), "{fast} vs {slow}");
    }

    #[test]
    fn cm_one_is_multiplication() {
        let grid = grid1(64);
        let f = band_limited(grid, 30);
        let g = band_limited(grid, 31);
        let out = coifman_meyer_apply(&f, &g, &BilinearSymbol::one()).unwrap();
        let prod = pointwise_product(&f, &g).unwrap();
        assert!(rel_err(&out.field, &prod) < 1e-10);
        assert!(out.dropped_mass < 1e-12 * out.kept_mass.max(1.0));
    }

    #[test]
    fn cm_rank_one_case() {
        let grid = grid1(64);
        let f = SampledField::from_fn(grid, |x| Complex64::new(0.0, 3.0 * x[0]).exp());
        let g = SampledField::from_fn(grid, |x| Complex64::new(0.0, 5.0 * x[0]).exp());
        let bsym = BilinearSymbol::new(|xi, eta| {
            Complex64::new(xi[0] / (xi[0].abs() + eta[0].abs()), 0.0)
        });
        let out = coifman_meyer_apply(&f, &g, &bsym).unwrap();
        let expect = SampledField::from_fn(grid, |x| {
            Complex64::new(0.0, 8.0 * x[0]).exp() * (3.0 / 8.0)
        });
        assert!(rel_err(&out.field, &expect) < 1e-12);
    }

    #[test]
    fn cm_matches_spatial_oracle() {
        let grid = grid1(64);
        let bsym = BilinearSymbol::new(|xi, eta| {
            let d = xi[0].abs() + eta[0].abs();
            if d == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(eta[0] / d, xi[0] / d)
            }
        });
        let f = band_limited(grid, 32);
        let g = band_limited(grid, 33);
        let fast = coifman_meyer_apply(&f, &g, &bsym).unwrap();
        let slow = oracles::coifman_meyer_direct(&f, &g, &bsym);
        assert!(rel_err(&fast.field, &slow) < 1e-9);
    }

    #[test]
    fn cm_reports_dropped_mass() {
        let grid = grid1(64);
        // full-band inputs interact outside the band
        let mut spec = Spectrum::zeros(grid);
        spec.set_mode(&[20], Complex64::new(1.0, 0.0));
        let f = inverse_transform(&spec);
        let out = coifman_meyer_apply(&f, &f, &BilinearSymbol::one()).unwrap();
        assert!(out.dropped_mass > 0.0, "mode 40 is out of band for N = 64");
    }

    #[test]
    fn cm_split_partition() {
        let bsym = BilinearSymbol::new(|xi, eta| {
            Complex64::new((xi[0] * 0.3).cos(), (eta[0] * 0.1).sin())
        });
        let (s1, s2) = cm_split(&bsym);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10_000 {
            let xi = [rng.gen_range(-100.0..100.0)];
            let eta = [rng.gen_range(-100.0..100.0)];
            let total = s1.eval(&xi, &eta) + s2.eval(&xi, &eta);
            assert!((total - bsym.eval(&xi, &eta)).norm() < 1e-12);
        }
        // support arithmetic
        assert_eq!(s1.eval(&[1.0], &[100.0]).norm(), 0.0);
        assert!((s2.eval(&[1.0], &[100.0]) - bsym.eval(&[1.0], &[100.0])).norm() < 1e-12);
        let mid = s1.eval(&[1.0], &[5.0]) + s2.eval(&[1.0], &[5.0]);
        assert!((mid - bsym.eval(&[1.0], &[5.0])).norm() < 1e-12);
    }

    #[test]
    fn hm_check_constant_symbol() {
        let report = hm_symbol_check(&BilinearSymbol::one(), 3).unwrap();
        assert!((report.sups[0][0] - 1.0).abs() < 1e-9);
        for a in 0..=3usize {
            for b in 0..=3usize {
                if a + b > 0 && a + b <= 3 {
                    assert!(report.sups[a][b] < 1e-4, "order ({a},{b}): {}", report.sups[a][b]);
                }
            }
        }
        assert!(hm_symbol_check(&BilinearSymbol::one(), 6).is_err());
    }

    #[test]
    fn hm_check_rejects_unbounded_symbol() {
        let bad = BilinearSymbol::new(|xi, _| Complex64::new(xi[0].abs(), 0.0));
        let report = hm_symbol_check(&bad, 0).unwrap();
        assert!(report.sups[0][0] > 10.0, "unbounded symbol should blow up the order-0 sup");
    }

    #[test]
    fn hm_check_kato_ponce_piece_stable() {
        let (s1, _, _) = kato_ponce_decompose(2.0).unwrap();
        let report = hm_symbol_check(&s1, 2).unwrap();
        assert!(report.worst().is_finite());
        assert!(report.sups[0][0] <= 4.0, "order-0 sup {}", report.sups[0][0]);
    }

    #[test]
    fn kato_ponce_reconstruction() {
        let grid = grid1(128);
        let s = 1.5;
        let (s1, s2, s3) = kato_ponce_decompose(s).unwrap();
        let f = band_limited(grid, 40);
        let g = band_limited(grid, 41);
        let lhs = fractional_derivative(&pointwise_product(&f, &g).unwrap(), s).unwrap();
        let dsf = fractional_derivative(&f, s).unwrap();
        let dsg = fractional_derivative(&g, s).unwrap();
        let t1 = coifman_meyer_apply(&dsf, &g, &s1).unwrap().field;
        let t2 = coifman_meyer_apply(&f, &dsg, &s2).unwrap().field;
        let t3 = coifman_meyer_apply(&f, &dsg, &s3).unwrap().field;
        let rhs = t1.add(&t2).unwrap().add(&t3).unwrap();
        assert!(rel_err(&rhs, &lhs) < 1e-9, "error {}", rel_err(&rhs, &lhs));
    }

    #[test]
    fn kato_ponce_cone_interior() {
        let grid = grid1(64);
        let s = 2.0;
        let (s1, s2, s3) = kato_ponce_decompose(s).unwrap();
        let f = SampledField::from_fn(grid, |x| Complex64::new(0.0, 8.0 * x[0]).exp());
        let g = SampledField::from_fn(grid, |x| Complex64::new(0.0, 2.0 * x[0]).exp());
        let dsf = fractional_derivative(&f, s).unwrap();
        let dsg = fractional_derivative(&g, s).unwrap();
        let t1 = coifman_meyer_apply(&dsf, &g, &s1).unwrap().field;
        let t2 = coifman_meyer_apply(&f, &dsg, &s2).unwrap().field;
        let t3 = coifman_meyer_apply(&f, &dsg, &s3).unwrap().field;
        assert!(t2.max_abs() < 1e-11 && t3.max_abs() < 1e-11);
        let expect = SampledField::from_fn(grid, |x| {
            Complex64::new(0.0, 10.0 * x[0]).exp() * 10f64.powf(s)
        });
        assert!(rel_err(&t1, &expect) < 1e-10);
        assert!(kato_ponce_decompose(0.0).is_err());
        assert!(kato_ponce_decompose(-1.0).is_err());
    }

    #[test]
    fn duality_pairing_conventions() {
        let grid = grid1(64);
        let u = SampledField::from_fn(grid, |x| Complex64::new(0.0, 3.0 * x[0]).exp());
        let v = SampledField::from_fn(grid, |x| Complex64::new(0.0, 5.0 * x[0]).exp());
        let same = duality_pairing(&u, &u).unwrap();
        assert!((same - Complex64::new(grid.period(), 0.0)).norm() < 1e-10);
        assert!(duality_pairing(&u, &v).unwrap().norm() < 1e-12);

        // spectral cross-check: <u, v> = L^dim sum uhat conj(vhat)
        let f = band_limited(grid, 50);
        let g = band_limited(grid, 51);
        let direct = duality_pairing(&f, &g).unwrap();
        let fs = forward_transform(&f);
        let gs = forward_transform(&g);
        let spectral: Complex64 =
            fs.coeffs.iter().zip(&gs.coeffs).map(|(a, b)| a * b.conj()).sum::<Complex64>()
                * grid.period().powi(grid.dim() as i32);
        assert!((direct - spectral).norm() < 1e-9 * direct.norm().max(1.0));
    }
}

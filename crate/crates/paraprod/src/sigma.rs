//! The weighted radial symbol sigma_w(xi) = (int |psi-hat(t xi)|^2 w(t)^2
//! dt/t)^(1/2), the multiplier operators it induces, and a finite-difference
//! certificate for its Mikhlin-type derivative bounds.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;

use crate::bumps::BumpPair;
use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, GridSpec, SampledField, Spectrum};
use crate::scale::ScaleGrid;
use crate::weights::AdmissibleWeight;

/// Quadrature of the weighted Calderon integral at a single frequency
/// magnitude.
pub fn compute_sigma(
    w: &AdmissibleWeight,
    pair: &BumpPair,
    scales: &ScaleGrid,
    xi_mag: f64,
) -> Result<f64> {
    if !(xi_mag > 0.0) {
        return Err(Error::InvalidParameter(format!("xi magnitude must be positive, got {xi_mag}")));
    }
    if !scales.covers_annulus(pair.alpha(), pair.beta(), xi_mag) {
        return Err(Error::ScaleCoverage {
            xi_mag,
            need_min: pair.alpha() / xi_mag,
            need_max: pair.beta() / xi_mag,
            have_min: scales.t_min(),
            have_max: scales.t_max(),
        });
    }
    let sum: f64 = scales
        .nodes()
        .iter()
        .map(|&t| {
            let p = pair.psi_hat(t * xi_mag);
            p * p * w.eval(t).powi(2) * scales.log_step()
        })
        .sum();
    Ok(sum.sqrt())
}

/// sigma_w cached at every grid frequency magnitude; immutable after
/// construction and freely shareable.
pub struct SigmaSymbol {
    weight: AdmissibleWeight,
    pair: BumpPair,
    scales: ScaleGrid,
    grid: GridSpec,
    cache: HashMap<u64, f64>,
}

impl SigmaSymbol {
    /// Build the radial cache; the scale grid is derived from the pair and
    /// grid so every nonzero grid frequency is covered.
    pub fn new(w: &AdmissibleWeight, pair: &BumpPair, grid: GridSpec) -> Result<Self> {
        let scales = ScaleGrid::covering(&grid, pair.alpha(), pair.beta(), 64)?;
        let mut cache = HashMap::new();
        for idx in 0..grid.len() {
            let r = grid.freq_mag(idx);
            if r == 0.0 {
                continue;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(r.to_bits()) {
                e.insert(compute_sigma(w, pair, &scales, r)?);
            }
        }
        Ok(SigmaSymbol { weight: w.clone(), pair: pair.clone(), scales, grid, cache })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn weight(&self) -> &AdmissibleWeight {
        &self.weight
    }

    pub fn pair(&self) -> &BumpPair {
        &self.pair
    }

    pub fn scales(&self) -> &ScaleGrid {
        &self.scales
    }

    /// Cached value at a grid frequency magnitude, recomputing for off-grid
    /// magnitudes (used by the finite-difference certificate).
    pub fn value(&self, xi_mag: f64) -> Result<f64> {
        if let Some(v) = self.cache.get(&xi_mag.to_bits()) {
            return Ok(*v);
        }
        compute_sigma(&self.weight, &self.pair, &self.scales, xi_mag)
    }

    /// Content hash of the defining parameters, usable as a recomputation key.
    pub fn cache_key(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.weight.label().hash(&mut h);
        self.pair.alpha().to_bits().hash(&mut h);
        self.pair.beta().to_bits().hash(&mut h);
        self.grid.dim().hash(&mut h);
        self.grid.points_per_axis().hash(&mut h);
        self.grid.period().to_bits().hash(&mut h);
        self.scales.t_min().to_bits().hash(&mut h);
        self.scales.t_max().to_bits().hash(&mut h);
        h.finish()
    }

    fn apply_cached(&self, f: &SampledField, invert: bool) -> Result<SampledField> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let spec = forward_transform(f);
        let mut out = Spectrum::zeros(self.grid);
        for (idx, c) in spec.coeffs.iter().enumerate() {
            let r = self.grid.freq_mag(idx);
            if r == 0.0 {
                continue; // DC annihilated
            }
            let s = self.cache[&r.to_bits()];
            out.coeffs[idx] = if invert { c / s } else { c * s };
        }
        Ok(inverse_transform(&out))
    }

    /// I_{sigma_w}: multiplier sigma_w(|xi|), zero mode annihilated.
    pub fn apply_i_sigma(&self, f: &SampledField) -> Result<SampledField> {
        self.apply_cached(f, false)
    }

    /// I_{1/sigma_w}: multiplier 1/sigma_w(|xi|), zero mode annihilated.
    pub fn apply_i_inv_sigma(&self, f: &SampledField) -> Result<SampledField> {
        self.apply_cached(f, true)
    }
}

/// Finite-difference certificate for the derivative bounds
/// |d^k sigma_w| <= C w(1/|xi|) |xi|^-k and the dual bound for 1/sigma_w.
#[derive(Debug, Clone)]
pub struct MikhlinReport {
    /// sup over sampled xi of |d^k sigma| |xi|^k / w(1/|xi|), k = 0..order.
    pub sigma_ratios: Vec<f64>,
    /// sup over sampled xi of |d^k (1/sigma)| |xi|^k * w(1/|xi|).
    pub inv_ratios: Vec<f64>,
    /// sup of 1/sigma_w (the boundedness part of the lemma).
    pub inv_sup: f64,
    pub samples: usize,
}

pub fn check_mikhlin(sym: &SigmaSymbol, max_order: usize) -> Result<MikhlinReport> {
    if max_order > 2 {
        return Err(Error::InvalidParameter(
            "central finite differences on the radial cache support max_order <= 2".into(),
        ));
    }
    let grid = sym.grid();
    // refined radial sampling at 8x the grid frequency resolution
    let step = grid.min_freq() / 8.0;
    let lo = grid.min_freq();
    let hi = grid.max_freq();
    let mut sigma_ratios = vec![0.0f64; max_order + 1];
    let mut inv_ratios = vec![0.0f64; max_order + 1];
    let mut inv_sup = 0.0f64;
    let mut samples = 0usize;
    let mut xi = lo;
    while xi <= hi {
        // need room for the central stencil inside the covered range
        if xi - step * max_order as f64 <= 0.0 {
            xi += step;
            continue;
        }
        let at = |k: i64| -> Result<f64> { sym.value(xi + k as f64 * step) };
        let s0 = at(0)?;
        let wv = sym.weight().eval(1.0 / xi);
        inv_sup = inv_sup.max(1.0 / s0);
        for order in 0..=max_order {
            // central difference of the given order
            let d = match order {
                0 => s0,
                1 => (at(1)? - at(-1)?) / (2.0 * step),
                _ => (at(1)? - 2.0 * s0 + at(-1)?) / (step * step),
            };
            let ratio = d.abs() * xi.powi(order as i32) / wv;
            sigma_ratios[order] = sigma_ratios[order].max(ratio);
            let di = match order {
                0 => 1.0 / s0,
                1 => (1.0 / at(1)? - 1.0 / at(-1)?) / (2.0 * step),
                _ => (1.0 / at(1)? - 2.0 / s0 + 1.0 / at(-1)?) / (step * step),
            };
            let ratio_i = di.abs() * xi.powi(order as i32) * wv;
            inv_ratios[order] = inv_ratios[order].max(ratio_i);
        }
        samples += 1;
        // geometric stride keeps the sample count manageable while still
        // visiting every octave densely
        xi = (xi + step).max(xi * (1.0 + 1.0 / 64.0));
    }
    Ok(MikhlinReport { sigma_ratios, inv_ratios, inv_sup, samples })
}

/// Materialize the convolution kernel K_t(z) of R_t = w(t) psi2(tD) / sigma_w
/// on the grid (diagnostic for its t^{-n} size bound).
pub fn carleson_kernel(sym: &SigmaSymbol, psi2: impl Fn(f64) -> f64, t: f64) -> SampledField {
    let grid = sym.grid();
    let mut spec = Spectrum::zeros(grid);
    let wt = sym.weight().eval(t);
    // continuum dj-xi normalization: each mode carries 1/L^dim
    let mode_weight = 1.0 / grid.period().powi(grid.dim() as i32);
    for idx in 0..grid.len() {
        let r = grid.freq_mag(idx);
        if r == 0.0 {
            continue;
        }
        let s = sym.value(r).unwrap_or(f64::INFINITY);
        spec.coeffs[idx] = Complex64::new(wt * psi2(t * r) / s * mode_weight, 0.0);
    }
    inverse_transform(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bumps::{AuxiliaryFamily, BumpProfile};
    use crate::weights;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, w: &AdmissibleWeight) -> (GridSpec, BumpPair, SigmaSymbol) {
        let grid = GridSpec::new(1, n, 2.0 * std::f64::consts::PI).unwrap();
        let pair = BumpPair::new(1.0, 4.0, BumpProfile::Exponential).unwrap();
        let sym = SigmaSymbol::new(w, &pair, grid).unwrap();
        (grid, pair, sym)
    }

    fn random_mean_zero(grid: GridSpec, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SampledField::new(
            grid,
            (0..grid.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let m = f.mean();
        f = f.sub(&SampledField::constant(grid, m)).unwrap();
        f
    }

    #[test]
    fn unit_weight_gives_sigma_one() {
        let (grid, _, sym) = setup(64, &AdmissibleWeight::unit());
        for idx in 1..grid.len() {
            let r = grid.freq_mag(idx);
            if r == 0.0 {
                continue;
            }
            let v = sym.value(r).unwrap();
            assert!((v - 1.0).abs() < 1e-6, "sigma({r}) = {v}");
        }
    }

    #[test]
    fn sigma_comparable_to_weight_of_inverse_frequency() {
        let (grid, _, sym) = setup(256, &AdmissibleWeight::log());
        let mut ratios = Vec::new();
        for k in 1..=(grid.points_per_axis() / 2) {
            let r = k as f64 * grid.min_freq();
            let v = sym.value(r).unwrap();
            ratios.push(v / sym.weight().eval(1.0 / r));
        }
        let max = ratios.iter().cloned().fold(0.0f64, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 3.0, "equivalence constant {}", max / min);
    }

    #[test]
    fn sigma_ratio_within_certified_weight_bounds() {
        let (_, pair, sym) = setup(64, &AdmissibleWeight::log());
        let cert = weights::ratio_bounds(
            &AdmissibleWeight::log(),
            2.0,
            &weights::axiom_scale_grid(),
        )
        .unwrap();
        let v1 = sym.value(1.0).unwrap();
        let v2 = sym.value(2.0).unwrap();
        // sigma(2)/sigma(1) = sqrt of a weighted average of (w(t/2)/w(t))^2
        // hence lies within the s = 1/2 ratio envelope = [1, 1/i(2)] range
        let ratio = v2 / v1;
        assert!(ratio >= cert.inf_ratio.min(1.0) - 1e-9);
        assert!(ratio <= 1.0 / cert.inf_ratio + 1e-9);
        let _ = pair;
    }

    #[test]
    fn radial_cache_and_lower_bound() {
        let (grid, _, sym) = setup(64, &AdmissibleWeight::log());
        for idx in 0..grid.len() {
            let r = grid.freq_mag(idx);
            if r == 0.0 {
                continue;
            }
            assert!(sym.value(r).unwrap() >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn inverse_composition_is_identity_on_mean_zero() {
        let (grid, _, sym) = setup(64, &AdmissibleWeight::log());
        let f = random_mean_zero(grid, 3);
        let g = sym.apply_i_inv_sigma(&sym.apply_i_sigma(&f).unwrap()).unwrap();
        let denom = f.max_abs();
        for (a, b) in g.values.iter().zip(&f.values) {
            assert!((a - b).norm() / denom < 1e-9);
        }
    }

    #[test]
    fn unit_weight_operators_subtract_mean() {
        let grid = GridSpec::new(1, 64, 2.0 * std::f64::consts::PI).unwrap();
        let pair = BumpPair::new(1.0, 4.0, BumpProfile::Exponential).unwrap();
        let sym = SigmaSymbol::new(&AdmissibleWeight::unit(), &pair, grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = SampledField::new(
            grid,
            (0..grid.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
                .collect(),
        )
        .unwrap();
        let centered = f.sub(&SampledField::constant(grid, f.mean())).unwrap();
        let g = sym.apply_i_sigma(&f).unwrap();
        let denom = centered.max_abs();
        for (a, b) in g.values.iter().zip(&centered.values) {
            assert!((a - b).norm() / denom < 1e-6);
        }
    }

    #[test]
    fn i_sigma_matches_direct_sum() {
        let (grid, _, sym) = setup(64, &AdmissibleWeight::log());
        let f = random_mean_zero(grid, 5);
        let fast = sym.apply_i_inv_sigma(&f).unwrap();
        let slow = crate::oracles::apply_radial_direct(&f, 0.0, |r| 1.0 / sym.value(r).unwrap());
        let denom = slow.max_abs();
        for (a, b) in fast.values.iter().zip(&slow.values) {
            assert!((a - b).norm() / denom < 1e-10);
        }
    }

    #[test]
    fn pure_mode_scales_diagonally() {
        let (grid, _, sym) = setup(64, &AdmissibleWeight::log());
        let f = SampledField::from_fn(grid, |x| Complex64::new(0.0, 3.0 * x[0]).exp());
        let g = sym.apply_i_sigma(&f).unwrap();
        let expect = sym.value(3.0).unwrap();
        for (a, b) in g.values.iter().zip(&f.values) {
            assert!((a - b * expect).norm() < 1e-9);
        }
    }

    #[test]
    fn mikhlin_unit_weight_derivatives_vanish() {
        let (_, _, sym) = setup(64, &AdmissibleWeight::unit());
        let report = check_mikhlin(&sym, 2).unwrap();
        assert!(report.sigma_ratios[1] < 1e-4, "{:?}", report.sigma_ratios);
        assert!(report.inv_ratios[1] < 1e-4);
        assert!(report.inv_sup <= 1.0 + 1e-6);
        assert!(check_mikhlin(&sym, 3).is_err());
    }

    #[test]
    fn mikhlin_log_weight_stable_under_refinement() {
        let (_, _, sym_a) = setup(64, &AdmissibleWeight::log());
        let (_, _, sym_b) = setup(128, &AdmissibleWeight::log());
        let ra = check_mikhlin(&sym_a, 1).unwrap();
        let rb = check_mikhlin(&sym_b, 1).unwrap();
        assert!(ra.sigma_ratios[1].is_finite() && ra.sigma_ratios[1] > 0.0);
        let change = (ra.sigma_ratios[1] - rb.sigma_ratios[1]).abs() / ra.sigma_ratios[1];
        assert!(change < 0.10, "order-1 ratio changed by {change}");
        assert!(rb.inv_sup <= 1.0 + 1e-6);
    }

    #[test]
    fn monotone_weight_comparison() {
        let (grid, pair, _) = setup(64, &AdmissibleWeight::unit());
        let w1 = AdmissibleWeight::log();
        let w2 = AdmissibleWeight::log_power(2.0);
        let s1 = SigmaSymbol::new(&w1, &pair, grid).unwrap();
        let s2 = SigmaSymbol::new(&w2, &pair, grid).unwrap();
        for idx in 0..grid.len() {
            let r = grid.freq_mag(idx);
            if r == 0.0 {
                continue;
            }
            assert!(s1.value(r).unwrap() <= s2.value(r).unwrap() + 1e-9);
        }
    }

    #[test]
    fn kernel_size_bound_spot_check() {
        // |K_t| <= A / t for the log weight across three scales
        let (grid, pair, sym) = setup(256, &AdmissibleWeight::log());
        let aux = AuxiliaryFamily::new(&pair);
        let mut consts = Vec::new();
        for t in [0.25, 0.5, 1.0] {
            let k = carleson_kernel(&sym, |r| aux.psi2_hat(r), t);
            consts.push(k.max_abs() * t);
        }
        let max = consts.iter().cloned().fold(0.0f64, f64::max);
        let min = consts.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max.is_finite() && max / min < 4.0, "t-scaled kernel sups {consts:?}");
        let _ = grid;
    }
}

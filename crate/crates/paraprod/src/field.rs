//! Sampled periodic functions, spectral transforms and Fourier multipliers.
//!
//! Functions live on the torus `[-L/2, L/2)^dim` sampled on a uniform grid of
//! `N` points per axis. The forward transform carries the `1/N^dim` factor, so
//! coefficients are the Fourier-series coefficients of the trigonometric
//! interpolant: `f(x) = sum_k fhat_k e^{i xi_k . x}` with `xi_k = 2 pi k / L`.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.lock().unwrap().plan_fft(n, direction)
}

/// Uniform periodic grid: `N` points per axis on the torus of period `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    period: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize, period: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        let n = points_per_axis;
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis must be a power of two >= 16, got {n}"
            )));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidGrid(format!("period must be positive, got {period}")));
        }
        Ok(GridSpec { dim, n, period })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Grid spacing h = L/N.
    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Total number of samples N^dim.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume h^dim.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Spatial coordinates of the sample at flat (row-major) index `idx`.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        let half = self.period / 2.0;
        let mut x = [0.0; 2];
        match self.dim {
            1 => x[0] = idx as f64 * h - half,
            _ => {
                x[0] = (idx / self.n) as f64 * h - half;
                x[1] = (idx % self.n) as f64 * h - half;
            }
        }
        x
    }

    /// Signed integer mode of the flat spectral index (FFT natural order).
    pub fn mode(&self, idx: usize) -> [i64; 2] {
        let mut k = [0i64; 2];
        match self.dim {
            1 => k[0] = self.signed_mode(idx),
            _ => {
                k[0] = self.signed_mode(idx / self.n);
                k[1] = self.signed_mode(idx % self.n);
            }
        }
        k
    }

    fn signed_mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Flat spectral index of a signed mode vector, or None if outside the band.
    pub fn index_of_mode(&self, k: &[i64]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let wrap = |m: i64| -> Option<usize> {
            if m < -half || m >= half {
                None
            } else {
                Some(if m >= 0 { m as usize } else { (m + self.n as i64) as usize })
            }
        };
        match self.dim {
            1 => wrap(k[0]),
            _ => Some(wrap(k[0])? * self.n + wrap(k[1])?),
        }
    }

    /// Physical frequency vector xi = 2 pi k / L of a spectral index.
    pub fn freq(&self, idx: usize) -> [f64; 2] {
        let k = self.mode(idx);
        let c = 2.0 * std::f64::consts::PI / self.period;
        [k[0] as f64 * c, k[1] as f64 * c]
    }

    /// |xi| of a spectral index.
    pub fn freq_mag(&self, idx: usize) -> f64 {
        let xi = self.freq(idx);
        match self.dim {
            1 => xi[0].abs(),
            _ => xi[0].hypot(xi[1]),
        }
    }

    /// Smallest nonzero |xi| on the grid.
    pub fn min_freq(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }

    /// Largest |xi| on the grid (the Nyquist corner).
    pub fn max_freq(&self) -> f64 {
        let nyq = std::f64::consts::PI * self.n as f64 / self.period;
        match self.dim {
            1 => nyq,
            _ => nyq * std::f64::consts::SQRT_2,
        }
    }
}

/// Complex samples on a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(SampledField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        SampledField { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: GridSpec, c: Complex64) -> Self {
        SampledField { grid, values: vec![c; grid.len()] }
    }

    /// Evaluate `f` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i);
                f(&x[..dim])
            })
            .collect();
        SampledField { grid, values }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete L1 norm: sum |f| h^dim.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.grid.cell_volume()
    }

    /// Discrete L2 norm squared: sum |f|^2 h^dim.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn scaled(&self, lambda: Complex64) -> SampledField {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * lambda).collect(),
        }
    }

    pub fn add(&self, other: &SampledField) -> Result<SampledField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(SampledField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }
}

/// Frequency-domain coefficients, FFT natural order per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: GridSpec) -> Self {
        Spectrum { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Coefficient at signed mode `k` (zero if outside the band).
    pub fn at_mode(&self, k: &[i64]) -> Complex64 {
        self.grid
            .index_of_mode(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn set_mode(&mut self, k: &[i64], v: Complex64) {
        if let Some(i) = self.grid.index_of_mode(k) {
            self.coeffs[i] = v;
        }
    }
}

fn fft_axis(values: &mut [Complex64], n: usize, dim: usize, direction: FftDirection) {
    let fft = plan(n, direction);
    match dim {
        1 => fft.process(values),
        _ => {
            // rows
            for row in values.chunks_mut(n) {
                fft.process(row);
            }
            // columns
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    col[i] = values[i * n + j];
                }
                fft.process(&mut col);
                for i in 0..n {
                    values[i * n + j] = col[i];
                }
            }
        }
    }
}

/// Parity factor (-1)^(k0+k1) translating between the DFT (origin at index 0)
/// and the series centered at x = -L/2.
fn parity(grid: &GridSpec, idx: usize) -> f64 {
    let p = match grid.dim() {
        1 => idx,
        _ => idx / grid.points_per_axis() + idx % grid.points_per_axis(),
    };
    if p % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Discrete Fourier coefficients of `f`, normalized so that
/// `inverse_transform(forward_transform(f)) = f` up to rounding.
pub fn forward_transform(f: &SampledField) -> Spectrum {
    let grid = f.grid;
    let mut buf = f.values.clone();
    fft_axis(&mut buf, grid.points_per_axis(), grid.dim(), FftDirection::Forward);
    let scale = 1.0 / grid.len() as f64;
    for (idx, c) in buf.iter_mut().enumerate() {
        *c *= scale * parity(&grid, idx);
    }
    Spectrum { grid, coeffs: buf }
}

pub fn inverse_transform(s: &Spectrum) -> SampledField {
    let grid = s.grid;
    let mut buf: Vec<Complex64> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| c * parity(&grid, idx))
        .collect();
    fft_axis(&mut buf, grid.points_per_axis(), grid.dim(), FftDirection::Inverse);
    SampledField { grid, values: buf }
}

/// Apply a Fourier multiplier given by `symbol(xi)` on nonzero frequencies.
/// The value at xi = 0 must be supplied explicitly by the caller; symbols that
/// are singular at the origin conventionally pass zero there.
pub fn apply_multiplier(
    f: &SampledField,
    dc_value: Complex64,
    symbol: impl Fn(&[f64]) -> Complex64,
) -> Result<SampledField> {
    let spec = forward_transform(f);
    let out = multiply_spectrum(&spec, dc_value, symbol)?;
    Ok(inverse_transform(&out))
}

/// Multiplier application on an existing spectrum (avoids re-transforming in
/// sweeps over many symbols).
pub fn multiply_spectrum(
    spec: &Spectrum,
    dc_value: Complex64,
    symbol: impl Fn(&[f64]) -> Complex64,
) -> Result<Spectrum> {
    let grid = spec.grid;
    let dim = grid.dim();
    let mut coeffs = spec.coeffs.clone();
    for (idx, c) in coeffs.iter_mut().enumerate() {
        let xi = grid.freq(idx);
        let m = if xi[..dim].iter().all(|&v| v == 0.0) {
            dc_value
        } else {
            symbol(&xi[..dim])
        };
        if !m.re.is_finite() || !m.im.is_finite() {
            return Err(Error::NonFiniteSymbol { xi: xi[..dim].to_vec() });
        }
        *c *= m;
    }
    Ok(Spectrum { grid, coeffs })
}

/// Radial multiplier `profile(|xi|)` with explicit DC value; never fails for
/// finite profiles, used for the localization operators.
pub fn multiply_spectrum_radial(
    spec: &Spectrum,
    dc_value: f64,
    profile: impl Fn(f64) -> f64,
) -> Spectrum {
    let grid = spec.grid;
    let coeffs = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let r = grid.freq_mag(idx);
            let m = if r == 0.0 { dc_value } else { profile(r) };
            c * m
        })
        .collect();
    Spectrum { grid, coeffs }
}

/// Fractional derivative D^s: multiplier |xi|^s, zero mode annihilated.
pub fn fractional_derivative(f: &SampledField, s: f64) -> Result<SampledField> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("fractional order s must be >= 0, got {s}")));
    }
    let spec = forward_transform(f);
    let out = multiply_spectrum_radial(&spec, 0.0, |r| r.powf(s));
    Ok(inverse_transform(&out))
}

/// Dilation g(x) = f(2^j x) by pointwise resampling.  For j >= 0 the dilated
/// points land on the grid, so this is an exact index permutation (aliasing
/// occurs only when f has modes at or above N/2^{j+1}, as for any sampling).
/// For j < 0 the samples are taken from the trigonometric interpolant of f,
/// computed on a 2^{-j}-times finer grid by spectral zero-padding.  Either way
/// the shape of f around a point is preserved, so BMO-type quantities are
/// stable under the round trip.
pub fn dilate(f: &SampledField, j: i32) -> Result<SampledField> {
    let grid = f.grid;
    let n = grid.points_per_axis();
    let dim = grid.dim();
    let max_j = (n as f64).log2() as i32 - 2;
    if j.abs() > max_j {
        return Err(Error::InvalidParameter(format!(
            "|j| = {} exceeds log2(N) - 2 = {max_j}",
            j.abs()
        )));
    }
    if j == 0 {
        return Ok(f.clone());
    }
    if j > 0 {
        // 2^j x_i = x_q with q = 2^j i - (2^j - 1) N/2 (mod N) per axis.
        let m = 1i64 << j;
        let ni = n as i64;
        let axis = |i: usize| -> usize {
            (m * i as i64 - (m - 1) * (ni / 2)).rem_euclid(ni) as usize
        };
        let values = (0..grid.len())
            .map(|idx| match dim {
                1 => f.values[axis(idx)],
                _ => f.values[axis(idx / n) * n + axis(idx % n)],
            })
            .collect();
        return Ok(SampledField { grid, values });
    }
    // j < 0: x_i / 2^{-j} sits on the 2^{-j}-times finer grid at offset
    // (M - N)/2, where M = N 2^{-j}.
    let m = 1usize << (-j);
    let big = n * m;
    let fine_grid = GridSpec::new(dim, big, grid.period())?;
    let spec = forward_transform(f);
    let mut fine = Spectrum::zeros(fine_grid);
    for (idx, &c) in spec.coeffs.iter().enumerate() {
        let k = grid.mode(idx);
        if let Some(target) = fine_grid.index_of_mode(&k[..2]) {
            fine.coeffs[target] = c;
        }
    }
    let interp = inverse_transform(&fine);
    let off = (big - n) / 2;
    let values = (0..grid.len())
        .map(|idx| match dim {
            1 => interp.values[idx + off],
            _ => interp.values[(idx / n + off) * big + (idx % n + off)],
        })
        .collect();
    Ok(SampledField { grid, values })
}

/// Componentwise complex product.
pub fn pointwise_product(f: &SampledField, g: &SampledField) -> Result<SampledField> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    Ok(SampledField {
        grid: f.grid,
        values: f
            .values
            .iter()
            .zip(&g.values)
            .map(|(a, b)| a * b)
            .collect(),
    })
}

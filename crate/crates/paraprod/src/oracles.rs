//! Brute-force reference implementations used to cross-check every FFT-path
//! operation. These evaluate transform and operator definitions by direct
//! summation, deliberately sharing no code with the fast paths.

use num_complex::Complex64;

use crate::bilinear::BilinearSymbol;
use crate::bumps::BumpPair;
use crate::field::{GridSpec, SampledField, Spectrum};
use crate::scale::ScaleGrid;

/// Direct O(N^2) evaluation of the normalized discrete Fourier coefficients.
pub fn dft_direct(f: &SampledField) -> Spectrum {
    let grid = f.grid;
    let dim = grid.dim();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (ki, c) in coeffs.iter_mut().enumerate() {
        let xi = grid.freq(ki);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, v) in f.values.iter().enumerate() {
            let x = grid.coords(i);
            let phase: f64 = (0..dim).map(|a| xi[a] * x[a]).sum();
            acc += v * Complex64::new(0.0, -phase).exp();
        }
        *c = acc / grid.len() as f64;
    }
    Spectrum { grid, coeffs }
}

/// Direct evaluation of sum_k fhat_k e^{i x . xi_k} at every grid point.
pub fn idft_direct(s: &Spectrum) -> SampledField {
    let grid = s.grid;
    let dim = grid.dim();
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.coords(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (ki, c) in s.coeffs.iter().enumerate() {
                let xi = grid.freq(ki);
                let phase: f64 = (0..dim).map(|a| xi[a] * x[a]).sum();
                acc += c * Complex64::new(0.0, phase).exp();
            }
            acc
        })
        .collect();
    SampledField { grid, values }
}

/// Multiplier application by direct summation over modes.
pub fn apply_multiplier_direct(
    f: &SampledField,
    dc_value: Complex64,
    symbol: impl Fn(&[f64]) -> Complex64,
) -> SampledField {
    let grid = f.grid;
    let dim = grid.dim();
    let mut spec = dft_direct(f);
    for (ki, c) in spec.coeffs.iter_mut().enumerate() {
        let xi = grid.freq(ki);
        let m = if xi[..dim].iter().all(|&v| v == 0.0) {
            dc_value
        } else {
            symbol(&xi[..dim])
        };
        *c *= m;
    }
    idft_direct(&spec)
}

/// Radial multiplier by direct summation.
pub fn apply_radial_direct(
    f: &SampledField,
    dc_value: f64,
    profile: impl Fn(f64) -> f64,
) -> SampledField {
    apply_multiplier_direct(f, Complex64::new(dc_value, 0.0), |xi| {
        let r = match xi.len() {
            1 => xi[0].abs(),
            _ => xi[0].hypot(xi[1]),
        };
        Complex64::new(profile(r), 0.0)
    })
}

/// Constant-coefficient paraproduct by the double frequency sum with the same
/// scale quadrature as the fast path.
pub fn paraproduct_direct(
    f: &SampledField,
    g: &SampledField,
    m: impl Fn(f64) -> Complex64,
    pair: &BumpPair,
    scales: &ScaleGrid,
) -> SampledField {
    let grid = f.grid;
    let dim = grid.dim();
    let fs = dft_direct(f);
    let gs = dft_direct(g);
    let delta = scales.log_step();
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.coords(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in scales.nodes() {
                let mt = m(t) * delta;
                let mut qf = Complex64::new(0.0, 0.0);
                let mut pg = Complex64::new(0.0, 0.0);
                for (ki, c) in fs.coeffs.iter().enumerate() {
                    let xi = grid.freq(ki);
                    let r = grid.freq_mag(ki);
                    let phase: f64 = (0..dim).map(|a| xi[a] * x[a]).sum();
                    qf += c * pair.psi_hat(t * r) * Complex64::new(0.0, phase).exp();
                }
                for (ki, c) in gs.coeffs.iter().enumerate() {
                    let xi = grid.freq(ki);
                    let r = grid.freq_mag(ki);
                    let phase: f64 = (0..dim).map(|a| xi[a] * x[a]).sum();
                    pg += c * pair.phi_hat(t * r) * Complex64::new(0.0, phase).exp();
                }
                acc += qf * pg * mt;
            }
            acc
        })
        .collect();
    SampledField { grid, values }
}

/// Variable-coefficient paraproduct by direct summation.
pub fn paraproduct_var_direct(
    f: &SampledField,
    g: &SampledField,
    m: impl Fn(f64, &[f64]) -> Complex64,
    pair: &BumpPair,
    scales: &ScaleGrid,
) -> SampledField {
    let grid = f.grid;
    let dim = grid.dim();
    let fs = dft_direct(f);
    let gs = dft_direct(g);
    let delta = scales.log_step();
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.coords(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in scales.nodes() {
                let mut qf = Complex64::new(0.0, 0.0);
                let mut pg = Complex64::new(0.0, 0.0);
                for (ki, c) in fs.coeffs.iter().enumerate() {
                    let xi = grid.freq(ki);
                    let r = grid.freq_mag(ki);
                    let phase: f64 = (0..dim).map(|a| xi[a] * x[a]).sum();
                    qf += c * pair.psi_hat(t * r) * Complex64::new(0.0, phase).exp();
                }
                for (ki, c) in gs.coeffs.iter().enumerate() {
                    let xi = grid.freq(ki);
                    let r = grid.freq_mag(ki);
                    let phase: f64 = (0..dim).map(|a| xi[a] * x[a]).sum();
                    pg += c * pair.phi_hat(t * r) * Complex64::new(0.0, phase).exp();
                }
                acc += qf * pg * m(t, &x[..dim]) * delta;
            }
            acc
        })
        .collect();
    SampledField { grid, values }
}

/// Bilinear multiplier by the spatial double sum
/// sum_{k,l} sigma(xi_k, eta_l) fhat_k ghat_l e^{i x (xi_k + eta_l)}.
/// At grid points out-of-band output modes alias back into the band, so this
/// matches the fast path only on inputs band-limited to |k| < N/4.
pub fn coifman_meyer_direct(
    f: &SampledField,
    g: &SampledField,
    sym: &BilinearSymbol,
) -> SampledField {
    let grid = f.grid;
    let dim = grid.dim();
    let fs = dft_direct(f);
    let gs = dft_direct(g);
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.coords(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (ki, fc) in fs.coeffs.iter().enumerate() {
                if fc.norm() == 0.0 {
                    continue;
                }
                let xi = grid.freq(ki);
                for (li, gc) in gs.coeffs.iter().enumerate() {
                    if gc.norm() == 0.0 {
                        continue;
                    }
                    let eta = grid.freq(li);
                    let phase: f64 = (0..dim).map(|a| (xi[a] + eta[a]) * x[a]).sum();
                    acc += sym.eval(&xi[..dim], &eta[..dim])
                        * fc
                        * gc
                        * Complex64::new(0.0, phase).exp();
                }
            }
            acc
        })
        .collect();
    SampledField { grid, values }
}

/// Commutator [P_t, M_m] as an explicit kernel column-sum bound applied to a
/// delta-like probe: returns ||[P_t, M_m] delta_i||_L1 / ||delta_i||_L1.
pub fn commutator_kernel_ratio(
    pair: &BumpPair,
    m: impl Fn(f64, &[f64]) -> Complex64,
    t: f64,
    spike_index: usize,
    grid: GridSpec,
) -> f64 {
    let mut spike = SampledField::zeros(grid);
    spike.values[spike_index] = Complex64::new(1.0, 0.0);
    let dim = grid.dim();
    // P_t row kernel: P_t delta evaluated by direct summation
    let pt_spike = apply_radial_direct(&spike, 1.0, |r| pair.phi_hat(t * r));
    // [P_t, M_m] delta(x) = (m(t,y_spike) - m(t,x)) * (P_t delta)(x)
    let y = grid.coords(spike_index);
    let num: f64 = (0..grid.len())
        .map(|i| {
            let x = grid.coords(i);
            ((m(t, &y[..dim]) - m(t, &x[..dim])) * pt_spike.values[i]).norm()
        })
        .sum::<f64>()
        * grid.cell_volume();
    num / spike.l1_norm()
}

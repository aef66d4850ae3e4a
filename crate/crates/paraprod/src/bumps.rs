//! Spectral bump profiles: the annulus bump psi-hat, the ball bump phi-hat,
//! Calderon normalization, the localization operators P_t / Q_t, and the
//! auxiliary profile family used by the paraproduct split.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{
    forward_transform, inverse_transform, multiply_spectrum_radial, SampledField, Spectrum,
};
use crate::par;
use crate::scale::ScaleGrid;
use crate::weights::AdmissibleWeight;

/// Smooth step: 0 for u <= 0, 1 for u >= 1, C-infinity in between.
pub fn smooth_step(u: f64) -> f64 {
    fn soft(u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            (-1.0 / u).exp()
        }
    }
    let a = soft(u);
    let b = soft(1.0 - u);
    a / (a + b)
}

/// Radial profile choices for the annulus bump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpProfile {
    /// exp(-1/(1-u^2)) on the rescaled support, C-infinity.
    Exponential,
    /// (1-u^2)^4, C^3 at the support edges.
    Quartic,
}

fn raw_bump(profile: BumpProfile, u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    match profile {
        BumpProfile::Exponential => (-1.0 / (1.0 - u * u)).exp() * std::f64::consts::E,
        BumpProfile::Quartic => (1.0 - u * u).powi(4),
    }
}

/// Plateau profile: 0 outside [a0, b0], 1 on [a1, b1], smooth transitions.
/// Ball profiles use a0 = a1 = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub b0: f64,
}

impl Plateau {
    pub fn annulus(a0: f64, a1: f64, b1: f64, b0: f64) -> Self {
        Plateau { a0, a1, b1, b0 }
    }

    pub fn ball(r_one: f64, r_zero: f64) -> Self {
        Plateau { a0: 0.0, a1: 0.0, b1: r_one, b0: r_zero }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r < self.a1 {
            if self.a1 == self.a0 {
                return if r >= self.a0 { 1.0 } else { 0.0 };
            }
            smooth_step((r - self.a0) / (self.a1 - self.a0))
        } else if r > self.b1 {
            smooth_step((self.b0 - r) / (self.b0 - self.b1))
        } else {
            1.0
        }
    }
}

/// Calderon-normalized pair of spectral profiles: psi-hat supported in the
/// annulus alpha <= |xi| <= beta, phi-hat equal to one on |xi| <= r0 and
/// supported in |xi| <= beta.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpPair {
    alpha: f64,
    beta: f64,
    r0: f64,
    profile: BumpProfile,
    norm_scale: f64,
}

/// Quadrature density used for Calderon normalization; chosen so the midpoint
/// rule resolves the bump to well below the 1e-6 tolerance.
const NORMALIZATION_NODES_PER_OCTAVE: usize = 64;

impl BumpPair {
    pub fn new(alpha: f64, beta: f64, profile: BumpProfile) -> Result<Self> {
        if !(alpha > 0.0) || !(beta > alpha) {
            return Err(Error::InvalidParameter(format!(
                "bump support must satisfy 0 < alpha < beta, got [{alpha}, {beta}]"
            )));
        }
        let mut pair = BumpPair { alpha, beta, r0: alpha / 2.0, profile, norm_scale: 1.0 };
        // Calderon integral of the raw bump at a reference frequency; the
        // profile is radial so the value is frequency independent.
        let grid = ScaleGrid::new(alpha / 2.0, beta * 2.0, NORMALIZATION_NODES_PER_OCTAVE)?;
        let c: f64 = grid
            .nodes()
            .iter()
            .map(|&t| pair.psi_hat(t).powi(2) * grid.log_step())
            .sum();
        pair.norm_scale = 1.0 / c.sqrt();
        Ok(pair)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn normalization_constant(&self) -> f64 {
        self.norm_scale
    }

    /// Annulus profile at radius r, Calderon normalized.
    pub fn psi_hat(&self, r: f64) -> f64 {
        let u = (2.0 * r - self.alpha - self.beta) / (self.beta - self.alpha);
        self.norm_scale * raw_bump(self.profile, u)
    }

    /// Ball profile at radius r: one on [0, r0], zero beyond beta.
    pub fn phi_hat(&self, r: f64) -> f64 {
        if r <= self.r0 {
            1.0
        } else if r >= self.beta {
            0.0
        } else {
            smooth_step((self.beta - r) / (self.beta - self.r0))
        }
    }

    /// Midpoint-rule Calderon sum at a fixed frequency magnitude.
    pub fn calderon_sum(&self, scales: &ScaleGrid, xi_mag: f64) -> f64 {
        scales
            .nodes()
            .iter()
            .map(|&t| self.psi_hat(t * xi_mag).powi(2) * scales.log_step())
            .sum()
    }
}

/// Result of checking the Calderon identity over all grid frequencies.
#[derive(Debug, Clone)]
pub struct CalderonReport {
    pub max_abs_deviation: f64,
    pub covered: usize,
    pub excluded: usize,
}

/// Verify sum_j |psi_hat(t_j xi)|^2 Delta = 1 at every covered nonzero grid
/// frequency; frequencies whose annulus window is truncated by the scale
/// range are excluded and counted.
pub fn calderon_check(
    pair: &BumpPair,
    scales: &ScaleGrid,
    grid: &crate::field::GridSpec,
) -> CalderonReport {
    let mut max_dev: f64 = 0.0;
    let mut covered = 0;
    let mut excluded = 0;
    let mut seen = std::collections::HashSet::new();
    for idx in 0..grid.len() {
        let r = grid.freq_mag(idx);
        if r == 0.0 || !seen.insert(r.to_bits()) {
            continue;
        }
        if !scales.covers_annulus(pair.alpha(), pair.beta(), r) {
            excluded += 1;
            continue;
        }
        covered += 1;
        max_dev = max_dev.max((pair.calderon_sum(scales, r) - 1.0).abs());
    }
    CalderonReport { max_abs_deviation: max_dev, covered, excluded }
}

/// Low-pass localization P_t f = phi-hat(tD) f.
pub fn apply_pt(pair: &BumpPair, t: f64, f: &SampledField) -> Result<SampledField> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("scale t must be positive, got {t}")));
    }
    let spec = forward_transform(f);
    Ok(inverse_transform(&apply_pt_spectrum(pair, t, &spec)))
}

/// Band-pass localization Q_t f = psi-hat(tD) f.
pub fn apply_qt(pair: &BumpPair, t: f64, f: &SampledField) -> Result<SampledField> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("scale t must be positive, got {t}")));
    }
    let spec = forward_transform(f);
    Ok(inverse_transform(&apply_qt_spectrum(pair, t, &spec)))
}

pub fn apply_pt_spectrum(pair: &BumpPair, t: f64, spec: &Spectrum) -> Spectrum {
    multiply_spectrum_radial(spec, 1.0, |r| pair.phi_hat(t * r))
}

pub fn apply_qt_spectrum(pair: &BumpPair, t: f64, spec: &Spectrum) -> Spectrum {
    multiply_spectrum_radial(spec, 0.0, |r| pair.psi_hat(t * r))
}

/// sup over scale nodes of ||P_t f||_inf / w(t).
pub fn pt_sup_ratio(
    pair: &BumpPair,
    f: &SampledField,
    w: &AdmissibleWeight,
    scales: &ScaleGrid,
) -> f64 {
    let spec = forward_transform(f);
    let nodes = scales.nodes();
    par::max_indexed(nodes.len(), |j| {
        let t = nodes[j];
        let pt = inverse_transform(&apply_pt_spectrum(pair, t, &spec));
        pt.max_abs() / w.eval(t)
    })
}

/// Auxiliary profiles derived from a bump pair for the paraproduct split:
/// phi = psi1 + phi1 exactly, psi2/phi2 plateau over the product spectra, and
/// psi3 equal to one on the support of psi2.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryFamily {
    pair: BumpPair,
    psi2: Plateau,
    phi2: Plateau,
    psi3: Plateau,
}

impl AuxiliaryFamily {
    pub fn new(pair: &BumpPair) -> Self {
        let a = pair.alpha();
        let b = pair.beta();
        AuxiliaryFamily {
            pair: pair.clone(),
            psi2: Plateau::annulus(a / 8.0, a / 4.0, 2.0 * b, 4.0 * b),
            phi2: Plateau::ball(2.0 * b, 4.0 * b),
            psi3: Plateau::annulus(a / 16.0, a / 8.0, 4.0 * b, 8.0 * b),
        }
    }

    /// Smooth cutoff equal to one on |xi| <= alpha/8 and vanishing beyond
    /// alpha/4; splits phi into psi1 + phi1.
    fn low_cutoff(&self, r: f64) -> f64 {
        let a = self.pair.alpha();
        if r <= a / 8.0 {
            1.0
        } else if r >= a / 4.0 {
            0.0
        } else {
            smooth_step((a / 4.0 - r) / (a / 8.0))
        }
    }

    pub fn psi1_hat(&self, r: f64) -> f64 {
        self.pair.phi_hat(r) * (1.0 - self.low_cutoff(r))
    }

    pub fn phi1_hat(&self, r: f64) -> f64 {
        self.pair.phi_hat(r) * self.low_cutoff(r)
    }

    pub fn psi2_hat(&self, r: f64) -> f64 {
        self.psi2.eval(r)
    }

    pub fn phi2_hat(&self, r: f64) -> f64 {
        self.phi2.eval(r)
    }

    pub fn psi3_hat(&self, r: f64) -> f64 {
        self.psi3.eval(r)
    }

    pub fn pair(&self) -> &BumpPair {
        &self.pair
    }
}

/// P_t with the psi1/phi1 split profiles, spectrum-level.
pub fn apply_profile_spectrum(
    profile: impl Fn(f64) -> f64,
    dc: f64,
    t: f64,
    spec: &Spectrum,
) -> Spectrum {
    multiply_spectrum_radial(spec, dc, |r| profile(t * r))
}

#[allow(unused)]
fn complex(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

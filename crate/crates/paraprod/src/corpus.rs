//! Deterministic corpus of test functions and coefficient symbols covering
//! the function spaces exercised by the experiments.

use std::sync::Arc;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::bilinear::{ScalarSymbol, VariableSymbol};
use crate::bumps::BumpPair;
use crate::field::{inverse_transform, GridSpec, SampledField, Spectrum};
use crate::norms::{self, NormConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceTag {
    Linf,
    Bmo,
    BmoLocal,
    Xw,
    H1Atom,
}

impl SpaceTag {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceTag::Linf => "Linf",
            SpaceTag::Bmo => "BMO",
            SpaceTag::BmoLocal => "bmo",
            SpaceTag::Xw => "Xw",
            SpaceTag::H1Atom => "H1-atom",
        }
    }
}

#[derive(Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub tags: Vec<SpaceTag>,
    pub field: SampledField,
}

/// Periodized logarithm log |2 sin(x/2)|; the canonical unbounded BMO
/// function on the circle (summed over axes in 2D). The singularity is
/// clamped half a cell away from the grid zeros.
pub fn periodized_log(grid: GridSpec) -> SampledField {
    let floor = (grid.spacing() / 4.0).max(1e-12);
    SampledField::from_real_fn(grid, |x| {
        (0..grid.dim())
            .map(|a| (2.0 * (x[a] / 2.0).sin()).abs().max(floor).ln())
            .sum()
    })
}

/// Truncated log_+(r0 / |x|) bump; bounded mean oscillation with bounded
/// low-frequency content.
pub fn log_bump(grid: GridSpec, r0: f64) -> SampledField {
    let floor = grid.spacing() / 4.0;
    SampledField::from_real_fn(grid, |x| {
        let r = match grid.dim() {
            1 => x[0].abs(),
            _ => x[0].hypot(x[1]),
        }
        .max(floor);
        (r0 / r).ln().max(0.0)
    })
}

/// Random superposition of smoothed periodic steps; bounded with large
/// gradients.
pub fn smoothed_steps(grid: GridSpec, rng: &mut ChaCha8Rng) -> SampledField {
    let k = 4;
    let centers: Vec<[f64; 2]> = (0..k)
        .map(|_| {
            [
                rng.gen_range(-grid.period() / 2.0..grid.period() / 2.0),
                rng.gen_range(-grid.period() / 2.0..grid.period() / 2.0),
            ]
        })
        .collect();
    let signs: Vec<f64> = (0..k).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let sharp = rng.gen_range(4.0..12.0);
    let omega = 2.0 * std::f64::consts::PI / grid.period();
    SampledField::from_real_fn(grid, move |x| {
        let mut v = 0.0;
        for (c, s) in centers.iter().zip(&signs) {
            let mut u = 0.0;
            for a in 0..grid.dim() {
                u += (omega * (x[a] - c[a])).sin();
            }
            v += s * (sharp * u).tanh();
        }
        v / k as f64
    })
}

/// Random-sign band-limited Fourier series with mildly decaying amplitudes;
/// bounded and smooth.
pub fn band_limited_series(grid: GridSpec, rng: &mut ChaCha8Rng) -> SampledField {
    let n = grid.points_per_axis() as i64;
    let mut spec = Spectrum::zeros(grid);
    for (idx, c) in spec.coeffs.iter_mut().enumerate() {
        let k = grid.mode(idx);
        let sup = (0..grid.dim()).map(|a| k[a].abs()).max().unwrap_or(0);
        if sup >= n / 4 {
            continue;
        }
        let amp = 1.0 / (1.0 + sup as f64).powf(1.2);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let phase = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        *c = Complex64::from_polar(sign * amp, phase);
    }
    let f = inverse_transform(&spec);
    let sup = f.max_abs().max(1e-12);
    f.scaled(Complex64::new(1.0 / sup, 0.0))
}

/// Mean-zero L1-normalized bump at the given width; an atom for the local
/// Hardy space.
pub fn h1_atom(grid: GridSpec, width: f64) -> SampledField {
    let raw = SampledField::from_real_fn(grid, |x| {
        let r2: f64 = (0..grid.dim()).map(|a| (x[a] / width).powi(2)).sum();
        (-r2).exp()
    });
    let centered = raw
        .sub(&SampledField::constant(grid, raw.mean()))
        .expect("same grid");
    let l1 = centered.l1_norm().max(1e-300);
    centered.scaled(Complex64::new(1.0 / l1, 0.0))
}

/// Random scalar coefficient m(t), piecewise constant in log t, |m| <= 1.
pub fn random_scalar_symbol(rng: &mut ChaCha8Rng) -> ScalarSymbol {
    let table: Arc<Vec<f64>> = Arc::new((0..64).map(|_| rng.gen_range(-1.0..1.0)).collect());
    ScalarSymbol::new(1.0, move |t| {
        let bucket = (t.log2() * 2.0).floor() as i64;
        let idx = bucket.rem_euclid(table.len() as i64) as usize;
        Complex64::new(table[idx], 0.0)
    })
}

/// Random variable coefficient m(t, x), smooth in x with certified bounds.
pub fn random_variable_symbol(rng: &mut ChaCha8Rng) -> VariableSymbol {
    let a = rng.gen_range(0.2..1.0);
    let phase = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let k = rng.gen_range(1..=3) as f64;
    let tw = rng.gen_range(0.5..2.0);
    // |m| <= a, |d/dx m| <= a k
    VariableSymbol::new(a, a * k, move |t, x| {
        let space: f64 = (0..x.len()).map(|j| (k * x[j] + phase).sin()).sum::<f64>() / x.len() as f64;
        Complex64::new(a * space * (tw * t.ln()).cos(), 0.0)
    })
}

/// Deterministic corpus: a fixed set of structural entries followed by
/// seeded random entries up to `count`.
pub fn generate_corpus(grid: GridSpec, seed: u64, count: usize) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    out.push(CorpusEntry {
        id: "periodized-log".into(),
        tags: vec![SpaceTag::Bmo, SpaceTag::Xw],
        field: periodized_log(grid),
    });
    out.push(CorpusEntry {
        id: "log-bump".into(),
        tags: vec![SpaceTag::Bmo, SpaceTag::BmoLocal, SpaceTag::Xw],
        field: log_bump(grid, 1.0),
    });
    let mut i = 0usize;
    while out.len() < count {
        let kind = i % 3;
        i += 1;
        let entry = match kind {
            0 => CorpusEntry {
                id: format!("smoothed-steps-{i}"),
                tags: vec![SpaceTag::Linf, SpaceTag::Bmo, SpaceTag::BmoLocal, SpaceTag::Xw],
                field: smoothed_steps(grid, &mut rng),
            },
            1 => CorpusEntry {
                id: format!("band-series-{i}"),
                tags: vec![SpaceTag::Linf, SpaceTag::Bmo, SpaceTag::BmoLocal, SpaceTag::Xw],
                field: band_limited_series(grid, &mut rng),
            },
            _ => {
                let width = grid.period() / 2f64.powi(rng.gen_range(3..6));
                CorpusEntry {
                    id: format!("h1-atom-{i}"),
                    tags: vec![SpaceTag::H1Atom],
                    field: h1_atom(grid, width),
                }
            }
        };
        out.push(entry);
    }
    out.truncate(count);
    out
}

/// Validate an entry's claimed space tags at the working resolution;
/// returns (tag, finite?, value) per tag.
pub fn validate_entry(
    entry: &CorpusEntry,
    w: &crate::weights::AdmissibleWeight,
    pair: &BumpPair,
    cfg: &NormConfig,
) -> Vec<(SpaceTag, bool, f64)> {
    entry
        .tags
        .iter()
        .map(|&tag| {
            let v = match tag {
                SpaceTag::Linf => entry.field.max_abs(),
                SpaceTag::Bmo => norms::bmo_seminorm(&entry.field, cfg),
                SpaceTag::BmoLocal => norms::bmo_local_norm(&entry.field, cfg),
                SpaceTag::Xw => norms::xw_norm(&entry.field, w, pair, cfg),
                SpaceTag::H1Atom => norms::h1_norm(&entry.field, cfg),
            };
            (tag, v.is_finite(), v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bumps::BumpProfile;
    use crate::weights::AdmissibleWeight;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(1, n, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn corpus_is_deterministic() {
        let g = grid(64);
        let a = generate_corpus(g, 42, 12);
        let b = generate_corpus(g, 42, 12);
        assert_eq!(a.len(), 12);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.field, y.field);
        }
        let c = generate_corpus(g, 43, 12);
        assert!(a.iter().zip(&c).any(|(x, y)| x.field != y.field));
    }

    #[test]
    fn tags_validate_at_working_resolution() {
        let g = grid(128);
        let pair = BumpPair::new(1.0, 4.0, BumpProfile::Exponential).unwrap();
        let cfg = NormConfig::standard(&g, &pair).unwrap();
        let w = AdmissibleWeight::log();
        for entry in generate_corpus(g, 42, 8) {
            for (tag, finite, v) in validate_entry(&entry, &w, &pair, &cfg) {
                assert!(finite, "{} fails {} with {v}", entry.id, tag.name());
            }
        }
    }

    #[test]
    fn periodized_log_is_unbounded_but_bmo_stable() {
        let pair = BumpPair::new(1.0, 4.0, BumpProfile::Exponential).unwrap();
        let coarse = grid(128);
        let fine = grid(512);
        let f_c = periodized_log(coarse);
        let f_f = periodized_log(fine);
        assert!(f_f.max_abs() >= 2.0 * f_c.max_abs() * 0.5, "sup should grow as N grows");
        let cfg_c = NormConfig::standard(&coarse, &pair).unwrap();
        let cfg_f = NormConfig::standard(&fine, &pair).unwrap();
        let b_c = norms::bmo_seminorm(&f_c, &cfg_c);
        let b_f = norms::bmo_seminorm(&f_f, &cfg_f);
        assert!(
            (b_c - b_f).abs() / b_c < 0.2,
            "seminorm should be resolution-stable: {b_c} vs {b_f}"
        );
    }

    #[test]
    fn symbols_respect_declared_bounds() {
        let g = grid(64);
        let pair = BumpPair::new(1.0, 4.0, BumpProfile::Exponential).unwrap();
        let scales = crate::scale::ScaleGrid::covering(&g, 1.0, 4.0, 8)
            .unwrap()
            .restricted(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            random_scalar_symbol(&mut rng).validate(&scales).unwrap();
            random_variable_symbol(&mut rng).certify(g, &scales).unwrap();
        }
        let _ = pair;
    }

    #[test]
    fn atom_is_mean_zero_and_normalized() {
        let g = grid(256);
        let a = h1_atom(g, 0.3);
        assert!(a.mean().norm() < 1e-12);
        assert!((a.l1_norm() - 1.0).abs() < 1e-12);
    }
}

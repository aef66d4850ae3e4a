//! Experiment drivers: boundedness-ratio suites for the named inequalities,
//! the brute-force oracle suite, and the norm report used by the CLI.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::bilinear::{
    coifman_meyer_apply, commutator_l1_norm, kato_ponce_decompose, paraproduct_const,
    paraproduct_var, BilinearSymbol, ScalarSymbol,
};
use crate::bumps::{apply_pt, apply_qt, BumpPair, BumpProfile};
use crate::config::ExperimentConfig;
use crate::corpus::{self, CorpusEntry};
use crate::error::{Error, Result};
use crate::field::{
    dilate, forward_transform, fractional_derivative, inverse_transform, pointwise_product,
    GridSpec, SampledField, Spectrum,
};
use crate::norms::{self, NormConfig};
use crate::oracles;
use crate::report::{fit_slope, percentile, Cell, ReportTable};
use crate::scale::ScaleGrid;
use crate::sigma::SigmaSymbol;
use crate::weights::{builtin_weight, AdmissibleWeight};

/// Everything an inequality run needs, derived from the configuration.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub grid: GridSpec,
    pub pair: BumpPair,
    pub scales: ScaleGrid,
    pub weight: AdmissibleWeight,
    pub norm_cfg: NormConfig,
    pub sigma: SigmaSymbol,
}

pub fn build_context(cfg: &ExperimentConfig) -> Result<Context> {
    let grid = GridSpec::new(cfg.dim, cfg.n, cfg.period)?;
    let pair = BumpPair::new(cfg.alpha, cfg.beta, BumpProfile::Exponential)?;
    let scales = ScaleGrid::covering(&grid, cfg.alpha, cfg.beta, cfg.nodes_per_octave)?;
    let weight = builtin_weight(&cfg.weight, Some(cfg.weight_alpha))?;
    let norm_cfg = NormConfig::new(crate::bumps::Plateau::ball(1.0, 2.0), scales.clone());
    let sigma = SigmaSymbol::new(&weight, &pair, grid)?;
    Ok(Context { cfg: cfg.clone(), grid, pair, scales, weight, norm_cfg, sigma })
}

fn ratio_columns() -> Vec<&'static str> {
    vec!["trial", "dilation", "numerator", "denominator", "ratio", "case"]
}

fn max_rel_err(a: &SampledField, b: &SampledField) -> f64 {
    let denom = b.max_abs().max(1e-300);
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0f64, f64::max)
        / denom
}

/// Zero every mode with a component at or above the cutoff.
fn band_project(f: &SampledField, cutoff: i64) -> SampledField {
    let grid = f.grid;
    let mut spec = forward_transform(f);
    for (idx, c) in spec.coeffs.iter_mut().enumerate() {
        let k = grid.mode(idx);
        if (0..grid.dim()).any(|a| k[a].abs() >= cutoff) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    inverse_transform(&spec)
}

struct TrialRatio {
    dilation: i32,
    numerator: f64,
    denominator: f64,
    case: String,
}

fn finish_table(mut table: ReportTable, rows: Vec<(usize, TrialRatio)>, skipped: usize) -> ReportTable {
    let mut ratios = Vec::new();
    let mut by_dilation: std::collections::BTreeMap<i32, Vec<f64>> = Default::default();
    for (trial, r) in &rows {
        let ratio = r.numerator / r.denominator;
        ratios.push(ratio);
        by_dilation.entry(r.dilation).or_default().push(ratio);
        table.push_row(vec![
            Cell::Int(*trial as i64),
            Cell::Int(r.dilation as i64),
            Cell::Num(r.numerator),
            Cell::Num(r.denominator),
            Cell::Num(ratio),
            Cell::Text(r.case.clone()),
        ]);
    }
    let max_ratio = ratios.iter().cloned().fold(0.0f64, f64::max);
    table.set_summary("max_ratio", Cell::Num(max_ratio));
    table.set_summary("p95_ratio", Cell::Num(percentile(&ratios, 95.0)));
    table.set_summary("rows", Cell::Int(ratios.len() as i64));
    table.set_summary("skipped", Cell::Int(skipped as i64));
    let (xs, ys): (Vec<f64>, Vec<f64>) = by_dilation
        .iter()
        .map(|(j, v)| (*j as f64, (v.iter().sum::<f64>() / v.len() as f64).ln()))
        .unzip();
    if let Some(slope) = fit_slope(&xs, &ys) {
        table.set_summary("dilation_slope", Cell::Num(slope));
    }
    table
}

/// Run the named boundedness-ratio experiment and return the per-trial table.
pub fn run_inequality(cfg: &ExperimentConfig) -> Result<ReportTable> {
    match cfg.inequality.as_str() {
        "thm-main" | "thm-main-w1" | "var-coeff" | "cm" | "kato-ponce" => run_ratio_suite(cfg),
        "bmo-equiv" => run_bmo_equiv(cfg),
        other => Err(Error::UnknownName(format!("inequality {other}"))),
    }
}

fn run_ratio_suite(cfg: &ExperimentConfig) -> Result<ReportTable> {
    let ctx = build_context(cfg)?;
    let dilations = cfg.dilation_range()?;
    let corpus = corpus::generate_corpus(ctx.grid, cfg.seed, cfg.trials.max(8));
    let pool: Vec<&CorpusEntry> = corpus
        .iter()
        .filter(|e| e.tags.contains(&corpus::SpaceTag::Xw))
        .collect();
    if pool.is_empty() {
        return Err(Error::InvalidParameter("empty corpus pool".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let unit_sigma = if cfg.inequality == "thm-main-w1" {
        Some(SigmaSymbol::new(&AdmissibleWeight::unit(), &ctx.pair, ctx.grid)?)
    } else {
        None
    };
    let unit_scales = ctx.scales.restricted(1.0);
    let kp_syms = if cfg.inequality == "kato-ponce" {
        Some(kato_ponce_decompose(cfg.s)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for trial in 0..cfg.trials {
        let f_entry = pool[rng.gen_range(0..pool.len())];
        let g_entry = pool[rng.gen_range(0..pool.len())];
        let msym = corpus::random_scalar_symbol(&mut rng);
        let vsym = corpus::random_variable_symbol(&mut rng);
        for &j in &dilations {
            let (df, dg) = match (dilate(&f_entry.field, j), dilate(&g_entry.field, j)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            let case = format!("{}|{}", f_entry.id, g_entry.id);
            let computed: Result<(f64, f64)> = match cfg.inequality.as_str() {
                "thm-main" => {
                    let pi = paraproduct_const(&df, &dg, &msym, &ctx.pair, &ctx.scales)?;
                    Ok((
                        norms::bmo_sigma_norm(&pi, &ctx.sigma, &ctx.norm_cfg)?,
                        norms::bmo_seminorm(&df, &ctx.norm_cfg)
                            * norms::xw_norm(&dg, &ctx.weight, &ctx.pair, &ctx.norm_cfg),
                    ))
                }
                "thm-main-w1" => {
                    let pi = paraproduct_const(&df, &dg, &msym, &ctx.pair, &ctx.scales)?;
                    let _ = unit_sigma.as_ref();
                    Ok((
                        norms::bmo_seminorm(&pi, &ctx.norm_cfg),
                        norms::bmo_seminorm(&df, &ctx.norm_cfg) * dg.max_abs(),
                    ))
                }
                "var-coeff" => {
                    let pi = paraproduct_var(&df, &dg, &vsym, &ctx.pair, &unit_scales)?;
                    Ok((
                        norms::bmo_sigma_norm(&pi, &ctx.sigma, &ctx.norm_cfg)?,
                        norms::bmo_local_norm(&df, &ctx.norm_cfg)
                            * norms::bmo_local_norm(&dg, &ctx.norm_cfg),
                    ))
                }
                "cm" => {
                    let prod = pointwise_product(&df, &dg)?;
                    Ok((
                        norms::bmo_sigma_norm(&prod, &ctx.sigma, &ctx.norm_cfg)?,
                        norms::bmo_local_norm(&df, &ctx.norm_cfg)
                            * norms::bmo_local_norm(&dg, &ctx.norm_cfg),
                    ))
                }
                "kato-ponce" => {
                    let cut = ctx.grid.points_per_axis() as i64 / 4;
                    let bf = band_project(&df, cut);
                    let bg = band_project(&dg, cut);
                    let (s1, s2, s3) = kp_syms.as_ref().unwrap();
                    let dsf = fractional_derivative(&bf, cfg.s)?;
                    let dsg = fractional_derivative(&bg, cfg.s)?;
                    let lhs = fractional_derivative(&pointwise_product(&bf, &bg)?, cfg.s)?;
                    let t1 = coifman_meyer_apply(&dsf, &bg, s1)?.field;
                    let t2 = coifman_meyer_apply(&bf, &dsg, s2)?.field;
                    let t3 = coifman_meyer_apply(&bf, &dsg, s3)?.field;
                    let rhs = t1.add(&t2)?.add(&t3)?;
                    let rec = max_rel_err(&rhs, &lhs);
                    if rec > 1e-9 {
                        return Err(Error::InvalidParameter(format!(
                            "fractional Leibniz reconstruction off by {rec}"
                        )));
                    }
                    let xw = |h: &SampledField| {
                        norms::xw_norm(h, &ctx.weight, &ctx.pair, &ctx.norm_cfg)
                    };
                    Ok((
                        norms::bmo_sigma_norm(&lhs, &ctx.sigma, &ctx.norm_cfg)?,
                        xw(&dsf) * xw(&bg) + xw(&bf) * xw(&dsg),
                    ))
                }
                _ => unreachable!(),
            };
            let (num, den) = computed?;
            if den < 1e-10 || !num.is_finite() {
                skipped += 1;
                continue;
            }
            rows.push((trial, TrialRatio { dilation: j, numerator: num, denominator: den, case }));
        }
    }
    let mut table = ReportTable::new(&ratio_columns());
    table.set_summary("inequality", Cell::Text(cfg.inequality.clone()));
    table.set_summary("seed", Cell::Int(cfg.seed as i64));
    Ok(finish_table(table, rows, skipped))
}

/// Pairwise comparability of the three local-BMO style norms over the corpus
/// and dilations; the fitted constant is the largest two-sided ratio.
fn run_bmo_equiv(cfg: &ExperimentConfig) -> Result<ReportTable> {
    let ctx = build_context(cfg)?;
    let w = AdmissibleWeight::log();
    let dilations = cfg.dilation_range()?;
    let corpus = corpus::generate_corpus(ctx.grid, cfg.seed, cfg.trials.max(8));
    let pool: Vec<&CorpusEntry> = corpus
        .iter()
        .filter(|e| e.tags.contains(&corpus::SpaceTag::BmoLocal) || e.id == "periodized-log")
        .collect();
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    let mut fitted_c = 1.0f64;
    for (trial, entry) in pool.iter().enumerate() {
        for &j in &dilations {
            let f = match dilate(&entry.field, j) {
                Ok(f) => f,
                Err(_) => {
                    skipped += 1;
                    continue;
                }
            };
            let n1 = norms::bmo_local_norm(&f, &ctx.norm_cfg);
            let n2 = norms::xw_norm(&f, &w, &ctx.pair, &ctx.norm_cfg);
            let n3 = norms::bmo_seminorm(&f, &ctx.norm_cfg)
                + norms::average_sup(&f, &w, &ctx.norm_cfg);
            let pairs = [("bmo/xw", n1, n2), ("bmo/avg", n1, n3), ("xw/avg", n2, n3)];
            for (name, a, b) in pairs {
                if b < 1e-10 {
                    skipped += 1;
                    continue;
                }
                let r = a / b;
                fitted_c = fitted_c.max(r.max(1.0 / r));
                rows.push((
                    trial,
                    TrialRatio {
                        dilation: j,
                        numerator: a,
                        denominator: b,
                        case: format!("{}:{}", entry.id, name),
                    },
                ));
            }
        }
    }
    let mut table = ReportTable::new(&ratio_columns());
    table.set_summary("inequality", Cell::Text("bmo-equiv".into()));
    table.set_summary("seed", Cell::Int(cfg.seed as i64));
    table.set_summary("fitted_c", Cell::Num(fitted_c));
    Ok(finish_table(table, rows, skipped))
}

/// Compare every FFT-path operation against its direct-sum oracle at small N.
pub fn run_oracle_suite(cfg: &ExperimentConfig) -> Result<ReportTable> {
    if cfg.n > 128 {
        return Err(Error::InvalidParameter(format!(
            "oracle suite is O(N^2)/O(N^3); N <= 128 required, got {}",
            cfg.n
        )));
    }
    let ctx = build_context(cfg)?;
    let grid = ctx.grid;
    let pair = &ctx.pair;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let band = |rng: &mut ChaCha8Rng| {
        let n = grid.points_per_axis() as i64;
        let mut spec = Spectrum::zeros(grid);
        for (idx, c) in spec.coeffs.iter_mut().enumerate() {
            let k = grid.mode(idx);
            if (0..grid.dim()).all(|a| k[a].abs() < n / 4) {
                *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        inverse_transform(&spec)
    };
    let f = band(&mut rng);
    let g = band(&mut rng);
    let lin_tol = 1e-10;
    let bil_tol = cfg.tolerance;
    let coarse = ScaleGrid::covering(&grid, cfg.alpha, cfg.beta, 8)?;

    let mut results: Vec<(&str, f64, f64)> = Vec::new();

    let spec_fast = forward_transform(&f);
    let spec_slow = oracles::dft_direct(&f);
    let e = spec_fast
        .coeffs
        .iter()
        .zip(&spec_slow.coeffs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max)
        / spec_slow.coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    results.push(("forward_transform", e, lin_tol));

    let mult = crate::field::apply_multiplier(&f, Complex64::new(0.0, 0.0), |xi| {
        Complex64::new(0.0, xi[0])
    })?;
    let mult_o = oracles::apply_multiplier_direct(&f, Complex64::new(0.0, 0.0), |xi| {
        Complex64::new(0.0, xi[0])
    });
    results.push(("apply_multiplier", max_rel_err(&mult, &mult_o), lin_tol));

    let t = 0.5;
    let qt = apply_qt(pair, t, &f)?;
    let qt_o = oracles::apply_radial_direct(&f, 0.0, |r| pair.psi_hat(t * r));
    results.push(("apply_qt", max_rel_err(&qt, &qt_o), lin_tol));
    let pt = apply_pt(pair, t, &f)?;
    let pt_o = oracles::apply_radial_direct(&f, 1.0, |r| pair.phi_hat(t * r));
    results.push(("apply_pt", max_rel_err(&pt, &pt_o), lin_tol));

    let ds = fractional_derivative(&f, 1.5)?;
    let ds_o = oracles::apply_radial_direct(&f, 0.0, |r| r.powf(1.5));
    results.push(("fractional_derivative", max_rel_err(&ds, &ds_o), lin_tol));

    let isig = ctx.sigma.apply_i_inv_sigma(&f)?;
    let isig_o = oracles::apply_radial_direct(&f, 0.0, |r| 1.0 / ctx.sigma.value(r).unwrap());
    results.push(("apply_i_inv_sigma", max_rel_err(&isig, &isig_o), lin_tol));

    let pp = paraproduct_const(&f, &g, &ScalarSymbol::one(), pair, &coarse)?;
    let pp_o = oracles::paraproduct_direct(&f, &g, |_| Complex64::new(1.0, 0.0), pair, &coarse);
    results.push(("paraproduct_const", max_rel_err(&pp, &pp_o), bil_tol));

    let m = |t: f64, x: &[f64]| Complex64::new((x[0] + t.ln()).sin(), 0.0);
    let vsym = crate::bilinear::VariableSymbol::new(1.0, 1.0, m);
    let unit = coarse.restricted(1.0);
    let pv = paraproduct_var(&f, &g, &vsym, pair, &unit)?;
    let pv_o = oracles::paraproduct_var_direct(&f, &g, m, pair, &unit);
    results.push(("paraproduct_var", max_rel_err(&pv, &pv_o), bil_tol));

    let bsym = BilinearSymbol::new(|xi, eta| {
        let d = xi[0].abs() + eta[0].abs();
        if d == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(eta[0] / d, xi[0] / d)
        }
    });
    let cm = coifman_meyer_apply(&f, &g, &bsym)?;
    let cm_o = oracles::coifman_meyer_direct(&f, &g, &bsym);
    results.push(("coifman_meyer_apply", max_rel_err(&cm.field, &cm_o), bil_tol));

    let mut spike = SampledField::zeros(grid);
    spike.values[grid.len() / 3] = Complex64::new(1.0, 0.0);
    let comm = commutator_l1_norm(&vsym, pair, 0.5, &[spike])?;
    let comm_o = oracles::commutator_kernel_ratio(pair, m, 0.5, grid.len() / 3, grid);
    results.push((
        "commutator_l1_norm",
        (comm - comm_o).abs() / comm_o.max(1e-300),
        1e-8,
    ));

    let mut table = ReportTable::new(&["operation", "max_rel_error", "tolerance", "pass"]);
    let mut failures = 0;
    for (op, err, tol) in &results {
        let pass = err <= tol;
        if !pass {
            failures += 1;
        }
        table.push_row(vec![
            Cell::Text(op.to_string()),
            Cell::Num(*err),
            Cell::Num(*tol),
            Cell::Text(if pass { "pass".into() } else { "FAIL".into() }),
        ]);
    }
    table.set_summary("operations", Cell::Int(results.len() as i64));
    table.set_summary("failures", Cell::Int(failures));
    if failures > 0 {
        return Err(Error::InvalidParameter(format!(
            "oracle suite failed {failures} operation(s):\n{}",
            table.to_csv()
        )));
    }
    Ok(table)
}

/// Evaluate every norm on one field; rows {function_id, norm_name, value,
/// grid, params}.
pub fn norms_report(id: &str, f: &SampledField, cfg: &ExperimentConfig) -> Result<ReportTable> {
    let mut full = cfg.clone();
    full.dim = f.grid.dim();
    full.n = f.grid.points_per_axis();
    full.period = f.grid.period();
    let ctx = build_context(&full)?;
    let w = &ctx.weight;
    let grid_desc = format!("dim={} n={} L={:.6}", f.grid.dim(), f.grid.points_per_axis(), f.grid.period());
    let params = format!("weight={} alpha={} beta={}", full.weight, full.alpha, full.beta);
    let mut table = ReportTable::new(&["function_id", "norm_name", "value", "grid", "params"]);
    let entries: Vec<(&str, f64)> = vec![
        ("bmo_seminorm", norms::bmo_seminorm(f, &ctx.norm_cfg)),
        ("bmo_local_norm", norms::bmo_local_norm(f, &ctx.norm_cfg)),
        ("xw_norm", norms::xw_norm(f, w, &ctx.pair, &ctx.norm_cfg)),
        ("bmo_sigma_norm", norms::bmo_sigma_norm(f, &ctx.sigma, &ctx.norm_cfg)?),
        ("h1_norm", norms::h1_norm(f, &ctx.norm_cfg)),
        ("hardy_maximal_norm", norms::hardy_maximal_norm(f, &ctx.norm_cfg)),
        ("morrey_norm", norms::morrey_norm(f, |r| 1.0 / w.eval(r), &ctx.norm_cfg)?),
        ("carleson_norm", norms::carleson_norm(f, &ctx.pair, &ctx.norm_cfg)),
        ("linf_norm", f.max_abs()),
        ("l1_norm", f.l1_norm()),
    ];
    for (name, value) in entries {
        table.push_row(vec![
            Cell::Text(id.to_string()),
            Cell::Text(name.to_string()),
            Cell::Num(value),
            Cell::Text(grid_desc.clone()),
            Cell::Text(params.clone()),
        ]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig { n: 64, trials: 3, dilations: "-1..1".into(), ..Default::default() }
    }

    #[test]
    fn oracle_suite_passes_at_n64() {
        let cfg = small_cfg();
        let table = run_oracle_suite(&cfg).unwrap();
        assert!(table.rows.len() >= 8);
    }

    #[test]
    fn oracle_suite_rejects_large_n() {
        let cfg = ExperimentConfig { n: 512, ..small_cfg() };
        assert!(run_oracle_suite(&cfg).is_err());
    }

    #[test]
    fn ratio_suite_runs_and_is_deterministic() {
        let cfg = ExperimentConfig { inequality: "thm-main-w1".into(), ..small_cfg() };
        let a = run_inequality(&cfg).unwrap();
        let b = run_inequality(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.summary_json(), b.summary_json());
        assert!(!a.rows.is_empty());
    }

    #[test]
    fn unknown_inequality_rejected() {
        let cfg = ExperimentConfig { inequality: "nope".into(), ..small_cfg() };
        assert!(run_inequality(&cfg).is_err());
    }

    #[test]
    fn bmo_equiv_reports_fitted_constant() {
        let cfg = ExperimentConfig {
            inequality: "bmo-equiv".into(),
            trials: 6,
            ..small_cfg()
        };
        let table = run_inequality(&cfg).unwrap();
        assert!(table.summary.contains_key("fitted_c"));
    }

    #[test]
    fn norms_report_has_all_rows() {
        let cfg = small_cfg();
        let grid = GridSpec::new(1, 64, cfg.period).unwrap();
        let f = corpus::periodized_log(grid);
        let table = norms_report("test", &f, &cfg).unwrap();
        assert_eq!(table.rows.len(), 10);
    }
}

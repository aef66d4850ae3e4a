//! Admissible weights w(t) >= 1 with controlled multiplicative oscillation,
//! their built-in instances, and sampled validation of the defining axioms.

use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scale::ScaleGrid;

#[derive(Clone)]
enum WeightKind {
    Unit,
    Log,
    LogPower(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A weight function on (0, infinity) together with its claimed growth
/// exponent for the bounded-growth axiom.
#[derive(Clone)]
pub struct AdmissibleWeight {
    label: String,
    n_growth: f64,
    kind: WeightKind,
}

fn log_plus(x: f64) -> f64 {
    x.ln().max(0.0)
}

impl AdmissibleWeight {
    pub fn unit() -> Self {
        AdmissibleWeight { label: "unit".into(), n_growth: 0.5, kind: WeightKind::Unit }
    }

    /// w(t) = 1 + log_+(1/t)
    pub fn log() -> Self {
        AdmissibleWeight { label: "log".into(), n_growth: 1.0, kind: WeightKind::Log }
    }

    /// w(t) = (1 + log_+(1/t))^alpha
    pub fn log_power(alpha: f64) -> Self {
        AdmissibleWeight {
            label: format!("log_power({alpha})"),
            n_growth: alpha.max(1.0),
            kind: WeightKind::LogPower(alpha),
        }
    }

    /// Programmatic weight for experiments; admissibility is the caller's
    /// claim, to be validated by `validate_admissible`.
    pub fn custom(
        label: impl Into<String>,
        n_growth: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        AdmissibleWeight { label: label.into(), n_growth, kind: WeightKind::Custom(Arc::new(eval)) }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            WeightKind::Unit => 1.0,
            WeightKind::Log => 1.0 + log_plus(1.0 / t),
            WeightKind::LogPower(a) => (1.0 + log_plus(1.0 / t)).powf(*a),
            WeightKind::Custom(f) => f(t),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_growth(&self) -> f64 {
        self.n_growth
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.kind, WeightKind::Unit)
    }
}

impl std::fmt::Debug for AdmissibleWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AdmissibleWeight({}, N={})", self.label, self.n_growth)
    }
}

/// Weight named in CLI/config by (name, alpha).
pub fn builtin_weight(name: &str, alpha: Option<f64>) -> Result<AdmissibleWeight> {
    match name {
        "unit" => Ok(AdmissibleWeight::unit()),
        "log" => Ok(AdmissibleWeight::log()),
        "log_power" => {
            let a = alpha.ok_or_else(|| {
                Error::InvalidParameter("log_power weight requires alpha".into())
            })?;
            if !(a > 0.0) {
                return Err(Error::InvalidParameter(format!("alpha must be > 0, got {a}")));
            }
            Ok(AdmissibleWeight::log_power(a))
        }
        other => Err(Error::UnknownName(other.into())),
    }
}

/// Sampled estimate of the ratio envelope inf/sup_t w(st)/w(t).
#[derive(Debug, Clone, Serialize)]
pub struct RatioCertificate {
    pub s: f64,
    pub inf_ratio: f64,
    pub sup_ratio: f64,
    pub t_min: f64,
    pub t_max: f64,
}

pub fn ratio_bounds(w: &AdmissibleWeight, s: f64, grid: &ScaleGrid) -> Result<RatioCertificate> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    let mut inf = f64::INFINITY;
    let mut sup = f64::NEG_INFINITY;
    for &t in grid.nodes() {
        let num = w.eval(s * t);
        let den = w.eval(t);
        if !num.is_finite() || !den.is_finite() || den == 0.0 {
            return Err(Error::NonFiniteWeight { t });
        }
        let r = num / den;
        inf = inf.min(r);
        sup = sup.max(r);
    }
    Ok(RatioCertificate { s, inf_ratio: inf, sup_ratio: sup, t_min: grid.t_min(), t_max: grid.t_max() })
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomResult {
    pub axiom: String,
    pub pass: bool,
    pub detail: String,
    pub witness: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub weight: String,
    pub n_growth: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub axioms: Vec<AxiomResult>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }
}

/// Sampled check of the four admissibility axioms: positive finite ratio
/// envelope for each s, pointwise lower bound 1, polynomially bounded growth
/// at 0, and a uniform ratio envelope over the s-interval. Failures are
/// report entries, not errors.
pub fn validate_admissible(
    w: &AdmissibleWeight,
    s_samples: &[f64],
    grid: &ScaleGrid,
) -> Result<ValidationReport> {
    let mut axioms = Vec::new();

    // (A1): for every sampled s the ratio envelope is positive and finite.
    let mut worst_inf = f64::INFINITY;
    let mut worst_sup: f64 = 0.0;
    let mut a1_pass = true;
    for &s in s_samples {
        let cert = ratio_bounds(w, s, grid)?;
        if !(cert.inf_ratio > 0.0) || !cert.sup_ratio.is_finite() {
            a1_pass = false;
        }
        worst_inf = worst_inf.min(cert.inf_ratio);
        worst_sup = worst_sup.max(cert.sup_ratio);
    }
    axioms.push(AxiomResult {
        axiom: "A1".into(),
        pass: a1_pass,
        detail: format!("inf ratio {worst_inf:.6e}, sup ratio {worst_sup:.6e} over s samples"),
        witness: None,
    });

    // (A2): w(t) >= 1 everywhere on the sampled range.
    let mut min_val = f64::INFINITY;
    let mut min_t = grid.t_min();
    for &t in grid.nodes() {
        let v = w.eval(t);
        if v < min_val {
            min_val = v;
            min_t = t;
        }
    }
    axioms.push(AxiomResult {
        axiom: "A2".into(),
        pass: min_val >= 1.0 - 1e-12,
        detail: format!("min w(t) = {min_val:.6e} at t = {min_t:.6e}"),
        witness: Some(min_t),
    });

    // (A3): w(t) (1 + 1/t)^{-N} bounded. Sampled criterion: the supremum over
    // the full range must not keep growing towards the endpoints -- compare
    // against the supremum over the middle half of the log range.
    let product = |t: f64| w.eval(t) * (1.0 + 1.0 / t).powf(-w.n_growth());
    let nodes = grid.nodes();
    let sup_full = nodes.iter().map(|&t| product(t)).fold(0.0f64, f64::max);
    let quarter = nodes.len() / 4;
    let sup_inner = nodes[quarter..nodes.len() - quarter]
        .iter()
        .map(|&t| product(t))
        .fold(0.0f64, f64::max);
    let a3_pass = sup_full.is_finite() && sup_full <= sup_inner * 1.05;
    axioms.push(AxiomResult {
        axiom: "A3".into(),
        pass: a3_pass,
        detail: format!(
            "sup w(t)(1+1/t)^-{} = {sup_full:.6e} (inner-range sup {sup_inner:.6e})",
            w.n_growth()
        ),
        witness: None,
    });

    // (A4): the envelope is uniform over the closed s-interval.
    let inf_i = worst_inf;
    let sup_s = worst_sup;
    axioms.push(AxiomResult {
        axiom: "A4".into(),
        pass: inf_i > 0.0 && sup_s.is_finite(),
        detail: format!("inf_s i(s) = {inf_i:.6e}, sup_s s(s) = {sup_s:.6e}"),
        witness: None,
    });

    Ok(ValidationReport {
        weight: w.label().into(),
        n_growth: w.n_growth(),
        t_min: grid.t_min(),
        t_max: grid.t_max(),
        axioms,
    })
}

/// The sampled t-range used for axiom checks: [2^-20, 2^20] at 64 nodes per
/// octave.
pub fn axiom_scale_grid() -> ScaleGrid {
    ScaleGrid::new(2f64.powi(-20), 2f64.powi(20), 64).expect("static range is valid")
}

/// Standard s-sample covering [1/8, 8].
pub fn default_s_samples() -> Vec<f64> {
    (0..=48).map(|i| 2f64.powf(-3.0 + i as f64 / 8.0)).collect()
}

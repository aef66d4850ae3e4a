//! Log-uniform discretization of the scale half-line carrying the midpoint
//! quadrature for dt/t integrals.

use crate::error::{Error, Result};
use crate::field::GridSpec;

/// Log-uniform scale nodes in [t_min, t_max]; node j sits at the midpoint
/// t_min * exp((j + 1/2) * delta), so `sum F(t_j) * delta` is the midpoint
/// rule for `int F(t) dt/t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    nodes: Vec<f64>,
    log_step: f64,
    t_min: f64,
    t_max: f64,
}

pub const DEFAULT_NODES_PER_OCTAVE: usize = 64;

impl ScaleGrid {
    pub fn new(t_min: f64, t_max: f64, nodes_per_octave: usize) -> Result<Self> {
        if !(t_min > 0.0) || !(t_max > t_min) {
            return Err(Error::InvalidParameter(format!(
                "scale range must satisfy 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if nodes_per_octave == 0 {
            return Err(Error::InvalidParameter("nodes_per_octave must be positive".into()));
        }
        let delta = std::f64::consts::LN_2 / nodes_per_octave as f64;
        let count = ((t_max / t_min).ln() / delta).ceil() as usize;
        let nodes = (0..count)
            .map(|j| t_min * ((j as f64 + 0.5) * delta).exp())
            .collect();
        Ok(ScaleGrid { nodes, log_step: delta, t_min, t_max })
    }

    /// Default grid for a (grid, bump pair) combination: covers the annulus
    /// window of every nonzero grid frequency, i.e. t_min <= alpha/|xi|_max
    /// and t_max >= beta/|xi|_min, with one octave of margin on each side.
    pub fn covering(grid: &GridSpec, alpha: f64, beta: f64, nodes_per_octave: usize) -> Result<Self> {
        let t_min = 0.5 * (alpha / grid.max_freq()).min(grid.spacing() / beta);
        let t_max = 2.0 * (beta / grid.min_freq()).max(grid.period());
        ScaleGrid::new(t_min, t_max, nodes_per_octave)
    }

    /// Restriction to nodes t <= cutoff (for the variable-coefficient
    /// paraproduct, which integrates over (0, 1]).
    pub fn restricted(&self, cutoff: f64) -> ScaleGrid {
        let nodes: Vec<f64> = self.nodes.iter().copied().filter(|&t| t <= cutoff).collect();
        let t_max = nodes.last().copied().unwrap_or(self.t_min);
        ScaleGrid { nodes, log_step: self.log_step, t_min: self.t_min, t_max }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature weight per node for dt/t integrals.
    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Whether the annulus window [alpha/|xi|, beta/|xi|] lies inside the
    /// covered range.
    pub fn covers_annulus(&self, alpha: f64, beta: f64, xi_mag: f64) -> bool {
        self.t_min <= alpha / xi_mag && self.t_max >= beta / xi_mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_ratio_between_nodes() {
        let g = ScaleGrid::new(1e-3, 1e3, 16).unwrap();
        let nodes = g.nodes();
        let r0 = nodes[1] / nodes[0];
        for w in nodes.windows(2) {
            assert!((w[1] / w[0] - r0).abs() < 1e-12);
        }
        assert!((r0.ln() - g.log_step()).abs() < 1e-14);
    }

    #[test]
    fn covering_grid_spans_all_frequencies() {
        let grid = GridSpec::new(1, 256, 2.0 * std::f64::consts::PI).unwrap();
        let s = ScaleGrid::covering(&grid, 1.0, 4.0, 16).unwrap();
        assert!(s.t_min() <= grid.spacing() / 4.0);
        assert!(s.t_max() >= grid.period());
        for k in 1..=(grid.points_per_axis() / 2) {
            let xi = k as f64 * grid.min_freq();
            assert!(s.covers_annulus(1.0, 4.0, xi));
        }
    }

    #[test]
    fn restriction_keeps_quadrature_step() {
        let g = ScaleGrid::new(1e-4, 10.0, 8).unwrap();
        let r = g.restricted(1.0);
        assert!(r.nodes().iter().all(|&t| t <= 1.0));
        assert_eq!(r.log_step(), g.log_step());
        assert!(!r.is_empty());
    }
}

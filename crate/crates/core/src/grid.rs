//! Uniform spatial grids on `[0, L]` and functions sampled on them.
//!
//! All inner products and norms use the composite trapezoid rule. For
//! functions with zero trace the endpoint weights drop out, so the inner
//! product reduces to `h * sum(interior)`.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Uniform grid with both endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    length: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn uniform(length: f64, n_nodes: usize) -> Result<Arc<Grid>> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be > 0, got {length}")));
        }
        if n_nodes < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 nodes, got {n_nodes}"
            )));
        }
        let cells = (n_nodes - 1) as f64;
        let mut nodes: Vec<f64> = (0..n_nodes).map(|i| length * i as f64 / cells).collect();
        nodes[n_nodes - 1] = length;
        Ok(Arc::new(Grid { length, nodes }))
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_interior(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.nodes.len() - 1) as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezoid weights; they sum to `L`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let n = self.nodes.len();
        (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect()
    }

    /// Two grids are interchangeable when they describe the same nodes.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.nodes.len() == other.nodes.len()
            && ((self.length - other.length).abs() <= 1e-12 * self.length.max(other.length))
    }

    pub fn sample<F: Fn(f64) -> f64>(self: &Arc<Self>, f: F) -> GridFunction {
        let values = self.nodes.iter().map(|&x| f(x)).collect();
        GridFunction {
            grid: Arc::clone(self),
            values,
        }
    }
}

/// Real values attached to every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.n_nodes()];
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Endpoint values are both exactly zero (`u|∂D = 0`).
    pub fn is_dirichlet_admissible(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.values.len() - 1] == 0.0
    }

    /// Fails with `BoundaryViolation` unless both endpoint values are within `tol` of zero.
    pub fn check_zero_trace(&self, tol: f64) -> Result<()> {
        let nodes = self.grid.nodes();
        for &i in &[0, self.values.len() - 1] {
            let v = self.values[i];
            if !(v.abs() <= tol) {
                return Err(Error::BoundaryViolation {
                    x: nodes[i],
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn ensure_same_grid(&self, grid: &Grid) -> Result<()> {
        if self.grid.same_as(grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "function on {} nodes over [0, {}], expected {} nodes over [0, {}]",
                self.grid.n_nodes(),
                self.grid.length(),
                grid.n_nodes(),
                grid.length()
            )))
        }
    }

    pub fn dot(&self, other: &GridFunction) -> Result<f64> {
        other.ensure_same_grid(&self.grid)?;
        Ok(trapezoid_dot(self.grid.spacing(), &self.values, &other.values))
    }

    pub fn norm_l2(&self) -> f64 {
        trapezoid_dot(self.grid.spacing(), &self.values, &self.values).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear combination `a*self + b*other`.
    pub fn axpby(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        other.ensure_same_grid(&self.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(GridFunction {
            grid: Arc::clone(&self.grid),
            values,
        })
    }
}

/// Trapezoid inner product of two node vectors with spacing `h`.
pub fn trapezoid_dot(h: f64, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    let interior: f64 = (1..n - 1).map(|i| a[i] * b[i]).sum();
    h * (interior + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints_and_spacing() {
        let g = Grid::uniform(2.0, 5).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.spacing(), 0.5);
        let total: f64 = g.trapezoid_weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::uniform(0.0, 10).is_err());
        assert!(Grid::uniform(1.0, 2).is_err());
        assert!(Grid::uniform(f64::NAN, 10).is_err());
    }

    #[test]
    fn spacing_is_uniform() {
        let g = Grid::uniform(std::f64::consts::TAU, 1025).unwrap();
        let h = g.spacing();
        for w in g.nodes().windows(2) {
            assert!(((w[1] - w[0]) - h).abs() <= 1e-12 * h);
        }
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let g = Grid::uniform(3.0, 7).unwrap();
        let f = g.sample(|x| 2.0 * x + 1.0);
        let one = g.sample(|_| 1.0);
        assert!((f.dot(&one).unwrap() - 12.0).abs() < 1e-13);
    }

    #[test]
    fn mismatched_values_rejected() {
        let g = Grid::uniform(1.0, 5).unwrap();
        assert!(matches!(
            GridFunction::new(g, vec![0.0; 4]),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn zero_trace_check() {
        let g = Grid::uniform(1.0, 5).unwrap();
        let f = g.sample(|x| x);
        assert!(matches!(
            f.check_zero_trace(1e-14),
            Err(Error::BoundaryViolation { .. })
        ));
        let s = g.sample(|x| x * (1.0 - x));
        assert!(s.check_zero_trace(1e-14).is_ok());
    }
}

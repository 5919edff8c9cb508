//! The elliptic operator `A u = (a u')' + a0 u` on `(0, L)` with Dirichlet ends.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    /// `a ≡ diffusion`, `a0 ≡ -q`.
    Constant { diffusion: f64, q: f64 },
    /// Node values of `a` and `a0`.
    Tabulated { a: Vec<f64>, a0: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    grid: Arc<Grid>,
    coefficients: Coefficients,
    ellipticity: f64,
}

impl OperatorSpec {
    /// `u_t = a u_xx - q u`.
    pub fn constant(grid: Arc<Grid>, diffusion: f64, q: f64) -> Result<Self> {
        if !diffusion.is_finite() || !q.is_finite() {
            return Err(Error::InvalidOperator("non-finite coefficient".into()));
        }
        if diffusion <= 0.0 {
            return Err(Error::NonElliptic { min_a: diffusion });
        }
        Ok(OperatorSpec {
            grid,
            coefficients: Coefficients::Constant { diffusion, q },
            ellipticity: diffusion,
        })
    }

    /// Heat operator `u_xx - q u`.
    pub fn heat(grid: Arc<Grid>, q: f64) -> Result<Self> {
        Self::constant(grid, 1.0, q)
    }

    pub fn tabulated(grid: Arc<Grid>, a: Vec<f64>, a0: Vec<f64>) -> Result<Self> {
        let n = grid.n_nodes();
        if a.len() != n || a0.len() != n {
            return Err(Error::GridMismatch(format!(
                "coefficient tables have {} and {} entries for {} nodes",
                a.len(),
                a0.len(),
                n
            )));
        }
        if a.iter().chain(&a0).any(|v| !v.is_finite()) {
            return Err(Error::InvalidOperator("non-finite coefficient".into()));
        }
        let min_a = a.iter().copied().fold(f64::INFINITY, f64::min);
        if min_a <= 0.0 {
            return Err(Error::NonElliptic { min_a });
        }
        Ok(OperatorSpec {
            grid,
            coefficients: Coefficients::Tabulated { a, a0 },
            ellipticity: min_a,
        })
    }

    pub fn tabulated_from_fn<F, G>(grid: Arc<Grid>, a: F, a0: G) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let av = grid.nodes().iter().map(|&x| a(x)).collect();
        let a0v = grid.nodes().iter().map(|&x| a0(x)).collect();
        Self::tabulated(grid, av, a0v)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    /// Recorded `δ` with `a(x) ≥ δ` on the grid.
    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.coefficients, Coefficients::Constant { .. })
    }

    /// `a` at node `i`.
    pub fn a_at(&self, i: usize) -> f64 {
        match &self.coefficients {
            Coefficients::Constant { diffusion, .. } => *diffusion,
            Coefficients::Tabulated { a, .. } => a[i],
        }
    }

    /// `a0` at node `i`.
    pub fn a0_at(&self, i: usize) -> f64 {
        match &self.coefficients {
            Coefficients::Constant { q, .. } => -q,
            Coefficients::Tabulated { a0, .. } => a0[i],
        }
    }

    /// `a(x_{i+1/2})`, sampled as the mean of the neighbouring node values.
    pub fn a_mid(&self, i: usize) -> f64 {
        match &self.coefficients {
            Coefficients::Constant { diffusion, .. } => *diffusion,
            Coefficients::Tabulated { a, .. } => 0.5 * (a[i] + a[i + 1]),
        }
    }
}

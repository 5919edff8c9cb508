//! Dirichlet eigenbasis of the Sturm-Liouville operator and the transforms
//! between grid functions and spectral coefficients.
//!
//! Eigenpairs satisfy `A v_k = -λ_k v_k`, `v_k(0) = v_k(L) = 0`, with
//! `λ_1 < λ_2 < ...`. Modes are stored sampled on the grid and are
//! orthonormal in the trapezoid inner product.

mod solvers;
pub mod tridiag;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{trapezoid_dot, Grid, GridFunction};
use crate::operator::OperatorSpec;

pub use solvers::{
    AnalyticSineSolver, EigenSolver, EigenSolverRegistry, TridiagonalSolver, AUTO_SOLVER,
};

/// Truncated eigen-decomposition `{(λ_k, v_k)}`, `k = 1..=N`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    op: OperatorSpec,
    lambdas: Vec<f64>,
    // Row-major: mode k occupies modes[k*n .. (k+1)*n].
    modes: Vec<f64>,
    first_positive: Option<usize>,
    solver: &'static str,
}

impl EigenSystem {
    pub(crate) fn from_parts(
        op: OperatorSpec,
        lambdas: Vec<f64>,
        mut modes: Vec<f64>,
        solver: &'static str,
    ) -> Result<Self> {
        let n = op.grid().n_nodes();
        debug_assert_eq!(modes.len(), lambdas.len() * n);
        for mode in modes.chunks_mut(n) {
            mode[0] = 0.0;
            mode[n - 1] = 0.0;
            let lead = mode[1..n - 1].iter().copied().find(|v| *v != 0.0).unwrap_or(1.0);
            if lead < 0.0 {
                mode.iter_mut().for_each(|v| *v = -*v);
            }
        }
        for w in lambdas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::EigenSolver(format!(
                    "eigenvalues not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let first_positive = lambdas.iter().position(|&l| l > 0.0);
        Ok(EigenSystem {
            op,
            lambdas,
            modes,
            first_positive,
            solver,
        })
    }

    pub fn op(&self) -> &OperatorSpec {
        &self.op
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.op.grid()
    }

    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.lambdas[k]
    }

    /// Node values of mode `k` (0-based).
    pub fn mode(&self, k: usize) -> &[f64] {
        let n = self.grid().n_nodes();
        &self.modes[k * n..(k + 1) * n]
    }

    pub fn mode_function(&self, k: usize) -> GridFunction {
        GridFunction::new(Arc::clone(self.grid()), self.mode(k).to_vec())
            .expect("mode length matches grid")
    }

    /// 0-based index of the first strictly positive eigenvalue.
    pub fn first_positive(&self) -> Option<usize> {
        self.first_positive
    }

    /// The classical 1-based `m`: smallest index with `λ_m > 0`.
    pub fn m_pos(&self) -> Option<usize> {
        self.first_positive.map(|i| i + 1)
    }

    pub fn solver_name(&self) -> &'static str {
        self.solver
    }

    /// Gram matrix deviation `max_{j,k} |(v_j, v_k) - δ_jk|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let h = self.grid().spacing();
        let mut worst = 0.0f64;
        for j in 0..self.n_modes() {
            for k in j..self.n_modes() {
                let g = trapezoid_dot(h, self.mode(j), self.mode(k));
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Coefficients `(f, v_k)` of a grid function.
    pub fn project(self: &Arc<Self>, f: &GridFunction) -> Result<SpectralVector> {
        f.ensure_same_grid(self.grid())?;
        let h = self.grid().spacing();
        let fv = f.values();
        let coeffs = (0..self.n_modes())
            .map(|k| trapezoid_dot(h, fv, self.mode(k)))
            .collect();
        Ok(SpectralVector {
            eigensys: Arc::clone(self),
            coeffs,
        })
    }

    /// `Σ c_k v_k` on the grid. Endpoints are exactly zero.
    pub fn synthesize(&self, c: &SpectralVector) -> Result<GridFunction> {
        self.ensure_owns(c)?;
        let values = self.synthesize_coeffs(&c.coeffs);
        GridFunction::new(Arc::clone(self.grid()), values)
    }

    pub(crate) fn synthesize_coeffs(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.grid().n_nodes();
        let mut out = vec![0.0; n];
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.mode(k)) {
                *o += c * v;
            }
        }
        out[0] = 0.0;
        out[n - 1] = 0.0;
        out
    }

    /// `‖f - Π_N f‖` in the discrete L2 norm.
    pub fn truncation_residual(self: &Arc<Self>, f: &GridFunction) -> Result<f64> {
        let c = self.project(f)?;
        let back = self.synthesize_coeffs(&c.coeffs);
        let diff: Vec<f64> = f.values().iter().zip(&back).map(|(a, b)| a - b).collect();
        Ok(trapezoid_dot(self.grid().spacing(), &diff, &diff).sqrt())
    }

    pub fn ensure_owns(&self, c: &SpectralVector) -> Result<()> {
        if c.coeffs.len() != self.n_modes() || !c.eigensys.grid().same_as(self.grid()) {
            return Err(Error::GridMismatch(format!(
                "spectral vector of {} modes does not belong to this {}-mode basis",
                c.coeffs.len(),
                self.n_modes()
            )));
        }
        Ok(())
    }
}

/// Build an eigensystem with the default solver selection
/// (closed form for constant coefficients, tridiagonal otherwise).
pub fn build_eigensystem(op: &OperatorSpec, n_modes: usize) -> Result<Arc<EigenSystem>> {
    EigenSolverRegistry::with_defaults().build(AUTO_SOLVER, op, n_modes)
}

/// Coefficients of a function in the basis of one [`EigenSystem`].
#[derive(Debug, Clone)]
pub struct SpectralVector {
    eigensys: Arc<EigenSystem>,
    coeffs: Vec<f64>,
}

impl SpectralVector {
    pub fn new(eigensys: Arc<EigenSystem>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != eigensys.n_modes() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for {} modes",
                coeffs.len(),
                eigensys.n_modes()
            )));
        }
        Ok(SpectralVector { eigensys, coeffs })
    }

    pub fn zeros(eigensys: Arc<EigenSystem>) -> Self {
        let coeffs = vec![0.0; eigensys.n_modes()];
        SpectralVector { eigensys, coeffs }
    }

    /// Unit vector `e_k` (0-based).
    pub fn unit(eigensys: Arc<EigenSystem>, k: usize) -> Self {
        let mut v = Self::zeros(eigensys);
        v.coeffs[k] = 1.0;
        v
    }

    pub fn eigensys(&self) -> &Arc<EigenSystem> {
        &self.eigensys
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn synthesize(&self) -> GridFunction {
        let values = self.eigensys.synthesize_coeffs(&self.coeffs);
        GridFunction::new(Arc::clone(self.eigensys.grid()), values).expect("grid sized")
    }

    pub(crate) fn with_coeffs(&self, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        SpectralVector {
            eigensys: Arc::clone(&self.eigensys),
            coeffs,
        }
    }

    pub fn map_indexed<F: Fn(usize, f64) -> f64>(&self, f: F) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(k, &c)| f(k, c)).collect();
        self.with_coeffs(coeffs)
    }

    /// `a*self + b*other`.
    pub fn axpby(&self, a: f64, other: &SpectralVector, b: f64) -> Result<Self> {
        self.eigensys.ensure_owns(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(self.with_coeffs(coeffs))
    }
}

use std::sync::Arc;

use super::tridiag::SymTridiagonal;
use super::EigenSystem;
use crate::error::{Error, Result};
use crate::operator::{Coefficients, OperatorSpec};
use crate::registry::{Named, Registry};

/// Name that selects the closed form when it applies and the tridiagonal solver otherwise.
pub const AUTO_SOLVER: &str = "auto";

/// A way of producing the lowest `n_modes` Dirichlet eigenpairs of an operator.
pub trait EigenSolver: Named + Send + Sync {
    fn supports(&self, op: &OperatorSpec) -> bool;
    fn solve(&self, op: &OperatorSpec, n_modes: usize) -> Result<EigenSystem>;
}

/// Closed form for constant coefficients:
/// `λ_k = a (kπ/L)² + q`, `v_k = √(2/L) sin(kπx/L)`.
pub struct AnalyticSineSolver;

impl Named for AnalyticSineSolver {
    fn name(&self) -> &'static str {
        "analytic"
    }
    fn description(&self) -> &'static str {
        "closed-form sine modes (constant coefficients only)"
    }
}

impl EigenSolver for AnalyticSineSolver {
    fn supports(&self, op: &OperatorSpec) -> bool {
        op.is_constant()
    }

    fn solve(&self, op: &OperatorSpec, n_modes: usize) -> Result<EigenSystem> {
        let (diffusion, q) = match op.coefficients() {
            Coefficients::Constant { diffusion, q } => (*diffusion, *q),
            Coefficients::Tabulated { .. } => {
                return Err(Error::EigenSolver(
                    "analytic solver needs constant coefficients".into(),
                ))
            }
        };
        let grid = op.grid();
        let length = grid.length();
        let n = grid.n_nodes();
        let amp = (2.0 / length).sqrt();
        let cells = (n - 1) as f64;
        let mut lambdas = Vec::with_capacity(n_modes);
        let mut modes = Vec::with_capacity(n_modes * n);
        for k in 1..=n_modes {
            let wave = k as f64 * std::f64::consts::PI / length;
            lambdas.push(diffusion * wave * wave + q);
            // sin(kπ i/(n-1)) keeps the sampling exact at the nodes.
            let phase = k as f64 * std::f64::consts::PI / cells;
            modes.extend((0..n).map(|i| amp * (phase * i as f64).sin()));
        }
        EigenSystem::from_parts(op.clone(), lambdas, modes, self.name())
    }
}

/// Second-order finite differences for `-(a u')' - a0 u` on the interior
/// nodes, solved by bisection and inverse iteration.
pub struct TridiagonalSolver;

impl TridiagonalSolver {
    /// The interior stiffness matrix `K` with `K v = λ v`.
    pub fn assemble(op: &OperatorSpec) -> Result<SymTridiagonal> {
        let grid = op.grid();
        let h2 = grid.spacing() * grid.spacing();
        let m = grid.n_interior();
        let diag = (1..=m)
            .map(|i| (op.a_mid(i - 1) + op.a_mid(i)) / h2 - op.a0_at(i))
            .collect();
        let off = (1..m).map(|i| -op.a_mid(i) / h2).collect();
        SymTridiagonal::new(diag, off)
    }
}

impl Named for TridiagonalSolver {
    fn name(&self) -> &'static str {
        "tridiagonal"
    }
    fn description(&self) -> &'static str {
        "finite-difference matrix, Sturm bisection + inverse iteration"
    }
}

impl EigenSolver for TridiagonalSolver {
    fn supports(&self, _op: &OperatorSpec) -> bool {
        true
    }

    fn solve(&self, op: &OperatorSpec, n_modes: usize) -> Result<EigenSystem> {
        let matrix = Self::assemble(op)?;
        let (lambdas, vectors) = matrix.lowest_eigenpairs(n_modes)?;
        let n = op.grid().n_nodes();
        let scale = 1.0 / op.grid().spacing().sqrt();
        let mut modes = Vec::with_capacity(n_modes * n);
        for v in &vectors {
            modes.push(0.0);
            modes.extend(v.iter().map(|x| x * scale));
            modes.push(0.0);
        }
        EigenSystem::from_parts(op.clone(), lambdas, modes, self.name())
    }
}

pub struct EigenSolverRegistry {
    inner: Registry<dyn EigenSolver>,
}

impl EigenSolverRegistry {
    pub fn empty() -> Self {
        EigenSolverRegistry {
            inner: Registry::new("eigensolver"),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(AnalyticSineSolver));
        r.register(Arc::new(TridiagonalSolver));
        r
    }

    pub fn register(&mut self, solver: Arc<dyn EigenSolver>) -> &mut Self {
        self.inner.register(solver);
        self
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.inner.names()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn EigenSolver>> {
        self.inner.get(name)
    }

    /// Resolve `name` (or [`AUTO_SOLVER`]) for `op`.
    pub fn resolve(&self, name: &str, op: &OperatorSpec) -> Result<Arc<dyn EigenSolver>> {
        if name == AUTO_SOLVER {
            let preferred = if op.is_constant() { "analytic" } else { "tridiagonal" };
            return self.get(preferred);
        }
        let solver = self.get(name)?;
        if !solver.supports(op) {
            return Err(Error::EigenSolver(format!(
                "solver '{name}' does not support this operator"
            )));
        }
        Ok(solver)
    }

    pub fn build(&self, name: &str, op: &OperatorSpec, n_modes: usize) -> Result<Arc<EigenSystem>> {
        let interior = op.grid().n_interior();
        if n_modes == 0 || n_modes > interior {
            return Err(Error::TruncationTooLarge { n_modes, interior });
        }
        let solver = self.resolve(name, op)?;
        Ok(Arc::new(solver.solve(op, n_modes)?))
    }
}

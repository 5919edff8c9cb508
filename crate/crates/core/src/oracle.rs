//! Crank-Nicolson finite differences for `u_t = (a u_x)_x + a0 u + φ` with
//! homogeneous Dirichlet ends, and trapezoid time-averaging.
//!
//! Verification path only: nothing here touches eigenpairs or spectral
//! coefficients, so agreement with the spectral modules is meaningful.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{merge_times, uniform_times, FieldSamples};
use crate::grid::GridFunction;
use crate::operator::OperatorSpec;
use crate::source::SourceTerm;
use crate::weights::WeightSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub horizon: f64,
    /// Uniform steps over `[0, T]` before breakpoints are inserted.
    pub n_steps: usize,
    /// Extra instants inserted exactly into the time grid.
    pub breakpoints: Vec<f64>,
}

impl StepperConfig {
    pub fn new(horizon: f64, n_steps: usize) -> Self {
        StepperConfig {
            horizon,
            n_steps,
            breakpoints: Vec::new(),
        }
    }

    /// Insert the breakpoints of `ws` so the weighted average can be taken exactly.
    pub fn resolving(mut self, ws: &WeightSpec) -> Self {
        self.breakpoints.extend(ws.breakpoints());
        self
    }

    pub fn with_breakpoints(mut self, extra: &[f64]) -> Self {
        self.breakpoints.extend_from_slice(extra);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(Error::InvalidStepper(format!("n_steps = {} < 2", self.n_steps)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidStepper(format!("horizon = {}", self.horizon)));
        }
        Ok(())
    }

    /// Uniform steps merged with breakpoints (and source instants).
    pub fn time_grid(&self, src: Option<&SourceTerm>) -> Vec<f64> {
        let base = uniform_times(self.horizon, self.n_steps);
        let tol = 1e-12 * self.horizon;
        let inside: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t < self.horizon)
            .collect();
        let src_times: Vec<f64> = src
            .map(|s| s.times().iter().copied().filter(|&t| t > 0.0 && t < self.horizon).collect())
            .unwrap_or_default();
        merge_times(&[&base, &inside, &src_times], tol)
    }
}

/// Interior operator `A_h` in three bands.
struct Stencil {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Stencil {
    fn assemble(op: &OperatorSpec) -> Self {
        let grid = op.grid();
        let h2 = grid.spacing() * grid.spacing();
        let m = grid.n_interior();
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for r in 0..m {
            let i = r + 1;
            let west = op.a_mid(i - 1) / h2;
            let east = op.a_mid(i) / h2;
            lower[r] = west;
            upper[r] = east;
            diag[r] = -(west + east) + op.a0_at(i);
        }
        Stencil { lower, diag, upper }
    }

    /// `y = A_h u` on interior nodes (`u` includes the zero ends).
    fn apply(&self, u: &[f64], y: &mut [f64]) {
        for r in 0..self.diag.len() {
            y[r] = self.lower[r] * u[r] + self.diag[r] * u[r + 1] + self.upper[r] * u[r + 2];
        }
    }
}

/// Thomas factorization of `I - (dt/2) A_h`.
struct ImplicitFactor {
    dt: f64,
    sub: Vec<f64>,
    pivots: Vec<f64>,
    sup: Vec<f64>,
}

impl ImplicitFactor {
    fn new(st: &Stencil, dt: f64) -> Result<Self> {
        let m = st.diag.len();
        let half = 0.5 * dt;
        let sub: Vec<f64> = st.lower.iter().map(|v| -half * v).collect();
        let sup: Vec<f64> = st.upper.iter().map(|v| -half * v).collect();
        let mut pivots = vec![0.0; m];
        for r in 0..m {
            let d = 1.0 - half * st.diag[r];
            pivots[r] = if r == 0 { d } else { d - sub[r] * sup[r - 1] / pivots[r - 1] };
            if pivots[r] == 0.0 || !pivots[r].is_finite() {
                return Err(Error::SingularStep { row: r + 1 });
            }
        }
        Ok(ImplicitFactor { dt, sub, pivots, sup })
    }

    fn solve(&self, rhs: &mut [f64]) {
        let m = rhs.len();
        for r in 1..m {
            rhs[r] -= self.sub[r] * rhs[r - 1] / self.pivots[r - 1];
        }
        rhs[m - 1] /= self.pivots[m - 1];
        for r in (0..m - 1).rev() {
            rhs[r] = (rhs[r] - self.sup[r] * rhs[r + 1]) / self.pivots[r];
        }
    }
}

/// Crank-Nicolson evolution of `ξ` on the time grid of `cfg`.
pub fn step_evolution(
    op: &OperatorSpec,
    xi: &GridFunction,
    src: Option<&SourceTerm>,
    cfg: &StepperConfig,
) -> Result<FieldSamples> {
    cfg.validate()?;
    let grid = op.grid();
    xi.ensure_same_grid(grid)?;
    if let Some(s) = src {
        if !s.grid().same_as(grid) {
            return Err(Error::GridMismatch("source grid differs from operator grid".into()));
        }
        if !s.covers(cfg.horizon) && s.end_time() < cfg.horizon {
            return Err(Error::InvalidSource(format!(
                "source table ends at {} before T = {}",
                s.end_time(),
                cfg.horizon
            )));
        }
    }
    let times = cfg.time_grid(src);
    let n = grid.n_nodes();
    let m = n - 2;
    let stencil = Stencil::assemble(op);

    let mut u = xi.values().to_vec();
    u[0] = 0.0;
    u[n - 1] = 0.0;
    let mut out = Vec::with_capacity(times.len());
    out.push(u.clone());

    let source_at = |t: f64| src.map(|s| s.slice_at(t).into_values());
    let mut phi_prev = source_at(times[0]);
    let mut factor: Option<ImplicitFactor> = None;
    let mut au = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        if factor.as_ref().is_none_or(|f| f.dt != dt) {
            factor = Some(ImplicitFactor::new(&stencil, dt)?);
        }
        let f = factor.as_ref().expect("factor set");
        stencil.apply(&u, &mut au);
        let phi_next = source_at(w[1]);
        for r in 0..m {
            rhs[r] = u[r + 1] + 0.5 * dt * au[r];
            if let (Some(p0), Some(p1)) = (&phi_prev, &phi_next) {
                rhs[r] += 0.5 * dt * (p0[r + 1] + p1[r + 1]);
            }
        }
        f.solve(&mut rhs);
        u[1..n - 1].copy_from_slice(&rhs);
        out.push(u.clone());
        phi_prev = phi_next;
    }
    FieldSamples::new(Arc::clone(grid), times, out)
}

/// `κ u(·,T) + ∫₀ᵀ w(t) u(·,t) dt` by the trapezoid rule on the field's own
/// instants. Every breakpoint of `w` must be one of those instants, and the
/// last instant must be `T`.
pub fn time_average(field: &FieldSamples, ws: &WeightSpec) -> Result<GridFunction> {
    let horizon = ws.horizon();
    let tol = 1e-9 * horizon;
    let times = field.times();
    let last = *times.last().expect("non-empty field");
    if (times[0]).abs() > tol || (last - horizon).abs() > tol {
        return Err(Error::InvalidInput(format!(
            "field spans [{}, {}], weight needs [0, {}]",
            times[0], last, horizon
        )));
    }
    for t in ws.breakpoints() {
        if field.time_index(t, tol).is_none() {
            return Err(Error::BreakpointUnresolved { t });
        }
    }
    let n = field.grid().n_nodes();
    let vals = field.values();
    let interval_w: Vec<f64> = times.windows(2).map(|w| ws.value_at(0.5 * (w[0] + w[1]))).collect();
    let mut avg = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for (j, w) in interval_w.iter().enumerate() {
            if *w != 0.0 {
                acc += w * 0.5 * (times[j + 1] - times[j]) * (vals[j][i] + vals[j + 1][i]);
            }
        }
        avg[i] = acc + ws.kappa() * vals[vals.len() - 1][i];
    }
    GridFunction::new(Arc::clone(field.grid()), avg)
}

/// Discrete `‖u(·,t_j)‖²` for each instant.
pub fn energy_history(field: &FieldSamples) -> Vec<f64> {
    (0..field.n_times()).map(|j| field.slice(j).norm_l2().powi(2)).collect()
}

/// Space-time L2 norm of the CN residual of `field` (a spectral or any other
/// sampled solution) against the discrete operator:
/// `(u^{j+1} - u^j)/Δt - A_h (u^j + u^{j+1})/2 - (φ^j + φ^{j+1})/2`.
pub fn pde_residual(op: &OperatorSpec, field: &FieldSamples, src: Option<&SourceTerm>) -> Result<f64> {
    if !field.grid().same_as(op.grid()) {
        return Err(Error::GridMismatch("field grid differs from operator grid".into()));
    }
    let st = Stencil::assemble(op);
    let n = field.grid().n_nodes();
    let m = n - 2;
    let h = field.grid().spacing();
    let times = field.times();
    let vals = field.values();
    let mut a0 = vec![0.0; m];
    let mut a1 = vec![0.0; m];
    let mut sq = Vec::with_capacity(times.len() - 1);
    let mut dts = Vec::with_capacity(times.len() - 1);
    for j in 0..times.len() - 1 {
        let dt = times[j + 1] - times[j];
        st.apply(&vals[j], &mut a0);
        st.apply(&vals[j + 1], &mut a1);
        let p0 = src.map(|s| s.slice_at(times[j]).into_values());
        let p1 = src.map(|s| s.slice_at(times[j + 1]).into_values());
        let mut acc = 0.0;
        for r in 0..m {
            let mut res = (vals[j + 1][r + 1] - vals[j][r + 1]) / dt - 0.5 * (a0[r] + a1[r]);
            if let (Some(p0), Some(p1)) = (&p0, &p1) {
                res -= 0.5 * (p0[r + 1] + p1[r + 1]);
            }
            acc += h * res * res;
        }
        sq.push(acc);
        dts.push(dt);
    }
    Ok(sq.iter().zip(&dts).map(|(s, d)| s * d).sum::<f64>().sqrt())
}

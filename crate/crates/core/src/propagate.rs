//! Forward propagators registered by name: the spectral synthesis and the
//! Crank-Nicolson oracle answer the same question and are interchangeable
//! wherever a sampled forward solution is needed.

use std::sync::Arc;

use crate::error::Result;
use crate::field::{merge_times, FieldSamples};
use crate::forward::ForwardModel;
use crate::grid::GridFunction;
use crate::operator::OperatorSpec;
use crate::oracle::{step_evolution, StepperConfig};
use crate::registry::{Named, Registry};
use crate::source::SourceTerm;
use crate::spectral::{EigenSolverRegistry, AUTO_SOLVER};

/// Everything a propagator may need; each strategy reads what applies to it.
#[derive(Debug, Clone)]
pub struct ForwardRequest<'a> {
    pub op: &'a OperatorSpec,
    pub xi: &'a GridFunction,
    pub source: Option<&'a SourceTerm>,
    pub horizon: f64,
    /// Instants at which the result is reported.
    pub output_times: &'a [f64],
    /// Truncation order (spectral).
    pub n_modes: usize,
    /// Eigensolver name (spectral).
    pub eigensolver: &'a str,
    /// Time steps (finite differences).
    pub n_steps: usize,
    /// Instants to hit exactly (finite differences).
    pub breakpoints: &'a [f64],
}

pub trait Propagator: Named + Send + Sync {
    fn propagate(&self, req: &ForwardRequest<'_>) -> Result<FieldSamples>;
}

pub struct SpectralPropagator;

impl Named for SpectralPropagator {
    fn name(&self) -> &'static str {
        "spectral"
    }
    fn description(&self) -> &'static str {
        "truncated eigenfunction expansion with exact Duhamel integrals"
    }
}

impl Propagator for SpectralPropagator {
    fn propagate(&self, req: &ForwardRequest<'_>) -> Result<FieldSamples> {
        let solvers = EigenSolverRegistry::with_defaults();
        let es = solvers.build(req.eigensolver, req.op, req.n_modes)?;
        let model = ForwardModel::new(Arc::clone(&es), req.horizon)?;
        let xi = es.project(req.xi)?;
        let src = req.source.map(|s| s.project(&es)).transpose()?;
        Ok(model.solve_forward(&xi, src.as_ref(), req.output_times)?.into_samples())
    }
}

pub struct CrankNicolsonPropagator;

impl Named for CrankNicolsonPropagator {
    fn name(&self) -> &'static str {
        "crank-nicolson"
    }
    fn description(&self) -> &'static str {
        "second-order finite differences in space and time (verification oracle)"
    }
}

impl Propagator for CrankNicolsonPropagator {
    fn propagate(&self, req: &ForwardRequest<'_>) -> Result<FieldSamples> {
        let extra = merge_times(&[req.breakpoints, req.output_times], 1e-12 * req.horizon);
        let cfg = StepperConfig::new(req.horizon, req.n_steps).with_breakpoints(&extra);
        let full = step_evolution(req.op, req.xi, req.source, &cfg)?;
        full.restrict_to(req.output_times)
    }
}

pub struct PropagatorRegistry {
    inner: Registry<dyn Propagator>,
}

impl PropagatorRegistry {
    pub fn with_defaults() -> Self {
        let mut inner: Registry<dyn Propagator> = Registry::new("propagator");
        inner.register(Arc::new(SpectralPropagator));
        inner.register(Arc::new(CrankNicolsonPropagator));
        PropagatorRegistry { inner }
    }

    pub fn register(&mut self, p: Arc<dyn Propagator>) -> &mut Self {
        self.inner.register(p);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Propagator>> {
        self.inner.get(name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.inner.names()
    }

    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.inner.iter().map(|p| (p.name(), p.description())).collect()
    }
}

impl Default for PropagatorRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

/// Default eigensolver selection name, re-exported for configuration code.
pub const DEFAULT_EIGENSOLVER: &str = AUTO_SOLVER;

/// Run the propagator called `name`.
pub fn propagate_by_name(name: &str, req: &ForwardRequest<'_>) -> Result<FieldSamples> {
    PropagatorRegistry::with_defaults().get(name)?.propagate(req)
}

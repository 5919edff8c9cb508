//! Parabolic equations on an interval where the initial condition is replaced
//! by a prescribed weighted time-average
//!
//! ```text
//! u_t = (a u_x)_x + a0 u + φ,   u(0,t) = u(L,t) = 0,
//! κ u(x,T) + ∫₀ᵀ w(t) u(x,t) dt = μ(x).
//! ```
//!
//! The solution is recovered in the Dirichlet eigenbasis of the spatial
//! operator ([`spectral`], [`inverse`]); a Crank-Nicolson stepper
//! ([`oracle`]) provides an independent check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod forward;
pub mod grid;
pub mod inverse;
pub mod operator;
pub mod oracle;
pub mod propagate;
pub mod registry;
pub mod source;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
pub use field::FieldSamples;
pub use forward::{ForwardModel, SolutionField};
pub use grid::{Grid, GridFunction};
pub use inverse::{invert_m0, norm_h2, solve_inverse, InverseProblem, InverseReport};
pub use operator::OperatorSpec;
pub use oracle::{step_evolution, time_average, StepperConfig};
pub use propagate::{ForwardRequest, Propagator, PropagatorRegistry};
pub use source::{SourceTerm, SpectralSource};
pub use spectral::{build_eigensystem, EigenSolverRegistry, EigenSystem, SpectralVector};
pub use weights::{StabilityConstants, ValidationReport, Violation, WeightPiece, WeightSpec};

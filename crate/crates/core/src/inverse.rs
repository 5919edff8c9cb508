//! Recovery of the initial state and the whole evolution from the averaged
//! data `μ`:
//!
//! ```text
//! ξ = M₀⁻¹(μ - Mφ),   α_k = (γ_k - (Mφ)_k) / ζ_k,   u = ℒξ + Lφ
//! ```
//!
//! Modes beyond the truncation order are dropped; the report carries
//! `‖μ - Π_N μ‖` so the bias is visible. No damping is applied to `1/ζ_k`:
//! under the admissibility condition it grows at most linearly in `λ_k`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forward::{ForwardModel, SolutionField};
use crate::grid::GridFunction;
use crate::source::SpectralSource;
use crate::spectral::{EigenSystem, SpectralVector};
use crate::weights::{StabilityConstants, WeightSpec};

/// Share of `Σ γ_k² λ_k²` carried by the top tenth of modes above which the
/// surrogate `H²` norm is flagged as unconverged.
pub const H2_TAIL_SHARE: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct InverseReport {
    /// Recovered `α_k`.
    pub xi: SpectralVector,
    /// `‖μ - (κu(·,T) + ∫wu dt)‖` for the reconstructed `u`.
    pub residual_mu: f64,
    /// `max_k 1/ζ_k` over the retained modes.
    pub amplification: f64,
    pub stability: StabilityConstants,
    /// Spectral surrogate `(Σ γ_k² λ_k²)^{1/2}` of `μ`.
    pub h2_norm_mu: f64,
    /// `false` when the top tenth of modes carries more than 1% of `Σ γ_k² λ_k²`.
    pub h2_converged: bool,
    /// `‖μ - Π_N μ‖`.
    pub truncation_residual: f64,
    /// `max_k |ζ_k α_k + (Mφ)_k - γ_k|`.
    pub reapplication_error: f64,
    /// `‖ξ‖` (coefficient norm, equal to the discrete L2 norm on the span).
    pub xi_norm: f64,
    /// Right-hand side of `‖ξ‖ ≤ c₁⁻¹ (Σ_{k<m} γ̃_k² + Σ_{k≥m} γ̃_k² λ_k²)^{1/2}` with `γ̃ = Π_N(μ - Mφ)`.
    pub stability_bound: f64,
}

impl InverseReport {
    pub fn stability_holds(&self) -> bool {
        self.xi_norm <= self.stability_bound * (1.0 + 1e-12)
    }

    /// Key-value text block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        line("modes", self.xi.len().to_string());
        line("residual_mu", fmt17(self.residual_mu));
        line("amplification", fmt17(self.amplification));
        line("c1", fmt17(self.stability.c1));
        line("c2", fmt17(self.stability.c2));
        line("m", self.stability.m.to_string());
        line("truncation_residual", fmt17(self.truncation_residual));
        line("h2_norm_mu", fmt17(self.h2_norm_mu));
        line("h2_converged", self.h2_converged.to_string());
        line("reapplication_error", fmt17(self.reapplication_error));
        line("xi_norm", fmt17(self.xi_norm));
        line("stability_bound", fmt17(self.stability_bound));
        line("stability_holds", self.stability_holds().to_string());
        s
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Absolute tolerance on the endpoint values of `μ`.
fn trace_tolerance(mu: &GridFunction) -> f64 {
    1e-12 * mu.max_abs().max(1.0)
}

/// `(Σ γ_k² λ_k²)^{1/2}` for a zero-trace `f`.
pub fn norm_h2(f: &GridFunction, es: &Arc<EigenSystem>) -> Result<f64> {
    f.check_zero_trace(trace_tolerance(f))?;
    let gamma = es.project(f)?;
    Ok(h2_surrogate(gamma.coeffs(), es.lambdas()))
}

fn h2_surrogate(gamma: &[f64], lambdas: &[f64]) -> f64 {
    gamma
        .iter()
        .zip(lambdas)
        .map(|(g, l)| (g * l) * (g * l))
        .sum::<f64>()
        .sqrt()
}

fn h2_tail_converged(gamma: &[f64], lambdas: &[f64]) -> bool {
    let terms: Vec<f64> = gamma.iter().zip(lambdas).map(|(g, l)| (g * l) * (g * l)).collect();
    let total: f64 = terms.iter().sum();
    if total == 0.0 {
        return true;
    }
    let start = terms.len() - (terms.len() / 10).max(1);
    let tail: f64 = terms[start..].iter().sum();
    tail <= H2_TAIL_SHARE * total
}

/// Recovers `ξ` (and optionally the full field) from averaged data.
#[derive(Debug, Clone)]
pub struct InverseProblem {
    model: ForwardModel,
    ws: WeightSpec,
}

impl InverseProblem {
    /// Fails with `IllPosedWeight` unless `ws` is admissible.
    pub fn new(es: Arc<EigenSystem>, ws: WeightSpec) -> Result<Self> {
        ws.validate().into_result()?;
        let model = ForwardModel::new(es, ws.horizon())?;
        Ok(InverseProblem { model, ws })
    }

    pub fn model(&self) -> &ForwardModel {
        &self.model
    }

    pub fn weights(&self) -> &WeightSpec {
        &self.ws
    }

    /// `α_k = γ_k / ζ_k` with `γ = project(μ)`.
    pub fn invert_m0(&self, mu: &GridFunction) -> Result<InverseReport> {
        self.invert(mu, None)
    }

    fn invert(&self, mu: &GridFunction, src: Option<&SpectralSource>) -> Result<InverseReport> {
        let es = self.model.eigensys();
        mu.ensure_same_grid(es.grid())?;
        mu.check_zero_trace(trace_tolerance(mu))?;
        let stability = self.ws.stability_constants(es)?;
        let gamma = es.project(mu)?;
        let forced = match src {
            Some(s) => Some(self.model.apply_m(s, &self.ws)?),
            None => None,
        };
        let zetas = self.ws.multipliers(es);
        let target: Vec<f64> = match &forced {
            Some(m) => gamma.coeffs().iter().zip(m.coeffs()).map(|(g, f)| g - f).collect(),
            None => gamma.coeffs().to_vec(),
        };
        let alpha: Vec<f64> = target.iter().zip(&zetas).map(|(g, z)| g / z).collect();
        let xi = SpectralVector::new(Arc::clone(es), alpha)?;

        let m0 = self.model.apply_m0(&xi, &self.ws)?;
        let averaged = match &forced {
            Some(m) => m0.axpby(1.0, m, 1.0)?,
            None => m0,
        };
        let reapplication_error = averaged
            .coeffs()
            .iter()
            .zip(gamma.coeffs())
            .map(|(a, g)| (a - g).abs())
            .fold(0.0, f64::max);
        let residual_mu = mu.axpby(1.0, &averaged.synthesize(), -1.0)?.norm_l2();
        let truncation_residual = es.truncation_residual(mu)?;
        let amplification = zetas.iter().map(|z| 1.0 / z).fold(0.0, f64::max);

        let first_pos = stability.m - 1;
        let bound_sq: f64 = target
            .iter()
            .zip(es.lambdas())
            .enumerate()
            .map(|(k, (g, l))| if k < first_pos { g * g } else { (g * l) * (g * l) })
            .sum();

        Ok(InverseReport {
            xi_norm: xi.norm(),
            xi,
            residual_mu,
            amplification,
            stability,
            h2_norm_mu: h2_surrogate(gamma.coeffs(), es.lambdas()),
            h2_converged: h2_tail_converged(gamma.coeffs(), es.lambdas()),
            truncation_residual,
            reapplication_error,
            stability_bound: bound_sq.sqrt() / stability.c1,
        })
    }

    /// `u = ℒM₀⁻¹(μ - Mφ) + Lφ` sampled at `times`.
    pub fn solve_inverse(
        &self,
        mu: &GridFunction,
        src: Option<&SpectralSource>,
        times: &[f64],
    ) -> Result<(SolutionField, InverseReport)> {
        if let Some(s) = src {
            if self.ws.kappa() != 0.0 && s.theta() >= self.ws.horizon() {
                return Err(Error::ThetaInvalid {
                    theta: s.theta(),
                    horizon: self.ws.horizon(),
                });
            }
        }
        let report = self.invert(mu, src)?;
        let field = self.model.solve_forward(&report.xi, src, times)?;
        Ok((field, report))
    }
}

/// Convenience wrapper: `invert_m0(μ, w, es)`.
pub fn invert_m0(mu: &GridFunction, ws: &WeightSpec, es: &Arc<EigenSystem>) -> Result<InverseReport> {
    InverseProblem::new(Arc::clone(es), ws.clone())?.invert_m0(mu)
}

/// Convenience wrapper: `solve_inverse(μ, φ, w, es)` sampled at `times`.
pub fn solve_inverse(
    mu: &GridFunction,
    src: Option<&SpectralSource>,
    ws: &WeightSpec,
    es: &Arc<EigenSystem>,
    times: &[f64],
) -> Result<(SolutionField, InverseReport)> {
    InverseProblem::new(Arc::clone(es), ws.clone())?.solve_inverse(mu, src, times)
}

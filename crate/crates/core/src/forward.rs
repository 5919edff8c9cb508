//! Forward solution operators in the eigenbasis.
//!
//! With `u(·,0) = ξ = Σ α_k v_k` and source coefficients `φ_k(t)`,
//!
//! ```text
//! u_k(t) = α_k e^{-λ_k t} + ∫₀ᵗ φ_k(s) e^{-λ_k (t-s)} ds
//! ```
//!
//! The averaging operators apply `κ u(·,T) + ∫₀ᵀ w u dt` to the homogeneous
//! part (`M₀`, diagonal with entries `ζ_k`) and to the source part (`M`).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{merge_times, uniform_times, FieldSamples};
use crate::grid::GridFunction;
use crate::source::SpectralSource;
use crate::spectral::{EigenSystem, SpectralVector};
use crate::weights::WeightSpec;

/// Base panel count of the outer time quadrature in [`ForwardModel::apply_m`].
pub const OUTER_PANELS: usize = 512;

// 4-point Gauss-Legendre on [-1, 1].
const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Spectral forward model on `[0, T]`.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    es: Arc<EigenSystem>,
    horizon: f64,
}

impl ForwardModel {
    pub fn new(es: Arc<EigenSystem>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidInput(format!("horizon T = {horizon} must be > 0")));
        }
        Ok(ForwardModel { es, horizon })
    }

    pub fn eigensys(&self) -> &Arc<EigenSystem> {
        &self.es
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.horizon;
        if t < -slack || t > self.horizon + slack || t.is_nan() {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    fn check_source(&self, src: &SpectralSource) -> Result<()> {
        let other = src.eigensys();
        if other.n_modes() != self.es.n_modes() || !other.grid().same_as(self.es.grid()) {
            return Err(Error::GridMismatch("source projected on a different basis".into()));
        }
        if src.end_time() < self.horizon * (1.0 - 1e-12) {
            return Err(Error::InvalidSource(format!(
                "source table ends at {} before T = {}",
                src.end_time(),
                self.horizon
            )));
        }
        Ok(())
    }

    /// `α_k e^{-λ_k t}`.
    pub fn evolve_homogeneous(&self, xi: &SpectralVector, t: f64) -> Result<SpectralVector> {
        self.check_time(t)?;
        self.es.ensure_owns(xi)?;
        let lambdas = self.es.lambdas();
        Ok(xi.map_indexed(|k, a| a * (-lambdas[k] * t).exp()))
    }

    /// `∫₀ᵗ φ_k(s) e^{-λ_k (t-s)} ds` (0-based `k`).
    pub fn duhamel(&self, src: &SpectralSource, k: usize, t: f64) -> Result<f64> {
        self.check_time(t)?;
        self.check_source(src)?;
        Ok(src.convolve_window(k, self.es.lambda(k), 0.0, t))
    }

    /// Per-mode coefficients at each of `times` (sorted, inside `[0, T]`).
    /// Returns `coeffs[j][k]`.
    pub fn coefficients_at(
        &self,
        xi: &SpectralVector,
        src: Option<&SpectralSource>,
        times: &[f64],
    ) -> Result<Vec<Vec<f64>>> {
        self.es.ensure_owns(xi)?;
        for &t in times {
            self.check_time(t)?;
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("instants must increase strictly".into()));
        }
        if let Some(s) = src {
            self.check_source(s)?;
        }
        let n_modes = self.es.n_modes();
        let mut out = vec![vec![0.0; n_modes]; times.len()];
        for k in 0..n_modes {
            let lambda = self.es.lambda(k);
            let alpha = xi.coeffs()[k];
            let mut duhamel = 0.0;
            let mut prev = 0.0;
            for (j, &t) in times.iter().enumerate() {
                if let Some(s) = src {
                    duhamel = (-lambda * (t - prev)).exp() * duhamel + s.convolve_window(k, lambda, prev, t);
                    prev = t;
                }
                out[j][k] = alpha * (-lambda * t).exp() + duhamel;
            }
        }
        Ok(out)
    }

    /// `u = ℒξ + Lφ` sampled at `times` (coefficients and grid values).
    pub fn solve_forward(
        &self,
        xi: &SpectralVector,
        src: Option<&SpectralSource>,
        times: &[f64],
    ) -> Result<SolutionField> {
        let coeffs = self.coefficients_at(xi, src, times)?;
        let values = coeffs.iter().map(|c| self.es.synthesize_coeffs(c)).collect();
        let samples = FieldSamples::new(Arc::clone(self.es.grid()), times.to_vec(), values)?;
        Ok(SolutionField {
            model: self.clone(),
            alpha: xi.clone(),
            source: src.cloned(),
            coeffs,
            samples,
        })
    }

    /// `M₀ξ`: coefficients `ζ_k α_k`.
    pub fn apply_m0(&self, xi: &SpectralVector, ws: &WeightSpec) -> Result<SpectralVector> {
        ws.validate().into_result()?;
        self.check_weight_horizon(ws)?;
        self.es.ensure_owns(xi)?;
        let lambdas = self.es.lambdas();
        Ok(xi.map_indexed(|k, a| ws.zeta(lambdas[k]) * a))
    }

    fn check_weight_horizon(&self, ws: &WeightSpec) -> Result<()> {
        if (ws.horizon() - self.horizon).abs() > 1e-12 * self.horizon {
            return Err(Error::InvalidInput(format!(
                "weight horizon {} differs from model horizon {}",
                ws.horizon(),
                self.horizon
            )));
        }
        Ok(())
    }

    /// `Mφ`: coefficients `∫₀ᵀ w(t) D_k(t) dt + κ D_k(T)` with `D_k` the
    /// Duhamel integral of mode `k`.
    ///
    /// The outer integral runs over panels refined at every weight and
    /// source breakpoint, width at most `T/512`. On panels where
    /// `|λ| Δt ≥ 1` it uses the exact identity
    /// `∫ D dt = (∫ φ dt - ΔD) / λ` (from `D' = -λD + φ`); elsewhere
    /// 4-point Gauss-Legendre.
    pub fn apply_m(&self, src: &SpectralSource, ws: &WeightSpec) -> Result<SpectralVector> {
        ws.validate().into_result()?;
        self.check_weight_horizon(ws)?;
        self.check_source(src)?;
        if ws.kappa() != 0.0 && src.theta() >= self.horizon {
            return Err(Error::ThetaInvalid {
                theta: src.theta(),
                horizon: self.horizon,
            });
        }
        let panels = self.outer_panels(src, ws);
        let weights: Vec<f64> = panels
            .windows(2)
            .map(|p| ws.value_at(0.5 * (p[0] + p[1])))
            .collect();
        let mut coeffs = vec![0.0; self.es.n_modes()];
        for (k, slot) in coeffs.iter_mut().enumerate() {
            let lambda = self.es.lambda(k);
            let mut d = 0.0;
            let mut acc = 0.0;
            for (p, &w) in panels.windows(2).zip(&weights) {
                let (a, b) = (p[0], p[1]);
                let width = b - a;
                let d_next = (-lambda * width).exp() * d + src.convolve_window(k, lambda, a, b);
                if w != 0.0 {
                    let integral = if (lambda * width).abs() >= 1.0 {
                        (src.integral(k, a, b) - (d_next - d)) / lambda
                    } else {
                        let half = 0.5 * width;
                        let mid = a + half;
                        GL4_NODES
                            .iter()
                            .zip(GL4_WEIGHTS)
                            .map(|(&z, gw)| {
                                let t = mid + half * z;
                                let dt = (-lambda * (t - a)).exp() * d + src.convolve_window(k, lambda, a, t);
                                gw * dt
                            })
                            .sum::<f64>()
                            * half
                    };
                    acc += w * integral;
                }
                d = d_next;
            }
            *slot = acc + ws.kappa() * d;
        }
        SpectralVector::new(Arc::clone(&self.es), coeffs)
    }

    fn outer_panels(&self, src: &SpectralSource, ws: &WeightSpec) -> Vec<f64> {
        let base = uniform_times(self.horizon, OUTER_PANELS);
        let src_nodes: Vec<f64> = src.times().iter().copied().filter(|&t| t < self.horizon).collect();
        let tol = 1e-12 * self.horizon;
        merge_times(&[&[0.0, self.horizon], &ws.breakpoints(), &src_nodes, &base], tol)
    }

    /// `κ u(·,T) + ∫₀ᵀ w u dt` of `ℒξ + Lφ`, in coefficients.
    pub fn averaged(
        &self,
        xi: &SpectralVector,
        src: Option<&SpectralSource>,
        ws: &WeightSpec,
    ) -> Result<SpectralVector> {
        let m0 = self.apply_m0(xi, ws)?;
        match src {
            None => Ok(m0),
            Some(s) => m0.axpby(1.0, &self.apply_m(s, ws)?, 1.0),
        }
    }
}

/// A spectral solution with its coefficients and grid samples.
#[derive(Debug, Clone)]
pub struct SolutionField {
    model: ForwardModel,
    alpha: SpectralVector,
    source: Option<SpectralSource>,
    // coeffs[j][k] at samples.times()[j]
    coeffs: Vec<Vec<f64>>,
    samples: FieldSamples,
}

impl SolutionField {
    pub fn alpha(&self) -> &SpectralVector {
        &self.alpha
    }

    pub fn source(&self) -> Option<&SpectralSource> {
        self.source.as_ref()
    }

    pub fn times(&self) -> &[f64] {
        self.samples.times()
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn samples(&self) -> &FieldSamples {
        &self.samples
    }

    pub fn into_samples(self) -> FieldSamples {
        self.samples
    }

    pub fn slice(&self, j: usize) -> GridFunction {
        self.samples.slice(j)
    }

    /// `u(x, t)` at an arbitrary point: exact in time, linear between nodes in space.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let grid = self.model.es.grid();
        if !(0.0..=grid.length()).contains(&x) {
            return Err(Error::InvalidInput(format!("x = {x} outside [0, {}]", grid.length())));
        }
        let c = self.model.coefficients_at(&self.alpha, self.source.as_ref(), &[t])?;
        let h = grid.spacing();
        let i = ((x / h).floor() as usize).min(grid.n_nodes() - 2);
        let s = (x - grid.nodes()[i]) / h;
        Ok(c[0]
            .iter()
            .enumerate()
            .map(|(k, ck)| {
                let v = self.model.es.mode(k);
                ck * (v[i] + s * (v[i + 1] - v[i]))
            })
            .sum())
    }
}

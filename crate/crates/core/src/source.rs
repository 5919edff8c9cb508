//! Source terms `φ(x, t)` tabulated on the spatial grid at a list of
//! instants and interpolated linearly in time.
//!
//! The grid-valued table is what the finite-difference stepper consumes. The
//! spectral modules work with [`SpectralSource`], the per-mode time series
//! `φ_k(t_j) = (φ(·,t_j), v_k)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{trapezoid_dot, Grid, GridFunction};
use crate::spectral::EigenSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    grid: Arc<Grid>,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    theta: f64,
}

impl SourceTerm {
    /// `times` must start at 0 and increase strictly; `theta` is the instant
    /// from which `φ` is required to be absolutely continuous in time.
    pub fn new(grid: Arc<Grid>, times: Vec<f64>, values: Vec<Vec<f64>>, theta: f64) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidSource("need at least two instants".into()));
        }
        if times.len() != values.len() {
            return Err(Error::InvalidSource(format!(
                "{} instants but {} slices",
                times.len(),
                values.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidSource(format!("first instant is {}, expected 0", times[0])));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSource("instants must increase strictly".into()));
        }
        if values.iter().any(|v| v.len() != grid.n_nodes()) {
            return Err(Error::GridMismatch("source slice length differs from grid".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSource("non-finite source value".into()));
        }
        let end = *times.last().expect("non-empty");
        if !(theta >= 0.0 && theta <= end) {
            return Err(Error::InvalidSource(format!("theta = {theta} outside [0, {end}]")));
        }
        Ok(SourceTerm {
            grid,
            times,
            values,
            theta,
        })
    }

    /// Sample `f(x, t)` at the given instants.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Arc<Grid>, times: Vec<f64>, theta: f64, f: F) -> Result<Self> {
        let values = times
            .iter()
            .map(|&t| grid.nodes().iter().map(|&x| f(x, t)).collect())
            .collect();
        Self::new(grid, times, values, theta)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn covers(&self, horizon: f64) -> bool {
        (self.end_time() - horizon).abs() <= 1e-12 * horizon.abs().max(1.0)
    }

    /// `φ(·, t)` by linear interpolation (clamped to the table).
    pub fn slice_at(&self, t: f64) -> GridFunction {
        let values = match locate(&self.times, t) {
            Located::Node(j) => self.values[j].clone(),
            Located::Between(j, s) => self.values[j]
                .iter()
                .zip(&self.values[j + 1])
                .map(|(a, b)| a + s * (b - a))
                .collect(),
        };
        GridFunction::new(Arc::clone(&self.grid), values).expect("grid sized")
    }

    /// `‖φ‖_{𝒲⁰} + ‖φ(·,θ)‖_{H⁰} + ∫_θ^T ‖∂_t φ‖_{H⁰} dt`.
    pub fn u_theta_norm(&self) -> f64 {
        let h = self.grid.spacing();
        let mut w0 = 0.0;
        for j in 0..self.times.len() - 1 {
            let dt = self.times[j + 1] - self.times[j];
            let a = &self.values[j];
            let b = &self.values[j + 1];
            // ∫ of a linear interpolant squared: dt (a² + ab + b²) / 3
            w0 += dt * (trapezoid_dot(h, a, a) + trapezoid_dot(h, a, b) + trapezoid_dot(h, b, b)) / 3.0;
        }
        let at_theta = self.slice_at(self.theta).norm_l2();
        let mut variation = 0.0;
        for j in 0..self.times.len() - 1 {
            let (t0, t1) = (self.times[j], self.times[j + 1]);
            let lo = t0.max(self.theta);
            if t1 <= lo {
                continue;
            }
            let d: Vec<f64> = self.values[j + 1]
                .iter()
                .zip(&self.values[j])
                .map(|(b, a)| (b - a) / (t1 - t0))
                .collect();
            variation += (t1 - lo) * trapezoid_dot(h, &d, &d).sqrt();
        }
        w0.sqrt() + at_theta + variation
    }

    /// Mode-wise time series `φ_k(t_j)`.
    pub fn project(&self, es: &Arc<EigenSystem>) -> Result<SpectralSource> {
        if !self.grid.same_as(es.grid()) {
            return Err(Error::GridMismatch("source and eigensystem grids differ".into()));
        }
        let h = self.grid.spacing();
        let series = (0..es.n_modes())
            .map(|k| self.values.iter().map(|v| trapezoid_dot(h, v, es.mode(k))).collect())
            .collect();
        Ok(SpectralSource {
            eigensys: Arc::clone(es),
            times: self.times.clone(),
            series,
            theta: self.theta,
        })
    }
}

/// Per-mode coefficients of a [`SourceTerm`], piecewise linear in time.
#[derive(Debug, Clone)]
pub struct SpectralSource {
    eigensys: Arc<EigenSystem>,
    times: Vec<f64>,
    // series[k][j] = φ_k(t_j)
    series: Vec<Vec<f64>>,
    theta: f64,
}

impl SpectralSource {
    /// Build directly from mode coefficients (`series[k][j]`).
    pub fn from_series(eigensys: Arc<EigenSystem>, times: Vec<f64>, series: Vec<Vec<f64>>, theta: f64) -> Result<Self> {
        if series.len() != eigensys.n_modes() || series.iter().any(|s| s.len() != times.len()) {
            return Err(Error::InvalidSource("series shape does not match modes x instants".into()));
        }
        if times.len() < 2 || times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSource("instants must start at 0 and increase".into()));
        }
        Ok(SpectralSource {
            eigensys,
            times,
            series,
            theta,
        })
    }

    pub fn eigensys(&self) -> &Arc<EigenSystem> {
        &self.eigensys
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn series(&self, k: usize) -> &[f64] {
        &self.series[k]
    }

    /// `φ_k(t)`, clamped to the table.
    pub fn value(&self, k: usize, t: f64) -> f64 {
        let s = &self.series[k];
        match locate(&self.times, t) {
            Located::Node(j) => s[j],
            Located::Between(j, frac) => s[j] + frac * (s[j + 1] - s[j]),
        }
    }

    /// `∫_a^b φ_k(s) e^{-λ(b-s)} ds`, exact for the piecewise-linear `φ_k`.
    pub fn convolve_window(&self, k: usize, lambda: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let s = &self.series[k];
        let t = &self.times;
        let mut j = t.partition_point(|&x| x <= a).saturating_sub(1);
        let mut total = 0.0;
        while j + 1 < t.len() && t[j] < b {
            let p = t[j].max(a);
            let q = t[j + 1].min(b);
            if q > p {
                let slope = (s[j + 1] - s[j]) / (t[j + 1] - t[j]);
                let phi_p = s[j] + slope * (p - t[j]);
                let d = q - p;
                let g0 = exp_moment0(lambda, d);
                let g1 = exp_moment1(lambda, d);
                total += (-lambda * (b - q)).exp() * (phi_p * g0 + slope * (d * g0 - g1));
            }
            j += 1;
        }
        total
    }

    /// `∫_a^b φ_k(s) ds` for `[a, b]` inside the table.
    pub fn integral(&self, k: usize, a: f64, b: f64) -> f64 {
        let s = &self.series[k];
        let t = &self.times;
        let mut j = t.partition_point(|&x| x <= a).saturating_sub(1);
        let mut total = 0.0;
        while j + 1 < t.len() && t[j] < b {
            let p = t[j].max(a);
            let q = t[j + 1].min(b);
            if q > p {
                let slope = (s[j + 1] - s[j]) / (t[j + 1] - t[j]);
                let fp = s[j] + slope * (p - t[j]);
                let fq = s[j] + slope * (q - t[j]);
                total += 0.5 * (q - p) * (fp + fq);
            }
            j += 1;
        }
        total
    }

    pub fn is_zero(&self) -> bool {
        self.series.iter().flatten().all(|&v| v == 0.0)
    }
}

enum Located {
    Node(usize),
    Between(usize, f64),
}

fn locate(times: &[f64], t: f64) -> Located {
    let last = times.len() - 1;
    if t <= times[0] {
        return Located::Node(0);
    }
    if t >= times[last] {
        return Located::Node(last);
    }
    let j = times.partition_point(|&x| x <= t) - 1;
    if times[j] == t {
        Located::Node(j)
    } else {
        Located::Between(j, (t - times[j]) / (times[j + 1] - times[j]))
    }
}

/// `∫₀^d e^{-λr} dr`.
pub(crate) fn exp_moment0(lambda: f64, d: f64) -> f64 {
    if lambda == 0.0 {
        d
    } else {
        -(-lambda * d).exp_m1() / lambda
    }
}

/// `∫₀^d r e^{-λr} dr`.
pub(crate) fn exp_moment1(lambda: f64, d: f64) -> f64 {
    let x = lambda * d;
    let g = if x.abs() < 0.1 {
        // Σ (-x)^n / (n! (n+2))
        let mut term = 1.0;
        let mut sum = 0.5;
        for n in 1..20 {
            term *= -x / n as f64;
            sum += term / (n as f64 + 2.0);
        }
        sum
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (x * x)
    };
    d * d * g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_series_and_closed_form() {
        for &(l, d) in &[(0.0, 0.3), (1e-9, 0.3), (0.2, 0.4), (5.0, 0.1), (300.0, 0.2), (-2.0, 0.5)] {
            let n = 20000;
            let hh = d / n as f64;
            let (mut m0, mut m1) = (0.0, 0.0);
            for i in 0..=n {
                // composite Simpson
                let r = i as f64 * hh;
                let c = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                m0 += c * hh / 3.0 * (-l * r).exp();
                m1 += c * hh / 3.0 * r * (-l * r).exp();
            }
            assert!((exp_moment0(l, d) - m0).abs() < 1e-8 * m0.abs().max(1e-3), "m0 at {l},{d}");
            assert!((exp_moment1(l, d) - m1).abs() < 1e-8 * m1.abs().max(1e-4), "m1 at {l},{d}");
        }
        // continuity across the series / closed-form switch
        let d = 1.0;
        let a = exp_moment1(0.1 - 1e-14, d);
        let b = exp_moment1(0.1 + 1e-14, d);
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }

    #[test]
    fn validation() {
        let g = Grid::uniform(1.0, 5).unwrap();
        assert!(SourceTerm::from_fn(g.clone(), vec![0.0], 0.0, |_, _| 0.0).is_err());
        assert!(SourceTerm::from_fn(g.clone(), vec![0.1, 0.2], 0.0, |_, _| 0.0).is_err());
        assert!(SourceTerm::from_fn(g.clone(), vec![0.0, 0.2, 0.1], 0.0, |_, _| 0.0).is_err());
        assert!(SourceTerm::from_fn(g.clone(), vec![0.0, 1.0], 2.0, |_, _| 0.0).is_err());
        assert!(SourceTerm::from_fn(g, vec![0.0, 1.0], 0.5, |_, _| 0.0).is_ok());
    }

    #[test]
    fn interpolation_in_time() {
        let g = Grid::uniform(1.0, 3).unwrap();
        let s = SourceTerm::from_fn(g, vec![0.0, 1.0, 3.0], 0.0, |x, t| x + t).unwrap();
        assert_eq!(s.slice_at(2.0).values(), &[2.0, 2.5, 3.0]);
        assert_eq!(s.slice_at(5.0).values(), &[3.0, 3.5, 4.0]);
    }

    #[test]
    fn u_theta_norm_of_static_source() {
        // φ(x,t) = 1 on [0,2]x[0,1]: ‖φ‖_W0 = √2, ‖φ(θ)‖ = √2, no variation.
        let g = Grid::uniform(2.0, 9).unwrap();
        let s = SourceTerm::from_fn(g, vec![0.0, 0.5, 1.0], 0.5, |_, _| 1.0).unwrap();
        assert!((s.u_theta_norm() - 2.0 * 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn u_theta_norm_counts_variation_after_theta() {
        // φ = t on [0,1]x[0,1]: W0 = 1/√3, φ(θ=0.5) = 0.5, ∫_θ^1 1 dt = 0.5
        let g = Grid::uniform(1.0, 5).unwrap();
        let s = SourceTerm::from_fn(g, vec![0.0, 1.0], 0.5, |_, t| t).unwrap();
        let expect = (1.0f64 / 3.0).sqrt() + 0.5 + 0.5;
        assert!((s.u_theta_norm() - expect).abs() < 1e-13);
    }
}

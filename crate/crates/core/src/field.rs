//! Space-time samples of a solution `u(x, t)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{trapezoid_dot, Grid, GridFunction};

/// `u` on a spatial grid at an increasing list of instants.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    grid: Arc<Grid>,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl FieldSamples {
    pub fn new(grid: Arc<Grid>, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{} instants but {} slices",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("instants must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.len() != grid.n_nodes()) {
            return Err(Error::GridMismatch("slice length differs from grid".into()));
        }
        Ok(FieldSamples {
            grid,
            times,
            values,
        })
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

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn slice(&self, j: usize) -> GridFunction {
        GridFunction::new(Arc::clone(&self.grid), self.values[j].clone()).expect("grid sized")
    }

    pub fn last(&self) -> GridFunction {
        self.slice(self.times.len() - 1)
    }

    /// Index of the instant equal to `t` within `tol`.
    pub fn time_index(&self, t: f64, tol: f64) -> Option<usize> {
        let j = self.times.partition_point(|&s| s < t - tol);
        (j < self.times.len() && (self.times[j] - t).abs() <= tol).then_some(j)
    }

    pub fn min(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// Space-time L2 norm: trapezoid in `x` and in `t`.
    pub fn norm_l2(&self) -> f64 {
        let h = self.grid.spacing();
        let sq: Vec<f64> = self.values.iter().map(|v| trapezoid_dot(h, v, v)).collect();
        trapezoid_in_time(&self.times, &sq).sqrt()
    }

    /// Space-time L2 norm of `self - other`; both must share grid and instants.
    pub fn distance_l2(&self, other: &FieldSamples) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        if self.times.len() != other.times.len()
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::InvalidInput("fields sampled at different instants".into()));
        }
        let h = self.grid.spacing();
        let sq: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                trapezoid_dot(h, &d, &d)
            })
            .collect();
        Ok(trapezoid_in_time(&self.times, &sq).sqrt())
    }

    /// Keep only the instants listed in `times` (each must be present).
    pub fn restrict_to(&self, times: &[f64]) -> Result<FieldSamples> {
        let tol = 1e-12 * self.times.last().copied().unwrap_or(1.0).abs().max(1.0);
        let mut values = Vec::with_capacity(times.len());
        for &t in times {
            let j = self
                .time_index(t, tol)
                .ok_or_else(|| Error::InvalidInput(format!("instant {t} not sampled")))?;
            values.push(self.values[j].clone());
        }
        FieldSamples::new(Arc::clone(&self.grid), times.to_vec(), values)
    }
}

/// Trapezoid rule on a non-uniform time grid.
pub fn trapezoid_in_time(times: &[f64], f: &[f64]) -> f64 {
    if times.len() < 2 {
        return 0.0;
    }
    times
        .windows(2)
        .zip(f.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

/// `n + 1` equally spaced instants on `[0, horizon]`.
pub fn uniform_times(horizon: f64, n: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=n).map(|j| horizon * j as f64 / n as f64).collect();
    if let Some(last) = t.last_mut() {
        *last = horizon;
    }
    t
}

/// Sorted union of instant lists; points closer than `tol` are merged
/// (the first list wins).
pub fn merge_times(lists: &[&[f64]], tol: f64) -> Vec<f64> {
    let mut all: Vec<(f64, usize)> = lists
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.iter().map(move |&t| (t, i)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<(f64, usize)> = Vec::with_capacity(all.len());
    for (t, src) in all {
        match out.last_mut() {
            Some(prev) if (t - prev.0).abs() <= tol => {
                if src < prev.1 {
                    *prev = (t, src);
                }
            }
            _ => out.push((t, src)),
        }
    }
    out.into_iter().map(|(t, _)| t).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_prefers_first_list() {
        let a = [0.0, 0.5, 1.0];
        let b = [0.25, 0.5 + 1e-15, 0.75];
        let m = merge_times(&[&a, &b], 1e-12);
        assert_eq!(m, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn uniform_times_hit_horizon() {
        let t = uniform_times(0.1, 3);
        assert_eq!(t.len(), 4);
        assert_eq!(t[3], 0.1);
    }

    #[test]
    fn norm_of_constant_field() {
        let g = Grid::uniform(2.0, 11).unwrap();
        let times = uniform_times(3.0, 6);
        let values = vec![vec![1.0; 11]; 7];
        let f = FieldSamples::new(g, times, values).unwrap();
        assert!((f.norm_l2() - 6f64.sqrt()).abs() < 1e-13);
        assert_eq!(f.distance_l2(&f).unwrap(), 0.0);
        assert_eq!(f.time_index(1.5, 1e-12), Some(3));
        assert_eq!(f.time_index(1.4, 1e-12), None);
    }
}

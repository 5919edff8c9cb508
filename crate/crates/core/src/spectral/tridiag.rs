//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration on a partially pivoted LU factorization, followed by one modified
//! Gram-Schmidt sweep against the vectors already accepted.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag` has length `m`, `off` length `m - 1`.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::EigenSolver(format!(
                "inconsistent tridiagonal sizes: {} diagonal, {} off-diagonal",
                diag.len(),
                off.len()
            )));
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let m = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..m {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < m { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.sqrt() * self.norm_bound().max(1.0);
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * self.norm_bound() * 4.0;
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `count` eigenpairs in ascending order. Vectors have unit Euclidean norm.
    pub fn lowest_eigenpairs(&self, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let m = self.dim();
        if count > m {
            return Err(Error::EigenSolver(format!(
                "requested {count} eigenpairs of a {m}x{m} matrix"
            )));
        }
        let values: Vec<f64> = (0..count).map(|k| self.eigenvalue(k)).collect();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
        for (k, &lambda) in values.iter().enumerate() {
            let mut v = self.inverse_iteration(lambda, k)?;
            for _ in 0..2 {
                for prev in &vectors {
                    let c: f64 = dot(prev, &v);
                    for (vi, pi) in v.iter_mut().zip(prev) {
                        *vi -= c * pi;
                    }
                }
                normalize(&mut v).ok_or_else(|| {
                    Error::EigenSolver(format!("eigenvector {k} collapsed under orthogonalization"))
                })?;
            }
            vectors.push(v);
        }
        Ok((values, vectors))
    }

    fn inverse_iteration(&self, lambda: f64, k: usize) -> Result<Vec<f64>> {
        let m = self.dim();
        let lu = ShiftedLu::factor(self, lambda);
        // Deterministic, non-degenerate start vector.
        let mut v: Vec<f64> = (0..m)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.7548776662466927 + k as f64 * 0.5698402909980532).fract())
            .collect();
        normalize(&mut v);
        for _ in 0..4 {
            lu.solve(&mut v);
            if normalize(&mut v).is_none() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::EigenSolver(format!(
                    "inverse iteration diverged for eigenvalue {lambda}"
                )));
            }
        }
        Ok(v)
    }
}

/// LU with partial pivoting of `T - shift*I` (LAPACK `gttrf` layout).
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let m = t.dim();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; m.saturating_sub(2)];
        let mut swapped = vec![false; m.saturating_sub(1)];
        let tiny = f64::EPSILON * t.norm_bound();
        for i in 0..m.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let piv = if d[i] == 0.0 { tiny } else { d[i] };
                d[i] = piv;
                let l = dl[i] / piv;
                dl[i] = l;
                d[i + 1] -= l * du[i];
            } else {
                let l = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = l;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - l * d[i + 1];
                if i + 2 < m {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -l;
                }
                swapped[i] = true;
            }
        }
        if d[m - 1] == 0.0 {
            d[m - 1] = tiny;
        }
        for x in d.iter_mut() {
            if x.abs() < tiny {
                *x = tiny.copysign(*x);
            }
        }
        ShiftedLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let m = b.len();
        for i in 0..m.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[m - 1] /= self.d[m - 1];
        if m > 1 {
            b[m - 2] = (b[m - 2] - self.du[m - 2] * b[m - 1]) / self.d[m - 2];
        }
        for i in (0..m.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> Option<f64> {
    let n = dot(v, v).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(m: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; m], vec![-1.0; m - 1]).unwrap()
    }

    #[test]
    fn discrete_laplacian_eigenvalues() {
        let m = 50;
        let t = laplacian(m);
        let (vals, _) = t.lowest_eigenpairs(10).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let theta = (k + 1) as f64 * std::f64::consts::PI / (2.0 * (m + 1) as f64);
            let exact = 4.0 * theta.sin().powi(2);
            assert!((v - exact).abs() < 1e-13, "k={k}: {v} vs {exact}");
        }
    }

    #[test]
    fn eigenvectors_satisfy_residual() {
        let t = SymTridiagonal::new(
            (0..40).map(|i| 2.0 + 0.1 * i as f64).collect(),
            (0..39).map(|i| -1.0 - 0.01 * i as f64).collect(),
        )
        .unwrap();
        let (vals, vecs) = t.lowest_eigenpairs(12).unwrap();
        for (lambda, v) in vals.iter().zip(&vecs) {
            let m = v.len();
            let mut r = 0.0f64;
            for i in 0..m {
                let mut tv = t.diag[i] * v[i];
                if i > 0 {
                    tv += t.off[i - 1] * v[i - 1];
                }
                if i + 1 < m {
                    tv += t.off[i] * v[i + 1];
                }
                r = r.max((tv - lambda * v[i]).abs());
            }
            assert!(r < 1e-12, "residual {r}");
        }
    }

    #[test]
    fn count_below_brackets_spectrum() {
        let t = laplacian(20);
        assert_eq!(t.count_below(-1.0), 0);
        assert_eq!(t.count_below(5.0), 20);
    }

    #[test]
    fn too_many_pairs_requested() {
        assert!(laplacian(5).lowest_eigenpairs(6).is_err());
    }

    #[test]
    fn one_by_one() {
        let t = SymTridiagonal::new(vec![3.5], vec![]).unwrap();
        let (vals, vecs) = t.lowest_eigenpairs(1).unwrap();
        assert!((vals[0] - 3.5).abs() < 1e-14);
        assert!((vecs[0][0].abs() - 1.0).abs() < 1e-14);
    }
}

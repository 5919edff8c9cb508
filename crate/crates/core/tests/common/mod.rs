#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

fn gl5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = a + half;
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS)
        .map(|(z, w)| w * f(mid + half * z))
        .sum::<f64>()
        * half
}

/// Adaptive 5-point Gauss-Legendre with interval bisection.
pub fn adaptive_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = gl5(f, a, m);
        let right = gl5(f, m, b);
        if depth == 0 || (left + right - whole).abs() <= tol {
            left + right
        } else {
            rec(f, a, m, left, 0.5 * tol, depth - 1) + rec(f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    rec(f, a, b, gl5(f, a, b), tol, 40)
}

/// Composite 5-point Gauss-Legendre on `panels` equal panels.
pub fn composite_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| gl5(f, a + i as f64 * h, a + (i + 1) as f64 * h)).sum()
}

/// μ(x) = x^{1/4} (L - x) |sin(πx/L)|
pub fn mu_profile(x: f64, length: f64) -> f64 {
    x.powf(0.25) * (length - x) * (std::f64::consts::PI * x / length).sin().abs()
}

/// η_θ(x) = x (L - x)(x - L/3)(x - 2L/3) sin(θx)
pub fn eta_profile(x: f64, length: f64, theta: f64) -> f64 {
    x * (length - x) * (x - length / 3.0) * (x - 2.0 * length / 3.0) * (theta * x).sin()
}

//! The averaging condition `κ u(·,T) + ∫₀ᵀ w(t) u(·,t) dt = μ`.
//!
//! `w` is piecewise constant on `[0, T]`. Outside the listed pieces it is
//! zero. The multiplier of mode `k` is
//!
//! ```text
//! ζ(λ_k) = ∫₀ᵀ w(t) e^{-λ_k t} dt + κ e^{-λ_k T}
//! ```
//!
//! and is evaluated in closed form piece by piece.

use std::fmt;

use crate::error::{Error, Result};
use crate::spectral::EigenSystem;

/// `w(t) = value` on `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPiece {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl WeightPiece {
    pub fn new(start: f64, end: f64, value: f64) -> Self {
        WeightPiece { start, end, value }
    }

    /// `∫_start^end e^{-λt} dt`.
    fn exp_integral(&self, lambda: f64) -> f64 {
        let d = self.end - self.start;
        if lambda == 0.0 {
            d
        } else {
            (-lambda * self.start).exp() * (-(-lambda * d).exp_m1()) / lambda
        }
    }
}

/// How a weight was specified; informational only, the pieces are authoritative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightShape {
    Constant { value: f64 },
    Indicator { value: f64, eps: f64 },
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    kappa: f64,
    pieces: Vec<WeightPiece>,
    horizon: f64,
    t1: f64,
    shape: WeightShape,
}

/// A violated clause of the admissibility condition on `(κ, w, T₁)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    InvalidHorizon { horizon: f64 },
    NegativeKappa { kappa: f64 },
    NonFinite,
    PieceOutOfRange { index: usize },
    PiecesOverlap { index: usize },
    NegativeWeight { index: usize, value: f64 },
    T1OutOfRange { t1: f64 },
    NoPositiveInfimum { t1: f64, ess_inf: f64 },
    BothZero,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidHorizon { horizon } => write!(f, "horizon T = {horizon} must be > 0"),
            Violation::NegativeKappa { kappa } => write!(f, "kappa >= 0 violated (kappa = {kappa})"),
            Violation::NonFinite => write!(f, "non-finite weight parameter"),
            Violation::PieceOutOfRange { index } => {
                write!(f, "weight piece {index} lies outside [0, T] or is empty")
            }
            Violation::PiecesOverlap { index } => {
                write!(f, "weight piece {index} overlaps or precedes the previous one")
            }
            Violation::NegativeWeight { index, value } => {
                write!(f, "w(t) >= 0 violated on piece {index} (w = {value})")
            }
            Violation::T1OutOfRange { t1 } => write!(f, "T1 = {t1} not in (0, T]"),
            Violation::NoPositiveInfimum { t1, ess_inf } => write!(
                f,
                "no T1 with ess inf > 0: ess inf of w on [0, {t1}] is {ess_inf}"
            ),
            Violation::BothZero => write!(f, "kappa = 0 and w = 0 simultaneously"),
        }
    }
}

/// Outcome of [`WeightSpec::validate`]; empty means admissible.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::IllPosedWeight(v)),
        }
    }
}

impl WeightSpec {
    /// Pieces are sorted by start time; zero-valued pieces are kept as given.
    pub fn new(kappa: f64, mut pieces: Vec<WeightPiece>, horizon: f64, t1: f64, shape: WeightShape) -> Self {
        pieces.sort_by(|a, b| a.start.total_cmp(&b.start));
        WeightSpec {
            kappa,
            pieces,
            horizon,
            t1,
            shape,
        }
    }

    /// `κ = 0, w ≡ 1`: recover `u` from its plain time average.
    pub fn average(horizon: f64) -> Self {
        Self::constant(0.0, 1.0, horizon)
    }

    /// `κ = 1, w = 𝕀_[0,ε]`: the quasi-boundary-value variant.
    pub fn quasi(eps: f64, horizon: f64) -> Self {
        Self::indicator(1.0, 1.0, eps, horizon)
    }

    /// `w ≡ value` on `[0, T]`, `T₁ = T`.
    pub fn constant(kappa: f64, value: f64, horizon: f64) -> Self {
        Self::new(
            kappa,
            vec![WeightPiece::new(0.0, horizon, value)],
            horizon,
            horizon,
            WeightShape::Constant { value },
        )
    }

    /// `w = value·𝕀_[0,ε]`, `T₁ = ε`.
    pub fn indicator(kappa: f64, value: f64, eps: f64, horizon: f64) -> Self {
        Self::new(
            kappa,
            vec![WeightPiece::new(0.0, eps, value)],
            horizon,
            eps,
            WeightShape::Indicator { value, eps },
        )
    }

    /// Pure terminal condition `κ u(·,T) = μ` (`w ≡ 0`); never admissible.
    pub fn terminal(kappa: f64, horizon: f64) -> Self {
        Self::new(kappa, Vec::new(), horizon, horizon, WeightShape::Table)
    }

    pub fn table(kappa: f64, pieces: Vec<WeightPiece>, horizon: f64, t1: f64) -> Self {
        Self::new(kappa, pieces, horizon, t1, WeightShape::Table)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn pieces(&self) -> &[WeightPiece] {
        &self.pieces
    }

    pub fn shape(&self) -> WeightShape {
        self.shape
    }

    /// `w(t)`; at a shared breakpoint the later piece wins.
    pub fn value_at(&self, t: f64) -> f64 {
        self.pieces
            .iter()
            .rev()
            .find(|p| p.start <= t && t <= p.end)
            .map_or(0.0, |p| p.value)
    }

    /// Interior breakpoints of `w` in `(0, T)`, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let tol = 1e-12 * self.horizon;
        let mut b: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| [p.start, p.end])
            .filter(|&t| t > tol && t < self.horizon - tol)
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() <= tol);
        b
    }

    /// `(ess inf, ess sup)` of `w` over `[a, b]`; uncovered stretches count as zero.
    pub fn ess_bounds(&self, a: f64, b: f64) -> (f64, f64) {
        let tol = 1e-12 * self.horizon.max(1.0);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut cursor = a;
        for p in &self.pieces {
            if p.end <= a + tol || p.start >= b - tol || p.end - p.start <= tol {
                continue;
            }
            if p.start > cursor + tol {
                lo = lo.min(0.0);
                hi = hi.max(0.0);
            }
            lo = lo.min(p.value);
            hi = hi.max(p.value);
            cursor = cursor.max(p.end);
        }
        if cursor < b - tol {
            lo = lo.min(0.0);
            hi = hi.max(0.0);
        }
        (lo, hi)
    }

    /// Check every admissibility clause and list the ones that fail.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let finite = self.kappa.is_finite()
            && self.horizon.is_finite()
            && self.t1.is_finite()
            && self
                .pieces
                .iter()
                .all(|p| p.start.is_finite() && p.end.is_finite() && p.value.is_finite());
        if !finite {
            v.push(Violation::NonFinite);
            return ValidationReport { violations: v };
        }
        if self.horizon <= 0.0 {
            v.push(Violation::InvalidHorizon {
                horizon: self.horizon,
            });
            return ValidationReport { violations: v };
        }
        if self.kappa < 0.0 {
            v.push(Violation::NegativeKappa { kappa: self.kappa });
        }
        let tol = 1e-12 * self.horizon;
        for (i, p) in self.pieces.iter().enumerate() {
            if p.start < -tol || p.end > self.horizon + tol || p.end <= p.start {
                v.push(Violation::PieceOutOfRange { index: i });
            }
            if i > 0 && p.start < self.pieces[i - 1].end - tol {
                v.push(Violation::PiecesOverlap { index: i });
            }
            if p.value < 0.0 {
                v.push(Violation::NegativeWeight { index: i, value: p.value });
            }
        }
        if !(self.t1 > 0.0 && self.t1 <= self.horizon + tol) {
            v.push(Violation::T1OutOfRange { t1: self.t1 });
        } else {
            let (ess_inf, _) = self.ess_bounds(0.0, self.t1);
            if !(ess_inf > 0.0) {
                v.push(Violation::NoPositiveInfimum {
                    t1: self.t1,
                    ess_inf,
                });
            }
        }
        let w_zero = self.pieces.iter().all(|p| p.value == 0.0);
        if self.kappa == 0.0 && w_zero {
            v.push(Violation::BothZero);
        }
        ValidationReport { violations: v }
    }

    /// `ζ(λ) = ∫₀ᵀ w(t) e^{-λt} dt + κ e^{-λT}` in closed form.
    ///
    /// Positive whenever the weight validates; no validation is done here.
    pub fn zeta(&self, lambda: f64) -> f64 {
        let integral: f64 = self
            .pieces
            .iter()
            .map(|p| p.value * p.exp_integral(lambda))
            .sum();
        integral + self.kappa * (-lambda * self.horizon).exp()
    }

    /// `ζ_k` for every mode of `es`.
    pub fn multipliers(&self, es: &EigenSystem) -> Vec<f64> {
        es.lambdas().iter().map(|&l| self.zeta(l)).collect()
    }

    /// `1/ζ_k` for every mode, without admissibility checks (diagnostics only).
    pub fn amplification_profile(&self, es: &EigenSystem) -> Vec<f64> {
        es.lambdas().iter().map(|&l| 1.0 / self.zeta(l)).collect()
    }

    /// Constants `c₁ < c₂` bracketing `λ_k ζ_k` (`k ≥ m`) and `ζ_k` (`k < m`),
    /// verified on every mode of `es`.
    pub fn stability_constants(&self, es: &EigenSystem) -> Result<StabilityConstants> {
        let constants = self.band_constants(es)?;
        let zetas = self.multipliers(es);
        if let Some(k) = constants.first_violation(es.lambdas(), &zetas) {
            let scaled = constants.scaled(k, es.lambda(k), zetas[k]);
            return Err(Error::BoundViolated {
                k: k + 1,
                detail: format!("value {scaled:e} outside [{:e}, {:e}]", constants.c1, constants.c2),
            });
        }
        Ok(constants)
    }

    /// `c₁`, `c₂` without checking the modes against them.
    pub fn band_constants(&self, es: &EigenSystem) -> Result<StabilityConstants> {
        self.validate().into_result()?;
        let m0 = es.first_positive().ok_or_else(|| Error::BoundViolated {
            k: es.n_modes(),
            detail: "no positive eigenvalue among the retained modes".into(),
        })?;
        let head: Vec<f64> = es.lambdas()[..=m0].iter().map(|&l| self.zeta(l)).collect();
        let (w_inf, _) = self.ess_bounds(0.0, self.t1);
        let (_, w_sup) = self.ess_bounds(0.0, self.horizon);
        let lambda_m = es.lambda(m0);
        let c1 = head
            .iter()
            .copied()
            .fold(w_inf * (-(-lambda_m * self.t1).exp_m1()), f64::min);
        // sup_{λ>0} λ e^{-λT} = 1/(eT)
        let tail_sup = w_sup + self.kappa / (std::f64::consts::E * self.horizon);
        let c2 = head.iter().copied().fold(tail_sup, f64::max);
        Ok(StabilityConstants {
            c1,
            c2,
            m: m0 + 1,
            w_inf,
            w_sup,
        })
    }

    /// Read a weight table: one `t_start t_end value` triple per line.
    /// Blank lines and `#` comments are ignored.
    pub fn parse_table(text: &str) -> Result<Vec<WeightPiece>> {
        let mut pieces = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::InvalidInput(format!(
                    "weight table line {}: expected 3 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let mut vals = [0.0; 3];
            for (slot, field) in vals.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| {
                    Error::InvalidInput(format!(
                        "weight table line {}: cannot parse '{}'",
                        lineno + 1,
                        field
                    ))
                })?;
            }
            pieces.push(WeightPiece::new(vals[0], vals[1], vals[2]));
        }
        Ok(pieces)
    }

    /// Inverse of [`WeightSpec::parse_table`].
    pub fn format_table(&self) -> String {
        self.pieces
            .iter()
            .map(|p| format!("{:.16e} {:.16e} {:.16e}\n", p.start, p.end, p.value))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityConstants {
    pub c1: f64,
    pub c2: f64,
    /// 1-based index of the first positive eigenvalue.
    pub m: usize,
    /// ess inf of `w` on `[0, T₁]`.
    pub w_inf: f64,
    /// ess sup of `w` on `[0, T]`.
    pub w_sup: f64,
}

impl StabilityConstants {
    const REL_TOL: f64 = 1e-13;

    /// The quantity bounded by `[c1, c2]` for 0-based mode `k`.
    pub fn scaled(&self, k: usize, lambda: f64, zeta: f64) -> f64 {
        if k + 1 >= self.m {
            lambda * zeta
        } else {
            zeta
        }
    }

    pub fn holds(&self, k: usize, lambda: f64, zeta: f64) -> bool {
        let s = self.scaled(k, lambda, zeta);
        s >= self.c1 * (1.0 - Self::REL_TOL) && s <= self.c2 * (1.0 + Self::REL_TOL)
    }

    /// First 0-based mode whose multiplier escapes the band.
    pub fn first_violation(&self, lambdas: &[f64], zetas: &[f64]) -> Option<usize> {
        (0..lambdas.len()).find(|&k| !self.holds(k, lambdas[k], zetas[k]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_is_admissible() {
        assert!(WeightSpec::average(1.0).validate().is_ok());
    }

    #[test]
    fn terminal_only_is_rejected() {
        let r = WeightSpec::terminal(1.0, 1.0).validate();
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::NoPositiveInfimum { .. }));
        assert!(r.violations[0].to_string().starts_with("no T1 with ess inf > 0"));
        assert!(matches!(
            WeightSpec::terminal(1.0, 1.0).validate().into_result(),
            Err(Error::IllPosedWeight(_))
        ));
    }

    #[test]
    fn quasi_is_admissible() {
        assert!(WeightSpec::quasi(0.01, 0.1).validate().is_ok());
    }

    #[test]
    fn clause_reports() {
        let neg = WeightSpec::constant(-1.0, 1.0, 1.0).validate();
        assert!(neg.violations.contains(&Violation::NegativeKappa { kappa: -1.0 }));
        let both = WeightSpec::constant(0.0, 0.0, 1.0).validate();
        assert!(both.violations.contains(&Violation::BothZero));
        let signed = WeightSpec::table(0.0, vec![WeightPiece::new(0.0, 1.0, -0.5)], 1.0, 1.0).validate();
        assert!(matches!(signed.violations[0], Violation::NegativeWeight { .. }));
        let bad_t1 = WeightSpec::table(0.0, vec![WeightPiece::new(0.0, 1.0, 1.0)], 1.0, 2.0).validate();
        assert!(matches!(bad_t1.violations[0], Violation::T1OutOfRange { .. }));
        // declared T1 reaches into a gap of w
        let gap = WeightSpec::table(
            0.0,
            vec![WeightPiece::new(0.0, 0.3, 1.0), WeightPiece::new(0.5, 1.0, 1.0)],
            1.0,
            0.6,
        )
        .validate();
        assert!(matches!(gap.violations[0], Violation::NoPositiveInfimum { .. }));
        let outside = WeightSpec::table(0.0, vec![WeightPiece::new(0.0, 2.0, 1.0)], 1.0, 1.0).validate();
        assert!(matches!(outside.violations[0], Violation::PieceOutOfRange { index: 0 }));
        let overlap = WeightSpec::table(
            0.0,
            vec![WeightPiece::new(0.0, 0.6, 1.0), WeightPiece::new(0.5, 1.0, 1.0)],
            1.0,
            1.0,
        )
        .validate();
        assert!(overlap.violations.contains(&Violation::PiecesOverlap { index: 1 }));
    }

    #[test]
    fn zeta_closed_forms() {
        let lambda = 3.7;
        let t = 0.8;
        let avg = WeightSpec::average(t);
        let exact = (1.0 - (-lambda * t).exp()) / lambda;
        assert!((avg.zeta(lambda) - exact).abs() < 1e-15);
        let eps = 0.01;
        let quasi = WeightSpec::quasi(eps, t);
        let exact = (1.0 - (-lambda * eps).exp()) / lambda + (-lambda * t).exp();
        assert!((quasi.zeta(lambda) - exact).abs() < 1e-15);
    }

    #[test]
    fn zeta_at_zero_eigenvalue() {
        let ws = WeightSpec::constant(0.5, 2.0, 0.3);
        assert!((ws.zeta(0.0) - (2.0 * 0.3 + 0.5)).abs() < 1e-15);
        // continuity through λ = 0
        assert!((ws.zeta(1e-12) - ws.zeta(0.0)).abs() < 1e-11);
    }

    #[test]
    fn stability_constants_average_case() {
        use crate::grid::Grid;
        use crate::operator::OperatorSpec;
        use crate::spectral::build_eigensystem;
        let t = 1.0;
        let g = Grid::uniform(std::f64::consts::PI, 401).unwrap();
        let es = build_eigensystem(&OperatorSpec::heat(g, 0.0).unwrap(), 100).unwrap();
        let ws = WeightSpec::average(t);
        let sc = ws.stability_constants(&es).unwrap();
        let zeta1 = 1.0 - (-t).exp();
        assert_eq!(sc.m, 1);
        assert!((sc.c1 - zeta1).abs() < 1e-15);
        assert!((sc.c2 - 1.0).abs() < 1e-15);
        for k in 0..es.n_modes() {
            let l = es.lambda(k);
            let lz = l * ws.zeta(l);
            assert!((lz - (1.0 - (-l * t).exp())).abs() < 1e-14);
            assert!(sc.holds(k, l, ws.zeta(l)));
        }
        assert!(0.0 < sc.c1 && sc.c1 < sc.c2);
    }

    #[test]
    fn table_round_trip() {
        let text = "# t0 t1 w\n0 0.5 2\n\n0.5 1.0 1   # tail\n";
        let pieces = WeightSpec::parse_table(text).unwrap();
        assert_eq!(pieces, vec![WeightPiece::new(0.0, 0.5, 2.0), WeightPiece::new(0.5, 1.0, 1.0)]);
        let ws = WeightSpec::table(0.0, pieces.clone(), 1.0, 1.0);
        assert_eq!(WeightSpec::parse_table(&ws.format_table()).unwrap(), pieces);
        assert!(WeightSpec::parse_table("0 1").is_err());
        assert!(WeightSpec::parse_table("0 1 x").is_err());
    }

    #[test]
    fn breakpoints_exclude_ends() {
        let ws = WeightSpec::quasi(0.01, 0.1);
        assert_eq!(ws.breakpoints(), vec![0.01]);
        assert!(WeightSpec::average(1.0).breakpoints().is_empty());
    }
}

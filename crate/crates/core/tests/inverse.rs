mod common;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use tavg_core::field::uniform_times;
use tavg_core::{
    build_eigensystem, invert_m0, norm_h2, solve_inverse, EigenSystem, Error, ForwardModel, Grid, GridFunction,
    InverseProblem, OperatorSpec, SourceTerm, SpectralVector, WeightPiece, WeightSpec,
};

fn heat_system(length: f64, n_nodes: usize, n_modes: usize) -> Arc<EigenSystem> {
    let g = Grid::uniform(length, n_nodes).unwrap();
    build_eigensystem(&OperatorSpec::heat(g, 0.0).unwrap(), n_modes).unwrap()
}

fn random_vector(es: &Arc<EigenSystem>, seed: u64) -> SpectralVector {
    let mut rng = common::rng(seed);
    SpectralVector::new(es.clone(), (0..es.n_modes()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn figure_reconstruction(mu: &GridFunction, es: &Arc<EigenSystem>) -> GridFunction {
    invert_m0(mu, &WeightSpec::average(0.1), es).unwrap().xi.synthesize()
}

#[test]
fn round_trip_on_the_span() {
    let es = heat_system(TAU, 1025, 300);
    let ws = WeightSpec::average(0.1);
    let model = ForwardModel::new(es.clone(), 0.1).unwrap();
    for seed in 0..10 {
        let xi = random_vector(&es, seed);
        let mu = model.apply_m0(&xi, &ws).unwrap().synthesize();
        let report = invert_m0(&mu, &ws, &es).unwrap();
        let err = report.xi.axpby(1.0, &xi, -1.0).unwrap().norm() / xi.norm();
        assert!(err <= 1e-10, "seed {seed}: {err}");
        assert!(report.reapplication_error <= 1e-12);
        assert!(report.residual_mu <= report.truncation_residual + 1e-10);
    }
}

#[test]
fn first_mode_is_recovered_exactly() {
    let es = heat_system(PI, 257, 20);
    let ws = WeightSpec::average(1.0);
    let v1 = es.mode_function(0);
    let zeta = ws.zeta(es.lambda(0));
    let mu = GridFunction::zeros(es.grid().clone()).axpby(0.0, &v1, zeta).unwrap();
    let (field, report) = solve_inverse(&mu, None, &ws, &es, &[0.0, 0.5, 1.0]).unwrap();
    assert!((report.xi.coeffs()[0] - 1.0).abs() < 1e-13);
    assert!(report.xi.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
    for (j, &t) in field.times().iter().enumerate() {
        let expect = v1.axpby((-es.lambda(0) * t).exp(), &v1, 0.0).unwrap();
        let d = field.slice(j).axpby(1.0, &expect, -1.0).unwrap().max_abs();
        assert!(d < 1e-12);
    }
}

#[test]
fn quasi_boundary_regression() {
    let (horizon, eps) = (0.1, 0.01);
    let es = heat_system(TAU, 1025, 300);
    let g = es.grid().clone();
    let ws = WeightSpec::quasi(eps, horizon);
    let xi_true = g.sample(|x| x * (TAU - x) * (2.0 * x).sin());
    let model = ForwardModel::new(es.clone(), horizon).unwrap();
    let mu = model.apply_m0(&es.project(&xi_true).unwrap(), &ws).unwrap().synthesize();
    let report = invert_m0(&mu, &ws, &es).unwrap();
    let err = report.xi.synthesize().axpby(1.0, &xi_true, -1.0).unwrap().norm_l2() / xi_true.norm_l2();
    // truncation bias of the profile on 300 modes, pinned on first run
    const PINNED: f64 = 3.519_517_165_897_034e-6;
    assert!((err - PINNED).abs() <= 1e-6 * PINNED, "relative error {err:e}");
    assert!(report.stability_holds());
}

#[test]
fn figure_setup_goes_negative() {
    let es = heat_system(TAU, 1025, 300);
    let g = es.grid().clone();
    let mu = g.sample(|x| common::mu_profile(x, TAU));
    let interior_min = mu.values()[1..g.n_nodes() - 1].iter().copied().fold(f64::INFINITY, f64::min);
    assert!(interior_min > 0.0);
    let u0 = figure_reconstruction(&mu, &es);
    assert!(u0.min() < 0.0, "min {}", u0.min());
}

#[test]
fn figure_deviation_grows_with_theta() {
    let es = heat_system(TAU, 1025, 300);
    let g = es.grid().clone();
    let mu = g.sample(|x| common::mu_profile(x, TAU));
    let base = figure_reconstruction(&mu, &es);
    let deviation = |theta: f64| {
        let mu_d = mu.axpby(1.0, &g.sample(|x| common::eta_profile(x, TAU, theta)), 0.1).unwrap();
        figure_reconstruction(&mu_d, &es).axpby(1.0, &base, -1.0).unwrap().max_abs()
    };
    assert!(deviation(3.0) > deviation(1.0));
    let zero = figure_reconstruction(&mu.axpby(1.0, &mu, 0.0).unwrap(), &es);
    assert_eq!(zero.values(), base.values());
}

#[test]
fn eta_surrogate_norm_increases_with_theta() {
    let es = heat_system(TAU, 1025, 300);
    let g = es.grid().clone();
    let norms: Vec<f64> = [1.0, 2.0, 3.0, 4.0]
        .iter()
        .map(|&theta| norm_h2(&g.sample(|x| common::eta_profile(x, TAU, theta)), &es).unwrap())
        .collect();
    assert!(norms.windows(2).all(|w| w[1] > w[0]), "{norms:?}");
}

#[test]
fn surrogate_norm_of_modes() {
    let es = heat_system(PI, 129, 10);
    let v1 = es.mode_function(0);
    let sum = v1.axpby(1.0, &es.mode_function(1), 1.0).unwrap();
    assert!((norm_h2(&v1, &es).unwrap() - es.lambda(0)).abs() < 1e-12);
    let expect = (es.lambda(0).powi(2) + es.lambda(1).powi(2)).sqrt();
    assert!((norm_h2(&sum, &es).unwrap() - expect).abs() < 1e-12 * expect);
}

#[test]
fn rejects_nonzero_trace_and_ill_posed_weight() {
    let es = heat_system(PI, 65, 10);
    let g = es.grid().clone();
    let ws = WeightSpec::average(1.0);
    let shifted = g.sample(|x| 1.0 + x.sin());
    assert!(matches!(invert_m0(&shifted, &ws, &es), Err(Error::BoundaryViolation { .. })));
    assert!(matches!(norm_h2(&shifted, &es), Err(Error::BoundaryViolation { .. })));
    let mu = g.sample(|x| x.sin());
    let terminal = WeightSpec::terminal(1.0, 1.0);
    assert!(matches!(invert_m0(&mu, &terminal, &es), Err(Error::IllPosedWeight(_))));
}

#[test]
fn late_regular_source_needs_theta_before_horizon() {
    let es = heat_system(PI, 65, 10);
    let g = es.grid().clone();
    let horizon = 0.5;
    let src = SourceTerm::from_fn(g.clone(), vec![0.0, horizon], horizon, |x, _| x.sin()).unwrap();
    let spec_src = src.project(&es).unwrap();
    let mu = g.sample(|x| x.sin());
    let quasi = WeightSpec::quasi(0.1, horizon);
    assert!(matches!(
        solve_inverse(&mu, Some(&spec_src), &quasi, &es, &[0.0]),
        Err(Error::ThetaInvalid { .. })
    ));
    // without a terminal term any θ is accepted
    let avg = WeightSpec::average(horizon);
    assert!(solve_inverse(&mu, Some(&spec_src), &avg, &es, &[0.0]).is_ok());
}

#[test]
fn forced_problem_reproduces_the_average() {
    let horizon = 0.2;
    let es = heat_system(2.0, 257, 120);
    let g = es.grid().clone();
    let ws = WeightSpec::table(
        0.7,
        vec![WeightPiece::new(0.0, 0.05, 2.0), WeightPiece::new(0.05, horizon, 1.0)],
        horizon,
        horizon,
    );
    let src = SourceTerm::from_fn(g.clone(), uniform_times(horizon, 5), 0.0, |x, t| x * (2.0 - x) * (1.0 - 3.0 * t)).unwrap();
    let spec_src = src.project(&es).unwrap();
    let mu = g.sample(|x| (PI * x / 2.0).sin() + 0.3 * (PI * x).sin());
    let problem = InverseProblem::new(es.clone(), ws.clone()).unwrap();
    let (field, report) = problem.solve_inverse(&mu, Some(&spec_src), &[0.0, horizon]).unwrap();
    let again = problem
        .model()
        .averaged(field.alpha(), Some(&spec_src), &ws)
        .unwrap()
        .synthesize();
    let d = again.axpby(1.0, &es.synthesize(&es.project(&mu).unwrap()).unwrap(), -1.0).unwrap().norm_l2();
    assert!(d <= 1e-8, "{d}");
    assert!(report.reapplication_error <= 1e-12);
    assert!(report.stability_holds());
}

#[test]
fn report_text_lists_the_diagnostics() {
    let es = heat_system(PI, 65, 10);
    let mu = es.grid().sample(|x| x.sin() * x);
    let text = invert_m0(&mu, &WeightSpec::average(1.0), &es).unwrap().to_text();
    for key in ["residual_mu", "amplification", "c1", "c2", "truncation_residual", "h2_converged"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{key} = "))), "missing {key}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stability_bound_holds_for_random_data(seed in any::<u64>(), quasi in any::<bool>()) {
        let es = heat_system(TAU, 257, 120);
        let ws = if quasi { WeightSpec::quasi(0.01, 0.1) } else { WeightSpec::average(0.1) };
        let mu = random_vector(&es, seed).synthesize();
        let report = invert_m0(&mu, &ws, &es).unwrap();
        prop_assert!(report.stability_holds());
    }

    #[test]
    fn inversion_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let es = heat_system(TAU, 257, 80);
        let ws = WeightSpec::quasi(0.02, 0.1);
        let m1 = random_vector(&es, seed).synthesize();
        let m2 = random_vector(&es, seed ^ 1).synthesize();
        let lhs = invert_m0(&m1.axpby(a, &m2, b).unwrap(), &ws, &es).unwrap().xi;
        let r1 = invert_m0(&m1, &ws, &es).unwrap().xi;
        let r2 = invert_m0(&m2, &ws, &es).unwrap().xi;
        let rhs = r1.axpby(a, &r2, b).unwrap();
        prop_assert!(lhs.axpby(1.0, &rhs, -1.0).unwrap().norm() <= 1e-12 * rhs.norm().max(1.0));
    }
}

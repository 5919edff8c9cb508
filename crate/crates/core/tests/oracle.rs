mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;
use tavg_core::field::uniform_times;
use tavg_core::oracle::pde_residual;
use tavg_core::{
    build_eigensystem, step_evolution, time_average, Error, FieldSamples, ForwardModel, Grid, OperatorSpec, SourceTerm,
    StepperConfig, WeightPiece, WeightSpec,
};

/// Exact `∫₀ᵀ e^{-t} sin x dt` against the stepper average, for one resolution.
fn first_mode_average_error(n_nodes: usize, n_steps: usize) -> f64 {
    let horizon = 0.5;
    let g = Grid::uniform(PI, n_nodes).unwrap();
    let op = OperatorSpec::heat(g.clone(), 0.0).unwrap();
    let field = step_evolution(&op, &g.sample(f64::sin), None, &StepperConfig::new(horizon, n_steps)).unwrap();
    let avg = time_average(&field, &WeightSpec::average(horizon)).unwrap();
    let exact = g.sample(|x| -(-horizon as f64).exp_m1() * x.sin());
    avg.axpby(1.0, &exact, -1.0).unwrap().norm_l2() / exact.norm_l2()
}

#[test]
fn average_of_first_mode_converges_at_second_order() {
    let coarse = first_mode_average_error(65, 64);
    let fine = first_mode_average_error(129, 128);
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    assert!(fine < 1e-4);
}

#[test]
fn constant_slices_average_to_value_times_horizon() {
    let g = Grid::uniform(1.0, 11).unwrap();
    let slice = g.sample(|x| x * (1.0 - x)).into_values();
    let times = uniform_times(2.0, 7);
    let field = FieldSamples::new(g.clone(), times.clone(), vec![slice.clone(); times.len()]).unwrap();
    let avg = time_average(&field, &WeightSpec::average(2.0)).unwrap();
    for (a, s) in avg.values().iter().zip(&slice) {
        assert!((a - 2.0 * s).abs() < 1e-14);
    }
}

#[test]
fn unresolved_breakpoint_is_reported() {
    let g = Grid::uniform(1.0, 17).unwrap();
    let op = OperatorSpec::heat(g.clone(), 0.0).unwrap();
    let ws = WeightSpec::table(0.0, vec![WeightPiece::new(0.0, 0.33, 1.0), WeightPiece::new(0.33, 1.0, 2.0)], 1.0, 1.0);
    let xi = g.sample(|x| (PI * x).sin());
    let plain = step_evolution(&op, &xi, None, &StepperConfig::new(1.0, 10)).unwrap();
    assert!(matches!(time_average(&plain, &ws), Err(Error::BreakpointUnresolved { .. })));
    let resolved = step_evolution(&op, &xi, None, &StepperConfig::new(1.0, 10).resolving(&ws)).unwrap();
    assert!(resolved.time_index(0.33, 1e-12).is_some());
    assert!(time_average(&resolved, &ws).is_ok());
}

#[test]
fn own_output_has_zero_scheme_residual() {
    let g = Grid::uniform(2.0, 101).unwrap();
    let op = OperatorSpec::tabulated_from_fn(g.clone(), |x| 1.0 + x * x, |x| -x).unwrap();
    let src = SourceTerm::from_fn(g.clone(), vec![0.0, 0.1, 0.3], 0.0, |x, t| x * (2.0 - x) * (1.0 + t)).unwrap();
    let field = step_evolution(&op, &g.sample(|x| x * (2.0 - x)), Some(&src), &StepperConfig::new(0.3, 60)).unwrap();
    let r = pde_residual(&op, &field, Some(&src)).unwrap();
    assert!(r < 1e-10 * field.norm_l2().max(1.0), "residual {r}");
}

#[test]
fn spectral_field_residual_shrinks_at_second_order() {
    let horizon = 0.1;
    let residual = |n_nodes: usize, n_steps: usize| {
        let g = Grid::uniform(PI, n_nodes).unwrap();
        let op = OperatorSpec::heat(g.clone(), 0.0).unwrap();
        // analytic modes: the spectral field solves the continuous problem
        let es = build_eigensystem(&op, 3).unwrap();
        let model = ForwardModel::new(es.clone(), horizon).unwrap();
        let xi = es.project(&g.sample(|x| x.sin() + 0.5 * (3.0 * x).sin())).unwrap();
        let field = model.solve_forward(&xi, None, &uniform_times(horizon, n_steps)).unwrap();
        pde_residual(&op, field.samples(), None).unwrap()
    };
    let ratio = residual(65, 64) / residual(129, 128);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn stepping_is_deterministic() {
    let g = Grid::uniform(1.0, 65).unwrap();
    let op = OperatorSpec::heat(g.clone(), 1.0).unwrap();
    let xi = g.sample(|x| x * (1.0 - x));
    let cfg = StepperConfig::new(0.2, 40).with_breakpoints(&[0.0123]);
    let a = step_evolution(&op, &xi, None, &cfg).unwrap();
    let b = step_evolution(&op, &xi, None, &cfg).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Crank-Nicolson is monotone when `max a · Δt / h² ≤ 1`.
    #[test]
    fn discrete_maximum_principle(seed in any::<u64>(), n_nodes in 17usize..80, q in 0.0f64..3.0, forced in any::<bool>()) {
        let mut rng = common::rng(seed);
        let length = 1.0;
        let g = Grid::uniform(length, n_nodes).unwrap();
        let a_max = 2.0;
        let op = OperatorSpec::tabulated_from_fn(g.clone(), |x| 1.0 + x, move |_| -q).unwrap();
        let mut xi: Vec<f64> = (0..n_nodes).map(|_| rng.gen_range(0.0..1.0)).collect();
        xi[0] = 0.0;
        xi[n_nodes - 1] = 0.0;
        let xi = tavg_core::GridFunction::new(g.clone(), xi).unwrap();
        let h = g.spacing();
        let horizon = 0.05;
        let n_steps = ((horizon * a_max / (h * h)).ceil() as usize).max(2);
        let src = if forced {
            let vals: Vec<Vec<f64>> = (0..3).map(|_| (0..n_nodes).map(|_| rng.gen_range(0.0..5.0)).collect()).collect();
            Some(SourceTerm::new(g.clone(), vec![0.0, 0.02, horizon], vals, 0.0).unwrap())
        } else {
            None
        };
        let field = step_evolution(&op, &xi, src.as_ref(), &StepperConfig::new(horizon, n_steps)).unwrap();
        prop_assert!(field.min() >= -1e-8, "min {}", field.min());
    }
}

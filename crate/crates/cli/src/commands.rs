//! The experiment commands. Each returns an [`Outcome`] (text for stdout and
//! stderr plus an exit code); files are written as a side effect.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use tavg_core::field::uniform_times;
use tavg_core::propagate::ForwardRequest;
use tavg_core::{
    step_evolution, time_average, EigenSolverRegistry, EigenSystem, GridFunction, InverseProblem, OperatorSpec,
    PropagatorRegistry, SourceTerm, StepperConfig, WeightSpec,
};

use crate::config::RunConfig;
use crate::csvio::{self, fmt_real};
use crate::error::{CliResult, EXIT_BOUND, EXIT_ILL_POSED, EXIT_OK};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }
}

/// Operator, weight and eigenbasis assembled from a configuration.
pub struct Session {
    pub cfg: RunConfig,
    pub op: OperatorSpec,
    pub ws: WeightSpec,
}

impl Session {
    pub fn new(cfg: RunConfig) -> CliResult<Self> {
        let op = cfg.operator()?;
        let ws = cfg.weight()?;
        Ok(Session { cfg, op, ws })
    }

    pub fn eigensystem(&self, n_modes: usize) -> CliResult<Arc<EigenSystem>> {
        let solvers = EigenSolverRegistry::with_defaults();
        Ok(solvers.build(&self.cfg.operator.eigensolver, &self.op, n_modes)?)
    }

    fn horizon(&self) -> f64 {
        self.cfg.run.horizon
    }

    fn output_times(&self) -> Vec<f64> {
        uniform_times(self.horizon(), self.cfg.run.output_steps.max(1))
    }

    fn read_source(&self, phi: Option<&Path>) -> CliResult<Option<SourceTerm>> {
        phi.map(|p| csvio::read_source(p, self.op.grid(), self.cfg.run.theta)).transpose()
    }
}

/// `k, λ_k, ζ_k, λ_k ζ_k, c1, c2` per mode; exit 2 when a mode leaves its band.
///
/// For an inadmissible weight the exit code is 4. With `diagnostics` the
/// table `k, λ_k, ζ_k, 1/ζ_k, e^{λ_k T}/κ` is printed first.
pub fn spectrum(session: &Session, diagnostics: bool) -> CliResult<Outcome> {
    let es = session.eigensystem(session.cfg.run.modes)?;
    let ws = &session.ws;
    let report = ws.validate();
    if !report.is_ok() {
        let mut out = Outcome {
            code: EXIT_ILL_POSED,
            ..Outcome::default()
        };
        for v in &report.violations {
            writeln!(out.stderr, "ill-posed weight: {v}").unwrap();
        }
        if diagnostics {
            out.stdout.push_str("k,lambda,zeta,amplification,terminal_bound\n");
            let amp = ws.amplification_profile(&es);
            for (k, (&l, &a)) in es.lambdas().iter().zip(&amp).enumerate() {
                let bound = if ws.kappa() > 0.0 {
                    (l * ws.horizon()).exp() / ws.kappa()
                } else {
                    f64::INFINITY
                };
                writeln!(
                    out.stdout,
                    "{},{},{},{},{}",
                    k + 1,
                    fmt_real(l),
                    fmt_real(ws.zeta(l)),
                    fmt_real(a),
                    fmt_real(bound)
                )
                .unwrap();
            }
            if let Some(k) = amp_crossing(&amp, 1e12) {
                writeln!(out.stderr, "amplification exceeds 1e12 from mode {k}").unwrap();
            }
        }
        return Ok(out);
    }
    let c = ws.band_constants(&es)?;
    let zetas = ws.multipliers(&es);
    let mut out = Outcome::ok(String::from("k,lambda,zeta,lambda_zeta,c1,c2\n"));
    let mut violations = 0;
    for (k, (&l, &z)) in es.lambdas().iter().zip(&zetas).enumerate() {
        writeln!(
            out.stdout,
            "{},{},{},{},{},{}",
            k + 1,
            fmt_real(l),
            fmt_real(z),
            fmt_real(l * z),
            fmt_real(c.c1),
            fmt_real(c.c2)
        )
        .unwrap();
        if !c.holds(k, l, z) {
            violations += 1;
            writeln!(
                out.stderr,
                "mode {}: {:e} outside [{:e}, {:e}]",
                k + 1,
                c.scaled(k, l, z),
                c.c1,
                c.c2
            )
            .unwrap();
        }
    }
    if violations > 0 {
        out.code = EXIT_BOUND;
    }
    Ok(out)
}

/// First 1-based mode whose amplification exceeds `level`.
fn amp_crossing(amp: &[f64], level: f64) -> Option<usize> {
    amp.iter().position(|&a| a > level).map(|k| k + 1)
}

/// Forward solution `u(x, t)` at the configured output instants.
pub fn forward(session: &Session, xi: &Path, phi: Option<&Path>, method: Option<&str>, out: &Path) -> CliResult<Outcome> {
    session.ws.validate().into_result()?;
    let xi = csvio::read_grid_function(xi, session.op.grid())?;
    let src = session.read_source(phi)?;
    let times = session.output_times();
    let run = &session.cfg.run;
    let name = method.unwrap_or(&run.propagator);
    let propagator = PropagatorRegistry::with_defaults().get(name)?;
    let req = ForwardRequest {
        op: &session.op,
        xi: &xi,
        source: src.as_ref(),
        horizon: run.horizon,
        output_times: &times,
        n_modes: run.modes,
        eigensolver: &session.cfg.operator.eigensolver,
        n_steps: run.n_steps,
        breakpoints: &[],
    };
    let field = propagator.propagate(&req)?;
    csvio::save_space_time(out, &field, "u")?;
    Ok(Outcome::ok(format!(
        "method = {name}\ninstants = {}\nnorm = {}\n",
        times.len(),
        fmt_real(field.norm_l2())
    )))
}

#[derive(Debug, Clone, Default)]
pub struct InvertPaths {
    pub mu: PathBuf,
    pub phi: Option<PathBuf>,
    /// Reconstructed solution `u(x, t)`.
    pub out: PathBuf,
    /// Recovered initial state as a grid function.
    pub xi_out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// `u = ℒM₀⁻¹(μ - Mφ) + Lφ`, with the diagnostic report on stdout.
pub fn invert(session: &Session, paths: &InvertPaths) -> CliResult<Outcome> {
    let es = session.eigensystem(session.cfg.run.modes)?;
    let problem = InverseProblem::new(Arc::clone(&es), session.ws.clone())?;
    let mu = csvio::read_grid_function(&paths.mu, session.op.grid())?;
    let src = session.read_source(paths.phi.as_deref())?;
    let spectral_src = src.as_ref().map(|s| s.project(&es)).transpose()?;
    let (field, report) = problem.solve_inverse(&mu, spectral_src.as_ref(), &session.output_times())?;
    csvio::save_space_time(&paths.out, field.samples(), "u")?;
    if let Some(p) = &paths.xi_out {
        csvio::save_grid_function(p, &report.xi.synthesize())?;
    }
    let text = report.to_text();
    if let Some(p) = &paths.report {
        std::fs::write(p, &text).map_err(|e| crate::error::CliError::io(p, e))?;
    }
    let mut out = Outcome::ok(text);
    if !report.h2_converged {
        writeln!(
            out.stderr,
            "warning: partial sums of sum gamma_k^2 lambda_k^2 have not settled; mu may not lie in H2"
        )
        .unwrap();
    }
    if !report.stability_holds() {
        writeln!(out.stderr, "stability estimate violated").unwrap();
        out.code = EXIT_BOUND;
    }
    Ok(out)
}

/// `x^{1/4} (L - x) |sin(πx/L)|`.
pub fn figure_mu(x: f64, length: f64) -> f64 {
    x.powf(0.25) * (length - x) * (PI * x / length).sin().abs()
}

/// `x (L - x)(x - L/3)(x - 2L/3) sin(θx)`.
pub fn figure_eta(x: f64, length: f64, theta: f64) -> f64 {
    x * (length - x) * (x - length / 3.0) * (x - 2.0 * length / 3.0) * (theta * x).sin()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureCurves {
    pub theta: f64,
    pub mu_perturbed: GridFunction,
    pub u0_perturbed: GridFunction,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub mu: GridFunction,
    pub u0: GridFunction,
    pub curves: Vec<FigureCurves>,
}

impl FigureData {
    pub fn min_mu_interior(&self) -> f64 {
        let v = self.mu.values();
        v[1..v.len() - 1].iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Unperturbed and perturbed reconstructions of `u(·, 0)`.
pub fn figure_data(session: &Session) -> CliResult<FigureData> {
    let fig = &session.cfg.figure1;
    let es = session.eigensystem(fig.modes.unwrap_or(session.cfg.run.modes))?;
    let problem = InverseProblem::new(Arc::clone(&es), session.ws.clone())?;
    let grid = session.op.grid();
    let length = grid.length();
    let mu = grid.sample(|x| figure_mu(x, length));
    let u0 = problem.invert_m0(&mu)?.xi.synthesize();
    let mut curves = Vec::with_capacity(fig.thetas.len());
    for &theta in &fig.thetas {
        let eta = grid.sample(|x| figure_eta(x, length, theta));
        let mu_perturbed = mu.axpby(1.0, &eta, fig.delta)?;
        let u0_perturbed = problem.invert_m0(&mu_perturbed)?.xi.synthesize();
        let max_deviation = u0_perturbed.axpby(1.0, &u0, -1.0)?.max_abs();
        curves.push(FigureCurves {
            theta,
            mu_perturbed,
            u0_perturbed,
            max_deviation,
        });
    }
    Ok(FigureData { mu, u0, curves })
}

fn theta_tag(theta: f64) -> String {
    format!("{theta}")
}

/// Curves, a gnuplot script and the deviation summary under `dir`.
pub fn figure1(session: &Session, dir: &Path) -> CliResult<Outcome> {
    let data = figure_data(session)?;
    csvio::save_grid_function(&dir.join("mu.csv"), &data.mu)?;
    csvio::save_grid_function(&dir.join("u0.csv"), &data.u0)?;
    let mut summary = String::new();
    writeln!(summary, "delta = {}", fmt_real(session.cfg.figure1.delta)).unwrap();
    writeln!(summary, "min_mu_interior = {}", fmt_real(data.min_mu_interior())).unwrap();
    writeln!(summary, "min_u0 = {}", fmt_real(data.u0.min())).unwrap();
    for c in &data.curves {
        let tag = theta_tag(c.theta);
        csvio::save_grid_function(&dir.join(format!("mu_theta{tag}.csv")), &c.mu_perturbed)?;
        csvio::save_grid_function(&dir.join(format!("u0_theta{tag}.csv")), &c.u0_perturbed)?;
        writeln!(summary, "max_deviation[theta={tag}] = {}", fmt_real(c.max_deviation)).unwrap();
    }
    let script = gnuplot_script(&data);
    std::fs::write(dir.join("figure1.gp"), script).map_err(|e| crate::error::CliError::io(dir.join("figure1.gp"), e))?;
    std::fs::write(dir.join("deviation.txt"), &summary).map_err(|e| crate::error::CliError::io(dir.join("deviation.txt"), e))?;
    Ok(Outcome::ok(summary))
}

fn gnuplot_script(data: &FigureData) -> String {
    let mut s = String::new();
    let rows = data.curves.len().max(1);
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set terminal pngcairo size 900,{}", 420 * rows).unwrap();
    writeln!(s, "set output 'figure1.png'").unwrap();
    writeln!(s, "set key outside right").unwrap();
    writeln!(s, "set xlabel 'x'").unwrap();
    writeln!(s, "set multiplot layout {rows},1").unwrap();
    for c in &data.curves {
        let tag = theta_tag(c.theta);
        writeln!(s, "set title 'theta = {tag}'").unwrap();
        writeln!(
            s,
            "plot 'mu.csv' using 1:2 skip 1 with lines title 'mu', \\\n     \
             'mu_theta{tag}.csv' using 1:2 skip 1 with lines title 'mu perturbed', \\\n     \
             'u0.csv' using 1:2 skip 1 with lines title 'u(x,0)', \\\n     \
             'u0_theta{tag}.csv' using 1:2 skip 1 with lines title 'u(x,0) perturbed'"
        )
        .unwrap();
    }
    writeln!(s, "unset multiplot").unwrap();
    s
}

/// Crank-Nicolson reference run: solution at the output instants and the
/// weighted average of the full run.
pub fn oracle(session: &Session, xi: &Path, phi: Option<&Path>, out: &Path, average_out: &Path) -> CliResult<Outcome> {
    session.ws.validate().into_result()?;
    let xi = csvio::read_grid_function(xi, session.op.grid())?;
    let src = session.read_source(phi)?;
    let times = session.output_times();
    let cfg = StepperConfig::new(session.horizon(), session.cfg.run.n_steps)
        .resolving(&session.ws)
        .with_breakpoints(&times);
    let field = step_evolution(&session.op, &xi, src.as_ref(), &cfg)?;
    let avg = time_average(&field, &session.ws)?;
    csvio::save_space_time(out, &field.restrict_to(&times)?, "u")?;
    csvio::save_grid_function(average_out, &avg)?;
    Ok(Outcome::ok(format!(
        "steps = {}\naverage_norm = {}\n",
        field.n_times() - 1,
        fmt_real(avg.norm_l2())
    )))
}

/// Registered strategies.
pub fn list() -> Outcome {
    let mut s = String::from("eigensolvers:\n");
    let solvers = EigenSolverRegistry::with_defaults();
    s.push_str("  auto (analytic for constant coefficients, tridiagonal otherwise)\n");
    for name in solvers.names() {
        let desc = solvers.get(name).map(|x| x.description()).unwrap_or("");
        writeln!(s, "  {name} ({desc})").unwrap();
    }
    s.push_str("propagators:\n");
    for (name, desc) in PropagatorRegistry::with_defaults().describe() {
        writeln!(s, "  {name} ({desc})").unwrap();
    }
    Outcome::ok(s)
}

mod args;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use eigbound::manifold::{
    assemble_laplacian, build_circle, build_flat_torus, build_icosphere, build_interval,
    first_nontrivial_eigenvalue, load_mesh_off, oscillation_quotient_max, EigenConfig, Manifold,
    QArgmax, QOptions,
};
use eigbound::model::{PslProblem, SlProblem};
use eigbound::numfmt;
use eigbound::report::{
    resolve_model, sweep, verify_bound_with, write_sweep_csv, Overrides, SweepParam, SweepSpec,
    VerifyOptions,
};
use eigbound::sl::{mu_with, FdConfig, Method, MuOptions, ShootingConfig};
use eigbound::{solve_mu_p, Error};

use args::{Cli, Command, Format, ManifoldArgs, ManifoldKind, MethodArg, Solver, VaryArg};
use output::{csv_text, emit, num, opt, table};

#[derive(Debug)]
pub enum CliError {
    /// Rejected input; exit code 2.
    Validation { flag: &'static str, message: String },
    /// Failure while computing or writing; exit code 1.
    Solver(String),
}

impl CliError {
    fn invalid(flag: &'static str, message: impl Into<String>) -> Self {
        CliError::Validation {
            flag,
            message: message.into(),
        }
    }
}

/// Flag responsible for a validation error raised by the library.
fn flag_for(error: &Error) -> &'static str {
    match error {
        Error::NonPositiveDiameter(_) | Error::DiameterExceedsMyersRange { .. } => "--diameter",
        Error::DimensionBelowOne(_) => "--n",
        Error::ExponentNotAboveOne(_) | Error::ExponentOutOfSupportedRange { .. } => "--p",
        Error::NonFiniteParameter("kappa") => "--kappa",
        Error::NonFiniteParameter("p") => "--p",
        Error::NonFiniteParameter(_) => "--diameter",
        Error::InvalidConfig(_) => "--tol",
        Error::MissingCurvatureData("n") => "--n",
        Error::MissingCurvatureData(_) => "--kappa",
        Error::InvalidSweep(_) => "--steps",
        Error::SweepRow { .. } => "--from/--to",
        _ => "--mesh",
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            CliError::Validation {
                flag: flag_for(&e),
                message: e.to_string(),
            }
        } else {
            CliError::Solver(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn dimension(n: i64) -> CliResult<u32> {
    u32::try_from(n)
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::DimensionBelowOne(n).into())
}

fn mu_options(solver: &Solver) -> MuOptions {
    MuOptions {
        method: match solver.method {
            MethodArg::Shooting => Method::Shooting,
            MethodArg::Fd => Method::FiniteDifference,
            MethodArg::Auto => Method::Auto,
        },
        shooting: ShootingConfig::with_tolerance(solver.tol),
        fd: FdConfig::default(),
    }
}

#[derive(Serialize)]
struct MuRecord {
    n: u32,
    #[serde(serialize_with = "numfmt::serialize")]
    kappa: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    diameter: f64,
    #[serde(serialize_with = "numfmt::serialize_opt")]
    p: Option<f64>,
    #[serde(serialize_with = "numfmt::serialize")]
    mu: f64,
    method: eigbound::SolveMethod,
    #[serde(serialize_with = "numfmt::serialize")]
    tolerance_achieved: f64,
}

fn method_name(m: eigbound::SolveMethod) -> &'static str {
    match m {
        eigbound::SolveMethod::Shooting => "shooting",
        eigbound::SolveMethod::FiniteDifference => "finite_difference",
    }
}

fn render_mu(record: &MuRecord, format: Format) -> CliResult<String> {
    Ok(match format {
        Format::Json => to_json(record),
        Format::Csv => csv_text(
            &["n", "kappa", "diameter", "p", "mu", "method", "tolerance_achieved"],
            &[vec![
                record.n.to_string(),
                num(record.kappa),
                num(record.diameter),
                opt(record.p),
                num(record.mu),
                method_name(record.method).into(),
                num(record.tolerance_achieved),
            ]],
        )?,
        Format::Human => {
            let name = match record.p {
                Some(p) => format!("mu_p(n={}, kappa={}, D={}, p={p})", record.n, record.kappa, record.diameter),
                None => format!("mu(n={}, kappa={}, D={})", record.n, record.kappa, record.diameter),
            };
            format!(
                "{name} = {:.12}\n{}",
                record.mu,
                table(&[
                    ("method", method_name(record.method).into()),
                    ("error estimate", format!("{:.3e}", record.tolerance_achieved)),
                ])
            )
        }
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

fn run_mu(a: &args::MuArgs) -> CliResult<()> {
    let problem = SlProblem::new(dimension(a.n)?, a.kappa, a.diameter)?;
    let solution = mu_with(&problem, &mu_options(&a.solver))?;
    let record = MuRecord {
        n: problem.n,
        kappa: problem.kappa,
        diameter: problem.diameter,
        p: None,
        mu: solution.mu,
        method: solution.method,
        tolerance_achieved: solution.tolerance_achieved,
    };
    emit(&a.output, &render_mu(&record, a.output.format())?)
}

fn run_mu_p(a: &args::MuPArgs) -> CliResult<()> {
    let problem = PslProblem::new(dimension(a.n)?, a.kappa, a.diameter, a.p)?;
    let solution = solve_mu_p(&problem, &ShootingConfig::with_tolerance(a.tol))?;
    let record = MuRecord {
        n: problem.base.n,
        kappa: problem.base.kappa,
        diameter: problem.base.diameter,
        p: Some(a.p),
        mu: solution.mu,
        method: solution.method,
        tolerance_achieved: solution.tolerance_achieved,
    };
    emit(&a.output, &render_mu(&record, a.output.format())?)
}

fn build_manifold(m: &ManifoldArgs) -> CliResult<Manifold> {
    use std::f64::consts::PI;
    let grid = |default: usize| -> CliResult<usize> {
        let g = m.grid.unwrap_or(default);
        if g < 8 {
            return Err(CliError::invalid("--grid", format!("needs at least 8 nodes or cells, got {g}")));
        }
        Ok(g)
    };
    let built = match m.manifold {
        ManifoldKind::Circle => build_circle(m.length.unwrap_or(2.0 * PI), grid(1000)?)?.into(),
        ManifoldKind::Interval => build_interval(m.length.unwrap_or(1.0), grid(1000)?)?.into(),
        ManifoldKind::Torus => {
            let (a, b) = (m.a.unwrap_or(2.0 * PI), m.b.unwrap_or(PI));
            let nx = grid(64)?;
            let ny = ((nx as f64 * b / a).round() as usize).max(4);
            build_flat_torus(a, b, nx, ny)?.into()
        }
        ManifoldKind::Icosphere => {
            let subdiv = m.subdiv.unwrap_or(4);
            if subdiv > 7 {
                return Err(CliError::invalid("--subdiv", format!("must be at most 7, got {subdiv}")));
            }
            build_icosphere(m.radius.unwrap_or(1.0), subdiv)?.into()
        }
        ManifoldKind::OffFile => {
            let path = m
                .mesh
                .as_ref()
                .ok_or_else(|| CliError::invalid("--mesh", "--manifold off-file requires --mesh <path>"))?;
            load_mesh_off(path).map_err(|e| match e {
                Error::Io(msg) => CliError::invalid("--mesh", format!("cannot read {}: {msg}", path.display())),
                other => CliError::invalid("--mesh", other.to_string()),
            })?
            .into()
        }
    };
    Ok(built)
}

fn overrides(m: &ManifoldArgs) -> CliResult<Overrides> {
    Ok(Overrides {
        n: m.n.map(dimension).transpose()?,
        kappa: m.kappa,
        diameter: m.diameter,
    })
}

fn run_verify(a: &args::VerifyArgs) -> CliResult<()> {
    let manifold = build_manifold(&a.manifold)?;
    let options = VerifyOptions {
        slack: a.slack,
        p: a.p,
        eigen: EigenConfig {
            tol: a.solver.tol,
            seed: a.manifold.seed,
            ..EigenConfig::default()
        },
        mu: mu_options(&a.solver),
    };
    let report = verify_bound_with(&manifold, &overrides(&a.manifold)?, &options)?;
    let text = match a.output.format() {
        Format::Json => {
            let mut t = report.to_json();
            t.push('\n');
            t
        }
        Format::Csv => {
            let t = &report.solver_tolerances;
            csv_text(
                &[
                    "manifold_name", "n", "kappa", "diameter_used", "diameter_source", "diameter_graph",
                    "lambda_estimate", "lambda_exact", "mu_bound", "p", "margin", "verdict", "slack_used",
                    "mu_tolerance", "mu_error_estimate", "eigen_tolerance", "eigen_residual",
                    "eigen_iterations", "grid_size", "mesh_size", "seed",
                ],
                &[vec![
                    report.manifold_name.clone(),
                    report.n.to_string(),
                    num(report.kappa),
                    num(report.diameter_used),
                    serde_plain(&report.diameter_source),
                    opt(report.diameter_graph),
                    opt(report.lambda_estimate),
                    opt(report.lambda_exact),
                    num(report.mu_bound),
                    opt(report.p),
                    opt(report.margin),
                    report.verdict.as_str().into(),
                    num(report.slack_used),
                    num(t.mu_tolerance),
                    num(t.mu_error_estimate),
                    num(t.eigen_tolerance),
                    opt(t.eigen_residual),
                    t.eigen_iterations.map(|i| i.to_string()).unwrap_or_default(),
                    t.grid_size.to_string(),
                    num(t.mesh_size),
                    t.seed.to_string(),
                ]],
            )?
        }
        Format::Human => {
            let mut rows = vec![
                ("n", report.n.to_string()),
                ("kappa", report.kappa.to_string()),
                ("diameter", format!("{} ({})", report.diameter_used, serde_plain(&report.diameter_source))),
                ("graph diameter", report.diameter_graph.map(|d| format!("{d:.6}")).unwrap_or_default()),
            ];
            if let Some(p) = report.p {
                rows.push(("p", p.to_string()));
            }
            if let Some(l) = report.lambda_estimate {
                rows.push(("lambda_1", format!("{l:.9}")));
            }
            if let Some(l) = report.lambda_exact {
                rows.push(("lambda_1 exact", format!("{l:.9}")));
            }
            rows.push((if report.p.is_some() { "mu_p" } else { "mu" }, format!("{:.9}", report.mu_bound)));
            if let Some(m) = report.margin {
                rows.push(("margin", format!("{m:+.3e}")));
            }
            rows.push(("slack", format!("{:.3e}", report.slack_used)));
            rows.push(("vertices", report.solver_tolerances.grid_size.to_string()));
            format!("{}: {}\n{}", report.manifold_name, report.verdict.as_str(), table(&rows))
        }
    };
    emit(&a.output, &text)
}

fn serde_plain<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn run_sweep(a: &args::SweepArgs) -> CliResult<()> {
    let varying = match a.vary {
        VaryArg::D => SweepParam::Diameter,
        VaryArg::Kappa => SweepParam::Kappa,
        VaryArg::N => SweepParam::N,
        VaryArg::P => SweepParam::P,
    };
    if a.steps < 2 {
        return Err(CliError::invalid("--steps", format!("must be at least 2, got {}", a.steps)));
    }
    let spec = SweepSpec {
        varying,
        from: a.from,
        to: a.to,
        steps: a.steps,
        n: a.n.map(dimension).transpose()?.unwrap_or(2),
        kappa: a.kappa.unwrap_or(0.0),
        diameter: a.diameter.unwrap_or(1.0),
        p: a.p,
    };
    let rows = sweep(&spec, &mu_options(&a.solver))?;
    let text = match a.output.format() {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            String::from_utf8(buf).map_err(|e| CliError::Solver(e.to_string()))?
        }
        Format::Json => to_json(&rows),
        Format::Human => {
            let label = if spec.p.is_some() || varying == SweepParam::P { "mu_p" } else { "mu" };
            let mut t = format!("{:>14}  {:>20}  direction\n", varying.as_str(), label);
            for r in &rows {
                t.push_str(&format!("{:>14.6}  {:>20.12}  {}\n", r.param, r.mu, r.monotone_direction.as_str()));
            }
            t
        }
    };
    emit(&a.output, &text)
}

#[derive(Serialize)]
struct QRecord {
    manifold_name: String,
    n: u32,
    #[serde(serialize_with = "numfmt::serialize")]
    kappa: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    diameter_used: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    lambda_estimate: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    mu: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    distance_scale: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    phi_scale: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    max_q: f64,
    argmax: QArgmax,
    #[serde(serialize_with = "numfmt::serialize")]
    pair_max: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    diagonal_max: f64,
    sources: usize,
    sampled: bool,
    seed: u64,
}

fn run_q(a: &args::QArgs) -> CliResult<()> {
    let manifold = build_manifold(&a.manifold)?;
    let resolved = resolve_model(&manifold, &overrides(&a.manifold)?)?;
    let problem = resolved.problem;
    let lap = assemble_laplacian(&manifold)?;
    let eigen = EigenConfig {
        tol: a.solver.tol,
        seed: a.manifold.seed,
        ..EigenConfig::default()
    };
    let estimate = first_nontrivial_eigenvalue(&lap.stiffness, &lap.mass, &eigen)?;
    let model = mu_with(&problem, &mu_options(&a.solver))?;
    // Graph distances overestimate geodesics; rescale so the longest one fits
    // the model interval.
    let distance_scale = if resolved.diameter_graph > problem.diameter {
        problem.diameter / resolved.diameter_graph
    } else {
        1.0
    };
    let options = QOptions {
        seed: a.manifold.seed,
        distance_scale,
        ..QOptions::default()
    };
    // Q is homogeneous in phi; fix the scale so that the half-range of phi
    // matches the model amplitude Phi(D/2), which gives max Q = 2 in the
    // equality cases.
    let v = &estimate.eigenvector;
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let amplitude = model.phi_at(model.extent()).unwrap_or(1.0);
    let phi_scale = 2.0 * amplitude / (hi - lo);
    let phi: Vec<f64> = v.iter().map(|x| x * phi_scale).collect();
    let q = oscillation_quotient_max(&manifold, &phi, &model, &options)?;
    let record = QRecord {
        manifold_name: manifold.name().to_string(),
        n: problem.n,
        kappa: problem.kappa,
        diameter_used: problem.diameter,
        lambda_estimate: estimate.lambda1,
        mu: model.mu,
        distance_scale,
        phi_scale,
        max_q: q.max_q,
        argmax: q.argmax,
        pair_max: q.pair_max,
        diagonal_max: q.diagonal_max,
        sources: q.sources,
        sampled: q.sampled,
        seed: q.seed,
    };
    let argmax = match q.argmax {
        QArgmax::Pair { x, y } => format!("pair ({x}, {y})"),
        QArgmax::Diagonal { element } => format!("diagonal (element {element})"),
    };
    let text = match a.output.format() {
        Format::Json => to_json(&record),
        Format::Csv => csv_text(
            &["manifold_name", "n", "kappa", "diameter_used", "lambda_estimate", "mu", "distance_scale",
              "phi_scale", "max_q", "argmax", "pair_max", "diagonal_max", "sources", "sampled", "seed"],
            &[vec![
                record.manifold_name.clone(),
                record.n.to_string(),
                num(record.kappa),
                num(record.diameter_used),
                num(record.lambda_estimate),
                num(record.mu),
                num(record.distance_scale),
                num(record.phi_scale),
                num(record.max_q),
                argmax.clone(),
                num(record.pair_max),
                num(record.diagonal_max),
                record.sources.to_string(),
                record.sampled.to_string(),
                record.seed.to_string(),
            ]],
        )?,
        Format::Human => format!(
            "{}: max Q = {:.9} at {argmax}\n{}",
            record.manifold_name,
            record.max_q,
            table(&[
                ("lambda_1", format!("{:.9}", record.lambda_estimate)),
                ("mu", format!("{:.9}", record.mu)),
                ("pair max", format!("{:.9}", record.pair_max)),
                ("diagonal max", format!("{:.9}", record.diagonal_max)),
                ("distance scale", format!("{:.6}", record.distance_scale)),
                ("sources", format!("{}{}", record.sources, if record.sampled { " (sampled)" } else { "" })),
            ])
        ),
    };
    emit(&a.output, &text)
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Mu(a) => run_mu(a),
        Command::MuP(a) => run_mu_p(a),
        Command::Verify(a) => run_verify(a),
        Command::Sweep(a) => run_sweep(a),
        Command::QDiagnostic(a) => run_q(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation { flag, message }) => {
            eprintln!("error: invalid value for {flag}: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "eigbound",
    version,
    about = "Sharp Neumann eigenvalue lower bounds under a Ricci curvature bound",
    long_about = "Computes the model eigenvalue mu(n, kappa, D) (and its p-Laplacian analogue), \
                  checks lambda_1 >= mu on discretized manifolds and sweeps model parameters.\n\n\
                  Units: lengths (diameter, radius, a, b, length) share one arbitrary length unit L; \
                  kappa is in 1/L^2; eigenvalues, mu and slack are in 1/L^2 (1/L^p for mu_p)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First eigenvalue mu(n, kappa, D) of the linear model problem.
    Mu(MuArgs),
    /// First eigenvalue mu_p(n, kappa, D) of the p-Laplacian model problem.
    #[command(name = "mu-p")]
    MuP(MuPArgs),
    /// Check lambda_1 >= mu on a discretized manifold.
    Verify(VerifyArgs),
    /// Tabulate mu (or mu_p) over one varying parameter.
    Sweep(SweepArgs),
    /// Maximum of the oscillation quotient of the first eigenfunction.
    #[command(name = "q-diagnostic")]
    QDiagnostic(QArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Shooting,
    Fd,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ManifoldKind {
    Circle,
    Interval,
    Torus,
    Icosphere,
    #[value(name = "off-file")]
    OffFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VaryArg {
    #[value(name = "D")]
    D,
    Kappa,
    N,
    P,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive finite number, got {s}"))
    }
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite, got {s}"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output format [json | csv | human] (default human, or taken from a
    /// .json/.csv extension of --out)
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write output to this file instead of stdout [path]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Output {
    pub fn format(&self) -> Format {
        if let Some(f) = self.format {
            return f;
        }
        let ext = self
            .out
            .as_ref()
            .and_then(|p| p.extension())
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            _ => Format::Human,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Solver {
    /// Relative tolerance for mu and the mesh eigensolver residual [dimensionless]
    #[arg(long, default_value = "1e-8", value_parser = positive, allow_negative_numbers = true)]
    pub tol: f64,
    /// Model solver [shooting | fd | auto]
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
}

#[derive(Debug, Clone, Args)]
pub struct MuArgs {
    /// Dimension n >= 1 [integer]
    #[arg(long, allow_negative_numbers = true)]
    pub n: i64,
    /// Ricci lower bound constant: Ric >= (n-1) kappa [1/length^2]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Diameter D > 0, at most pi/sqrt(kappa) when kappa > 0 [length]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub diameter: f64,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct MuPArgs {
    /// Dimension n >= 1 [integer]
    #[arg(long, allow_negative_numbers = true)]
    pub n: i64,
    /// Ricci lower bound constant: Ric >= (n-1) kappa [1/length^2]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Diameter D > 0, at most pi/sqrt(kappa) when kappa > 0 [length]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub diameter: f64,
    /// p-Laplacian exponent, supported range [1.1, 10] [dimensionless]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub p: f64,
    /// Relative tolerance for mu_p [dimensionless]
    #[arg(long, default_value = "1e-8", value_parser = positive, allow_negative_numbers = true)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct ManifoldArgs {
    /// Manifold family [circle | interval | torus | icosphere | off-file]
    #[arg(long, value_enum)]
    pub manifold: ManifoldKind,
    /// Icosphere radius (default 1) [length]
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// Icosphere subdivision level, 0 to 7 (default 4) [count]
    #[arg(long)]
    pub subdiv: Option<u32>,
    /// Torus period along x (default 2 pi) [length]
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Torus period along y (default pi) [length]
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Circle circumference (default 2 pi) or interval length (default 1) [length]
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    pub length: Option<f64>,
    /// Nodes of a circle/interval (default 1000) or torus cells along a (default 64) [count]
    #[arg(long)]
    pub grid: Option<usize>,
    /// Triangle mesh in OFF format, for --manifold off-file [path]
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Override the dimension n [integer]
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,
    /// Override the curvature constant kappa [1/length^2]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Override the diameter used for the bound [length]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub diameter: Option<f64>,
    /// Seed of the eigensolver start vector and of pair sampling [integer]
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    /// Compute only the p-Laplacian model bound mu_p [dimensionless]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Tolerance band around lambda - mu for the verdict (default max(0.05 mu, 3 (tol + h^2 lambda))) [1/length^2]
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    pub slack: Option<f64>,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Parameter to vary [D | kappa | n | p]
    #[arg(long, value_enum)]
    pub vary: VaryArg,
    /// First value of the varying parameter [unit of that parameter]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub from: f64,
    /// Last value of the varying parameter [unit of that parameter]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub to: f64,
    /// Number of rows, at least 2 [count]
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    /// Dimension n, fixed unless varied (default 2) [integer]
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,
    /// Curvature constant, fixed unless varied (default 0) [1/length^2]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Diameter, fixed unless varied (default 1) [length]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub diameter: Option<f64>,
    /// p-Laplacian exponent; when set (or varied) rows hold mu_p [dimensionless]
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct QArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[command(flatten)]
    pub solver: Solver,
    #[command(flatten)]
    pub output: Output,
}

//! End-to-end checks of `lambda >= mu` on discretized manifolds, and
//! parameter sweeps of the model eigenvalues.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::manifold::{
    assemble_laplacian, first_nontrivial_eigenvalue, graph_diameter, EigenConfig, Manifold,
};
use crate::model::{myers_diameter, PslProblem, SlProblem};
use crate::numfmt::{self, format_f64};
use crate::plap::solve_mu_p;
use crate::sl::{mu_with, MuOptions, ShootingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiameterSource {
    /// Known exactly (manifold metadata or a user override).
    Analytic,
    /// Edge-path diameter of the mesh.
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Sharp,
    ViolatedWithinTolerance,
    Violated,
    /// Only the model bound was computed (p-Laplacian runs).
    ModelOnly,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Sharp => "sharp",
            Verdict::ViolatedWithinTolerance => "violated_within_tolerance",
            Verdict::Violated => "violated",
            Verdict::ModelOnly => "model_only",
        }
    }
}

/// Verdict for a margin `lambda - mu` and slack: `sharp` when
/// `|margin| <= slack`, `holds` above, `violated` below.
///
/// `ViolatedWithinTolerance` is never produced by this partition; it is kept
/// in the schema for consumers that widen the sharp band.
pub fn classify(margin: f64, slack: f64) -> Verdict {
    if margin.abs() <= slack {
        Verdict::Sharp
    } else if margin > slack {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

/// `max(0.05 mu, 3 (solver_tol + h^2 lambda))`.
pub fn default_slack(mu: f64, solver_tol: f64, mesh_size: f64, lambda: f64) -> f64 {
    (0.05 * mu).max(3.0 * (solver_tol + mesh_size * mesh_size * lambda.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTolerances {
    #[serde(serialize_with = "numfmt::serialize")]
    pub mu_tolerance: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub mu_error_estimate: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub eigen_tolerance: f64,
    #[serde(serialize_with = "numfmt::serialize_opt")]
    pub eigen_residual: Option<f64>,
    pub eigen_iterations: Option<usize>,
    pub grid_size: usize,
    #[serde(serialize_with = "numfmt::serialize")]
    pub mesh_size: f64,
    pub seed: u64,
}

/// One verification record pairing a manifold eigenvalue with its model bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub manifold_name: String,
    pub n: u32,
    #[serde(serialize_with = "numfmt::serialize")]
    pub kappa: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub diameter_used: f64,
    pub diameter_source: DiameterSource,
    /// Edge-path diameter, reported next to the one used.
    #[serde(serialize_with = "numfmt::serialize_opt")]
    pub diameter_graph: Option<f64>,
    #[serde(
        serialize_with = "numfmt::serialize_opt",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub lambda_estimate: Option<f64>,
    #[serde(
        serialize_with = "numfmt::serialize_opt",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub lambda_exact: Option<f64>,
    #[serde(serialize_with = "numfmt::serialize")]
    pub mu_bound: f64,
    #[serde(serialize_with = "numfmt::serialize_opt")]
    pub p: Option<f64>,
    #[serde(
        serialize_with = "numfmt::serialize_opt",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub margin: Option<f64>,
    pub verdict: Verdict,
    #[serde(serialize_with = "numfmt::serialize")]
    pub slack_used: f64,
    pub solver_tolerances: SolverTolerances,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Recomputes the verdict from the stored margin and slack.
    pub fn recomputed_verdict(&self) -> Verdict {
        match self.margin {
            Some(m) => classify(m, self.slack_used),
            None => Verdict::ModelOnly,
        }
    }
}

/// User-supplied replacements for the manifold metadata.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub n: Option<u32>,
    pub kappa: Option<f64>,
    pub diameter: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// `None` selects [`default_slack`].
    pub slack: Option<f64>,
    /// Exponent for a p-Laplacian run; only the model side is computed.
    pub p: Option<f64>,
    pub eigen: EigenConfig,
    pub mu: MuOptions,
}

/// Verifies `lambda_1 >= mu(n, kappa, D)` on `manifold` with a fixed slack.
pub fn verify_bound(manifold: &Manifold, overrides: &Overrides, slack: f64) -> Result<BoundReport> {
    verify_bound_with(
        manifold,
        overrides,
        &VerifyOptions {
            slack: Some(slack),
            ..VerifyOptions::default()
        },
    )
}

/// Model parameters attached to a manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedModel {
    pub problem: SlProblem,
    pub diameter_source: DiameterSource,
    pub diameter_graph: f64,
}

/// Picks `(n, kappa, D)` for `manifold`: overrides first, then metadata.
///
/// The diameter is the override, else the analytic one from the metadata,
/// else the edge-path diameter (capped at `pi / sqrt(kappa)` when
/// `kappa > 0`). Since `mu` decreases in `D`, the overestimating graph
/// diameter still yields a valid, weaker bound.
pub fn resolve_model(manifold: &Manifold, overrides: &Overrides) -> Result<ResolvedModel> {
    let metadata = manifold.metadata();
    let n = overrides
        .n
        .or(metadata.map(|m| m.n))
        .ok_or(Error::MissingCurvatureData("n"))?;
    let kappa = overrides
        .kappa
        .or(metadata.map(|m| m.kappa_lower))
        .ok_or(Error::MissingCurvatureData("kappa"))?;
    manifold.validate()?;

    let diameter_graph = graph_diameter(manifold);
    let (diameter, diameter_source) = match overrides.diameter.or(metadata.map(|m| m.diameter)) {
        Some(d) => (d, DiameterSource::Analytic),
        None => (diameter_graph.min(myers_diameter(kappa)), DiameterSource::Graph),
    };
    Ok(ResolvedModel {
        problem: SlProblem::new(n, kappa, diameter)?,
        diameter_source,
        diameter_graph,
    })
}

/// Verifies the comparison on `manifold`, resolving the model parameters
/// with [`resolve_model`].
pub fn verify_bound_with(
    manifold: &Manifold,
    overrides: &Overrides,
    options: &VerifyOptions,
) -> Result<BoundReport> {
    if let Some(s) = options.slack {
        if !(s > 0.0) {
            return Err(Error::InvalidConfig(format!("slack must be positive, got {s}")));
        }
    }
    let ResolvedModel {
        problem,
        diameter_source,
        diameter_graph,
    } = resolve_model(manifold, overrides)?;
    let SlProblem {
        n,
        kappa,
        diameter: diameter_used,
    } = problem;
    let metadata = manifold.metadata();
    let mesh_size = manifold.mesh_size();

    if let Some(p) = options.p {
        let problem = PslProblem {
            base: problem,
            p,
        };
        problem.validate()?;
        let solution = solve_mu_p(&problem, &options.mu.shooting)?;
        let slack = options.slack.unwrap_or_else(|| {
            default_slack(solution.mu, solution.tolerance_achieved, 0.0, 0.0)
        });
        return Ok(BoundReport {
            manifold_name: manifold.name().to_string(),
            n,
            kappa,
            diameter_used,
            diameter_source,
            diameter_graph: Some(diameter_graph),
            lambda_estimate: None,
            lambda_exact: None,
            mu_bound: solution.mu,
            p: Some(p),
            margin: None,
            verdict: Verdict::ModelOnly,
            slack_used: slack,
            solver_tolerances: SolverTolerances {
                mu_tolerance: options.mu.shooting.mu_tolerance,
                mu_error_estimate: solution.tolerance_achieved,
                eigen_tolerance: options.eigen.tol,
                eigen_residual: None,
                eigen_iterations: None,
                grid_size: manifold.vertex_count(),
                mesh_size,
                seed: options.eigen.seed,
            },
        });
    }

    let lap = assemble_laplacian(manifold)?;
    let spectrum = first_nontrivial_eigenvalue(&lap.stiffness, &lap.mass, &options.eigen)?;
    let model = mu_with(&problem, &options.mu)?;
    let lambda = spectrum.lambda1;
    let margin = lambda - model.mu;
    let slack = options.slack.unwrap_or_else(|| {
        default_slack(model.mu, spectrum.residual + model.tolerance_achieved, mesh_size, lambda)
    });
    Ok(BoundReport {
        manifold_name: manifold.name().to_string(),
        n,
        kappa,
        diameter_used,
        diameter_source,
        diameter_graph: Some(diameter_graph),
        lambda_estimate: Some(lambda),
        lambda_exact: metadata.and_then(|m| m.lambda1_exact),
        mu_bound: model.mu,
        p: None,
        margin: Some(margin),
        verdict: classify(margin, slack),
        slack_used: slack,
        solver_tolerances: SolverTolerances {
            mu_tolerance: options.mu.shooting.mu_tolerance,
            mu_error_estimate: model.tolerance_achieved,
            eigen_tolerance: options.eigen.tol,
            eigen_residual: Some(spectrum.residual),
            eigen_iterations: Some(spectrum.iterations),
            grid_size: spectrum.grid_size,
            mesh_size,
            seed: options.eigen.seed,
        },
    })
}

// ---------------------------------------------------------------------------
// Sweeps

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "D")]
    Diameter,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "n")]
    N,
    #[serde(rename = "p")]
    P,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Diameter => "D",
            SweepParam::Kappa => "kappa",
            SweepParam::N => "n",
            SweepParam::P => "p",
        }
    }
}

/// A one-parameter sweep of `mu` (or `mu_p` when `p` is set or varied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub varying: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub n: u32,
    pub kappa: f64,
    pub diameter: f64,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Start,
    Increasing,
    Decreasing,
    Constant,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Start => "start",
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(serialize_with = "numfmt::serialize")]
    pub param: f64,
    #[serde(serialize_with = "numfmt::serialize")]
    pub mu: f64,
    pub monotone_direction: Direction,
}

/// Relative change below which consecutive rows count as constant.
const CONSTANT_TOLERANCE: f64 = 1e-9;

impl SweepSpec {
    /// Parameter values of the sweep, in order.
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.steps < 2 {
            return Err(Error::InvalidSweep(format!("steps must be at least 2, got {}", self.steps)));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(Error::InvalidSweep("sweep bounds must be finite".into()));
        }
        let last = (self.steps - 1) as f64;
        let raw = (0..self.steps).map(|i| {
            if i + 1 == self.steps {
                self.to
            } else {
                self.from + (self.to - self.from) * i as f64 / last
            }
        });
        Ok(match self.varying {
            SweepParam::N => raw.map(f64::round).collect(),
            _ => raw.collect(),
        })
    }

    fn point(&self, value: f64) -> Result<(SlProblem, Option<f64>)> {
        let (mut n, mut kappa, mut diameter, mut p) = (self.n, self.kappa, self.diameter, self.p);
        match self.varying {
            SweepParam::Diameter => diameter = value,
            SweepParam::Kappa => kappa = value,
            SweepParam::N => {
                if value < 1.0 {
                    return Err(Error::DimensionBelowOne(value as i64));
                }
                n = value as u32;
            }
            SweepParam::P => p = Some(value),
        }
        let base = SlProblem::new(n, kappa, diameter)?;
        if let Some(p) = p {
            PslProblem { base, p }.validate()?;
        }
        Ok((base, p))
    }
}

fn tag(row: usize, spec: &SweepSpec, value: f64) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::SweepRow {
        row,
        param: spec.varying.as_str(),
        value,
        source: Box::new(e),
    }
}

/// Evaluates the sweep. Every point is validated before any solve; rows are
/// computed in parallel but returned in parameter order.
pub fn sweep(spec: &SweepSpec, options: &MuOptions) -> Result<Vec<SweepRow>> {
    let values = spec.values()?;
    let points = values
        .iter()
        .enumerate()
        .map(|(i, &v)| spec.point(v).map_err(tag(i, spec, v)))
        .collect::<Result<Vec<_>>>()?;

    let mus = points
        .par_iter()
        .enumerate()
        .map(|(i, (base, p))| {
            let result = match p {
                Some(p) => solve_mu_p(&PslProblem { base: *base, p: *p }, &options.shooting),
                None => mu_with(base, options),
            };
            result.map(|s| s.mu).map_err(tag(i, spec, values[i]))
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(values
        .iter()
        .zip(&mus)
        .enumerate()
        .map(|(i, (&param, &mu))| {
            let monotone_direction = if i == 0 {
                Direction::Start
            } else {
                let prev = mus[i - 1];
                let change = mu - prev;
                if change.abs() <= CONSTANT_TOLERANCE * mu.abs().max(prev.abs()) {
                    Direction::Constant
                } else if change > 0.0 {
                    Direction::Increasing
                } else {
                    Direction::Decreasing
                }
            };
            SweepRow {
                param,
                mu,
                monotone_direction,
            }
        })
        .collect())
}

/// Writes sweep rows as CSV with header `param,mu,monotone_direction`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["param", "mu", "monotone_direction"]).map_err(io)?;
    for row in rows {
        w.write_record([
            format_f64(row.param),
            format_f64(row.mu),
            row.monotone_direction.as_str().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Default shooting settings for sweeps at a caller tolerance.
pub fn sweep_options(tol: f64) -> MuOptions {
    MuOptions {
        shooting: ShootingConfig::with_tolerance(tol),
        ..MuOptions::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_partition() {
        assert_eq!(classify(0.2, 0.05), Verdict::Holds);
        assert_eq!(classify(0.05, 0.05), Verdict::Sharp);
        assert_eq!(classify(-0.01, 0.05), Verdict::Sharp);
        assert_eq!(classify(-0.06, 0.05), Verdict::Violated);
    }

    #[test]
    fn default_slack_floor() {
        assert_eq!(default_slack(2.0, 0.0, 0.0, 2.0), 0.1);
        assert!((default_slack(1.0, 0.1, 0.1, 1.0) - 0.33).abs() < 1e-12);
    }

    #[test]
    fn sweep_values_and_validation() {
        let spec = SweepSpec {
            varying: SweepParam::N,
            from: 1.0,
            to: 6.0,
            steps: 6,
            n: 2,
            kappa: 0.0,
            diameter: 1.0,
            p: None,
        };
        assert_eq!(spec.values().unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let bad = SweepSpec { steps: 1, ..spec };
        assert!(matches!(bad.values(), Err(Error::InvalidSweep(_))));
        let out_of_range = SweepSpec {
            varying: SweepParam::Diameter,
            from: 1.0,
            to: 4.0,
            steps: 4,
            kappa: 1.0,
            ..spec
        };
        match sweep(&out_of_range, &MuOptions::default()) {
            Err(Error::SweepRow { row: 3, source, .. }) => {
                assert!(matches!(*source, Error::DiameterExceedsMyersRange { .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_curvature_data() {
        let mesh = crate::manifold::parse_off(
            "OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n".as_bytes(),
        )
        .unwrap();
        let m: Manifold = mesh.into();
        assert!(matches!(
            verify_bound(&m, &Overrides::default(), 0.1),
            Err(Error::MissingCurvatureData("n"))
        ));
        let o = Overrides {
            n: Some(2),
            ..Overrides::default()
        };
        assert!(matches!(
            verify_bound(&m, &o, 0.1),
            Err(Error::MissingCurvatureData("kappa"))
        ));
    }
}

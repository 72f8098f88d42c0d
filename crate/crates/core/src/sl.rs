//! First eigenvalue `mu(n, kappa, D)` of the linear model problem.
//!
//! Two independent routes are provided:
//!
//! * shooting on the half interval `[0, D/2]` from `phi(0) = 0, phi'(0) = 1`
//!   with fixed-step RK4 and bisection on the sign of `phi'(D/2)`;
//! * a conservative cell-centred finite-volume scheme on the full interval,
//!   symmetrized to a tridiagonal matrix whose second eigenvalue is found by
//!   Sturm bisection (optionally Richardson extrapolated).
//!
//! The weight `c_kappa^(n-1)` is even, so the first non-constant eigenfunction
//! is odd and the half-interval reduction is exact.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{ModelEigenSolution, SlProblem, SolveMethod};
use crate::tridiag::SymTridiagonal;

/// Settings for the RK4 shooting solvers (linear and p-Laplacian).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    /// RK4 steps on `[0, D/2]` for the first (coarsest) level.
    pub ode_steps: usize,
    /// Relative bisection width and step-halving convergence threshold,
    /// measured against `1 + mu`.
    pub mu_tolerance: f64,
    pub max_bisections: usize,
    /// Step-halving stops with an error beyond this many steps.
    pub max_ode_steps: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            ode_steps: 64,
            mu_tolerance: 1e-11,
            max_bisections: 200,
            max_ode_steps: 1 << 17,
        }
    }
}

impl ShootingConfig {
    pub fn with_tolerance(mu_tolerance: f64) -> Self {
        Self {
            mu_tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ode_steps < 64 {
            return Err(Error::InvalidConfig(format!(
                "ode_steps must be at least 64, got {}",
                self.ode_steps
            )));
        }
        if !(self.mu_tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mu_tolerance must be positive, got {}",
                self.mu_tolerance
            )));
        }
        if self.max_ode_steps < self.ode_steps {
            return Err(Error::InvalidConfig(
                "max_ode_steps is below ode_steps".to_string(),
            ));
        }
        Ok(())
    }
}

/// Settings for the finite-difference route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    /// Cells on `[-D/2, D/2]` (rounded up to an even count).
    pub grid_points: usize,
    /// Extrapolate from `grid_points` and `2 grid_points` assuming `O(h^2)` error.
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            grid_points: 2048,
            richardson: true,
        }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 32 {
            return Err(Error::InvalidConfig(format!(
                "grid_points must be at least 32, got {}",
                self.grid_points
            )));
        }
        Ok(())
    }
}

/// Which route [`mu_with`] takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Shooting when the end weight allows it, cross-checked by finite
    /// differences; finite differences alone otherwise.
    #[default]
    Auto,
    Shooting,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MuOptions {
    pub method: Method,
    pub shooting: ShootingConfig,
    pub fd: FdConfig,
}

// ---------------------------------------------------------------------------
// Shooting

#[derive(Debug, Clone, Copy)]
struct State {
    phi: f64,
    dphi: f64,
}

#[inline]
fn rhs(problem: &SlProblem, mu: f64, s: f64, y: State) -> State {
    State {
        phi: y.dphi,
        dphi: -problem.damping(s) * y.dphi - mu * y.phi,
    }
}

#[inline]
fn rk4_step(problem: &SlProblem, mu: f64, s: f64, h: f64, y: State) -> State {
    let axpy = |y: State, k: State, a: f64| State {
        phi: y.phi + a * k.phi,
        dphi: y.dphi + a * k.dphi,
    };
    let k1 = rhs(problem, mu, s, y);
    let k2 = rhs(problem, mu, s + 0.5 * h, axpy(y, k1, 0.5 * h));
    let k3 = rhs(problem, mu, s + 0.5 * h, axpy(y, k2, 0.5 * h));
    let k4 = rhs(problem, mu, s + h, axpy(y, k3, h));
    State {
        phi: y.phi + h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi),
        dphi: y.dphi + h / 6.0 * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi),
    }
}

/// `true` when `mu` lies below the first eigenvalue on the `steps` grid,
/// i.e. `phi'` stays positive on the whole half interval.
fn is_below(problem: &SlProblem, mu: f64, steps: usize) -> bool {
    let h = problem.half_diameter() / steps as f64;
    let mut y = State { phi: 0.0, dphi: 1.0 };
    for k in 0..steps {
        y = rk4_step(problem, mu, k as f64 * h, h, y);
        if !(y.dphi > 0.0) {
            return false;
        }
    }
    true
}

fn integrate_profile(problem: &SlProblem, mu: f64, steps: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = problem.half_diameter() / steps as f64;
    let mut grid = Vec::with_capacity(steps + 1);
    let mut phi = Vec::with_capacity(steps + 1);
    let mut dphi = Vec::with_capacity(steps + 1);
    let mut y = State { phi: 0.0, dphi: 1.0 };
    grid.push(0.0);
    phi.push(0.0);
    dphi.push(1.0);
    for k in 0..steps {
        y = rk4_step(problem, mu, k as f64 * h, h, y);
        grid.push(if k + 1 == steps {
            problem.half_diameter()
        } else {
            (k + 1) as f64 * h
        });
        phi.push(y.phi);
        dphi.push(y.dphi);
    }
    (grid, phi, dphi)
}

/// Bisects the monotone predicate `below(mu)` inside `[lo, hi]`.
pub(crate) fn bisect<F: Fn(f64) -> bool>(
    below: F,
    mut lo: f64,
    mut hi: f64,
    width: f64,
    max_iter: usize,
) -> f64 {
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= width * (1.0 + mid.abs()) {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Finds `lo < hi` with `below(lo)` and `!below(hi)`, starting from the guesses
/// and growing geometrically.
pub(crate) fn find_bracket<F: Fn(f64) -> bool>(below: F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let mut lo = lo;
    let mut tries = 0;
    while !below(lo) {
        lo *= 0.5;
        tries += 1;
        if tries > 200 || lo == 0.0 {
            return Err(Error::BracketNotFound { last_probe: lo });
        }
    }
    let mut hi = hi.max(lo * 2.0);
    tries = 0;
    while below(hi) {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 200 || !hi.is_finite() {
            return Err(Error::BracketNotFound { last_probe: hi });
        }
    }
    Ok((lo, hi))
}

/// Tries a narrow bracket around a previous estimate before falling back.
pub(crate) fn refine_bracket<F: Fn(f64) -> bool>(below: &F, guess: f64, spread: f64) -> Option<(f64, f64)> {
    let lo = guess * (1.0 - spread);
    let hi = guess * (1.0 + spread);
    (below(lo) && !below(hi)).then_some((lo, hi))
}

/// Shooting bracket for the linear problem: `0.5 pi^2 / D^2` up to
/// `pi^2/D^2 + max(0, (n-1) kappa) + (n-1)|kappa| + 4/D^2`.
fn initial_bracket(problem: &SlProblem) -> (f64, f64) {
    let d2 = problem.diameter * problem.diameter;
    let nm1 = (problem.n - 1) as f64;
    let base = PI * PI / d2;
    let hi = base + (nm1 * problem.kappa).max(0.0) + nm1 * problem.kappa.abs() + 4.0 / d2;
    (0.5 * base, hi)
}

/// `mu(n, kappa, D)` by RK4 shooting on `[0, D/2]` with step halving.
///
/// Returns [`Error::NearSingularWeight`] when `c_kappa(D/2)^(n-1) < 1e-12`;
/// the round-sphere case has to go through [`solve_mu_fd`].
pub fn solve_mu_shooting(problem: &SlProblem, config: &ShootingConfig) -> Result<ModelEigenSolution> {
    problem.validate()?;
    config.validate()?;
    if problem.is_near_singular() {
        return Err(Error::NearSingularWeight {
            weight: problem.end_weight(),
        });
    }
    let width = 0.25 * config.mu_tolerance;
    let (lo0, hi0) = initial_bracket(problem);

    let mut steps = config.ode_steps;
    let mut previous: Option<f64> = None;
    loop {
        let below = |mu: f64| is_below(problem, mu, steps);
        let (lo, hi) = match previous.and_then(|m| refine_bracket(&below, m, 1e-3)) {
            Some(b) => b,
            None => find_bracket(below, lo0, hi0)?,
        };
        let mu = bisect(below, lo, hi, width, config.max_bisections);
        if let Some(prev) = previous {
            let change = (mu - prev).abs();
            if change < config.mu_tolerance * (1.0 + mu) {
                let (grid, phi, dphi) = integrate_profile(problem, mu, steps);
                return Ok(ModelEigenSolution {
                    mu,
                    grid,
                    phi,
                    dphi,
                    method: SolveMethod::Shooting,
                    tolerance_achieved: change + width * (1.0 + mu),
                });
            }
            if steps * 2 > config.max_ode_steps {
                return Err(Error::ShootingNotConverged {
                    max_steps: steps,
                    last_change: change,
                });
            }
        }
        previous = Some(mu);
        steps *= 2;
    }
}

// ---------------------------------------------------------------------------
// Finite differences

/// Full-interval output of the finite-difference route.
#[derive(Debug, Clone, PartialEq)]
pub struct FdDetail {
    pub solution: ModelEigenSolution,
    /// Cell centres on `[-D/2, D/2]` of the finest grid.
    pub centers: Vec<f64>,
    /// Generalized eigenvector on `centers`, normalized to unit maximum.
    pub eigenvector: Vec<f64>,
    /// Smallest eigenvalue of the finest pencil (the constant mode).
    pub null_eigenvalue: f64,
    /// Second eigenvalue on each grid that was solved, coarse to fine.
    pub grid_values: Vec<(usize, f64)>,
}

struct FdSystem {
    matrix: SymTridiagonal,
    mass: Vec<f64>,
    centers: Vec<f64>,
    h: f64,
}

fn assemble_fd(problem: &SlProblem, cells: usize) -> Result<FdSystem> {
    let coef = problem.coefficient();
    let half = problem.half_diameter();
    let h = problem.diameter / cells as f64;
    let centers: Vec<f64> = (0..cells).map(|j| -half + (j as f64 + 0.5) * h).collect();
    let mass: Vec<f64> = centers.iter().map(|&s| coef.weight(problem.n, s)).collect();
    if mass.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::GridTooCoarse);
    }
    // Interior faces only; the boundary faces carry zero flux.
    let faces: Vec<f64> = (1..cells)
        .map(|j| coef.weight(problem.n, -half + j as f64 * h))
        .collect();
    let h2 = h * h;
    let diag: Vec<f64> = (0..cells)
        .map(|j| {
            let left = if j > 0 { faces[j - 1] } else { 0.0 };
            let right = if j + 1 < cells { faces[j] } else { 0.0 };
            (left + right) / (h2 * mass[j])
        })
        .collect();
    let off: Vec<f64> = (0..cells - 1)
        .map(|j| -faces[j] / (h2 * (mass[j] * mass[j + 1]).sqrt()))
        .collect();
    Ok(FdSystem {
        matrix: SymTridiagonal::new(diag, off),
        mass,
        centers,
        h,
    })
}

fn fd_second_eigenvalue(system: &FdSystem) -> Result<(f64, f64)> {
    let (_, top) = system.matrix.gershgorin();
    let null = system.matrix.eigenvalue(0);
    let mu = system.matrix.eigenvalue(1);
    let resolution = 1e3 * f64::EPSILON * top.abs();
    if !(mu - null.max(0.0) > resolution) {
        return Err(Error::GridTooCoarse);
    }
    Ok((mu, null))
}

/// Half-interval profile from the full-interval eigenvector, normalized to
/// `phi(0) = 0`, `phi'(0) = 1`.
fn fd_profile(problem: &SlProblem, system: &FdSystem, v: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = v.len();
    let mid = n / 2;
    let h = system.h;
    let slope0 = (v[mid] - v[mid - 1]) / h;
    let scaled: Vec<f64> = v[mid..].iter().map(|x| x / slope0).collect();
    let m = scaled.len();

    let mut grid = Vec::with_capacity(m + 2);
    let mut phi = Vec::with_capacity(m + 2);
    let mut dphi = Vec::with_capacity(m + 2);
    grid.push(0.0);
    phi.push(0.0);
    dphi.push(1.0);
    for k in 0..m {
        grid.push(system.centers[mid + k]);
        phi.push(scaled[k]);
        let left = if k == 0 { -scaled[0] } else { scaled[k - 1] };
        let d = if k + 1 < m {
            (scaled[k + 1] - left) / (2.0 * h)
        } else {
            // Half of the interior face slope, the boundary face slope being zero.
            0.5 * (scaled[k] - scaled[k - 1]) / h
        };
        dphi.push(d);
    }
    // Quadratic through the last two centres with zero slope at D/2.
    let (last, prev) = (scaled[m - 1], scaled[m - 2]);
    let curvature = (prev - last) / (2.0 * h * h);
    grid.push(problem.half_diameter());
    phi.push(last - curvature * h * h / 4.0);
    dphi.push(0.0);
    (grid, phi, dphi)
}

/// Full-detail finite-difference solve; see [`solve_mu_fd`].
pub fn solve_mu_fd_detailed(problem: &SlProblem, config: &FdConfig) -> Result<FdDetail> {
    problem.validate()?;
    config.validate()?;
    let cells = config.grid_points + config.grid_points % 2;
    let mut grids = vec![cells];
    if config.richardson {
        grids.push(2 * cells);
    }
    let mut grid_values = Vec::with_capacity(grids.len());
    let mut finest = None;
    for &c in &grids {
        let system = assemble_fd(problem, c)?;
        let (mu, null) = fd_second_eigenvalue(&system)?;
        grid_values.push((c, mu));
        finest = Some((system, mu, null));
    }
    let (system, mu_fine, null) = finest.expect("at least one grid");

    let (mu, tolerance) = if config.richardson {
        let coarse = grid_values[0].1;
        ((4.0 * mu_fine - coarse) / 3.0, (mu_fine - coarse).abs() / 3.0)
    } else {
        (mu_fine, mu_fine * system.h * system.h)
    };

    let y = system.matrix.eigenvector(mu_fine);
    let mut v: Vec<f64> = y.iter().zip(&system.mass).map(|(y, m)| y / m.sqrt()).collect();
    let sign = if v[v.len() - 1] < 0.0 { -1.0 } else { 1.0 };
    let vmax = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    v.iter_mut().for_each(|x| *x *= sign / vmax);

    let (grid, phi, dphi) = fd_profile(problem, &system, &v);
    Ok(FdDetail {
        solution: ModelEigenSolution {
            mu,
            grid,
            phi,
            dphi,
            method: SolveMethod::FiniteDifference,
            tolerance_achieved: tolerance,
        },
        centers: system.centers,
        eigenvector: v,
        null_eigenvalue: null,
        grid_values,
    })
}

/// `mu(n, kappa, D)` from the conservative finite-volume scheme.
///
/// Handles the singular end weight of the round sphere (`kappa > 0`,
/// `D = pi / sqrt(kappa)`).
pub fn solve_mu_fd(problem: &SlProblem, config: &FdConfig) -> Result<ModelEigenSolution> {
    solve_mu_fd_detailed(problem, config).map(|d| d.solution)
}

// ---------------------------------------------------------------------------
// Dispatch

/// `mu(n, kappa, D)` with default settings.
pub fn mu(problem: &SlProblem) -> Result<f64> {
    mu_with(problem, &MuOptions::default()).map(|s| s.mu)
}

/// Solves the linear model problem by the requested route.
///
/// In [`Method::Auto`] mode both routes run whenever shooting is applicable
/// and must agree within their combined error estimates; the shooting value is
/// returned. Near-singular problems fall through to finite differences.
pub fn mu_with(problem: &SlProblem, options: &MuOptions) -> Result<ModelEigenSolution> {
    problem.validate()?;
    match options.method {
        Method::Shooting => solve_mu_shooting(problem, &options.shooting),
        Method::FiniteDifference => solve_mu_fd(problem, &options.fd),
        Method::Auto => {
            let fd = solve_mu_fd(problem, &options.fd)?;
            if problem.is_near_singular() {
                return Ok(fd);
            }
            let shot = match solve_mu_shooting(problem, &options.shooting) {
                Ok(s) => s,
                Err(Error::ShootingNotConverged { .. }) => return Ok(fd),
                Err(e) => return Err(e),
            };
            let tolerance = 2.0 * (shot.tolerance_achieved + fd.tolerance_achieved)
                + 1e-9 * shot.mu;
            if (shot.mu - fd.mu).abs() > tolerance {
                return Err(Error::MethodDisagreement {
                    shooting: shot.mu,
                    finite_difference: fd.mu,
                    tolerance,
                });
            }
            Ok(shot)
        }
    }
}

// ---------------------------------------------------------------------------
// Limit identity

fn limit_residual(problem: &SlProblem, mu: f64, h: f64, phi: f64, dphi: f64) -> f64 {
    let ddphi = -problem.damping(h) * dphi - mu * phi;
    ddphi / phi - ((problem.n - 1) as f64 * problem.kappa - mu)
}

/// `phi''(h)/phi(h) - ((n-1) kappa - mu)` at the first interior grid point of
/// a shooting solution, with `phi''` taken from the ODE. Vanishes as `O(h^2)`.
pub fn limit_identity_residual(solution: &ModelEigenSolution, problem: &SlProblem) -> f64 {
    let h = solution.grid[1];
    limit_residual(problem, solution.mu, h, solution.phi[1], solution.dphi[1])
}

/// Same residual at an arbitrary offset `h`, integrating the model ODE from
/// the origin with the eigenvalue `mu`.
pub fn limit_identity_residual_at(problem: &SlProblem, mu: f64, h: f64) -> f64 {
    const SUBSTEPS: usize = 32;
    let dh = h / SUBSTEPS as f64;
    let mut y = State { phi: 0.0, dphi: 1.0 };
    for k in 0..SUBSTEPS {
        y = rk4_step(problem, mu, k as f64 * dh, dh, y);
    }
    limit_residual(problem, mu, h, y.phi, y.dphi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn shooting_flat_closed_form() {
        let p = SlProblem::new(3, 0.0, 2.0).unwrap();
        let s = solve_mu_shooting(&p, &ShootingConfig::default()).unwrap();
        assert_relative_eq!(s.mu, PI * PI / 4.0, max_relative = 1e-9);
        assert_eq!(s.phi[0], 0.0);
        assert_eq!(s.dphi[0], 1.0);
        assert!(s.dphi.last().unwrap().abs() < 1e-6);
        assert!(s.phi[1..].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn shooting_one_dimensional_hyperbolic() {
        let p = SlProblem::new(1, -1.0, 1.3).unwrap();
        let s = solve_mu_shooting(&p, &ShootingConfig::default()).unwrap();
        assert_relative_eq!(s.mu, PI * PI / 1.69, max_relative = 1e-9);
    }

    #[test]
    fn shooting_rejects_sphere_endpoint() {
        let p = SlProblem::new(2, 1.0, PI).unwrap();
        assert!(matches!(
            solve_mu_shooting(&p, &ShootingConfig::default()),
            Err(Error::NearSingularWeight { .. })
        ));
    }

    #[test]
    fn fd_examples() {
        let cfg = FdConfig {
            grid_points: 512,
            richardson: false,
        };
        let flat = solve_mu_fd(&SlProblem::new(2, 0.0, 1.0).unwrap(), &cfg).unwrap();
        assert_relative_eq!(flat.mu, PI * PI, max_relative = 1e-4);
        let sphere = solve_mu_fd(&SlProblem::new(2, 1.0, PI).unwrap(), &cfg).unwrap();
        assert_relative_eq!(sphere.mu, 2.0, max_relative = 1e-4);

        let rich = solve_mu_fd(
            &SlProblem::new(2, 0.0, 1.0).unwrap(),
            &FdConfig {
                grid_points: 512,
                richardson: true,
            },
        )
        .unwrap();
        assert_relative_eq!(rich.mu, PI * PI, max_relative = 1e-7);
    }

    #[test]
    fn fd_null_mode_is_constant() {
        let p = SlProblem::new(3, -1.0, 2.0).unwrap();
        let sys = assemble_fd(&p, 64).unwrap();
        let null = sys.matrix.eigenvalue(0);
        assert!(null.abs() < 1e-9 * sys.matrix.gershgorin().1);
        // The symmetrized null vector is sqrt(mass), i.e. constant in the pencil.
        let y = sys.matrix.eigenvector(null);
        let v: Vec<f64> = y.iter().zip(&sys.mass).map(|(y, m)| y / m.sqrt()).collect();
        let spread = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - v.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        assert!(spread < 1e-8 * v[0].abs());
    }

    #[test]
    fn auto_dispatch_routes_sphere_to_fd() {
        let s = mu_with(&SlProblem::new(4, 1.0, PI).unwrap(), &MuOptions::default()).unwrap();
        assert_eq!(s.method, SolveMethod::FiniteDifference);
        assert_relative_eq!(s.mu, 4.0, max_relative = 1e-6);
    }

    #[test]
    fn config_validation() {
        let bad = ShootingConfig {
            ode_steps: 10,
            ..ShootingConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let bad = FdConfig {
            grid_points: 8,
            richardson: true,
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
    }
}

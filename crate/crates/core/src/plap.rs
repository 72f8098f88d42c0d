//! First eigenvalue `mu_p(n, kappa, D)` of the p-Laplacian model problem.
//!
//! The equation is integrated in flux form: with `psi = |phi'|^(p-2) phi'`,
//!
//! ```text
//! phi' = sign(psi) |psi|^(1/(p-1))
//! psi' = -(n-1) (c'/c) psi - mu |phi|^(p-2) phi
//! ```
//!
//! from `(phi, psi)(0) = (0, 1)`. The first zero `T(mu)` of `psi` decreases
//! strictly in `mu`, and the eigenvalue is the `mu` with `T(mu) = D/2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{flat_mu_p, ModelEigenSolution, PslProblem, SolveMethod};
use crate::sl::{bisect, find_bracket, refine_bracket, ShootingConfig};

/// Default range of `p` accepted by [`solve_mu_p`].
///
/// Outside it the exponent `1/(p-1)` makes binary64 integration unreliable;
/// [`solve_mu_p_in_range`] lifts the limit at the caller's risk.
pub const SUPPORTED_P_RANGE: (f64, f64) = (1.1, 10.0);

/// One point of the flux-form trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxState {
    pub s: f64,
    pub phi: f64,
    /// `|phi'|^(p-2) phi'`
    pub psi: f64,
}

impl FluxState {
    /// `phi' = sign(psi) |psi|^(1/(p-1))`, zero at `psi = 0`.
    pub fn dphi(&self, p: f64) -> f64 {
        flux_to_slope(self.psi, p)
    }
}

#[inline]
pub fn flux_to_slope(psi: f64, p: f64) -> f64 {
    if psi == 0.0 {
        0.0
    } else {
        psi.signum() * psi.abs().powf(1.0 / (p - 1.0))
    }
}

#[inline]
fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

struct FluxOde<'a> {
    problem: &'a PslProblem,
    mu: f64,
}

impl FluxOde<'_> {
    #[inline]
    fn rhs(&self, s: f64, phi: f64, psi: f64) -> (f64, f64) {
        let p = self.problem.p;
        (
            flux_to_slope(psi, p),
            -self.problem.base.damping(s) * psi - self.mu * signed_pow(phi, p - 1.0),
        )
    }

    #[inline]
    fn step(&self, y: FluxState, h: f64) -> FluxState {
        let (s, a, b) = (y.s, y.phi, y.psi);
        let k1 = self.rhs(s, a, b);
        let k2 = self.rhs(s + 0.5 * h, a + 0.5 * h * k1.0, b + 0.5 * h * k1.1);
        let k3 = self.rhs(s + 0.5 * h, a + 0.5 * h * k2.0, b + 0.5 * h * k2.1);
        let k4 = self.rhs(s + h, a + h * k3.0, b + h * k3.1);
        FluxState {
            s: s + h,
            phi: a + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            psi: b + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        }
    }

    fn start() -> FluxState {
        FluxState {
            s: 0.0,
            phi: 0.0,
            psi: 1.0,
        }
    }

    /// `psi > 0` on every grid point of `(0, D/2]`.
    fn is_below(&self, steps: usize) -> bool {
        let h = self.problem.base.half_diameter() / steps as f64;
        let mut y = Self::start();
        for k in 0..steps {
            y = self.step(y, h);
            y.s = (k + 1) as f64 * h;
            if !(y.psi > 0.0) {
                return false;
            }
        }
        true
    }

    fn trajectory(&self, steps: usize) -> Vec<FluxState> {
        let half = self.problem.base.half_diameter();
        let h = half / steps as f64;
        let mut out = Vec::with_capacity(steps + 1);
        let mut y = Self::start();
        out.push(y);
        for k in 0..steps {
            y = self.step(y, h);
            y.s = if k + 1 == steps { half } else { (k + 1) as f64 * h };
            out.push(y);
        }
        out
    }
}

fn check_range(problem: &PslProblem, range: (f64, f64)) -> Result<()> {
    if problem.p < range.0 || problem.p > range.1 {
        return Err(Error::ExponentOutOfSupportedRange {
            p: problem.p,
            min: range.0,
            max: range.1,
        });
    }
    Ok(())
}

/// The shooting map `T(mu)`: first `s > 0` where the flux `psi` changes sign.
///
/// The zero is located by sign detection between RK4 steps of size
/// `(D/2) / ode_steps` followed by bisection on a partial step. Returns
/// `f64::INFINITY` when no zero occurs before `10 D/2`.
///
/// For `kappa > 0` and `n >= 2` the weight vanishes at `pi / (2 sqrt(kappa))`,
/// a regular singular point at which every solution has `psi -> 0`. When no
/// sign change is seen on the grid before it, that point is returned.
pub fn first_flux_zero(problem: &PslProblem, mu: f64, config: &ShootingConfig) -> f64 {
    let ode = FluxOde { problem, mu };
    let half = problem.base.half_diameter();
    let h = half / config.ode_steps as f64;
    let cap = 10.0 * half;
    let singular = (problem.base.kappa > 0.0 && problem.base.n > 1)
        .then(|| 0.5 * PI / problem.base.kappa.sqrt())
        .filter(|&s| s < cap);
    // Stop one step short of the singular point to keep RK4 stable.
    let stop = singular.map_or(cap, |s| s - h);
    let mut y = FluxOde::start();
    let mut k = 0usize;
    loop {
        let s_next = (k + 1) as f64 * h;
        if s_next >= stop {
            return singular.unwrap_or(f64::INFINITY);
        }
        let next = ode.step(y, h);
        if !(next.psi > 0.0) {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let theta = 0.5 * (lo + hi);
                if ode.step(y, theta * h).psi > 0.0 {
                    lo = theta;
                } else {
                    hi = theta;
                }
            }
            return y.s + 0.5 * (lo + hi) * h;
        }
        y = next;
        y.s = s_next;
        k += 1;
    }
}

/// `mu_p(n, kappa, D)` by flux shooting, for `p` inside [`SUPPORTED_P_RANGE`].
pub fn solve_mu_p(problem: &PslProblem, config: &ShootingConfig) -> Result<ModelEigenSolution> {
    solve_mu_p_in_range(problem, config, SUPPORTED_P_RANGE)
}

/// [`solve_mu_p`] with a caller-chosen admissible range for `p`.
///
/// Widening the range beyond [`SUPPORTED_P_RANGE`] is allowed but results for
/// `p` close to 1 or very large `p` lose accuracy quickly.
pub fn solve_mu_p_in_range(
    problem: &PslProblem,
    config: &ShootingConfig,
    range: (f64, f64),
) -> Result<ModelEigenSolution> {
    problem.validate()?;
    config.validate()?;
    check_range(problem, range)?;
    if problem.base.is_near_singular() {
        return Err(Error::NearSingularWeight {
            weight: problem.base.end_weight(),
        });
    }
    let guess = flat_mu_p(problem.p, problem.base.diameter);
    let width = 0.25 * config.mu_tolerance;

    let mut steps = config.ode_steps;
    let mut previous: Option<f64> = None;
    loop {
        let ode = |mu: f64| FluxOde { problem, mu }.is_below(steps);
        let (lo, hi) = match previous.and_then(|m| refine_bracket(&ode, m, 1e-3)) {
            Some(b) => b,
            None => find_bracket(ode, 0.25 * guess, 4.0 * guess)?,
        };
        let mu = bisect(ode, lo, hi, width, config.max_bisections);
        if let Some(prev) = previous {
            let change = (mu - prev).abs();
            if change < config.mu_tolerance * (1.0 + mu) {
                let path = FluxOde { problem, mu }.trajectory(steps);
                let p = problem.p;
                let end_slope = path.last().map_or(0.0, |y| y.dphi(p).abs());
                return Ok(ModelEigenSolution {
                    mu,
                    grid: path.iter().map(|y| y.s).collect(),
                    phi: path.iter().map(|y| y.phi).collect(),
                    dphi: path.iter().map(|y| y.dphi(p)).collect(),
                    method: SolveMethod::Shooting,
                    tolerance_achieved: (change + width * (1.0 + mu)).max(end_slope),
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

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_flux_zero_is_quarter_period() {
        let cfg = ShootingConfig {
            ode_steps: 512,
            ..ShootingConfig::default()
        };
        let p = PslProblem::new(1, 0.0, 2.0, 2.0).unwrap();
        assert_relative_eq!(first_flux_zero(&p, 1.0, &cfg), PI / 2.0, epsilon = 1e-9);
        let sphere = PslProblem::new(2, 1.0, 3.0, 2.0).unwrap();
        assert_relative_eq!(first_flux_zero(&sphere, 2.0, &cfg), PI / 2.0, epsilon = 1e-8);
    }

    #[test]
    fn non_oscillating_returns_sentinel() {
        let cfg = ShootingConfig::default();
        let p = PslProblem::new(1, 0.0, 1.0, 2.0).unwrap();
        // psi = cos(sqrt(mu) s) first vanishes at pi/(2 sqrt(mu)) > 10 * 0.5
        assert_eq!(first_flux_zero(&p, 0.05, &cfg), f64::INFINITY);
    }

    #[test]
    fn rejects_unsupported_exponent() {
        let p = PslProblem::new(2, 0.0, 1.0, 12.0).unwrap();
        assert!(matches!(
            solve_mu_p(&p, &ShootingConfig::default()),
            Err(Error::ExponentOutOfSupportedRange { .. })
        ));
    }

    #[test]
    fn slope_recovery_from_flux() {
        assert_eq!(flux_to_slope(0.0, 3.0), 0.0);
        assert_relative_eq!(flux_to_slope(4.0, 3.0), 2.0, epsilon = 1e-15);
        assert_relative_eq!(flux_to_slope(-8.0, 4.0), -2.0, epsilon = 1e-15);
    }
}

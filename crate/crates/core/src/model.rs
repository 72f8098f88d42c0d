//! Curvature-model coefficient `c_kappa` and the one-dimensional model problems.
//!
//! For a curvature parameter `kappa`, `c_kappa(t)` is `cos(sqrt(kappa) t)`,
//! `1` or `cosh(sqrt(-kappa) t)` according to the sign of `kappa`. The linear
//! model problem on `[-D/2, D/2]` is
//!
//! ```text
//! (c^(n-1) phi')' / c^(n-1) + mu phi = 0,   phi'(+-D/2) = 0
//! ```
//!
//! and its p-Laplacian analogue replaces `phi'` by the flux `|phi'|^(p-2) phi'`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this value of `|kappa| t^2` the coefficient is evaluated by its power
/// series in `kappa t^2`, which keeps it continuous across `kappa = 0`.
pub const SERIES_THRESHOLD: f64 = 1e-8;

/// Below this value of `c_kappa(D/2)^(n-1)` the shooting solvers refuse the
/// problem and the finite-difference path has to be used.
pub const SINGULAR_WEIGHT_FLOOR: f64 = 1e-12;

/// The curvature coefficient `c_kappa` together with its derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCoefficient {
    pub kappa: f64,
}

impl ModelCoefficient {
    pub fn new(kappa: f64) -> Self {
        Self { kappa }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        c_kappa(self.kappa, t)
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        c_kappa_prime(self.kappa, t)
    }

    /// `c''(t) = -kappa c(t)`.
    #[inline]
    pub fn second_derivative(&self, t: f64) -> f64 {
        -self.kappa * c_kappa(self.kappa, t)
    }

    /// `c'(t) / c(t)`, the coefficient of the first-order term in the model ODE.
    #[inline]
    pub fn log_derivative(&self, t: f64) -> f64 {
        c_kappa_log_derivative(self.kappa, t)
    }

    /// Weight `c(t)^(n-1)` of the model problem in dimension `n`.
    #[inline]
    pub fn weight(&self, n: u32, t: f64) -> f64 {
        let c = self.value(t).max(0.0);
        powu(c, n.saturating_sub(1))
    }
}

fn powu(x: f64, e: u32) -> f64 {
    match i32::try_from(e) {
        Ok(e) => x.powi(e),
        Err(_) => x.powf(e as f64),
    }
}

/// `c_kappa(t)`: `cos(sqrt(kappa) t)` for positive `kappa`, `1` at zero,
/// `cosh(sqrt(|kappa|) t)` for negative `kappa`.
pub fn c_kappa(kappa: f64, t: f64) -> f64 {
    let x = kappa * t * t;
    if x.abs() < SERIES_THRESHOLD {
        // cos(sqrt(x)) = cosh(sqrt(-x)) = 1 - x/2 + x^2/24 - x^3/720
        1.0 - x / 2.0 * (1.0 - x / 12.0 * (1.0 - x / 30.0))
    } else if kappa > 0.0 {
        (kappa.sqrt() * t).cos()
    } else {
        ((-kappa).sqrt() * t).cosh()
    }
}

/// Exact derivative of [`c_kappa`] in `t`.
pub fn c_kappa_prime(kappa: f64, t: f64) -> f64 {
    let x = kappa * t * t;
    if x.abs() < SERIES_THRESHOLD {
        -kappa * t * (1.0 - x / 6.0 * (1.0 - x / 20.0 * (1.0 - x / 42.0)))
    } else if kappa > 0.0 {
        let r = kappa.sqrt();
        -r * (r * t).sin()
    } else {
        let r = (-kappa).sqrt();
        r * (r * t).sinh()
    }
}

/// `c_kappa'(t) / c_kappa(t)`, i.e. `-sqrt(kappa) tan(sqrt(kappa) t)` or
/// `sqrt(-kappa) tanh(sqrt(-kappa) t)`.
pub fn c_kappa_log_derivative(kappa: f64, t: f64) -> f64 {
    let x = kappa * t * t;
    if x.abs() < SERIES_THRESHOLD {
        -kappa * t * (1.0 + x / 3.0 * (1.0 + 2.0 * x / 5.0))
    } else if kappa > 0.0 {
        let r = kappa.sqrt();
        -r * (r * t).tan()
    } else {
        let r = (-kappa).sqrt();
        r * (r * t).tanh()
    }
}

/// Largest admissible diameter for curvature `kappa` (`pi / sqrt(kappa)`, or
/// infinity when `kappa <= 0`).
pub fn myers_diameter(kappa: f64) -> f64 {
    if kappa > 0.0 {
        PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

/// The linear model problem in dimension `n` with curvature `kappa` and
/// diameter `diameter`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlProblem {
    pub n: u32,
    pub kappa: f64,
    pub diameter: f64,
}

impl SlProblem {
    /// Builds and validates a problem.
    pub fn new(n: u32, kappa: f64, diameter: f64) -> Result<Self> {
        let problem = Self { n, kappa, diameter };
        problem.validate()?;
        Ok(problem)
    }

    /// Checks every invariant of the problem, reporting the first that fails.
    ///
    /// `diameter == pi / sqrt(kappa)` is admitted (up to a few ulps) since it
    /// is the round-sphere equality case.
    pub fn validate(&self) -> Result<()> {
        if !self.kappa.is_finite() {
            return Err(Error::NonFiniteParameter("kappa"));
        }
        if !self.diameter.is_finite() {
            return Err(Error::NonFiniteParameter("diameter"));
        }
        if self.n < 1 {
            return Err(Error::DimensionBelowOne(self.n as i64));
        }
        if self.diameter <= 0.0 {
            return Err(Error::NonPositiveDiameter(self.diameter));
        }
        let limit = myers_diameter(self.kappa);
        if self.diameter > limit * (1.0 + 8.0 * f64::EPSILON) {
            return Err(Error::DiameterExceedsMyersRange {
                kappa: self.kappa,
                diameter: self.diameter,
                limit,
            });
        }
        Ok(())
    }

    pub fn coefficient(&self) -> ModelCoefficient {
        ModelCoefficient::new(self.kappa)
    }

    pub fn half_diameter(&self) -> f64 {
        0.5 * self.diameter
    }

    /// `c_kappa(D/2)^(n-1)`, the model weight at the end of the interval.
    pub fn end_weight(&self) -> f64 {
        self.coefficient().weight(self.n, self.half_diameter())
    }

    /// True when the end weight is too small for the shooting solvers.
    pub fn is_near_singular(&self) -> bool {
        self.kappa > 0.0 && self.end_weight() < SINGULAR_WEIGHT_FLOOR
    }

    /// `(n - 1) c'/c` at `s`, the damping coefficient of the model ODE.
    #[inline]
    pub(crate) fn damping(&self, s: f64) -> f64 {
        if self.n == 1 {
            0.0
        } else {
            (self.n - 1) as f64 * c_kappa_log_derivative(self.kappa, s)
        }
    }

    /// Same problem with lengths scaled by `t`: `(n, kappa / t^2, t D)`.
    pub fn rescaled(&self, t: f64) -> Self {
        Self {
            n: self.n,
            kappa: self.kappa / (t * t),
            diameter: self.diameter * t,
        }
    }
}

/// The p-Laplacian model problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PslProblem {
    pub base: SlProblem,
    pub p: f64,
}

impl PslProblem {
    pub fn new(n: u32, kappa: f64, diameter: f64, p: f64) -> Result<Self> {
        let problem = Self {
            base: SlProblem { n, kappa, diameter },
            p,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.p.is_finite() {
            return Err(Error::NonFiniteParameter("p"));
        }
        self.base.validate()?;
        if self.p <= 1.0 {
            return Err(Error::ExponentNotAboveOne(self.p));
        }
        Ok(())
    }

    pub fn rescaled(&self, t: f64) -> Self {
        Self {
            base: self.base.rescaled(t),
            p: self.p,
        }
    }
}

/// `pi_p = 2 pi / (p sin(pi / p))`, the half period of the p-sine function.
pub fn pi_p(p: f64) -> f64 {
    2.0 * PI / (p * (PI / p).sin())
}

/// Closed form of the p-Laplacian model eigenvalue for `kappa = 0`:
/// `(p - 1) (pi_p / D)^p`. Also the starting guess for the p-shooting bracket.
pub fn flat_mu_p(p: f64, diameter: f64) -> f64 {
    (p - 1.0) * (pi_p(p) / diameter).powf(p)
}

/// Numerical method that produced a [`ModelEigenSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Shooting,
    FiniteDifference,
}

/// First eigenvalue of a model problem with its half-interval profile,
/// normalized so that `phi(0) = 0` and `phi'(0) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEigenSolution {
    pub mu: f64,
    /// Strictly increasing sample points on `[0, D/2]`.
    pub grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub method: SolveMethod,
    pub tolerance_achieved: f64,
}

impl ModelEigenSolution {
    /// Right end of the sampled profile.
    pub fn extent(&self) -> f64 {
        self.grid.last().copied().unwrap_or(0.0)
    }

    /// Piecewise-linear interpolation of the profile at `s`.
    ///
    /// Returns `None` when `s` lies outside the sampled range.
    pub fn phi_at(&self, s: f64) -> Option<f64> {
        interpolate(&self.grid, &self.phi, s)
    }

    pub fn dphi_at(&self, s: f64) -> Option<f64> {
        interpolate(&self.grid, &self.dphi, s)
    }
}

pub(crate) fn interpolate(grid: &[f64], values: &[f64], s: f64) -> Option<f64> {
    let (&first, &last) = (grid.first()?, grid.last()?);
    if !(first..=last).contains(&s) {
        return None;
    }
    let k = grid.partition_point(|&g| g <= s);
    if k == 0 {
        return Some(values[0]);
    }
    if k >= grid.len() {
        return Some(values[grid.len() - 1]);
    }
    let (g0, g1) = (grid[k - 1], grid[k]);
    let w = (s - g0) / (g1 - g0);
    Some(values[k - 1] + w * (values[k] - values[k - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn c_kappa_examples() {
        assert_eq!(c_kappa(0.0, 0.7), 1.0);
        assert_eq!(c_kappa(1.0, 0.0), 1.0);
        assert_relative_eq!(c_kappa(4.0, PI / 6.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(c_kappa(-1.0, 1.0), 1.5430806348152437, epsilon = 1e-15);
    }

    #[test]
    fn c_kappa_prime_examples() {
        assert_eq!(c_kappa_prime(0.0, 2.3), 0.0);
        assert_relative_eq!(c_kappa_prime(1.0, PI / 2.0), -1.0, epsilon = 1e-15);
        assert_relative_eq!(c_kappa_prime(-1.0, 1.0), 1.1752011936438014, epsilon = 1e-15);
    }

    #[test]
    fn validate_examples() {
        assert!(SlProblem::new(2, 1.0, 3.0).is_ok());
        assert!(matches!(
            SlProblem::new(2, 1.0, 3.2),
            Err(Error::DiameterExceedsMyersRange { .. })
        ));
        assert!(matches!(
            PslProblem::new(2, -1.0, 10.0, 0.9),
            Err(Error::ExponentNotAboveOne(_))
        ));
        assert!(matches!(
            SlProblem::new(0, 0.0, 1.0),
            Err(Error::DimensionBelowOne(0))
        ));
        assert!(matches!(
            SlProblem::new(2, 0.0, -1.0),
            Err(Error::NonPositiveDiameter(_))
        ));
    }

    #[test]
    fn sphere_diameter_is_admitted() {
        let p = SlProblem::new(3, 1.0, PI).unwrap();
        assert!(p.is_near_singular());
        assert!(SlProblem::new(2, 0.25, 2.0 * PI).is_ok());
    }

    #[test]
    fn series_branch_matches_closed_form_at_threshold() {
        for kappa in [1.0f64, -1.0] {
            let t = (SERIES_THRESHOLD / kappa.abs()).sqrt();
            let below = t * (1.0 - 1e-9);
            let above = t * (1.0 + 1e-9);
            assert_relative_eq!(c_kappa(kappa, below), c_kappa(kappa, above), epsilon = 1e-15);
            assert_relative_eq!(
                c_kappa_prime(kappa, below),
                c_kappa_prime(kappa, above),
                max_relative = 1e-8
            );
            assert_relative_eq!(
                c_kappa_log_derivative(kappa, below),
                c_kappa_log_derivative(kappa, above),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn flat_mu_p_reduces_to_linear_at_two() {
        assert_relative_eq!(pi_p(2.0), PI, epsilon = 1e-15);
        assert_relative_eq!(flat_mu_p(2.0, 2.0), PI * PI / 4.0, epsilon = 1e-14);
    }

    #[test]
    fn interpolation_stays_inside_grid() {
        let grid = [0.0, 1.0, 2.0];
        let vals = [0.0, 2.0, 3.0];
        assert_eq!(interpolate(&grid, &vals, 0.5), Some(1.0));
        assert_eq!(interpolate(&grid, &vals, 2.0), Some(3.0));
        assert_eq!(interpolate(&grid, &vals, 2.1), None);
    }
}

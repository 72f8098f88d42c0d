//! Oscillation quotient `Q(x, y) = (phi(y) - phi(x)) / Phi(d(x, y) / 2)` of a
//! discrete eigenfunction against a model profile.
//!
//! `Q` is evaluated on vertex pairs with edge-path distances, and its diagonal
//! extension `2 <grad phi, X> / Phi'(0)` is approximated by the largest
//! per-element gradient. The maximum and its location are a diagnostic only.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{edge_graph, single_source_distances, EdgeGraph};
use super::mesh::{cross, dot, norm, sub};
use super::Manifold;
use crate::error::{Error, Result};
use crate::model::ModelEigenSolution;

/// Values within this relative distance of the maximum count as ties; ties
/// resolve to the lexicographically smallest pair.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QOptions {
    /// All pairs are used up to this many vertices; beyond it this many
    /// source vertices are drawn at random.
    pub max_sources: usize,
    pub seed: u64,
    /// Multiplies every edge-path distance before `Phi` is evaluated.
    pub distance_scale: f64,
}

impl Default for QOptions {
    fn default() -> Self {
        Self {
            max_sources: 2000,
            seed: 0x5eed,
            distance_scale: 1.0,
        }
    }
}

/// Where the maximum of `Q` is attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QArgmax {
    /// Off-diagonal pair with `phi(y) > phi(x)`.
    Pair { x: usize, y: usize },
    /// Diagonal branch on an element (edge of a chain, triangle of a mesh).
    Diagonal { element: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QDiagnostic {
    pub max_q: f64,
    pub argmax: QArgmax,
    pub pair_max: f64,
    pub pair_argmax: (usize, usize),
    pub diagonal_max: f64,
    pub diagonal_argmax: usize,
    /// Number of source vertices whose distances were computed.
    pub sources: usize,
    pub sampled: bool,
    pub seed: u64,
}

struct PairEval<'a> {
    graph: &'a EdgeGraph,
    phi: &'a [f64],
    model: &'a ModelEigenSolution,
    scale: f64,
}

impl PairEval<'_> {
    fn model_at(&self, half_distance: f64) -> Result<f64> {
        let extent = self.model.extent();
        if half_distance > extent * (1.0 + 1e-9) {
            return Err(Error::ModelTooShort {
                covered: extent,
                requested: half_distance,
            });
        }
        Ok(self
            .model
            .phi_at(half_distance.min(extent))
            .expect("clamped into the model grid"))
    }

    /// Oriented candidates `((x, y), Q)` with `Q >= 0` for one source.
    fn for_source(&self, source: usize, mut visit: impl FnMut((usize, usize), f64)) -> Result<()> {
        let dist = single_source_distances(self.graph, source);
        for (target, &d) in dist.iter().enumerate() {
            if target == source || !(d > 0.0) {
                continue;
            }
            let denom = self.model_at(0.5 * self.scale * d)?;
            let q = (self.phi[target] - self.phi[source]) / denom;
            if q >= 0.0 {
                visit((source, target), q);
            } else {
                visit((target, source), -q);
            }
        }
        Ok(())
    }
}

fn diagonal_branch(manifold: &Manifold, phi: &[f64]) -> Vec<f64> {
    match manifold {
        Manifold::Graph(g) => g
            .edges()
            .into_iter()
            .map(|(i, j, len)| (phi[j] - phi[i]).abs() / len)
            .collect(),
        Manifold::Mesh(m) => m
            .triangles
            .iter()
            .map(|&[a, b, c]| {
                // Linear-element gradient: sum_i phi_i (n x e_i) / (2 A).
                let ab = m.edge_vector(a, b);
                let ac = m.edge_vector(a, c);
                let normal = cross(ab, ac);
                let twice_area = norm(normal);
                let unit = [normal[0] / twice_area, normal[1] / twice_area, normal[2] / twice_area];
                let bc = sub(ac, ab);
                let ca = [-ac[0], -ac[1], -ac[2]];
                let mut g = [0.0; 3];
                for (value, opposite) in [(phi[a], bc), (phi[b], ca), (phi[c], ab)] {
                    let dir = cross(unit, opposite);
                    for k in 0..3 {
                        g[k] += value * dir[k] / twice_area;
                    }
                }
                dot(g, g).sqrt()
            })
            .collect(),
    }
}

/// Maximum of the oscillation quotient of `phi` against the model profile.
///
/// All ordered vertex pairs are used when the vertex count is at most
/// `options.max_sources`; otherwise that many sources are drawn with a
/// seeded generator and paired with every vertex.
pub fn oscillation_quotient_max(
    manifold: &Manifold,
    phi: &[f64],
    model: &ModelEigenSolution,
    options: &QOptions,
) -> Result<QDiagnostic> {
    let n = manifold.vertex_count();
    if phi.len() != n {
        return Err(Error::InvalidMesh(format!(
            "eigenvector has {} entries for {n} vertices",
            phi.len()
        )));
    }
    let graph = edge_graph(manifold);
    let sampled = n > options.max_sources;
    let sources: Vec<usize> = if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let mut s = sample(&mut rng, n, options.max_sources).into_vec();
        s.sort_unstable();
        s
    } else {
        (0..n).collect()
    };
    let eval = PairEval {
        graph: &graph,
        phi,
        model,
        scale: options.distance_scale,
    };

    let pair_max = sources
        .par_iter()
        .map(|&s| {
            let mut best = 0.0f64;
            eval.for_source(s, |_, q| best = best.max(q))?;
            Ok::<_, Error>(best)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    let threshold = pair_max * (1.0 - TIE_TOLERANCE);
    let pair_argmax = sources
        .par_iter()
        .map(|&s| {
            let mut best: Option<(usize, usize)> = None;
            eval.for_source(s, |pair, q| {
                if q >= threshold && best.is_none_or(|b| pair < b) {
                    best = Some(pair);
                }
            })?;
            Ok::<_, Error>(best)
        })
        .try_reduce(
            || None,
            |a, b| {
                Ok(match (a, b) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                })
            },
        )?
        .unwrap_or((0, 0));

    let slopes = diagonal_branch(manifold, phi);
    let dphi0 = model.dphi.first().copied().unwrap_or(1.0);
    let diagonal: Vec<f64> = slopes.iter().map(|g| 2.0 * g / dphi0).collect();
    let diagonal_max = diagonal.iter().copied().fold(0.0, f64::max);
    let diagonal_argmax = diagonal
        .iter()
        .position(|&v| v >= diagonal_max * (1.0 - TIE_TOLERANCE))
        .unwrap_or(0);

    let (max_q, argmax) = if pair_max >= diagonal_max {
        (
            pair_max,
            QArgmax::Pair {
                x: pair_argmax.0,
                y: pair_argmax.1,
            },
        )
    } else {
        (
            diagonal_max,
            QArgmax::Diagonal {
                element: diagonal_argmax,
            },
        )
    };

    Ok(QDiagnostic {
        max_q,
        argmax,
        pair_max,
        pair_argmax,
        diagonal_max,
        diagonal_argmax,
        sources: sources.len(),
        sampled,
        seed: options.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::super::mesh::build_interval;
    use super::*;
    use crate::model::SolveMethod;
    use std::f64::consts::PI;

    fn sine_model(extent: f64) -> ModelEigenSolution {
        let grid: Vec<f64> = (0..=2000).map(|k| extent * k as f64 / 2000.0).collect();
        ModelEigenSolution {
            mu: PI * PI,
            phi: grid.iter().map(|s| (PI * s).sin() / PI).collect(),
            dphi: grid.iter().map(|s| (PI * s).cos()).collect(),
            grid,
            method: SolveMethod::Shooting,
            tolerance_achieved: 0.0,
        }
    }

    #[test]
    fn model_too_short_is_reported() {
        let g: Manifold = build_interval(1.0, 21).unwrap().into();
        let phi: Vec<f64> = (0..21).map(|i| i as f64).collect();
        let err = oscillation_quotient_max(&g, &phi, &sine_model(0.25), &QOptions::default());
        assert!(matches!(err, Err(Error::ModelTooShort { .. })));
    }

    #[test]
    fn sampling_is_seeded() {
        let g: Manifold = build_interval(1.0, 60).unwrap().into();
        let phi: Vec<f64> = match &g {
            Manifold::Graph(c) => c.positions.iter().map(|s| (PI * s).sin() / PI).collect(),
            _ => unreachable!(),
        };
        let opts = QOptions {
            max_sources: 10,
            seed: 7,
            distance_scale: 1.0,
        };
        let a = oscillation_quotient_max(&g, &phi, &sine_model(0.5), &opts).unwrap();
        let b = oscillation_quotient_max(&g, &phi, &sine_model(0.5), &opts).unwrap();
        assert!(a.sampled);
        assert_eq!(a.sources, 10);
        assert_eq!(a, b);
    }
}

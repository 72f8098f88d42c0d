//! Discrete Laplacians with lumped mass and the first non-trivial eigenpair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mesh::{cross, dot, norm, Graph1D, TriangleMesh};
use super::Manifold;
use crate::error::{Error, Result};

/// Compressed-row symmetric sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds the matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                cols.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Largest absolute row sum (the infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |K_ij - K_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }
}

/// Stiffness matrix and lumped (diagonal) mass of a discretized manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub stiffness: SparseMatrix,
    pub mass: Vec<f64>,
}

/// Cotangent stiffness with barycentric lumped mass for triangle meshes, the
/// three-point stiffness with cell-length mass for chains.
pub fn assemble_laplacian(manifold: &Manifold) -> Result<Laplacian> {
    match manifold {
        Manifold::Graph(g) => assemble_graph(g),
        Manifold::Mesh(m) => assemble_mesh(m),
    }
}

fn assemble_graph(graph: &Graph1D) -> Result<Laplacian> {
    graph.validate()?;
    let n = graph.len();
    let mut mass = vec![0.0; n];
    let mut triplets = Vec::with_capacity(4 * n);
    for (i, j, len) in graph.edges() {
        let w = 1.0 / len;
        triplets.extend_from_slice(&[(i, i, w), (j, j, w), (i, j, -w), (j, i, -w)]);
        mass[i] += 0.5 * len;
        mass[j] += 0.5 * len;
    }
    Ok(Laplacian {
        stiffness: SparseMatrix::from_triplets(n, triplets),
        mass,
    })
}

fn assemble_mesh(mesh: &TriangleMesh) -> Result<Laplacian> {
    mesh.check_degenerate()?;
    let n = mesh.vertices.len();
    let mut mass = vec![0.0; n];
    let mut triplets = Vec::with_capacity(12 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = mesh.edge_vector(a, b);
        let ac = mesh.edge_vector(a, c);
        let bc = mesh.edge_vector(b, c);
        let area = 0.5 * norm(cross(ab, ac));
        // cot of the angle at each corner: dot / |cross| of its two edges.
        let cot_a = dot(ab, ac) / (2.0 * area);
        let cot_b = -dot(ab, bc) / (2.0 * area);
        let cot_c = dot(ac, bc) / (2.0 * area);
        for (i, j, cot) in [(b, c, cot_a), (a, c, cot_b), (a, b, cot_c)] {
            let w = 0.5 * cot;
            triplets.extend_from_slice(&[(i, i, w), (j, j, w), (i, j, -w), (j, i, -w)]);
        }
        for v in [a, b, c] {
            mass[v] += area / 3.0;
        }
    }
    Ok(Laplacian {
        stiffness: SparseMatrix::from_triplets(n, triplets),
        mass,
    })
}

/// Settings for [`first_nontrivial_eigenvalue`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    /// Target for `||K v - lambda M v|| / ||M v||`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Seed of the random starting vector.
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 500,
            seed: 0x5eed,
        }
    }
}

impl EigenConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Smallest positive eigenvalue of the pencil `(K, M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub lambda1: f64,
    pub residual: f64,
    pub iterations: usize,
    pub grid_size: usize,
    /// Eigenvector, mass-orthogonal to constants with unit mass norm.
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
}

fn mass_dot(mass: &[f64], x: &[f64], y: &[f64]) -> f64 {
    mass.iter().zip(x).zip(y).map(|((m, a), b)| m * a * b).sum()
}

/// Removes the constant component in the mass inner product.
fn deflate_constants(mass: &[f64], total: f64, v: &mut [f64]) {
    let mean = mass.iter().zip(v.iter()).map(|(m, x)| m * x).sum::<f64>() / total;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Jacobi-preconditioned conjugate gradients for `K x = b` with `b` summing
/// to zero (the range of the singular Neumann stiffness).
fn pcg(k: &SparseMatrix, diag: &[f64], b: &[f64], rel_tol: f64, max_iter: usize) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let target = rel_tol * l2(b);
    let mut kp = vec![0.0; n];
    for _ in 0..max_iter {
        if l2(&r) <= target {
            break;
        }
        k.mul_vec_into(&p, &mut kp);
        let pkp: f64 = p.iter().zip(&kp).map(|(a, b)| a * b).sum();
        if !(pkp > 0.0) {
            break;
        }
        let alpha = rz / pkp;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * kp[i];
        }
        z.iter_mut().zip(&r).zip(diag).for_each(|((z, r), d)| *z = r / d);
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    x
}

/// Deflated inverse power iteration for the first non-trivial eigenpair.
///
/// Each step solves `K x = M v` by conjugate gradients, removes the constant
/// mode in the mass inner product and normalizes; the Rayleigh quotient is the
/// estimate. Stops when `||K v - lambda M v|| / ||M v|| <= tol`.
pub fn first_nontrivial_eigenvalue(
    stiffness: &SparseMatrix,
    mass: &[f64],
    config: &EigenConfig,
) -> Result<SpectralEstimate> {
    let n = stiffness.dim();
    if mass.len() != n || n < 2 {
        return Err(Error::InvalidMesh("stiffness and mass sizes disagree".into()));
    }
    if mass.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::InvalidMesh("lumped mass must be positive".into()));
    }
    let total: f64 = mass.iter().sum();
    let diag = stiffness.diagonal();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidMesh("stiffness has a non-positive diagonal".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflate_constants(mass, total, &mut v);
    let scale = mass_dot(mass, &v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= scale);

    let cg_iterations = 20 * n + 100;
    let cg_tol = (1e-3 * config.tol).clamp(1e-14, 1e-10);
    let mut residual = f64::INFINITY;
    let mut kv = vec![0.0; n];
    for iteration in 1..=config.max_iterations {
        let mut rhs: Vec<f64> = mass.iter().zip(&v).map(|(m, x)| m * x).collect();
        let drift = rhs.iter().sum::<f64>() / n as f64;
        rhs.iter_mut().for_each(|b| *b -= drift);

        let mut x = pcg(stiffness, &diag, &rhs, cg_tol, cg_iterations);
        deflate_constants(mass, total, &mut x);
        let scale = mass_dot(mass, &x, &x).sqrt();
        x.iter_mut().for_each(|e| *e /= scale);
        v = x;

        stiffness.mul_vec_into(&v, &mut kv);
        let lambda = v.iter().zip(&kv).map(|(a, b)| a * b).sum::<f64>();
        let mv: Vec<f64> = mass.iter().zip(&v).map(|(m, x)| m * x).collect();
        let r: Vec<f64> = kv.iter().zip(&mv).map(|(k, m)| k - lambda * m).collect();
        residual = l2(&r) / l2(&mv);
        if residual <= config.tol {
            return Ok(SpectralEstimate {
                lambda1: lambda,
                residual,
                iterations: iteration,
                grid_size: n,
                eigenvector: v,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: config.max_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::super::mesh::{build_circle, build_icosphere, build_interval};
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn triplets_merge_duplicates() {
        let m = SparseMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, 2.0)]);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![6.0, 2.0]);
    }

    #[test]
    fn circle_rayleigh_quotient_of_cosine() {
        let g = build_circle(2.0 * PI, 400).unwrap();
        let lap = assemble_laplacian(&g.clone().into()).unwrap();
        let v: Vec<f64> = g.positions.iter().map(|t| t.cos()).collect();
        let kv = lap.stiffness.mul_vec(&v);
        let num: f64 = v.iter().zip(&kv).map(|(a, b)| a * b).sum();
        let den = mass_dot(&lap.mass, &v, &v);
        assert!((num / den - 1.0).abs() < 1e-4);
    }

    #[test]
    fn interval_end_cells_are_halved() {
        let g = build_interval(1.0, 11).unwrap();
        let lap = assemble_laplacian(&g.into()).unwrap();
        assert!((lap.mass[0] - 0.05).abs() < 1e-15);
        assert!((lap.mass[5] - 0.1).abs() < 1e-15);
        assert!((lap.mass.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn icosphere_area_and_null_mode() {
        let m = build_icosphere(1.0, 4).unwrap();
        let lap = assemble_laplacian(&m.into()).unwrap();
        let area: f64 = lap.mass.iter().sum();
        assert!((area / (4.0 * PI) - 1.0).abs() < 2e-3);
        let ones = vec![1.0; lap.mass.len()];
        let k1 = lap.stiffness.mul_vec(&ones);
        assert!(l2(&k1) <= 1e-12 * lap.stiffness.norm_inf());
        assert_eq!(lap.stiffness.asymmetry(), 0.0);
    }

    #[test]
    fn eigenvalue_examples() {
        let circle = build_circle(2.0 * PI, 1000).unwrap();
        let lap = assemble_laplacian(&circle.into()).unwrap();
        let est = first_nontrivial_eigenvalue(&lap.stiffness, &lap.mass, &EigenConfig::default()).unwrap();
        assert!((est.lambda1 - 1.0).abs() < 1e-4);

        let interval = build_interval(1.0, 1000).unwrap();
        let lap = assemble_laplacian(&interval.into()).unwrap();
        let est = first_nontrivial_eigenvalue(&lap.stiffness, &lap.mass, &EigenConfig::default()).unwrap();
        assert!((est.lambda1 / (PI * PI) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let circle = build_circle(2.0 * PI, 64).unwrap();
        let lap = assemble_laplacian(&circle.into()).unwrap();
        let cfg = EigenConfig {
            tol: 1e-30,
            max_iterations: 3,
            seed: 1,
        };
        assert!(matches!(
            first_nontrivial_eigenvalue(&lap.stiffness, &lap.mass, &cfg),
            Err(Error::NoConvergence { iterations: 3, .. })
        ));
    }
}

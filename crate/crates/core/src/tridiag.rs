//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

/// A symmetric tridiagonal matrix stored as its diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `lambda` (negative pivots of the
    /// LDL^T factorization of `A - lambda I`).
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let n = self.diag.len();
        if n == 0 {
            return 0;
        }
        let guard = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - lambda;
        for i in 0..n {
            if i > 0 {
                let prev = if q.abs() < guard { guard.copysign(q) } else { q };
                q = (self.diag[i] - lambda) - self.off[i - 1] * self.off[i - 1] / prev;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (zero based), bisected until the bracket
    /// is narrower than `1e-12 (1 + |lambda|)`; the bracket midpoint is returned.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len(), "eigenvalue index out of range");
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        lo -= pad;
        hi += pad;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if hi - lo < 1e-12 * (1.0 + mid.abs()) {
                break;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an eigenvalue estimate `lambda` by inverse iteration.
    ///
    /// The result has unit Euclidean norm; its sign is arbitrary.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let shift = lambda + 64.0 * f64::EPSILON * scale;
        // Deterministic start without any symmetry about the middle row.
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + ((i as f64 + 1.0) * 0.754_877_666).fract())
            .collect();
        for _ in 0..4 {
            x = self.solve_shifted(shift, &x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }

    /// Solves `(A - shift I) y = rhs` by Gaussian elimination with partial
    /// pivoting (the LAPACK `gtsv` scheme). Zero pivots are replaced by a
    /// tiny multiple of the matrix scale.
    fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let (lo, hi) = self.gershgorin();
        let tiny = f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let nonzero = |v: f64| if v == 0.0 { tiny } else { v };
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut b = rhs.to_vec();
        if n == 1 {
            return vec![b[0] / nonzero(d[0])];
        }
        // `dl` is overwritten with the second superdiagonal of U.
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                d[i] = nonzero(d[i]);
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
                dl[i] = 0.0;
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 1 < n - 1 {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                } else {
                    dl[i] = 0.0;
                }
                du[i] = temp;
                b.swap(i, i + 1);
                b[i + 1] -= fact * b[i];
            }
        }
        d[n - 1] = nonzero(d[n - 1]);
        b[n - 1] /= d[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for i in (0..n - 2).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn laplacian_1d(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        let n = 50;
        let a = laplacian_1d(n);
        for k in [0, 1, 7, 49] {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert_relative_eq!(a.eigenvalue(k), exact, epsilon = 1e-11);
        }
    }

    #[test]
    fn sturm_count_is_monotone() {
        let a = laplacian_1d(20);
        let mut last = 0;
        for i in 0..=100 {
            let c = a.sturm_count(-0.5 + 0.05 * i as f64);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(last, 20);
    }

    #[test]
    fn inverse_iteration_recovers_sine_mode() {
        let n = 64;
        let a = laplacian_1d(n);
        let lambda = a.eigenvalue(1);
        let v = a.eigenvector(lambda);
        let w: Vec<f64> = (0..n)
            .map(|i| (2.0 * (i + 1) as f64 * PI / (n + 1) as f64).sin())
            .collect();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / wn;
        assert_relative_eq!(dot.abs(), 1.0, epsilon = 1e-10);
    }
}

//! Minimal dense linear algebra for the sparse solvers: a column-major
//! matrix, Cholesky on normal equations, and a Jacobi-eigendecomposition
//! pseudo-inverse used as the minimum-norm fallback when a selected
//! support is rank deficient.

/// Dense column-major matrix. Column-major because the solvers spend
/// almost all their time taking inner products against columns (atoms).
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(columns: Vec<Vec<f64>>) -> Matrix {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        let mut data = Vec::with_capacity(rows * cols);
        for c in columns {
            assert_eq!(c.len(), rows, "ragged columns");
            data.extend(c);
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    /// `A * x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.col(j)) {
                *o += xj * a;
            }
        }
        out
    }

    /// `A^T * y`
    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "matvec_t dimension mismatch");
        (0..self.cols).map(|j| dot(self.col(j), y)).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Solve `G x = b` for symmetric positive-definite `G` (row-major,
/// `k` by `k`). Returns `None` when a pivot collapses, i.e. `G` is not
/// numerically positive definite.
pub fn solve_spd_cholesky(g: &[f64], b: &[f64], k: usize) -> Option<Vec<f64>> {
    // Lower-triangular factor, row-major.
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut sum = g[i * k + j];
            for p in 0..j {
                sum -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if sum <= 1e-12 {
                    return None;
                }
                l[i * k + i] = sum.sqrt();
            } else {
                l[i * k + j] = sum / l[j * k + j];
            }
        }
    }
    // Forward then back substitution.
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut sum = b[i];
        for p in 0..i {
            sum -= l[i * k + p] * y[p];
        }
        y[i] = sum / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut sum = y[i];
        for p in i + 1..k {
            sum -= l[p * k + i] * x[p];
        }
        x[i] = sum / l[i * k + i];
    }
    Some(x)
}

/// Eigendecomposition of a symmetric matrix (row-major, `k` by `k`) by
/// cyclic Jacobi rotations. Returns (eigenvalues, eigenvectors) with
/// eigenvector `i` stored in column `i` of the returned row-major array.
fn jacobi_eigen(a: &mut [f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..k {
            for q in p + 1..k {
                off += a[p * k + q] * a[p * k + q];
            }
        }
        if off <= 1e-30 {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[p * k + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..k {
                    let aip = a[i * k + p];
                    let aiq = a[i * k + q];
                    a[i * k + p] = c * aip - s * aiq;
                    a[i * k + q] = s * aip + c * aiq;
                }
                for i in 0..k {
                    let api = a[p * k + i];
                    let aqi = a[q * k + i];
                    a[p * k + i] = c * api - s * aqi;
                    a[q * k + i] = s * api + c * aqi;
                }
                for i in 0..k {
                    let vip = v[i * k + p];
                    let viq = v[i * k + q];
                    v[i * k + p] = c * vip - s * viq;
                    v[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }
    let eigvals = (0..k).map(|i| a[i * k + i]).collect();
    (eigvals, v)
}

/// Minimum-norm solution of `G x = b` for symmetric positive
/// semi-definite `G`, via a thresholded eigendecomposition. With
/// `G = A^T A` and `b = A^T y` this is the minimum-norm least-squares
/// solution of `A x = y`.
pub fn solve_sym_min_norm(g: &[f64], b: &[f64], k: usize) -> Vec<f64> {
    let mut work = g.to_vec();
    let (eigvals, v) = jacobi_eigen(&mut work, k);
    let max_eig = eigvals.iter().cloned().fold(0.0f64, f64::max);
    let threshold = max_eig * 1e-12;
    let mut x = vec![0.0; k];
    for (idx, &lambda) in eigvals.iter().enumerate() {
        if lambda <= threshold {
            continue;
        }
        // coefficient = (v_idx . b) / lambda, accumulated into x.
        let mut proj = 0.0;
        for i in 0..k {
            proj += v[i * k + idx] * b[i];
        }
        let scale = proj / lambda;
        for i in 0..k {
            x[i] += scale * v[i * k + idx];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_against_hand_computation() {
        let a = Matrix::from_columns(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        assert_eq!(a.rows(), 2);
        assert_eq!(a.cols(), 3);
        assert_eq!(a.matvec(&[1.0, 0.0, 2.0]), vec![11.0, 14.0]);
        assert_eq!(a.matvec_t(&[1.0, 1.0]), vec![3.0, 7.0, 11.0]);
    }

    #[test]
    fn cholesky_solves_a_known_system() {
        // G = [[4, 2], [2, 3]], b = [10, 8] -> x = [1.75, 1.5]
        let g = [4.0, 2.0, 2.0, 3.0];
        let x = solve_spd_cholesky(&g, &[10.0, 8.0], 2).unwrap();
        assert!((x[0] - 1.75).abs() < 1e-12);
        assert!((x[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_singular_gram() {
        // Rank-1 Gram.
        let g = [1.0, 1.0, 1.0, 1.0];
        assert!(solve_spd_cholesky(&g, &[2.0, 2.0], 2).is_none());
    }

    #[test]
    fn min_norm_solution_on_singular_system() {
        // G = [[1,1],[1,1]] (rank 1), b = [2,2]. Solutions are
        // x0 + x1 = 2; minimum norm is [1, 1].
        let g = [1.0, 1.0, 1.0, 1.0];
        let x = solve_sym_min_norm(&g, &[2.0, 2.0], 2);
        assert!((x[0] - 1.0).abs() < 1e-10, "{x:?}");
        assert!((x[1] - 1.0).abs() < 1e-10, "{x:?}");
    }

    #[test]
    fn min_norm_matches_cholesky_when_nonsingular() {
        let g = [5.0, 1.0, -2.0, 1.0, 4.0, 0.5, -2.0, 0.5, 3.0];
        let b = [1.0, -2.0, 0.25];
        let direct = solve_spd_cholesky(&g, &b, 3).unwrap();
        let pinv = solve_sym_min_norm(&g, &b, 3);
        for (a, b) in direct.iter().zip(&pinv) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn jacobi_recovers_known_eigenvalues() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let mut a = vec![2.0, 1.0, 1.0, 2.0];
        let (mut eig, _) = jacobi_eigen(&mut a, 2);
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }
}

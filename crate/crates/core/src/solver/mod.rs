//! Sparse recovery: seeded random measurement matrices, Orthogonal
//! Matching Pursuit, and an iterative-shrinkage l1 solver.

mod linalg;

pub use linalg::{dot, norm2, Matrix};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Seeded random projection from `cols` dimensions down to `rows`.
///
/// Entries are generated row-major from a single ChaCha8 stream, so the
/// matrix is fully determined by `(rows, cols, seed)` and the
/// constructor used.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    rows: usize,
    cols: usize,
    pub seed: u64,
    data: Vec<f64>, // row-major
}

impl MeasurementMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Rebuild from serialized entries (model loading).
    pub fn from_rows_data(rows: usize, cols: usize, seed: u64, data: Vec<f64>) -> MeasurementMatrix {
        assert_eq!(data.len(), rows * cols, "measurement matrix size mismatch");
        MeasurementMatrix {
            rows,
            cols,
            seed,
            data,
        }
    }
}

/// Solution returned by [`omp`] and [`ista_l1`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    /// Full-length coefficient vector; zero off-support.
    pub coefficients: Vec<f64>,
    /// Nonzero indices. For OMP this is in selection order.
    pub support: Vec<usize>,
    /// Final `||y - A x||_2`.
    pub residual_norm: f64,
    /// Iterations actually run. For `ista_l1`, `iterations == max_iter`
    /// means the tolerance was never reached.
    pub iterations: usize,
    /// Set when a least-squares step hit a rank-deficient support and
    /// fell back to the minimum-norm solution.
    pub rank_deficient: bool,
    /// `||r||_2` before the first iteration and after each one.
    pub residual_history: Vec<f64>,
    /// `0.5*||y - A x||^2 + lambda*||x||_1` per iteration (ISTA only).
    pub objective_history: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no l2 direction")]
    ZeroVector,
    #[error("column {col} has l2 norm {norm}, want 1")]
    BadColumns { col: usize, norm: f64 },
}

/// Gaussian measurement matrix with i.i.d. `N(0, 1/rows)` entries, so
/// that measured vectors keep their expected norm.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Result<MeasurementMatrix, SolverError> {
    if rows == 0 || cols == 0 || rows >= cols {
        return Err(SolverError::BadShape(format!(
            "need 1 <= rows < cols, got {rows}x{cols}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (1.0 / rows as f64).sqrt()).expect("valid stddev");
    let data = (0..rows * cols).map(|_| normal.sample(&mut rng)).collect();
    Ok(MeasurementMatrix {
        rows,
        cols,
        seed,
        data,
    })
}

/// Row-selection measurement: each row is a distinct coordinate basis
/// vector, i.e. the projection keeps `rows` randomly chosen entries of
/// the input. The literal "random sampling" alternative to the Gaussian
/// projection.
pub fn coordinate_sampling_matrix(
    rows: usize,
    cols: usize,
    seed: u64,
) -> Result<MeasurementMatrix, SolverError> {
    if rows == 0 || cols == 0 || rows >= cols {
        return Err(SolverError::BadShape(format!(
            "need 1 <= rows < cols, got {rows}x{cols}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, cols, rows).into_iter().collect();
    picked.sort_unstable();
    let mut data = vec![0.0; rows * cols];
    for (i, &j) in picked.iter().enumerate() {
        data[i * cols + j] = 1.0;
    }
    Ok(MeasurementMatrix {
        rows,
        cols,
        seed,
        data,
    })
}

/// `phi * v`
pub fn project(phi: &MeasurementMatrix, v: &[f64]) -> Result<Vec<f64>, SolverError> {
    if v.len() != phi.cols {
        return Err(SolverError::DimensionMismatch {
            expected: phi.cols,
            got: v.len(),
        });
    }
    Ok((0..phi.rows).map(|i| dot(phi.row(i), v)).collect())
}

/// Scale to unit l2 norm.
pub fn normalize_l2(v: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = norm2(v);
    if n == 0.0 {
        return Err(SolverError::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

fn check_unit_columns(a: &Matrix) -> Result<(), SolverError> {
    for j in 0..a.cols() {
        let n = norm2(a.col(j));
        if (n - 1.0).abs() > 1e-9 {
            return Err(SolverError::BadColumns { col: j, norm: n });
        }
    }
    Ok(())
}

/// Least squares of `y` on the selected columns. Cholesky on the normal
/// equations, with a minimum-norm eigendecomposition fallback when the
/// support is rank deficient.
fn lstsq_on_support(a: &Matrix, support: &[usize], y: &[f64]) -> (Vec<f64>, bool) {
    let k = support.len();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for (p, &jp) in support.iter().enumerate() {
        rhs[p] = dot(a.col(jp), y);
        for (q, &jq) in support.iter().enumerate().skip(p) {
            let g = dot(a.col(jp), a.col(jq));
            gram[p * k + q] = g;
            gram[q * k + p] = g;
        }
    }
    match linalg::solve_spd_cholesky(&gram, &rhs, k) {
        Some(x) => (x, false),
        None => (linalg::solve_sym_min_norm(&gram, &rhs, k), true),
    }
}

fn residual_for(a: &Matrix, support: &[usize], coeffs: &[f64], y: &[f64]) -> Vec<f64> {
    let mut r = y.to_vec();
    for (&j, &c) in support.iter().zip(coeffs) {
        for (ri, ai) in r.iter_mut().zip(a.col(j)) {
            *ri -= c * ai;
        }
    }
    r
}

/// Orthogonal Matching Pursuit.
///
/// Per iteration: pick the unselected column most correlated with the
/// residual (ties to the lowest index), then refit all selected
/// coefficients by least squares and update the residual. Stops after
/// `k_max` selections or once `||r|| <= tol * ||y||`.
pub fn omp(a: &Matrix, y: &[f64], k_max: usize, tol: f64) -> Result<SparseSolution, SolverError> {
    if y.len() != a.rows() {
        return Err(SolverError::DimensionMismatch {
            expected: a.rows(),
            got: y.len(),
        });
    }
    if k_max == 0 || k_max > a.rows() {
        return Err(SolverError::BadShape(format!(
            "sparsity budget must be in 1..={}, got {k_max}",
            a.rows()
        )));
    }
    check_unit_columns(a)?;

    let y_norm = norm2(y);
    let stop_at = tol * y_norm;
    let mut support: Vec<usize> = Vec::with_capacity(k_max);
    let mut coeffs: Vec<f64> = Vec::new();
    let mut residual = y.to_vec();
    let mut residual_history = vec![y_norm];
    let mut rank_deficient = false;

    while support.len() < k_max && *residual_history.last().unwrap() > stop_at {
        // Selection: highest |<r, A_j>| over unselected columns.
        let mut best: Option<(usize, f64)> = None;
        for j in 0..a.cols() {
            if support.contains(&j) {
                continue;
            }
            let c = dot(a.col(j), &residual).abs();
            if best.map_or(true, |(_, bc)| c > bc) {
                best = Some((j, c));
            }
        }
        let (j, corr) = match best {
            Some(b) => b,
            None => break, // every column already selected
        };
        if corr == 0.0 {
            break; // residual is orthogonal to everything left
        }
        support.push(j);

        let (x_s, deficient) = lstsq_on_support(a, &support, y);
        rank_deficient |= deficient;
        residual = residual_for(a, &support, &x_s, y);
        residual_history.push(norm2(&residual));
        coeffs = x_s;
    }

    let mut coefficients = vec![0.0; a.cols()];
    for (&j, &c) in support.iter().zip(&coeffs) {
        coefficients[j] = c;
    }
    Ok(SparseSolution {
        coefficients,
        residual_norm: *residual_history.last().unwrap(),
        iterations: support.len(),
        support,
        rank_deficient,
        residual_history,
        objective_history: Vec::new(),
    })
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Upper bound on the squared spectral norm of `a`, by power iteration
/// on `A^T A` with a deterministic start and a 1% safety margin.
fn spectral_norm_sq_upper(a: &Matrix) -> f64 {
    let n = a.cols();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0f64;
    for _ in 0..200 {
        let w = a.matvec(&v);
        let u = a.matvec_t(&w);
        let new_lambda = dot(&v, &u);
        let u_norm = norm2(&u);
        if u_norm == 0.0 {
            return 1.0; // zero operator; any positive step works
        }
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi = ui / u_norm;
        }
        if (new_lambda - lambda).abs() <= 1e-12 * new_lambda.abs() {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    lambda.max(1e-12) * 1.01
}

/// Iterative shrinkage-thresholding on
/// `0.5*||y - A x||^2 + lambda*||x||_1` with step `1/L`.
///
/// Stops when the l2 norm of the coefficient update drops below `tol`
/// or after `max_iter` iterations (`iterations == max_iter` then flags
/// non-convergence; never an error).
pub fn ista_l1(
    a: &Matrix,
    y: &[f64],
    lambda: f64,
    max_iter: usize,
    tol: f64,
) -> Result<SparseSolution, SolverError> {
    if y.len() != a.rows() {
        return Err(SolverError::DimensionMismatch {
            expected: a.rows(),
            got: y.len(),
        });
    }
    if !(lambda > 0.0) {
        return Err(SolverError::BadShape(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    check_unit_columns(a)?;

    let step = 1.0 / spectral_norm_sq_upper(a);
    let mut x = vec![0.0; a.cols()];
    let objective = |x: &[f64]| -> (f64, f64) {
        let mut r = y.to_vec();
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (ri, ai) in r.iter_mut().zip(a.col(j)) {
                *ri -= xj * ai;
            }
        }
        let rn = norm2(&r);
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        (0.5 * rn * rn + lambda * l1, rn)
    };

    let (obj0, _) = objective(&x);
    let mut objective_history = vec![obj0];
    let mut residual_history = vec![norm2(y)];
    let mut iterations = max_iter;
    for iter in 1..=max_iter {
        // grad = A^T (A x - y)
        let mut ax = a.matvec(&x);
        for (axi, yi) in ax.iter_mut().zip(y) {
            *axi -= yi;
        }
        let grad = a.matvec_t(&ax);
        let mut change_sq = 0.0;
        for (xi, gi) in x.iter_mut().zip(&grad) {
            let new = soft_threshold(*xi - step * gi, step * lambda);
            change_sq += (new - *xi) * (new - *xi);
            *xi = new;
        }
        let (obj, rn) = objective(&x);
        objective_history.push(obj);
        residual_history.push(rn);
        if change_sq.sqrt() < tol {
            iterations = iter;
            break;
        }
    }

    let support: Vec<usize> = x
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > 1e-8)
        .map(|(i, _)| i)
        .collect();
    // Entries below the support threshold are reported as exact zeros.
    let coefficients: Vec<f64> = x
        .iter()
        .map(|&v| if v.abs() > 1e-8 { v } else { 0.0 })
        .collect();
    Ok(SparseSolution {
        residual_norm: *residual_history.last().unwrap(),
        coefficients,
        support,
        iterations,
        rank_deficient: false,
        residual_history,
        objective_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_matrix_is_deterministic() {
        let a = gaussian_matrix(35, 513, 7).unwrap();
        let b = gaussian_matrix(35, 513, 7).unwrap();
        assert_eq!(a, b);
        let c = gaussian_matrix(35, 513, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_matrix_minimal_and_bad_shapes() {
        let m = gaussian_matrix(2, 3, 0).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert!(gaussian_matrix(3, 3, 0).is_err());
        assert!(gaussian_matrix(0, 3, 0).is_err());
        assert!(gaussian_matrix(4, 2, 0).is_err());
    }

    #[test]
    fn gaussian_entries_match_declared_distribution() {
        let m = gaussian_matrix(64, 4096, 11).unwrap();
        let n = (m.rows() * m.cols()) as f64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for i in 0..m.rows() {
            for &v in m.row(i) {
                sum += v;
                sum_sq += v * v;
            }
        }
        let mean = sum / n;
        let var = sum_sq / n - mean * mean;
        assert!(mean.abs() < 0.005, "mean {mean}");
        let want = 1.0 / 64.0;
        assert!((var - want).abs() / want < 0.05, "var {var} vs {want}");
    }

    #[test]
    fn coordinate_sampling_selects_distinct_coordinates() {
        let m = coordinate_sampling_matrix(5, 20, 3).unwrap();
        assert_eq!(m, coordinate_sampling_matrix(5, 20, 3).unwrap());
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..5 {
            let row = m.row(i);
            let ones: Vec<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, _)| j)
                .collect();
            assert_eq!(ones.len(), 1, "row {i} must be a coordinate vector");
            assert_eq!(row[ones[0]], 1.0);
            assert!(seen.insert(ones[0]), "coordinate repeated");
        }
    }

    #[test]
    fn project_is_linear_and_picks_columns() {
        let phi = gaussian_matrix(4, 10, 5).unwrap();
        assert_eq!(project(&phi, &vec![0.0; 10]).unwrap(), vec![0.0; 4]);

        let a: Vec<f64> = (0..10).map(|i| i as f64 * 0.3 - 1.0).collect();
        let b: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let pa = project(&phi, &a).unwrap();
        let pb = project(&phi, &b).unwrap();
        let ps = project(&phi, &sum).unwrap();
        for i in 0..4 {
            assert!((ps[i] - pa[i] - pb[i]).abs() < 1e-12);
        }

        let mut e3 = vec![0.0; 10];
        e3[3] = 1.0;
        let col = project(&phi, &e3).unwrap();
        for i in 0..4 {
            assert_eq!(col[i], phi.row(i)[3]);
        }

        assert!(matches!(
            project(&phi, &vec![0.0; 9]),
            Err(SolverError::DimensionMismatch { expected: 10, got: 9 })
        ));
    }

    #[test]
    fn normalize_l2_examples() {
        let v = normalize_l2(&[3.0, 4.0]).unwrap();
        assert!((v[0] - 0.6).abs() < 1e-15);
        assert!((v[1] - 0.8).abs() < 1e-15);

        let u = normalize_l2(&v).unwrap();
        for (a, b) in u.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((norm2(&u) - 1.0).abs() < 1e-12);

        assert!(matches!(normalize_l2(&[0.0, 0.0]), Err(SolverError::ZeroVector)));
    }

    #[test]
    fn omp_on_identity_recovers_exactly() {
        let a = Matrix::identity(4);
        let sol = omp(&a, &[0.0, 3.0, 0.0, -2.0], 2, 1e-9).unwrap();
        assert_eq!(sol.coefficients, vec![0.0, 3.0, 0.0, -2.0]);
        assert!(sol.residual_norm < 1e-12);
        assert_eq!(sol.iterations, 2);
        // Largest correlation first.
        assert_eq!(sol.support, vec![1, 3]);
    }

    /// Deterministic orthonormal columns from QR-by-Gram-Schmidt on a
    /// seeded Gaussian block.
    fn orthonormal_columns(rows: usize, cols: usize, seed: u64) -> Matrix {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(cols);
        while columns.len() < cols {
            let mut v: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
            for c in &columns {
                let p = dot(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= p * ci;
                }
            }
            let n = norm2(&v);
            if n > 1e-6 {
                columns.push(v.iter().map(|x| x / n).collect());
            }
        }
        Matrix::from_columns(columns)
    }

    #[test]
    fn omp_recovers_two_sparse_combination_of_orthonormal_atoms() {
        let a = orthonormal_columns(8, 8, 21);
        let mut y = vec![0.0; 8];
        for i in 0..8 {
            y[i] = 2.0 * a.get(i, 1) - 1.0 * a.get(i, 5);
        }
        let sol = omp(&a, &y, 2, 1e-12).unwrap();
        let mut support = sol.support.clone();
        support.sort_unstable();
        assert_eq!(support, vec![1, 5]);
        assert!((sol.coefficients[1] - 2.0).abs() < 1e-10);
        assert!((sol.coefficients[5] + 1.0).abs() < 1e-10);
        assert!(sol.residual_norm < 1e-10);
    }

    #[test]
    fn omp_single_atom_identifies_each_column() {
        let a = orthonormal_columns(6, 6, 3);
        for j in 0..6 {
            let y: Vec<f64> = (0..6).map(|i| a.get(i, j)).collect();
            let sol = omp(&a, &y, 1, 1e-12).unwrap();
            assert_eq!(sol.support, vec![j]);
            assert!((sol.coefficients[j] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn omp_rejects_bad_inputs() {
        let a = Matrix::from_columns(vec![vec![2.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(
            omp(&a, &[1.0, 0.0], 1, 1e-6),
            Err(SolverError::BadColumns { col: 0, .. })
        ));

        let i2 = Matrix::identity(2);
        assert!(matches!(
            omp(&i2, &[1.0], 1, 1e-6),
            Err(SolverError::DimensionMismatch { .. })
        ));
        assert!(omp(&i2, &[1.0, 0.0], 0, 1e-6).is_err());
        assert!(omp(&i2, &[1.0, 0.0], 3, 1e-6).is_err());
    }

    #[test]
    fn omp_zero_target_stops_immediately() {
        let a = Matrix::identity(3);
        let sol = omp(&a, &[0.0; 3], 2, 1e-6).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.support.is_empty());
        assert_eq!(sol.residual_norm, 0.0);
    }

    #[test]
    fn omp_flags_rank_deficient_support() {
        // Two independent atoms plus their normalized sum. With tol = 0
        // the solver keeps selecting past the exact solution and hits a
        // singular Gram on the third pick.
        let a0 = normalize_l2(&[1.0, 0.3, -0.2]).unwrap();
        let a1 = normalize_l2(&[-0.1, 1.0, 0.4]).unwrap();
        let sum: Vec<f64> = a0.iter().zip(&a1).map(|(x, y)| x + y).collect();
        let a2 = normalize_l2(&sum).unwrap();
        let a = Matrix::from_columns(vec![a0.clone(), a1.clone(), a2]);
        let y: Vec<f64> = (0..3).map(|i| 1.5 * a0[i] - 0.7 * a1[i]).collect();

        let sol = omp(&a, &y, 3, 0.0).unwrap();
        if sol.iterations == 3 {
            assert!(sol.rank_deficient, "third atom must trip the fallback");
        }
        assert!(sol.residual_norm < 1e-10);
    }

    #[test]
    fn omp_residuals_never_increase_and_end_orthogonal() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let m = 12;
            let n = 30;
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                    normalize_l2(&v).unwrap()
                })
                .collect();
            let a = Matrix::from_columns(cols);
            let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sol = omp(&a, &y, 6, 1e-9).unwrap();

            for w in sol.residual_history.windows(2) {
                assert!(w[1] <= w[0], "residual rose: {} -> {}", w[0], w[1]);
            }
            let r = {
                let mut r = y.clone();
                for (j, &c) in sol.coefficients.iter().enumerate() {
                    if c != 0.0 {
                        for (ri, ai) in r.iter_mut().zip(a.col(j)) {
                            *ri -= c * ai;
                        }
                    }
                }
                r
            };
            for &j in &sol.support {
                assert!(dot(&r, a.col(j)).abs() < 1e-8, "residual not orthogonal to atom {j}");
            }
            // No duplicate selections.
            let mut dedup = sol.support.clone();
            dedup.sort_unstable();
            dedup.dedup();
            assert_eq!(dedup.len(), sol.support.len());
        }
    }

    #[test]
    fn ista_soft_thresholds_on_identity() {
        let a = Matrix::identity(2);
        let sol = ista_l1(&a, &[3.0, 0.5], 1.0, 500, 1e-12).unwrap();
        assert!((sol.coefficients[0] - 2.0).abs() < 1e-6, "{:?}", sol.coefficients);
        assert_eq!(sol.coefficients[1], 0.0);
        assert_eq!(sol.support, vec![0]);
    }

    #[test]
    fn ista_approaches_least_squares_when_lambda_vanishes() {
        // Overdetermined, well-conditioned: columns of a tall orthonormal
        // block; least squares is just the coordinate projection.
        let a = orthonormal_columns(6, 2, 13);
        let y: Vec<f64> = (0..6).map(|i| 1.2 * a.get(i, 0) - 0.4 * a.get(i, 1) + 0.01).collect();
        let ls: Vec<f64> = (0..2).map(|j| dot(a.col(j), &y)).collect();
        let sol = ista_l1(&a, &y, 1e-9, 5000, 1e-14).unwrap();
        for (got, want) in sol.coefficients.iter().zip(&ls) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn ista_objective_never_increases() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let m = 10;
            let n = 24;
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                    normalize_l2(&v).unwrap()
                })
                .collect();
            let a = Matrix::from_columns(cols);
            let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sol = ista_l1(&a, &y, 0.05, 300, 0.0).unwrap();
            for w in sol.objective_history.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-12,
                    "objective rose: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn ista_rejects_nonpositive_lambda() {
        let a = Matrix::identity(2);
        assert!(ista_l1(&a, &[1.0, 0.0], 0.0, 10, 1e-6).is_err());
        assert!(ista_l1(&a, &[1.0, 0.0], -1.0, 10, 1e-6).is_err());
    }
}

//! Small dense linear algebra: Gaussian elimination and cyclic Jacobi.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest matrix accepted by [`symmetric_eigen`].
pub const MAX_EIGEN_DIM: usize = 64;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::config(format!(
            "solve_dense: expected square system, got {}x{} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut x = b.clone();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);

    for col in 0..n {
        let (pivot, pivot_abs) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= f64::EPSILON * scale * n as f64 {
            return Err(Error::Solver(format!(
                "singular matrix (pivot {pivot_abs:e} in column {col})"
            )));
        }
        if pivot != col {
            m.swap_rows(pivot, col);
            x.swap_rows(pivot, col);
        }
        let diag = m[(col, col)];
        for r in col + 1..n {
            let factor = m[(r, col)] / diag;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                m[(r, c)] -= factor * m[(col, c)];
            }
            x[r] -= factor * x[col];
        }
    }

    for row in (0..n).rev() {
        let mut acc = x[row];
        for c in row + 1..n {
            acc -= m[(row, c)] * x[c];
        }
        x[row] = acc / m[(row, row)];
    }
    Ok(x)
}

/// Largest absolute asymmetry `|m_ij - m_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below `1e-12`
/// (relative to the matrix norm when that exceeds one).
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::config("symmetric_eigen: matrix is not square"));
    }
    if n > MAX_EIGEN_DIM {
        return Err(Error::config(format!(
            "symmetric_eigen: dimension {n} exceeds {MAX_EIGEN_DIM}"
        )));
    }
    let asym = asymmetry(m);
    if asym > 1e-10 {
        return Err(Error::config(format!(
            "symmetric_eigen: matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("symmetric_eigen: non-finite entry"));
    }

    let mut a = (m + m.transpose()) * 0.5;
    let tol = 1e-12 * a.norm().max(1.0);
    const MAX_SWEEPS: usize = 100;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, p, q, c, s);
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Applies `a <- Jᵀ a J` for the Givens rotation in the (p, q) plane.
fn rotate(a: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
}

/// `true` when every eigenvalue of `a` has a strictly negative real part.
pub fn is_hurwitz(a: &DMatrix<f64>) -> bool {
    spectral_abscissa(a) < 0.0
}

/// Largest real part among the eigenvalues of a general square matrix.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// 2-norm condition number of a symmetric positive semidefinite matrix.
pub fn spd_condition(m: &DMatrix<f64>) -> Result<f64> {
    let eig = symmetric_eigen(m)?;
    let lo = eig.first().copied().unwrap_or(0.0);
    let hi = eig.last().copied().unwrap_or(0.0);
    Ok(if lo <= 0.0 { f64::INFINITY } else { hi / lo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn solves_with_pivoting() {
        // Zero in the leading position forces a row swap.
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 2.0, 0.0, 3.0]);
        let x_true = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let b = &a * &x_true;
        let x = solve_dense(&a, &b).unwrap();
        assert_abs_diff_eq!((x - x_true).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(solve_dense(&a, &b), Err(Error::Solver(_))));
    }

    #[test]
    fn eigen_identity_and_diagonal() {
        let eye = DMatrix::<f64>::identity(3, 3);
        assert_eq!(symmetric_eigen(&eye).unwrap(), vec![1.0, 1.0, 1.0]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        assert_eq!(symmetric_eigen(&d).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigen_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = symmetric_eigen(&m).unwrap();
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(symmetric_eigen(&m), Err(Error::Config { .. })));
    }

    #[test]
    fn eigen_agrees_with_nalgebra_on_random_spd() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 5, 13, 30] {
            let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let m = &g * g.transpose();
            let ours = symmetric_eigen(&m).unwrap();
            let mut theirs: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&theirs) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn hurwitz_detection() {
        let stable = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -2.0]);
        assert!(is_hurwitz(&stable));
        let unstable = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(!is_hurwitz(&unstable));
    }
}

//! Minimum-norm linear least squares through a one-sided Jacobi SVD.

use alloc::vec::Vec;

/// Singular values below `RANK_TOLERANCE * max_singular_value` count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    pub rank: usize,
    /// In column order of the rotated basis, not sorted.
    pub singular_values: Vec<f64>,
}

/// Solves `min ||A x - b||` for the row-major `rows x cols` matrix `a`,
/// returning the minimum-norm minimiser when `A` is rank deficient.
///
/// Hestenes' method: plane rotations orthogonalise the columns of `A` in
/// place (`A V = U Σ`), after which `x = Σ_k v_k (u_k · b) / σ_k²` over the
/// numerically non-zero `σ_k`.
pub fn least_squares(a: &[f64], rows: usize, cols: usize, b: &[f64]) -> LeastSquares {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    // Column-major working copy.
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| a[i * cols + j]).collect()).collect();
    let mut v: Vec<Vec<f64>> =
        (0..cols).map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();

    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha: f64 = u[i].iter().map(|x| x * x).sum();
                let beta: f64 = u[j].iter().map(|x| x * x).sum();
                let gamma: f64 = u[i].iter().zip(&u[j]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut u, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let singular_values: Vec<f64> =
        u.iter().map(|col| libm::sqrt(col.iter().map(|x| x * x).sum())).collect();
    let max_sv = singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = max_sv * RANK_TOLERANCE;
    let mut solution = alloc::vec![0.0; cols];
    let mut rank = 0;
    for (k, &sv) in singular_values.iter().enumerate() {
        if sv <= cutoff || sv == 0.0 {
            continue;
        }
        rank += 1;
        let coef = u[k].iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (sv * sv);
        for (x, vk) in solution.iter_mut().zip(&v[k]) {
            *x += coef * vk;
        }
    }
    LeastSquares { solution, rank, singular_values }
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn square_system() {
        // [2 1; 1 3] x = [3; 5] -> x = [0.8, 1.4]
        let r = least_squares(&[2.0, 1.0, 1.0, 3.0], 2, 2, &[3.0, 5.0]);
        assert_eq!(r.rank, 2);
        assert!((r.solution[0] - 0.8).abs() < 1e-14);
        assert!((r.solution[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn duplicated_column_splits_weight() {
        // Columns identical: minimum norm puts half the weight on each.
        let a = vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        let r = least_squares(&a, 3, 2, &[2.0, 4.0, 6.0]);
        assert_eq!(r.rank, 1);
        assert!((r.solution[0] - 1.0).abs() < 1e-12);
        assert!((r.solution[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let r = least_squares(&[0.0; 4], 2, 2, &[1.0, 1.0]);
        assert_eq!((r.rank, r.solution), (0, vec![0.0, 0.0]));
    }
}

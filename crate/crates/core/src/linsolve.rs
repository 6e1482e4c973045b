//! Tiny dense solver for the n <= 4 systems that show up in circle fitting
//! and constraint projection. Gauss-Jordan with partial pivoting, plus an
//! infinity-norm condition estimate from the explicit inverse.

/// Solves A x = b in place for a small square system. Returns the solution
/// together with an estimate of the condition number, or `None` when a pivot
/// vanishes.
pub(crate) fn solve_small(a: &[Vec<f64>], b: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));

    let norm_a = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);

    // Augment with the identity to extract the inverse for conditioning.
    let mut m = vec![vec![0.0; 2 * n + 1]; n];
    for i in 0..n {
        m[i][..n].copy_from_slice(&a[i]);
        m[i][n + i] = 1.0;
        m[i][2 * n] = b[i];
    }

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot_row][col] == 0.0 || !m[pivot_row][col].is_finite() {
            return None;
        }
        m.swap(col, pivot_row);
        let pivot = m[col][col];
        for k in col..=2 * n {
            m[col][k] /= pivot;
        }
        for row in 0..n {
            if row != col && m[row][col] != 0.0 {
                let factor = m[row][col];
                for k in col..=2 * n {
                    m[row][k] -= factor * m[col][k];
                }
            }
        }
    }

    let x: Vec<f64> = (0..n).map(|i| m[i][2 * n]).collect();
    let norm_inv = (0..n)
        .map(|i| (0..n).map(|j| m[i][n + j].abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let cond = norm_a * norm_inv;
    if !x.iter().all(|v| v.is_finite()) || !cond.is_finite() {
        return None;
    }
    Some((x, cond))
}

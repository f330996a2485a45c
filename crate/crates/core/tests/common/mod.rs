//! Helpers shared by the integration-test targets: independent oracles
//! (finite differences, a dense determinant, the recursive frame
//! construction) and random input generators with fixed seeds.
//!
//! Each oracle is deliberately written in the most direct style possible
//! so it shares no code path with the library functions it checks.
#![allow(dead_code)]
// Elimination and entry-comparison loops index two rows of one buffer.
#![allow(clippy::needless_range_loop)]

use orbint::{EulerAngles, GramMatrix, TriangularFactor};
use rand::Rng;

/// Determinant of a dense square matrix by Gaussian elimination with
/// partial pivoting. Good enough for the small systems in these tests.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("nonempty column");
        if a[pivot_row][col] == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            a.swap(pivot_row, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for j in col..n {
                a[row][j] -= factor * a[col][j];
            }
        }
    }
    det
}

/// |det| of the Jacobian of the packed map lower(W) -> lower(W W^T),
/// computed by central differences — an oracle fully independent of the
/// closed-form Jacobian.
pub fn fd_jacobian_determinant(k: usize, lower: &[f64], step: f64) -> f64 {
    let d = lower.len();
    let gram_lower = |packed: Vec<f64>| -> Vec<f64> {
        TriangularFactor::from_lower(k, k, packed)
            .expect("perturbed factor stays valid")
            .gram()
            .lower()
            .to_vec()
    };
    let mut jacobian = vec![vec![0.0; d]; d];
    for col in 0..d {
        let h = step * lower[col].abs().max(1.0);
        let mut plus = lower.to_vec();
        plus[col] += h;
        let mut minus = lower.to_vec();
        minus[col] -= h;
        let up = gram_lower(plus);
        let down = gram_lower(minus);
        for row in 0..d {
            jacobian[row][col] = (up[row] - down[row]) / (2.0 * h);
        }
    }
    determinant(jacobian).abs()
}

/// A random triangular factor well inside the positive-diagonal region,
/// safe for finite differencing and minor ratios.
pub fn random_interior_factor<R: Rng + ?Sized>(k: usize, m: usize, rng: &mut R) -> TriangularFactor {
    let mut lower = Vec::with_capacity(k * (k + 1) / 2);
    for i in 0..k {
        for j in 0..=i {
            if i == j {
                lower.push(rng.gen_range(0.5..2.0));
            } else {
                lower.push(rng.gen_range(-1.0..1.0));
            }
        }
    }
    TriangularFactor::from_lower(k, m, lower).expect("generated factor is valid")
}

/// Leading principal minor determinants of a Gram matrix computed the
/// naive way (dense elimination on each leading block), independent of
/// the factorization-based implementation.
pub fn dense_leading_minors(g: &GramMatrix) -> Vec<f64> {
    let dense = g.to_dense();
    (1..=g.k())
        .map(|l| {
            let block: Vec<Vec<f64>> = dense[..l].iter().map(|row| row[..l].to_vec()).collect();
            determinant(block)
        })
        .collect()
}

/// The frame recursion that generates a rotation from direction angles:
/// with f_m = e_m and f_j = sin t_j e_j + cos t_j f_{j+1}, the columns
/// are a_j = cos t_j e_j - sin t_j f_{j+1} for j < m, and a_m = f_1.
/// Independent of the closed-form entry table.
pub fn rotation_by_frame_recursion(angles: &EulerAngles) -> Vec<Vec<f64>> {
    let m = angles.m();
    let theta = angles.theta();
    // frames[j] = f_{j+1} in 1-based terms; frames[m-1] = e_m.
    let mut frames = vec![vec![0.0; m]; m];
    frames[m - 1][m - 1] = 1.0;
    for j in (0..m - 1).rev() {
        let mut f = frames[j + 1].clone();
        for x in &mut f {
            *x *= theta[j].cos();
        }
        f[j] += theta[j].sin();
        frames[j] = f;
    }
    // Columns as a row-major matrix.
    let mut a = vec![vec![0.0; m]; m];
    for (q, theta_q) in theta.iter().enumerate() {
        let mut column = frames[q + 1].clone();
        for x in &mut column {
            *x *= -theta_q.sin();
        }
        column[q] += theta_q.cos();
        for r in 0..m {
            a[r][q] = column[r];
        }
    }
    for r in 0..m {
        a[r][m - 1] = frames[0][r];
    }
    a
}

/// Relative gap |a - b| / max(|a|, |b|, 1).
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

use alloc::vec::Vec;

use super::Matrix;

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order, by one-sided (Hestenes) Jacobi.
///
/// Columns of a working copy are rotated pairwise until mutually orthogonal;
/// the column norms are then the singular values. Wide inputs are transposed
/// first so the working copy is always tall. Relative accuracy is good even
/// for small singular values, which is what the condition-number diagnostics
/// of badly excited trajectories need.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let rows = work.rows();
    let cols = work.cols();
    let mut data = work.into_vec();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (head, tail) = data.split_at_mut(q * rows);
                let cp = &mut head[p * rows..(p + 1) * rows];
                let cq = &mut tail[..rows];

                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for (&x, &y) in cp.iter().zip(cq.iter()) {
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = data
        .chunks_exact(rows)
        .map(|col| libm::sqrt(col.iter().map(|x| x * x).sum()))
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `σ_max / σ_min`, or `None` when the smallest singular value is zero.
pub fn condition_number(singular_values: &[f64]) -> Option<f64> {
    let max = *singular_values.first()?;
    let min = *singular_values.last()?;
    (min > 0.0).then(|| max / min)
}

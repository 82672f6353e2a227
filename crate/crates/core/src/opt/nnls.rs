//! Lawson-Hanson active-set nonnegative least squares.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    /// `A x - b`.
    pub residual: Vec<f64>,
    pub iterations: usize,
}

/// Minimizes `||A x - b||_2` over `x >= 0`. `columns[j]` is column `j` of `A`.
///
/// Columns are scaled to unit norm internally; the returned `x` is in the
/// original scaling.
pub fn nnls(columns: &[Vec<f64>], b: &[f64]) -> Result<NnlsSolution> {
    let m = b.len();
    let k = columns.len();
    if let Some(c) = columns.iter().find(|c| c.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: c.len(),
        });
    }
    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let a = DMatrix::from_fn(m, k, |i, j| {
        if norms[j] > 0.0 {
            columns[j][i] / norms[j]
        } else {
            0.0
        }
    });
    let bv = DVector::from_column_slice(b);

    let mut x = DVector::zeros(k);
    let mut passive = vec![false; k];
    let tol = 1e-14 * (1.0 + bv.norm()) * (k.max(m) as f64);
    let max_iter = 30 * (k + 1);
    let mut iterations = 0;

    loop {
        let w = a.transpose() * (&bv - &a * &x);
        let candidate = (0..k)
            .filter(|&j| !passive[j] && norms[j] > 0.0 && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else {
            break;
        };
        passive[j] = true;

        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::NotConverged {
                    solver: "nnls",
                    iterations,
                    gap: w.max(),
                });
            }
            let z = solve_passive(&a, &bv, &passive);
            if (0..k).filter(|&i| passive[i]).all(|i| z[i] > 0.0) {
                x = z;
                break;
            }
            // step toward z until the first passive coordinate hits zero
            let alpha = (0..k)
                .filter(|&i| passive[i] && z[i] <= 0.0)
                .map(|i| x[i] / (x[i] - z[i]))
                .fold(f64::INFINITY, f64::min);
            x += (&z - &x) * alpha;
            for i in 0..k {
                if passive[i] && x[i] <= 1e-15 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }

    let residual = (&a * &x - &bv).iter().copied().collect();
    let x = (0..k)
        .map(|j| if norms[j] > 0.0 { x[j] / norms[j] } else { 0.0 })
        .collect();
    Ok(NnlsSolution {
        x,
        residual,
        iterations,
    })
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let sub = a.select_columns(&idx);
    let sol = sub
        .svd(true, true)
        .solve(b, 1e-13)
        .expect("SVD computed with both factors");
    let mut z = DVector::zeros(passive.len());
    for (pos, &i) in idx.iter().enumerate() {
        z[i] = sol[pos];
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_nonnegative_solution() {
        let cols = vec![vec![1.0, 0.0, 1.0], vec![0.0, 2.0, 1.0]];
        let b = [2.0, 6.0, 5.0];
        let sol = nnls(&cols, &b).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
        assert!((sol.x[1] - 3.0).abs() < 1e-12);
        assert!(sol.residual.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn clamps_negative_direction() {
        // unconstrained solution would be x = -1
        let sol = nnls(&[vec![1.0, 1.0]], &[-1.0, -1.0]).unwrap();
        assert_eq!(sol.x[0], 0.0);
        assert!((sol.residual[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_signs() {
        // b = 1*c0 - 1*c1 + ...: best nonnegative fit uses c0 only
        let cols = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let sol = nnls(&cols, &[1.0, -1.0]).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-14);
        assert_eq!(sol.x[1], 0.0);
    }
}

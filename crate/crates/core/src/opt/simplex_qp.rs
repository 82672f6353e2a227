//! Away-step Frank-Wolfe for weighted least squares over the probability
//! simplex:
//!
//! `minimize 1/2 sum_y w(y) (sum_x beta(x) a_x(y) - t(y))^2` subject to
//! `beta >= 0`, `sum beta = 1`.

use crate::{Error, Result};

/// Problem data. `atoms[x]` is the column `a_x`; all vectors have the
/// same length as `target` and `weights`.
#[derive(Clone, Copy, Debug)]
pub struct SimplexQp<'a> {
    pub atoms: &'a [Vec<f64>],
    pub target: &'a [f64],
    pub weights: &'a [f64],
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub beta: Vec<f64>,
    /// Objective value at `beta`.
    pub value: f64,
    /// Frank-Wolfe duality gap; the optimum lies in `[value - gap, value]`.
    pub gap: f64,
    pub iterations: usize,
}

impl SimplexQp<'_> {
    fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = self.target.iter().map(|t| -t).collect();
        for (a, &b) in self.atoms.iter().zip(beta) {
            if b != 0.0 {
                for (ri, ai) in r.iter_mut().zip(a) {
                    *ri += b * ai;
                }
            }
        }
        r
    }

    fn value(&self, r: &[f64]) -> f64 {
        0.5 * r
            .iter()
            .zip(self.weights)
            .map(|(ri, w)| w * ri * ri)
            .sum::<f64>()
    }

    fn gradient(&self, r: &[f64]) -> Vec<f64> {
        self.atoms
            .iter()
            .map(|a| {
                a.iter()
                    .zip(r)
                    .zip(self.weights)
                    .map(|((ai, ri), w)| w * ai * ri)
                    .sum()
            })
            .collect()
    }
}

/// Runs away-step Frank-Wolfe from the vertex with the smallest objective
/// until the duality gap is at most `tol`.
pub fn minimize_on_simplex(qp: SimplexQp<'_>, tol: f64, max_iter: usize) -> Result<QpSolution> {
    let k = qp.atoms.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no atoms".into()));
    }
    let m = qp.target.len();
    if qp.weights.len() != m || qp.atoms.iter().any(|a| a.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: qp.weights.len(),
        });
    }

    let start = (0..k)
        .map(|x| {
            let mut e = vec![0.0; k];
            e[x] = 1.0;
            qp.value(&qp.residual(&e))
        })
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(x, _)| x)
        .unwrap_or(0);
    let mut beta = vec![0.0; k];
    beta[start] = 1.0;
    let mut r = qp.residual(&beta);
    let mut gap = f64::INFINITY;

    for iter in 0..max_iter {
        if iter % 50 == 49 {
            r = qp.residual(&beta);
        }
        let g = qp.gradient(&r);
        let g_beta: f64 = g.iter().zip(&beta).map(|(a, b)| a * b).sum();
        let s = argmin(&g);
        let fw_gap = g_beta - g[s];
        gap = fw_gap.max(0.0);
        if gap <= tol {
            let r = qp.residual(&beta);
            return Ok(QpSolution {
                value: qp.value(&r),
                beta,
                gap,
                iterations: iter,
            });
        }
        let v = (0..k)
            .filter(|&x| beta[x] > 0.0)
            .max_by(|&a, &b| g[a].total_cmp(&g[b]))
            .expect("beta is on the simplex");
        let away_gap = g[v] - g_beta;

        // direction d in beta-space, its image ad = A d, and the largest step
        let (dir, max_step): (Vec<f64>, f64) = if fw_gap >= away_gap || beta[v] >= 1.0 {
            let mut d: Vec<f64> = beta.iter().map(|b| -b).collect();
            d[s] += 1.0;
            (d, 1.0)
        } else {
            let mut d = beta.clone();
            d[v] -= 1.0;
            (d, beta[v] / (1.0 - beta[v]))
        };
        let mut ad = vec![0.0; m];
        for (a, &dx) in qp.atoms.iter().zip(&dir) {
            if dx != 0.0 {
                for (adi, ai) in ad.iter_mut().zip(a) {
                    *adi += dx * ai;
                }
            }
        }
        let curv: f64 = ad.iter().zip(qp.weights).map(|(a, w)| w * a * a).sum();
        let slope: f64 = ad
            .iter()
            .zip(&r)
            .zip(qp.weights)
            .map(|((a, ri), w)| w * a * ri)
            .sum();
        let step = if curv > 0.0 {
            (-slope / curv).clamp(0.0, max_step)
        } else {
            max_step
        };
        if step == 0.0 {
            // no descent possible along either direction at machine precision
            break;
        }
        for (b, d) in beta.iter_mut().zip(&dir) {
            *b = (*b + step * d).max(0.0);
        }
        if step == max_step && max_step < 1.0 {
            beta[v] = 0.0;
        }
        if step == 1.0 && fw_gap >= away_gap {
            beta.iter_mut().for_each(|b| *b = 0.0);
            beta[s] = 1.0;
        }
        let total: f64 = beta.iter().sum();
        beta.iter_mut().for_each(|b| *b /= total);
        for (ri, a) in r.iter_mut().zip(&ad) {
            *ri += step * a;
        }
    }

    let r = qp.residual(&beta);
    let value = qp.value(&r);
    let g = qp.gradient(&r);
    let g_beta: f64 = g.iter().zip(&beta).map(|(a, b)| a * b).sum();
    let final_gap = (g_beta - g[argmin(&g)]).max(0.0);
    if final_gap <= tol {
        return Ok(QpSolution {
            beta,
            value,
            gap: final_gap,
            iterations: max_iter,
        });
    }
    Err(Error::NotConverged {
        solver: "away-step Frank-Wolfe",
        iterations: max_iter,
        gap: final_gap.min(gap),
    })
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projects_interior_point() {
        let atoms = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let target = [0.3, 0.7];
        let qp = SimplexQp {
            atoms: &atoms,
            target: &target,
            weights: &[1.0, 1.0],
        };
        let sol = minimize_on_simplex(qp, 1e-15, 10_000).unwrap();
        assert!((sol.beta[0] - 0.3).abs() < 1e-9);
        assert!(sol.value < 1e-15);
    }

    #[test]
    fn exterior_point_distance() {
        // distance from (1, 1) to the segment between e1 and e2 is 1/sqrt(2)
        let atoms = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let target = [1.0, 1.0];
        let qp = SimplexQp {
            atoms: &atoms,
            target: &target,
            weights: &[1.0, 1.0],
        };
        let sol = minimize_on_simplex(qp, 1e-14, 10_000).unwrap();
        assert!((sol.value - 0.25).abs() < 1e-12);
        assert!((sol.beta[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn optimum_on_a_face_needs_away_steps() {
        // target is the midpoint of atoms 0 and 1; atom 2 starts closest
        let atoms = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.45, 0.45, 0.1],
        ];
        let target = [0.5, 0.5, 0.0];
        let qp = SimplexQp {
            atoms: &atoms,
            target: &target,
            weights: &[1.0, 1.0, 1.0],
        };
        let sol = minimize_on_simplex(qp, 1e-16, 100_000).unwrap();
        assert!(sol.value < 1e-16);
        assert!(sol.beta[2] < 1e-7);
    }
}

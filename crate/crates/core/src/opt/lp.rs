//! Dense two-phase simplex method with Bland's rule.
//!
//! Solves `maximize c.x` subject to linear constraints and `x >= 0`. Meant
//! for the handful-of-variables programs arising from small channels.

use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

struct Tableau {
    // rows = constraints, last column = rhs
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        self.a[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.a[row].clone();
        for (i, r) in self.a.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `obj . x` over columns allowed by `allowed`, starting from
    /// the current basic feasible solution.
    fn optimize(&mut self, obj: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<()> {
        let rhs = self.cols;
        let max_iter = 50 * (self.cols + self.a.len()) + 1000;
        for _ in 0..max_iter {
            // reduced costs: obj_j - c_B . column_j
            let entering = (0..self.cols).filter(|&j| allowed(j)).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = obj[j]
                    - self
                        .a
                        .iter()
                        .zip(&self.basis)
                        .map(|(r, &b)| obj[b] * r[j])
                        .sum::<f64>();
                reduced > 1e-10
            });
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, r) in self.a.iter().enumerate() {
                if r[col] > PIVOT_TOL {
                    let ratio = r[rhs] / r[col];
                    let better = match best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < br - 1e-13
                                || (ratio <= br + 1e-13 && self.basis[i] < self.basis[bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(Error::NotConverged {
            solver: "simplex",
            iterations: max_iter,
            gap: f64::NAN,
        })
    }
}

/// Maximizes `objective . x` subject to `constraints` and `x >= 0`.
pub fn maximize(objective: &[f64], constraints: &[Constraint]) -> Result<LpSolution> {
    let n = objective.len();
    if let Some(c) = constraints.iter().find(|c| c.coeffs.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.coeffs.len(),
        });
    }
    // normalize to nonnegative right-hand sides
    let rows: Vec<(Vec<f64>, Relation, f64)> = constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v).collect(), rel, -c.rhs)
            } else {
                (c.coeffs.clone(), c.relation, c.rhs)
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut a = Vec::with_capacity(rows.len());
    let mut basis = Vec::with_capacity(rows.len());
    let (mut slack, mut art) = (n, art_start);
    for (coeffs, rel, rhs) in &rows {
        let mut r = vec![0.0; cols + 1];
        r[..n].copy_from_slice(coeffs);
        r[cols] = *rhs;
        match rel {
            Relation::Le => {
                r[slack] = 1.0;
                basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                r[slack] = -1.0;
                slack += 1;
                r[art] = 1.0;
                basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                r[art] = 1.0;
                basis.push(art);
                art += 1;
            }
        }
        a.push(r);
    }
    let mut t = Tableau { a, basis, cols };

    if n_art > 0 {
        let phase1: Vec<f64> = (0..cols)
            .map(|j| if j >= art_start { -1.0 } else { 0.0 })
            .collect();
        t.optimize(&phase1, &|_| true)?;
        let infeasibility: f64 =
            t.a.iter()
                .zip(&t.basis)
                .filter(|(_, &b)| b >= art_start)
                .map(|(r, _)| r[cols])
                .sum();
        if infeasibility > 1e-9 {
            return Err(Error::Infeasible);
        }
        // drive zero-level artificials out of the basis; drop redundant rows
        let mut i = 0;
        while i < t.a.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| t.a[i][j].abs() > PIVOT_TOL) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.a.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(objective);
    t.optimize(&phase2, &|j| j < art_start)?;

    let mut x = vec![0.0; n];
    for (r, &b) in t.a.iter().zip(&t.basis) {
        if b < n {
            x[b] = r[cols].max(0.0);
        }
    }
    let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_example() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let sol = maximize(
            &[3.0, 5.0],
            &[
                Constraint::new(vec![1.0, 0.0], Relation::Le, 4.0),
                Constraint::new(vec![0.0, 2.0], Relation::Le, 12.0),
                Constraint::new(vec![3.0, 2.0], Relation::Le, 18.0),
            ],
        )
        .unwrap();
        assert!((sol.value - 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_redundant_rows() {
        // x + y = 1 stated twice, x >= 0.25; max y -> 0.75
        let sol = maximize(
            &[0.0, 1.0],
            &[
                Constraint::new(vec![1.0, 1.0], Relation::Eq, 1.0),
                Constraint::new(vec![2.0, 2.0], Relation::Eq, 2.0),
                Constraint::new(vec![1.0, 0.0], Relation::Ge, 0.25),
            ],
        )
        .unwrap();
        assert!((sol.value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let infeasible = maximize(
            &[1.0],
            &[
                Constraint::new(vec![1.0], Relation::Le, 1.0),
                Constraint::new(vec![1.0], Relation::Ge, 2.0),
            ],
        );
        assert!(matches!(infeasible, Err(Error::Infeasible)));
        let unbounded = maximize(
            &[1.0, 0.0],
            &[Constraint::new(vec![0.0, 1.0], Relation::Le, 1.0)],
        );
        assert!(matches!(unbounded, Err(Error::Unbounded)));
    }

    #[test]
    fn negative_rhs_is_flipped() {
        // -x <= -2 means x >= 2; min x -> max -x = -2
        let sol = maximize(&[-1.0], &[Constraint::new(vec![-1.0], Relation::Le, -2.0)]).unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-12);
    }
}

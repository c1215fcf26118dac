//! Exact linear programming over the rationals.
//!
//! A two-phase tableau simplex with Bland's rule, which guarantees
//! termination without any perturbation or tolerance. Variables are
//! free; internally each is split into a nonnegative pair. This kernel
//! deliberately offers nothing beyond an exact optimum and an optimal
//! point: no duals, no warm starts.

use crate::scalar::Scalar;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// maximize objective·x subject to a·x ≤ b for each (a, b), x free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Scalar>,
    pub constraints: Vec<(Vec<Scalar>, Scalar)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("infeasible program")]
    Infeasible,
    #[error("unbounded program")]
    Unbounded,
    #[error("constraint row has {got} coefficients, expected {expected}")]
    BadRow { got: usize, expected: usize },
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: Scalar,
    pub point: Vec<Scalar>,
}

struct Tableau {
    rows: Vec<Vec<Scalar>>, // m x (ncols + 1); last entry is the rhs
    cost: Vec<Scalar>,      // reduced costs; last entry is -(objective value)
    basis: Vec<usize>,
    ncols: usize,
    artificial_start: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = Scalar::one() / self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(pivot_row.iter()) {
                *v -= &factor * p;
            }
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for (v, p) in self.cost.iter_mut().zip(pivot_row.iter()) {
                *v -= &factor * p;
            }
        }
        self.basis[row] = col;
    }

    fn price_out(&mut self) {
        for i in 0..self.basis.len() {
            let b = self.basis[i];
            if !self.cost[b].is_zero() {
                let factor = self.cost[b].clone();
                let row = self.rows[i].clone();
                for (v, p) in self.cost.iter_mut().zip(row.iter()) {
                    *v -= &factor * p;
                }
            }
        }
    }

    /// Bland's rule: entering column is the lowest-index improving one,
    /// leaving row breaks ratio ties by lowest basic index.
    fn run_simplex(&mut self, allow_artificial: bool) -> Result<(), LpError> {
        loop {
            let limit = if allow_artificial { self.ncols } else { self.artificial_start };
            let Some(entering) = (0..limit).find(|&j| self.cost[j].is_positive()) else {
                return Ok(());
            };
            let mut leaving: Option<(usize, Scalar)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[entering].is_positive() {
                    continue;
                }
                let ratio = row[self.ncols].clone() / row[entering].clone();
                let better = match &leaving {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, entering);
        }
    }
}

/// Exact maximization. Returns the optimum and an optimal point (a
/// vertex of the feasible region whenever one exists).
pub fn maximize(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars;
    assert_eq!(lp.objective.len(), n, "objective length mismatch");
    for (a, _) in &lp.constraints {
        if a.len() != n {
            return Err(LpError::BadRow { got: a.len(), expected: n });
        }
    }

    let m = lp.constraints.len();
    let structural = 2 * n;
    let n_artificial = lp
        .constraints
        .iter()
        .filter(|(_, b)| b.is_negative())
        .count();
    let ncols = structural + m + n_artificial;
    let artificial_start = structural + m;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_artificial = artificial_start;
    for (i, (a, b)) in lp.constraints.iter().enumerate() {
        let mut row = vec![Scalar::zero(); ncols + 1];
        for (j, c) in a.iter().enumerate() {
            row[j] = c.clone();
            row[n + j] = -c.clone();
        }
        row[structural + i] = Scalar::one();
        row[ncols] = b.clone();
        if b.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            row[next_artificial] = Scalar::one();
            basis.push(next_artificial);
            next_artificial += 1;
        } else {
            basis.push(structural + i);
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        cost: vec![Scalar::zero(); ncols + 1],
        basis,
        ncols,
        artificial_start,
    };

    // Phase 1: maximize minus the sum of artificials.
    if n_artificial > 0 {
        for j in artificial_start..ncols {
            t.cost[j] = -Scalar::one();
        }
        t.price_out();
        t.run_simplex(true)?;
        if t.cost[ncols].is_positive() {
            return Err(LpError::Infeasible);
        }
        // Drive any leftover artificials (at level zero) out of the basis.
        let mut drop_rows = Vec::new();
        for i in 0..t.basis.len() {
            if t.basis[i] < artificial_start {
                continue;
            }
            match (0..artificial_start).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => drop_rows.push(i), // redundant constraint
            }
        }
        for &i in drop_rows.iter().rev() {
            t.rows.remove(i);
            t.basis.remove(i);
        }
    }

    // Phase 2.
    t.cost = vec![Scalar::zero(); ncols + 1];
    for (j, c) in lp.objective.iter().enumerate() {
        t.cost[j] = c.clone();
        t.cost[n + j] = -c.clone();
    }
    t.price_out();
    t.run_simplex(false)?;

    let mut split = vec![Scalar::zero(); structural];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < structural {
            split[b] = t.rows[i][ncols].clone();
        }
    }
    let point: Vec<Scalar> = (0..n).map(|j| split[j].clone() - split[n + j].clone()).collect();
    let value = -t.cost[ncols].clone();
    Ok(LpSolution { value, point })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn lp(
        objective: Vec<Scalar>,
        constraints: Vec<(Vec<Scalar>, Scalar)>,
    ) -> LinearProgram {
        LinearProgram { num_vars: objective.len(), objective, constraints }
    }

    #[test]
    fn one_dimensional_box() {
        // maximize x subject to x <= 3/2, -x <= 1
        let p = lp(vec![int(1)], vec![(vec![int(1)], ratio(3, 2)), (vec![int(-1)], int(1))]);
        let s = maximize(&p).unwrap();
        assert_eq!(s.value, ratio(3, 2));
        assert_eq!(s.point, vec![ratio(3, 2)]);
    }

    #[test]
    fn plane_with_negative_rhs_needs_phase_one() {
        // maximize -x - y subject to x + y >= 2 (i.e. -x - y <= -2),
        // x <= 5, y <= 5. Optimum -2 on the line x + y = 2.
        let p = lp(
            vec![int(-1), int(-1)],
            vec![
                (vec![int(-1), int(-1)], int(-2)),
                (vec![int(1), int(0)], int(5)),
                (vec![int(0), int(1)], int(5)),
            ],
        );
        let s = maximize(&p).unwrap();
        assert_eq!(s.value, int(-2));
        assert_eq!(s.point[0].clone() + s.point[1].clone(), int(2));
    }

    #[test]
    fn infeasible_is_detected() {
        // x <= -1 and -x <= -1 cannot both hold.
        let p = lp(
            vec![int(1)],
            vec![(vec![int(1)], int(-1)), (vec![int(-1)], int(-1))],
        );
        assert_eq!(maximize(&p).unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn unbounded_is_detected() {
        let p = lp(vec![int(1)], vec![(vec![int(-1)], int(0))]);
        assert_eq!(maximize(&p).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // The optimum sits on a degenerate vertex (three tight rows in 2d,
        // one of them redundant); Bland's rule must still terminate.
        let p = lp(
            vec![int(2), int(1)],
            vec![
                (vec![int(1), int(1)], int(3)),
                (vec![int(1), int(1)], int(3)),
                (vec![int(1), int(-1)], int(1)),
                (vec![int(-1), int(0)], int(0)),
                (vec![int(0), int(-1)], int(0)),
            ],
        );
        let s = maximize(&p).unwrap();
        assert_eq!(s.value, int(5));
        assert_eq!(s.point, vec![int(2), int(1)]);
    }
}

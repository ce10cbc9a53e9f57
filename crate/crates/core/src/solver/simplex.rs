//! Dense two-phase tableau simplex for small problems
//! `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b` of either sign.
//!
//! Bland's rule is used throughout, so the method terminates on degenerate
//! instances. Rows are normalised before pivoting; the problems solved here
//! have a few dozen columns at most.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-11;
const PHASE1_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Maximises `obj` over the current basis; columns with `allowed[j] ==
    /// false` never enter.
    fn optimise(&mut self, obj: &[f64], allowed: &[bool]) -> Result<(), LpError> {
        let scale = obj.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        loop {
            let entering = (0..self.cols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let reduced = obj[j]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(i, &b)| obj[b] * self.rows[i][j])
                        .sum::<f64>();
                reduced > PIVOT_EPS * scale
            });
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(LpError::Unbounded),
            }
        }
    }
}

/// Solves `max cᵀx` subject to `a x ≤ b`, `x ≥ 0`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, LpError> {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "one right-hand side per row");
    assert!(a.iter().all(|row| row.len() == n), "ragged constraint matrix");

    // Columns: n structural, m slack/surplus, then one artificial per
    // negative right-hand side.
    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let cols = n + m + negative.len();
    let mut rows = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let mut art = 0;
    for i in 0..m {
        let norm = a[i].iter().fold(b[i].abs(), |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
        // slack values are never reported, so the slack keeps a unit
        // coefficient after the row is normalised
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            rows[i][j] = sign * a[i][j] / norm;
        }
        rows[i][n + i] = sign;
        rows[i][cols] = sign * b[i] / norm;
        if b[i] < 0.0 {
            let col = n + m + art;
            rows[i][col] = 1.0;
            basis[i] = col;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut t = Tableau { rows, basis, cols };

    if !negative.is_empty() {
        let mut phase1 = vec![0.0; cols];
        for v in phase1.iter_mut().skip(n + m) {
            *v = -1.0;
        }
        let allowed = vec![true; cols];
        t.optimise(&phase1, &allowed)?;
        let infeasibility: f64 = (0..m).filter(|&i| t.basis[i] >= n + m).map(|i| t.rhs(i)).sum();
        if infeasibility > PHASE1_TOL {
            return Err(LpError::Infeasible);
        }
        // drive zero-level artificials out of the basis where possible
        for i in 0..m {
            if t.basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| t.rows[i][j].abs() > 1e-9 && !t.basis.contains(&j)) {
                    t.pivot(i, j);
                }
            }
        }
    }

    let mut obj = vec![0.0; cols];
    obj[..n].copy_from_slice(c);
    let mut allowed = vec![true; cols];
    for v in allowed.iter_mut().skip(n + m) {
        *v = false;
    }
    t.optimise(&obj, &allowed)?;

    let mut x = vec![0.0; n];
    for (i, &bcol) in t.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = t.rhs(i).max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective })
}

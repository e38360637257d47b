//! Small dense-tableau simplex for `max cᵀx s.t. Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The slack basis is feasible from the start, so no phase one is needed.
//! Pivoting follows Bland's rule (lowest index entering and leaving), which
//! cannot cycle on degenerate problems.

use crate::error::{Error, Result};

pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

/// `a` is row-major with `b.len()` rows of `c.len()` entries each.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = b.len();
    if a.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::LpFailure(format!("constraint matrix is not {m}x{n}")));
    }
    if let Some(bad) = b.iter().find(|v| !(**v >= -FEAS_TOL)) {
        return Err(Error::LpFailure(format!("right-hand side must be nonnegative, got {bad}")));
    }

    // columns: n structural, m slack, then rhs
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = 1.0;
        row[width - 1] = b[i].max(0.0);
    }
    // objective row holds reduced costs -c; optimal once all are >= 0
    {
        let obj = &mut t[m * width..];
        for j in 0..n {
            obj[j] = -c[j];
        }
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let max_pivots = 50 * (n + m) + 1000;
    let mut pivots = 0;

    loop {
        let obj = &t[m * width..];
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -FEAS_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let coef = t[i * width + enter];
            if coef > FEAS_TOL {
                let ratio = t[i * width + width - 1] / coef;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - FEAS_TOL || (ratio <= lr + FEAS_TOL && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::LpFailure("objective is unbounded".into()));
        };
        pivot(&mut t, width, m, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::LpFailure(format!("no optimum after {pivots} pivots")));
        }
    }

    let mut x = vec![0.0; n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i * width + width - 1].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { objective, x, pivots })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f == 0.0 {
            continue;
        }
        let r = &mut t[i * width..(i + 1) * width];
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        r[col] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let s = maximize(&[3.0, 5.0], &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]], &[4.0, 12.0, 18.0]).unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling example under Dantzig's rule
        let a = vec![
            vec![0.5, -5.5, -2.5, 9.0],
            vec![0.5, -1.5, -0.5, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ];
        let s = maximize(&[10.0, -57.0, -9.0, -24.0], &a, &[0.0, 0.0, 1.0]).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_and_bad_input() {
        assert!(matches!(maximize(&[1.0], &[vec![-1.0]], &[1.0]), Err(Error::LpFailure(_))));
        assert!(maximize(&[1.0], &[vec![1.0]], &[-1.0]).is_err());
        assert!(maximize(&[1.0, 2.0], &[vec![1.0]], &[1.0]).is_err());
    }

    #[test]
    fn zero_objective() {
        let s = maximize(&[0.0, 0.0], &[vec![1.0, 1.0]], &[1.0]).unwrap();
        assert_eq!(s.objective, 0.0);
        assert_eq!(s.pivots, 0);
    }
}

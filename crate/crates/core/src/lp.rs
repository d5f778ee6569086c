//! A dense tableau simplex for the small packing LPs arising in the
//! time-sharing capacity computation:
//!
//!   maximize c.x  subject to  A.x <= b, x >= 0,  with b >= 0.
//!
//! The all-slack basis is feasible, so no phase-1 is needed. Bland's rule
//! guarantees termination. Problem sizes here are tiny (tens of variables,
//! a few hundred constraints), so a dense tableau is the simplest correct
//! choice.

const TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal(f64),
    Unbounded,
}

/// Solves `max c.x : A.x <= b, x >= 0`. Every entry of `b` must be
/// non-negative. Returns the optimal objective value.
pub(crate) fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    debug_assert_eq!(b.len(), m);
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert!(b.iter().all(|&v| v >= 0.0));

    // Columns: n structural variables, m slacks, then the rhs.
    let cols = n + m + 1;
    let mut t = vec![vec![0.0; cols]; m + 1];
    for (i, row) in a.iter().enumerate() {
        t[i][..n].copy_from_slice(row);
        t[i][n + i] = 1.0;
        t[i][cols - 1] = b[i];
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Bland's rule: the lowest-index column with a negative reduced cost.
        let Some(pivot_col) = (0..n + m).find(|&j| t[m][j] < -TOL) else {
            return LpOutcome::Optimal(t[m][cols - 1]);
        };
        // Ratio test; ties go to the row whose basic variable has the
        // smallest index (anti-cycling).
        let mut pivot_row: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][pivot_col] > TOL {
                let ratio = t[i][cols - 1] / t[i][pivot_col];
                let better = match pivot_row {
                    None => true,
                    Some(r) => {
                        ratio < best - TOL || (ratio < best + TOL && basis[i] < basis[r])
                    }
                };
                if better {
                    best = ratio;
                    pivot_row = Some(i);
                }
            }
        }
        let Some(pr) = pivot_row else {
            return LpOutcome::Unbounded;
        };

        let pivot = t[pr][pivot_col];
        for v in &mut t[pr] {
            *v /= pivot;
        }
        for i in 0..=m {
            if i != pr {
                let factor = t[i][pivot_col];
                if factor != 0.0 {
                    for j in 0..cols {
                        t[i][j] -= factor * t[pr][j];
                    }
                }
            }
        }
        basis[pr] = pivot_col;
    }
}

//! Small exact linear solver over the rationals.
//!
//! Dense Gaussian elimination; all systems in this crate are tiny (a few
//! hundred unknowns at most), so no pivot-size heuristics are needed beyond
//! picking the first nonzero entry.

use crate::Q;
use num_traits::Zero;

/// Outcome of solving `A x = b`.
pub struct Solved {
    /// Particular solution with all free variables set to zero. With the
    /// columns ordered canonically this is the deterministic minimal choice.
    pub solution: Vec<Q>,
    /// Basis of the nullspace of `A` (one vector per free column).
    pub nullspace: Vec<Vec<Q>>,
}

/// Solves `A x = b` exactly. Returns `None` when inconsistent.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Solved> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b.iter())
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].recip();
        for v in m[rank].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=cols {
                    let delta = &factor * &m[rank][c];
                    m[r][c] = &m[r][c] - &delta;
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    // consistency: no row 0 = nonzero
    for r in 0..rows {
        if m[r][..cols].iter().all(|v| v.is_zero()) && !m[r][cols].is_zero() {
            return None;
        }
    }
    let mut solution = vec![Q::zero(); cols];
    for col in 0..cols {
        if let Some(r) = pivot_of_col[col] {
            solution[col] = m[r][cols].clone();
        }
    }
    let mut nullspace = Vec::new();
    for free in 0..cols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::from_integer(1.into());
        for col in 0..cols {
            if let Some(r) = pivot_of_col[col] {
                v[col] = -m[r][free].clone();
            }
        }
        nullspace.push(v);
    }
    Some(Solved { solution, nullspace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qi;

    #[test]
    fn solve_unique() {
        // x + y = 3, x - y = 1
        let a = vec![vec![qi(1), qi(1)], vec![qi(1), qi(-1)]];
        let b = vec![qi(3), qi(1)];
        let s = solve(&a, &b).unwrap();
        assert_eq!(s.solution, vec![qi(2), qi(1)]);
        assert!(s.nullspace.is_empty());
    }

    #[test]
    fn solve_underdetermined_prefers_zero_free_vars() {
        // x + y = 2 with y free
        let a = vec![vec![qi(1), qi(1)]];
        let b = vec![qi(2)];
        let s = solve(&a, &b).unwrap();
        assert_eq!(s.solution, vec![qi(2), qi(0)]);
        assert_eq!(s.nullspace.len(), 1);
        assert_eq!(s.nullspace[0], vec![qi(-1), qi(1)]);
    }

    #[test]
    fn solve_inconsistent() {
        let a = vec![vec![qi(1)], vec![qi(1)]];
        let b = vec![qi(0), qi(1)];
        assert!(solve(&a, &b).is_none());
    }
}

//! Exact zero-sum matrix games via an integer-pivoting simplex.
//!
//! The tableau is kept over the integers with a common denominator (each
//! pivot divides exactly by the previous pivot element), so every value and
//! both optimal strategies come out as exact rationals.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{serde_q, serde_q_vec, Q};

/// Largest game (rows or columns) the solver accepts.
pub const GAME_MAX_SIDE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameSolution {
    /// `min_p max_j (p^T A)_j = max_q min_i (A q)_i`.
    #[serde(with = "serde_q")]
    pub value: Q,
    /// Optimal mixed strategy of the row (minimizing) player.
    #[serde(with = "serde_q_vec")]
    pub row_strategy: Vec<Q>,
    /// Optimal mixed strategy of the column (maximizing) player.
    #[serde(with = "serde_q_vec")]
    pub col_strategy: Vec<Q>,
}

struct Tableau {
    t: Vec<Vec<BigInt>>,
    denom: BigInt,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        let rows = self.t.len();
        let pivot_row = self.t[r].clone();
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = self.t[i][c].clone();
            for (j, cell) in self.t[i].iter_mut().enumerate() {
                let v = &*cell * &p - &factor * &pivot_row[j];
                *cell = v / &self.denom;
            }
        }
        self.denom = p;
        self.basis[r] = c;
    }
}

/// Maximizes `sum(y)` subject to `B^T`-style constraints
/// `sum_i y_i b[i][j] <= 1` for every column `j`, `y >= 0`, with `b > 0`.
/// Returns the primal `y` and dual `z` (one entry per column).
fn solve_packing_lp(b: &[Vec<BigInt>]) -> Result<(Vec<Q>, Vec<Q>)> {
    let n = b.len();
    let m = b[0].len();
    let width = n + m + 1;
    let mut t = Vec::with_capacity(m + 1);
    for j in 0..m {
        let mut row = vec![BigInt::zero(); width];
        for i in 0..n {
            row[i] = b[i][j].clone();
        }
        row[n + j] = BigInt::one();
        row[width - 1] = BigInt::one();
        t.push(row);
    }
    let mut obj = vec![BigInt::zero(); width];
    for cell in obj.iter_mut().take(n) {
        *cell = -BigInt::one();
    }
    t.push(obj);
    let mut tab = Tableau {
        t,
        denom: BigInt::one(),
        basis: (n..n + m).collect(),
    };
    let max_pivots = 50_000;
    for _ in 0..max_pivots {
        // Bland's rule: smallest improving column, then smallest basic index on ties.
        let Some(c) = (0..width - 1).find(|&j| tab.t[m][j].is_negative()) else {
            let mut y = vec![Q::zero(); n];
            for (r, &v) in tab.basis.iter().enumerate() {
                if v < n {
                    y[v] = Q::new(tab.t[r][width - 1].clone(), tab.denom.clone());
                }
            }
            let z = (0..m)
                .map(|j| Q::new(tab.t[m][n + j].clone(), tab.denom.clone()))
                .collect();
            return Ok((y, z));
        };
        let mut best: Option<usize> = None;
        for r in 0..m {
            if !tab.t[r][c].is_positive() {
                continue;
            }
            best = match best {
                None => Some(r),
                Some(s) => {
                    // compare rhs_r / a_r against rhs_s / a_s
                    let lhs = &tab.t[r][width - 1] * &tab.t[s][c];
                    let rhs = &tab.t[s][width - 1] * &tab.t[r][c];
                    if lhs < rhs || (lhs == rhs && tab.basis[r] < tab.basis[s]) {
                        Some(r)
                    } else {
                        Some(s)
                    }
                }
            };
        }
        let Some(r) = best else {
            return Err(Error::LpFailure("unbounded game program".into()));
        };
        tab.pivot(r, c);
    }
    Err(Error::LpFailure("pivot limit reached".into()))
}

/// Solves the zero-sum game with payoff matrix `a` (row player pays).
pub fn solve_game(a: &[Vec<Q>]) -> Result<GameSolution> {
    let rows = a.len();
    if rows == 0 || a[0].is_empty() {
        return Err(Error::InvalidParameter("empty game".into()));
    }
    let cols = a[0].len();
    if a.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidParameter("ragged payoff matrix".into()));
    }
    if rows > GAME_MAX_SIDE || cols > GAME_MAX_SIDE {
        return Err(Error::cap("game side", GAME_MAX_SIDE as u32, rows.max(cols) as u64));
    }
    // Scale to integers and shift so every entry is at least 1.
    let lcm = a
        .iter()
        .flatten()
        .fold(BigInt::one(), |l, q| num_integer::Integer::lcm(&l, q.denom()));
    let ints: Vec<Vec<BigInt>> = a
        .iter()
        .map(|r| r.iter().map(|q| q.numer() * (&lcm / q.denom())).collect())
        .collect();
    let min = ints.iter().flatten().min().expect("nonempty").clone();
    let shift = BigInt::one() - min;
    let b: Vec<Vec<BigInt>> = ints
        .iter()
        .map(|r| r.iter().map(|v| v + &shift).collect())
        .collect();
    let (y, z) = solve_packing_lp(&b)?;
    let total: Q = y.iter().sum();
    let total_dual: Q = z.iter().sum();
    if total.is_zero() || total != total_dual {
        return Err(Error::LpFailure("primal and dual objectives disagree".into()));
    }
    let shifted_value = total.recip();
    let value = (shifted_value - Q::from_integer(shift)) / Q::from_integer(lcm);
    let row_strategy: Vec<Q> = y.iter().map(|v| v / &total).collect();
    let col_strategy: Vec<Q> = z.iter().map(|v| v / &total).collect();
    let sol = GameSolution {
        value,
        row_strategy,
        col_strategy,
    };
    if !certify(a, &sol) {
        return Err(Error::LpFailure("solution failed its optimality certificate".into()));
    }
    Ok(sol)
}

/// Checks both strategies are distributions that guarantee `value`.
pub fn certify(a: &[Vec<Q>], sol: &GameSolution) -> bool {
    let is_dist = |p: &[Q]| p.iter().all(|x| !x.is_negative()) && p.iter().sum::<Q>() == Q::one();
    if !is_dist(&sol.row_strategy) || !is_dist(&sol.col_strategy) {
        return false;
    }
    let cols = a[0].len();
    let row_ok = (0..cols).all(|j| {
        let v: Q = a.iter().zip(&sol.row_strategy).map(|(r, p)| &r[j] * p).sum();
        v <= sol.value
    });
    let col_ok = a.iter().all(|r| {
        let v: Q = r.iter().zip(&sol.col_strategy).map(|(x, q)| x * q).sum();
        v >= sol.value
    });
    row_ok && col_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, q_int};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Q>> {
        rows.iter().map(|r| r.iter().map(|&v| q_int(v)).collect()).collect()
    }

    #[test]
    fn matching_pennies() {
        let s = solve_game(&m(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(s.value, q(1, 2));
        assert_eq!(s.row_strategy, vec![q(1, 2), q(1, 2)]);
        assert_eq!(s.col_strategy, vec![q(1, 2), q(1, 2)]);
    }

    #[test]
    fn saddle_point() {
        let s = solve_game(&m(&[&[3, 5], &[1, 2]])).unwrap();
        assert_eq!(s.value, q(2, 1));
        assert_eq!(s.row_strategy, vec![q(0, 1), q(1, 1)]);
    }

    #[test]
    fn rock_paper_scissors_with_negatives() {
        let s = solve_game(&m(&[&[0, 1, -1], &[-1, 0, 1], &[1, -1, 0]])).unwrap();
        assert_eq!(s.value, q(0, 1));
        assert!(s.row_strategy.iter().all(|p| *p == q(1, 3)));
    }

    #[test]
    fn rational_payoffs() {
        let a = vec![vec![q(1, 2), q(1, 3)], vec![q(1, 4), q(2, 3)]];
        let s = solve_game(&a).unwrap();
        assert!(certify(&a, &s));
        // row mix p solves p/2 + (1-p)/4 = p/3 + 2(1-p)/3 -> p = 5/7
        assert_eq!(s.row_strategy[0], q(5, 7));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(solve_game(&[]).is_err());
        assert!(solve_game(&[vec![q(1, 1)], vec![]]).is_err());
    }
}

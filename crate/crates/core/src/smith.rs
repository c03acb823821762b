//! Smith normal form over the integers.
//!
//! `U · A · V = D` with `U`, `V` unimodular and `D` diagonal, `d_i | d_{i+1}`.
//! The inverse of `U` is tracked alongside it so callers can turn the
//! diagonal basis back into generators of the original lattice.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::intmat::IntMatrix;

#[derive(Clone, Debug)]
pub struct Smith {
    /// Diagonal entries `d_0 | d_1 | ...`, length `min(rows, cols)`, non-negative.
    pub diag: Vec<BigInt>,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    /// Number of non-zero diagonal entries.
    pub rank: usize,
}

pub fn smith(a: &IntMatrix) -> Smith {
    let (m, n) = (a.rows(), a.cols());
    let mut a = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut u_inv = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);

    let mut rank = 0;
    for t in 0..m.min(n) {
        loop {
            // smallest non-zero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if a[(i, j)].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            u_inv.swap_cols(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..m {
                let q = a[(i, t)].div_floor(&a[(t, t)]);
                if !q.is_zero() {
                    row_axpy(&mut a, &mut u, &mut u_inv, i, t, &q);
                }
                if !a[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = a[(t, j)].div_floor(&a[(t, t)]);
                if !q.is_zero() {
                    col_axpy(&mut a, &mut v, j, t, &q);
                }
                if !a[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let bad = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !a[(i, j)].is_multiple_of(&a[(t, t)]));
            match bad {
                Some((i, _)) => row_axpy(&mut a, &mut u, &mut u_inv, t, i, &-BigInt::one()),
                None => break,
            }
        }
        if a[(t, t)].is_zero() {
            break;
        }
        if a[(t, t)].is_negative() {
            for j in 0..n {
                a[(t, j)] = -a[(t, j)].clone();
            }
            for j in 0..m {
                u[(t, j)] = -u[(t, j)].clone();
                u_inv[(j, t)] = -u_inv[(j, t)].clone();
            }
        }
        rank += 1;
    }
    let diag = (0..m.min(n)).map(|i| a[(i, i)].clone()).collect();
    Smith {
        diag,
        u,
        u_inv,
        v,
        rank,
    }
}

/// `row_i -= q · row_t` on `a` and `u`, with the inverse update on `u_inv`.
fn row_axpy(
    a: &mut IntMatrix,
    u: &mut IntMatrix,
    u_inv: &mut IntMatrix,
    i: usize,
    t: usize,
    q: &BigInt,
) {
    for j in 0..a.cols() {
        let d = q * &a[(t, j)];
        a[(i, j)] -= d;
    }
    for j in 0..u.cols() {
        let d = q * &u[(t, j)];
        u[(i, j)] -= d;
    }
    for r in 0..u_inv.rows() {
        let d = q * &u_inv[(r, i)];
        u_inv[(r, t)] += d;
    }
}

/// `col_j -= q · col_t` on `a` and `v`.
fn col_axpy(a: &mut IntMatrix, v: &mut IntMatrix, j: usize, t: usize, q: &BigInt) {
    for i in 0..a.rows() {
        let d = q * &a[(i, t)];
        a[(i, j)] -= d;
    }
    for i in 0..v.rows() {
        let d = q * &v[(i, t)];
        v[(i, j)] -= d;
    }
}

/// A basis (as columns) of the integer kernel `{x : A x = 0}`.
pub fn kernel(a: &IntMatrix) -> IntMatrix {
    let s = smith(a);
    let cols: Vec<Vec<BigInt>> = (s.rank..a.cols()).map(|j| s.v.column(j)).collect();
    IntMatrix::from_columns(a.cols(), &cols)
}

/// An integer solution of `A x = b`, if one exists.
pub fn solve(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let s = smith(a);
    let ub = s.u.mul_vec(b);
    let mut y = vec![BigInt::zero(); a.cols()];
    for (i, ubi) in ub.iter().enumerate() {
        if i < s.rank {
            let (q, r) = ubi.div_rem(&s.diag[i]);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ubi.is_zero() {
            return None;
        }
    }
    Some(s.v.mul_vec(&y))
}

/// Invariant factors of `Z^rows / (column span of A)`: the non-unit
/// diagonal entries, with `0` for each free summand.
pub fn cokernel_invariants(a: &IntMatrix) -> Vec<BigInt> {
    let s = smith(a);
    let mut out: Vec<BigInt> = s.diag.iter().filter(|d| !d.is_one()).cloned().collect();
    out.extend(std::iter::repeat_n(BigInt::zero(), a.rows() - s.diag.len().min(a.rows())));
    out
}

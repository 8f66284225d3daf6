//! Integer lattice helpers: Hermite normal form, integer kernels, exact
//! determinants.
//!
//! Matrices are row lists of `BigInt`; all rows share one length.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn from_i64(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn row_axpy(dst: &mut [BigInt], k: &BigInt, src: &[BigInt]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += k * s;
    }
}

/// Row-style echelon reduction by unimodular row operations, pivoting only on
/// the first `pivot_cols` columns. Returns the pivot column of each leading
/// row; rows after those are zero on the pivot columns.
fn echelon(m: &mut IntMatrix, pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == m.len() {
            break;
        }
        loop {
            // smallest nonzero |entry| in column c at or below r goes to r
            let best = (r..m.len()).filter(|&i| !m[i][c].is_zero()).min_by(|&a, &b| m[a][c].abs().cmp(&m[b][c].abs()));
            let Some(best) = best else { break };
            m.swap(r, best);
            let mut done = true;
            for i in r + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let q = m[i][c].div_floor(&m[r][c]);
                let (top, rest) = m.split_at_mut(i);
                row_axpy(&mut rest[0], &-q, &top[r]);
                if !m[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < m.len() && !m[r][c].is_zero() {
            if m[r][c].is_negative() {
                for x in m[r].iter_mut() {
                    *x = -&*x;
                }
            }
            for i in 0..r {
                let q = m[i][c].div_floor(&m[r][c]);
                if !q.is_zero() {
                    let (top, rest) = m.split_at_mut(r);
                    row_axpy(&mut top[i], &-q, &rest[0]);
                }
            }
            pivots.push(c);
            r += 1;
        }
    }
    pivots
}

/// Hermite normal form of the row lattice: nonzero rows only, pivots positive,
/// entries above each pivot reduced into `[0, pivot)`.
pub fn hnf(rows: &IntMatrix) -> IntMatrix {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m = rows.clone();
    let pivots = echelon(&mut m, ncols);
    m.truncate(pivots.len());
    m
}

/// Rank over the rationals.
pub fn rank(rows: &IntMatrix) -> usize {
    hnf(rows).len()
}

/// A Z-basis of `{x ∈ Z^ncols : rows · x = 0}`.
pub fn integer_kernel(rows: &IntMatrix, ncols: usize) -> IntMatrix {
    let nrows = rows.len();
    // augmented rows (column j of the matrix | e_j)
    let mut aug: IntMatrix = (0..ncols)
        .map(|j| {
            let mut v: Vec<BigInt> = rows.iter().map(|r| r[j].clone()).collect();
            v.extend((0..ncols).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            v
        })
        .collect();
    let pivots = echelon(&mut aug, nrows);
    let mut kernel: IntMatrix = aug.split_off(pivots.len()).into_iter().map(|v| v[nrows..].to_vec()).collect();
    // a reduced basis keeps outputs small and canonical
    kernel = hnf(&kernel);
    kernel
}

/// Coordinates of `v` in an echelon basis produced by [`hnf`].
pub fn coordinates(basis: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest = v.to_vec();
    let mut coords = Vec::with_capacity(basis.len());
    for b in basis {
        let c = b.iter().position(|x| !x.is_zero())?;
        let (q, r) = rest[c].div_rem(&b[c]);
        if !r.is_zero() {
            return None;
        }
        row_axpy(&mut rest, &-&q, b);
        coords.push(q);
    }
    rest.iter().all(Zero::is_zero).then_some(coords)
}

/// Exact determinant by fraction-free elimination.
pub fn det(m: &IntMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

pub fn mat_vec(m: &IntMatrix, x: &[BigInt]) -> Vec<BigInt> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Index of the span of `sub` inside the span of `full`, or `None` when `sub`
/// is not a full-rank subset of that lattice.
pub fn sublattice_index(sub: &IntMatrix, full: &IntMatrix) -> Option<BigInt> {
    let basis = hnf(full);
    if sub.len() != basis.len() {
        return None;
    }
    let coords: Option<IntMatrix> = sub.iter().map(|v| coordinates(&basis, v)).collect();
    let d = det(&coords?).abs();
    (!d.is_zero()).then_some(d)
}

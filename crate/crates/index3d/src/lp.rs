//! Dense two-phase simplex over exact rationals.
//!
//! Problems are in equality standard form: minimise `c·x` subject to
//! `A x = b`, `x ≥ 0`. Pivoting follows Bland's rule, so the method
//! terminates on degenerate problems.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
    pub cost: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimum(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

struct Tableau {
    /// `m` rows of `width + 1` entries; the last entry is the right-hand side.
    a: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        for x in self.a[r].iter_mut() {
            *x /= &p;
        }
        let (before, rest) = self.a.split_at_mut(r);
        let (row, after) = rest.split_first_mut().unwrap();
        for other in before.iter_mut().chain(after.iter_mut()) {
            let f = other[c].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in other.iter_mut().zip(row.iter()) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    fn value(&self, cost: &[Rational]) -> Rational {
        self.basis.iter().enumerate().map(|(i, &b)| &cost[b] * &self.a[i][self.width]).sum()
    }

    /// Minimises `cost` over columns `< allowed`. Returns `false` when unbounded.
    fn run(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut d = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.a[i][j].is_zero() {
                        d -= &cost[b] * &self.a[i][j];
                    }
                }
                d.is_negative()
            });
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][c].is_positive() {
                    continue;
                }
                let ratio = &self.a[i][self.width] / &self.a[i][c];
                let better = match &leave {
                    None => true,
                    Some((r, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

impl LinearProgram {
    pub fn new(rows: Vec<Vec<Rational>>, rhs: Vec<Rational>, cost: Vec<Rational>) -> Self {
        LinearProgram { rows, rhs, cost }
    }

    pub fn n_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn solve(&self) -> LpOutcome {
        let n = self.n_vars();
        let m = self.rows.len();
        let width = n + m;
        let mut a = Vec::with_capacity(m);
        for (i, row) in self.rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has the wrong length");
            let flip = self.rhs[i].is_negative();
            let mut r: Vec<Rational> = row.iter().map(|x| if flip { -x } else { x.clone() }).collect();
            r.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            r.push(if flip { -&self.rhs[i] } else { self.rhs[i].clone() });
            a.push(r);
        }
        let mut t = Tableau { a, basis: (n..width).collect(), width };

        let phase1: Vec<Rational> = (0..width).map(|j| if j < n { Rational::zero() } else { Rational::one() }).collect();
        t.run(&phase1, width);
        if t.value(&phase1).is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out; rows that cannot pivot are redundant
        let mut i = 0;
        while i < t.a.len() {
            if t.basis[i] >= n {
                match (0..n).find(|&j| !t.a[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.a.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }

        let mut cost = self.cost.clone();
        cost.resize(width, Rational::zero());
        if !t.run(&cost, n) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); n];
        for (i, &b) in t.basis.iter().enumerate() {
            x[b] = t.a[i][width].clone();
        }
        let value = t.value(&cost);
        LpOutcome::Optimal { x, value }
    }
}

/// Columns for a free variable split as `x⁺ − x⁻`.
pub fn split_free(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().flat_map(|x| [x.clone(), -x]).collect()).collect()
}

/// Recombines a solution of [`split_free`] columns.
pub fn join_free(x: &[Rational]) -> Vec<Rational> {
    x.chunks(2).map(|p| &p[0] - &p[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rv(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn small_optimum() {
        // max x + y s.t. x + 2y ≤ 4, 3x + y ≤ 6
        let lp = LinearProgram::new(vec![rv(&[1, 2, 1, 0]), rv(&[3, 1, 0, 1])], rv(&[4, 6]), rv(&[-1, -1, 0, 0]));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, -Rational::new(BigInt::from(14), BigInt::from(5)));
                assert_eq!(x[0], Rational::new(BigInt::from(8), BigInt::from(5)));
                assert_eq!(x[1], Rational::new(BigInt::from(6), BigInt::from(5)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram::new(vec![rv(&[1, 1])], rv(&[-1]), rv(&[0, 0]));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        let lp = LinearProgram::new(vec![rv(&[1, -1])], rv(&[0]), rv(&[-1, 0]));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        let lp = LinearProgram::new(vec![rv(&[1, 1, 0]), rv(&[2, 2, 0]), rv(&[0, 1, 1])], rv(&[1, 2, 1]), rv(&[1, 0, 0]));
        assert_eq!(lp.solve().optimum(), Some(&rat(0)));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook rule
        let q = |n: i64, d: i64| Rational::new(BigInt::from(n), BigInt::from(d));
        let rows = vec![
            vec![q(1, 4), rat(-60), q(-1, 25), rat(9), rat(1), rat(0), rat(0)],
            vec![q(1, 2), rat(-90), q(-1, 50), rat(3), rat(0), rat(1), rat(0)],
            vec![rat(0), rat(0), rat(1), rat(0), rat(0), rat(0), rat(1)],
        ];
        let cost = vec![q(-3, 4), rat(150), q(-1, 50), rat(6), rat(0), rat(0), rat(0)];
        let lp = LinearProgram::new(rows, rv(&[0, 0, 1]), cost);
        assert_eq!(lp.solve().optimum(), Some(&q(-1, 20)));
    }

    proptest! {
        // the optimum of a bounded box problem is the sum of per-coordinate optima
        #[test]
        fn box_problem(c in proptest::collection::vec(-5i64..=5, 3), u in proptest::collection::vec(0i64..=4, 3)) {
            let mut rows = Vec::new();
            for i in 0..3 {
                let mut r = vec![rat(0); 6];
                r[i] = rat(1);
                r[3 + i] = rat(1);
                rows.push(r);
            }
            let mut cost = rv(&c);
            cost.extend(rv(&[0, 0, 0]));
            let lp = LinearProgram::new(rows, rv(&u), cost);
            let expect: i64 = c.iter().zip(&u).map(|(&ci, &ui)| if ci < 0 { ci * ui } else { 0 }).sum();
            let out = lp.solve();
            prop_assert_eq!(out.optimum(), Some(&rat(expect)));
        }
    }
}

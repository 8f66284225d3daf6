//! The tetrahedron index `I_Δ(m,e)`, its symmetric form `J_Δ(a,b,c)` and its
//! minimum degree.
//!
//! All orders and degrees are in half-units (integer counts of `q^{1/2}`).

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{CheckedAdd, CheckedMul, One, Zero};
use thiserror::Error;

use crate::qlaurent::TruncatedSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChargePair {
    pub m: i64,
    pub e: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JError {
    #[error("arguments ({0}/2, {1}/2, {2}/2) have a non-integral difference")]
    NonIntegralDifference(i64, i64, i64),
    #[error("arguments ({0}/2, {1}/2, {2}/2) are half-odd; the prefactor sign is undefined")]
    HalfIntegralShift(i64, i64, i64),
}

/// Arguments of `J_Δ`, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JTriple {
    a2: i64,
    b2: i64,
    c2: i64,
}

impl JTriple {
    pub fn from_halves(a2: i64, b2: i64, c2: i64) -> Result<Self, JError> {
        if (a2 - b2) % 2 != 0 || (b2 - c2) % 2 != 0 {
            return Err(JError::NonIntegralDifference(a2, b2, c2));
        }
        if b2 % 2 != 0 {
            return Err(JError::HalfIntegralShift(a2, b2, c2));
        }
        Ok(JTriple { a2, b2, c2 })
    }

    pub fn from_integers(a: i64, b: i64, c: i64) -> Self {
        JTriple { a2: 2 * a, b2: 2 * b, c2: 2 * c }
    }

    /// `(m, e) = (b - c, a - b)` and the prefactor exponent `-b` in half-units.
    pub fn charges(&self) -> (ChargePair, i64) {
        let (a, b, c) = (self.a2 / 2, self.b2 / 2, self.c2 / 2);
        (ChargePair { m: b - c, e: a - b }, -b)
    }
}

fn pos(x: i64) -> i64 {
    x.max(0)
}

/// Twice the minimum degree `δ(m,e)` of `I_Δ(m,e)`.
pub fn degree(m: i64, e: i64) -> i64 {
    pos(m) * pos(m + e) + pos(-m) * pos(e) + pos(-e) * pos(-e - m) + 0.max(m).max(-e)
}

/// Minimum degree of `J_Δ(a,b,c)` for integer arguments, in half-units.
pub fn j_degree(a: i64, b: i64, c: i64) -> i64 {
    -b + degree(b - c, a - b)
}

/// Twice the exponent of the `n`-th summand of `I_Δ(m,e)`.
pub fn summand_exponent(m: i64, e: i64, n: i64) -> i64 {
    n * (n + 1) - (2 * n + e) * m
}

/// Range of `n` whose summands have exponent at most `order`.
///
/// The summand exponent is a convex quadratic in `n`; the range is the
/// integer part of the interval between its roots, clipped below at `(-e)_+`.
/// Returns `None` when no summand reaches the order.
pub fn n_window(m: i64, e: i64, order: i64) -> Option<(i64, i64)> {
    // n^2 + (1 - 2m) n - (e m + order) <= 0
    let b = 1 - 2 * m;
    let disc = (b as i128) * (b as i128) + 4 * ((e as i128) * (m as i128) + order as i128);
    if disc < 0 {
        return None;
    }
    let r = isqrt(disc as u128) as i128;
    let mut lo = ((-(b as i128) - r) as f64 / 2.0).floor() as i64 - 1;
    let mut hi = ((-(b as i128) + r) as f64 / 2.0).ceil() as i64 + 1;
    while summand_exponent(m, e, lo) > order && lo <= hi {
        lo += 1;
    }
    while summand_exponent(m, e, hi) > order && hi >= lo {
        hi -= 1;
    }
    let lo = lo.max(pos(-e));
    (lo <= hi).then_some((lo, hi))
}

fn isqrt(x: u128) -> u128 {
    if x == 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as u128;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// `I_Δ(m,e)` exact through `order` (half-units).
pub fn tet_index(m: i64, e: i64, order: i64) -> TruncatedSeries {
    let Some((lo, hi)) = n_window(m, e, order) else {
        return TruncatedSeries::zero(order);
    };
    // Every summand exponent has the parity of e*m.
    let parity = (e * m).rem_euclid(2);
    let q_order = (order - parity).div_euclid(2);
    let q_exps: Vec<(i64, i64)> = (lo..=hi)
        .map(|n| (n, (summand_exponent(m, e, n) - parity) / 2))
        .filter(|&(_, x)| x <= q_order)
        .collect();
    let Some(min_exp) = q_exps.iter().map(|&(_, x)| x).min() else {
        return TruncatedSeries::zero(order);
    };
    let precision = (q_order - min_exp) as usize;
    let dense = match sum_summands::<i128>(e, &q_exps, min_exp, precision) {
        Some(v) => v.into_iter().map(BigInt::from).collect(),
        None => sum_summands::<BigInt>(e, &q_exps, min_exp, precision).expect("bigint arithmetic cannot overflow"),
    };
    let low = 2 * min_exp + parity;
    let spread: Vec<BigInt> = dense
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| {
            let pad = if i == 0 { None } else { Some(BigInt::zero()) };
            pad.into_iter().chain(std::iter::once(c))
        })
        .collect();
    TruncatedSeries::from_dense(low, spread, order)
}

trait Coef: Clone + Zero + One + CheckedAdd + CheckedMul + std::ops::Neg<Output = Self> {}
impl<T: Clone + Zero + One + CheckedAdd + CheckedMul + std::ops::Neg<Output = T>> Coef for T {}

/// Dense coefficients of `q^{min_exp} ..= q^{min_exp + precision}` of
/// `Σ_n (-1)^n q^{x_n} / ((q)_n (q)_{n+e})`; `None` on overflow.
fn sum_summands<T: Coef>(e: i64, q_exps: &[(i64, i64)], min_exp: i64, precision: usize) -> Option<Vec<T>> {
    let len = precision + 1;
    let max_index = q_exps.iter().map(|&(n, _)| n.max(n + e)).max().unwrap_or(0).max(0) as usize;
    // 1/(q)_k agrees with 1/(q)_len below q^len once k >= len.
    let table_size = max_index.min(len) + 1;
    let mut inv_poch: Vec<Vec<T>> = Vec::with_capacity(table_size);
    let mut cur = vec![T::zero(); len];
    cur[0] = T::one();
    inv_poch.push(cur.clone());
    for k in 1..table_size {
        // multiply by 1/(1 - q^k)
        for i in k..len {
            let add = cur[i - k].clone();
            cur[i] = cur[i].checked_add(&add)?;
        }
        inv_poch.push(cur.clone());
    }
    let poch = |k: i64| &inv_poch[(k as usize).min(table_size - 1)];
    let mut out = vec![T::zero(); len];
    for &(n, x) in q_exps {
        let offset = (x - min_exp) as usize;
        let need = len - offset;
        let (a, b) = (poch(n), poch(n + e));
        for i in 0..need {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..need - i {
                let mut t = a[i].checked_mul(&b[j])?;
                if n % 2 != 0 {
                    t = -t;
                }
                out[offset + i + j] = out[offset + i + j].checked_add(&t)?;
            }
        }
    }
    Some(out)
}

/// `J_Δ(a,b,c) = (-q^{1/2})^{-b} I_Δ(b-c, a-b)` exact through `order`.
pub fn tet_index_j(t: JTriple, order: i64) -> TruncatedSeries {
    let (ch, shift) = t.charges();
    tet_index(ch.m, ch.e, order - shift).scale_by_signed_half_power(shift)
}

/// Thread-safe memo of `I_Δ(m,e)` keeping the highest order computed so far.
#[derive(Default)]
pub struct TetIndexCache {
    map: RwLock<HashMap<ChargePair, Arc<TruncatedSeries>>>,
}

impl TetIndexCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `I_Δ(m,e)` with truncation order at least `order`.
    pub fn get(&self, m: i64, e: i64, order: i64) -> Arc<TruncatedSeries> {
        let key = ChargePair { m, e };
        if let Some(s) = self.map.read().unwrap().get(&key) {
            if s.trunc_order() >= order {
                return Arc::clone(s);
            }
        }
        let fresh = Arc::new(tet_index(m, e, order));
        let mut map = self.map.write().unwrap();
        let slot = map.entry(key).or_insert_with(|| Arc::clone(&fresh));
        if slot.trunc_order() < order {
            *slot = Arc::clone(&fresh);
        }
        Arc::clone(slot)
    }

    /// `J_Δ` for integer arguments with truncation order at least `order`.
    pub fn get_j(&self, a: i64, b: i64, c: i64, order: i64) -> TruncatedSeries {
        let i = self.get(b - c, a - b, order + b);
        i.scale_by_signed_half_power(-b)
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityOutcome {
    pub name: &'static str,
    pub checked: usize,
    pub counterexample: Option<String>,
}

impl IdentityOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub range: i64,
    pub order: i64,
    pub outcomes: Vec<IdentityOutcome>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(IdentityOutcome::passed)
    }
}

/// Evaluates a linear combination `Σ coeff · q^{shift/2} · I_Δ(m,e)` exactly
/// through `order`.
fn combo(cache: &TetIndexCache, terms: &[(i64, i64, i64, i64)], order: i64) -> TruncatedSeries {
    let mut acc = TruncatedSeries::zero(order);
    for &(c, shift, m, e) in terms {
        let s = cache.get(m, e, order - shift).shift(shift).scale(&BigInt::from(c));
        acc = acc.add(&s);
    }
    acc.truncate(order)
}

/// Interval of a convex integer function's sublevel set `{x : f(x) <= bound}`,
/// scanning outward from `start`.
pub(crate) fn convex_sublevel(f: impl Fn(i64) -> i64, start: i64, bound: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut x = start;
    loop {
        if f(x) <= bound {
            out.push(x);
        } else if f(x + 1) >= f(x) {
            break;
        }
        x += 1;
    }
    let mut x = start - 1;
    loop {
        if f(x) <= bound {
            out.push(x);
        } else if f(x - 1) >= f(x) {
            break;
        }
        x -= 1;
    }
    out.sort_unstable();
    out
}

/// `Σ_e q^{e} Π_i I_Δ(m_i, e + s_i)` times `q^{pre/2}`, summed over every
/// `e` whose summand degree is at most `order`.
fn shifted_sum(cache: &TetIndexCache, factors: &[(i64, i64)], order: i64) -> TruncatedSeries {
    let deg = |e: i64| 2 * e + factors.iter().map(|&(m, s)| degree(m, e + s)).sum::<i64>();
    let mut acc = TruncatedSeries::zero(order);
    for e in convex_sublevel(deg, 0, order) {
        let mut term = TruncatedSeries::one(order - 2 * e).shift(2 * e);
        for &(m, s) in factors {
            let f = cache.get(m, e + s, order - 2 * e);
            term = term.mul_to(&f, order);
        }
        acc = acc.add(&term);
    }
    acc.truncate(order)
}

fn product(cache: &TetIndexCache, shift: i64, factors: &[(i64, i64)], order: i64) -> TruncatedSeries {
    let mut term = TruncatedSeries::one(order - shift);
    for &(m, e) in factors {
        term = term.mul_to(&cache.get(m, e, order - shift), order - shift);
    }
    term.shift(shift).truncate(order)
}

struct Checker {
    name: &'static str,
    checked: usize,
    counterexample: Option<String>,
}

impl Checker {
    fn new(name: &'static str) -> Self {
        Checker { name, checked: 0, counterexample: None }
    }

    fn check(&mut self, lhs: &TruncatedSeries, rhs: &TruncatedSeries, at: impl FnOnce() -> String) {
        self.checked += 1;
        if self.counterexample.is_none() && lhs != rhs {
            self.counterexample = Some(format!("{}: {} != {}", at(), lhs, rhs));
        }
    }

    fn done(self) -> IdentityOutcome {
        IdentityOutcome { name: self.name, checked: self.checked, counterexample: self.counterexample }
    }
}

/// Checks every tetrahedron-index identity for parameters in `[-range, range]`
/// at the given order (half-units).
pub fn verify_identities(range: i64, order: i64) -> IdentityReport {
    let cache = TetIndexCache::new();
    let r = -range..=range;
    let zero = TruncatedSeries::zero(order);
    let one = TruncatedSeries::one(order);
    let mut outcomes = Vec::new();

    let mut rec1 = Checker::new("rec1");
    let mut rec2 = Checker::new("rec2");
    let mut rec1a = Checker::new("rec1a");
    let mut rec2a = Checker::new("rec2a");
    let mut duality = Checker::new("duality");
    let mut triality = Checker::new("triality");
    for m in r.clone() {
        for e in r.clone() {
            let at = || format!("(m,e)=({m},{e})");
            let c = |t: &[(i64, i64, i64, i64)]| combo(&cache, t, order);
            rec1.check(&c(&[(1, e, m + 1, e), (1, -m, m, e + 1), (-1, 0, m, e)]), &zero, at);
            rec2.check(&c(&[(1, e, m - 1, e), (1, -m, m, e - 1), (-1, 0, m, e)]), &zero, at);
            rec1a.check(
                &c(&[(1, 0, m, e + 1), (1, 2 * e + m, m, e), (-1, -m, m, e), (-1, m, m, e), (1, 0, m, e - 1)]),
                &zero,
                at,
            );
            rec2a.check(
                &c(&[(1, 0, m + 1, e), (1, -e - 2 * m, m, e), (-1, -e, m, e), (-1, e, m, e), (1, 0, m - 1, e)]),
                &zero,
                at,
            );
            let base = c(&[(1, 0, m, e)]);
            duality.check(&base, &c(&[(1, 0, -e, -m)]), at);
            let sign = |k: i64| if k.rem_euclid(2) == 0 { 1 } else { -1 };
            triality.check(&base, &c(&[(sign(e), -e, e, -e - m)]), at);
            triality.check(&base, &c(&[(sign(m), m, -e - m, m)]), at);
        }
    }
    outcomes.extend([rec1.done(), rec2.done(), rec1a.done(), rec2a.done(), duality.done(), triality.done()]);

    let mut pentagon = Checker::new("pentagon");
    let mut pent_shifted = Checker::new("pentagon (shifted form)");
    for m1 in r.clone() {
        for m2 in r.clone() {
            for e1 in r.clone() {
                for e2 in r.clone() {
                    let lhs = product(&cache, 0, &[(m1 - e2, e1), (m2 - e1, e2)], order);
                    let rhs = shifted_sum(&cache, &[(m1, e1), (m2, e2), (m1 + m2, 0)], order);
                    pentagon.check(&lhs, &rhs, || format!("(m1,m2,e1,e2)=({m1},{m2},{e1},{e2})"));
                }
                for x1 in r.clone() {
                    for x2 in r.clone() {
                        for x3 in r.clone() {
                            let lhs = shifted_sum(&cache, &[(m1, x1), (m2, x2), (m1 + m2, x3)], order);
                            let rhs =
                                product(&cache, -2 * x3, &[(m1 - x2 + x3, x1 - x3), (m2 - x1 + x3, x2 - x3)], order);
                            pent_shifted.check(&lhs, &rhs, || {
                                format!("(m1,m2,x1,x2,x3)=({m1},{m2},{x1},{x2},{x3})")
                            });
                        }
                    }
                }
            }
        }
    }
    outcomes.extend([pentagon.done(), pent_shifted.done()]);

    let mut quadratic = Checker::new("quadratic");
    for m in r.clone() {
        for c in r.clone() {
            let lhs = shifted_sum(&cache, &[(m, 0), (m, c)], order);
            quadratic.check(&lhs, if c == 0 { &one } else { &zero }, || format!("(m,c)=({m},{c})"));
        }
    }
    outcomes.push(quadratic.done());

    IdentityReport { range, order, outcomes }
}

/// `Σ_a J_Δ(a,b,c) J_Δ(a+x,b,c) q^a` exact through `order`.
pub fn j_quadratic_sum(cache: &TetIndexCache, b: i64, c: i64, x: i64, order: i64) -> TruncatedSeries {
    let deg = |a: i64| 2 * a + j_degree(a, b, c) + j_degree(a + x, b, c);
    let mut acc = TruncatedSeries::zero(order);
    for a in convex_sublevel(deg, 0, order) {
        let rel = order - 2 * a;
        let f = cache.get_j(a, b, c, rel - j_degree(a + x, b, c));
        let g = cache.get_j(a + x, b, c, rel - j_degree(a, b, c));
        acc = acc.add(&f.mul_to(&g, rel).shift(2 * a));
    }
    acc.truncate(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct summation of the defining series with naive truncation in `n`,
    /// using only generic series arithmetic.
    fn brute_force(m: i64, e: i64, order: i64) -> TruncatedSeries {
        let n0 = (-e).max(0);
        let n_max = n0 + 2 * order.max(0) + 4 + 2 * m.abs();
        let x = |n: i64| n * (n + 1) - (2 * n + e) * m;
        let min_x = (n0..=n_max).map(x).min().unwrap();
        let work = order - min_x.min(0) + 2;
        let mut inv = vec![TruncatedSeries::one(work)];
        for k in 1..=(n_max + e.max(0)) {
            let f = TruncatedSeries::from_terms([(0, BigInt::one()), (2 * k, BigInt::from(-1))], work);
            let next = inv[k as usize - 1].mul(&f.invert_unit_power_series().unwrap());
            inv.push(next);
        }
        let mut acc = TruncatedSeries::zero(order);
        for n in n0..=n_max {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            let t = inv[n as usize].mul(&inv[(n + e) as usize]).shift(x(n)).scale(&BigInt::from(sign));
            acc = acc.add(&t);
        }
        acc.truncate(order)
    }

    #[test]
    fn matches_brute_force_small() {
        for m in -3..=3 {
            for e in -3..=3 {
                assert_eq!(tet_index(m, e, 16), brute_force(m, e, 16), "(m,e)=({m},{e})");
            }
        }
    }

    #[test]
    fn leading_terms() {
        let i00 = tet_index(0, 0, 12);
        assert_eq!(i00.min_exponent(), Some(0));
        assert_eq!(i00.coeff(0), BigInt::one());
        assert_eq!(tet_index(1, 1, 8).min_exponent(), Some(3));
        assert_eq!(tet_index(0, -5, 40).min_exponent(), Some(degree(0, -5)));
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree(0, 0), 0);
        assert_eq!(degree(1, 1), 3);
        for m in 0..6 {
            for e in 0..6 {
                assert_eq!(degree(m, e), m * (e + m) + m);
            }
        }
    }

    #[test]
    fn degree_is_min_exponent() {
        for m in -5..=5 {
            for e in -5..=5 {
                let d = degree(m, e);
                let s = brute_force(m, e, d + 6);
                assert_eq!(s.min_exponent(), Some(d), "(m,e)=({m},{e})");
            }
        }
    }

    #[test]
    fn degree_convex_along_rays() {
        for vm in -3i64..=3 {
            for ve in -3i64..=3 {
                if num_integer::gcd(vm, ve) != 1 {
                    continue;
                }
                let vals: Vec<i64> = (0..=6).map(|r| degree(r * vm, r * ve)).collect();
                for w in vals.windows(3) {
                    assert!(w[0] + w[2] >= 2 * w[1], "ray ({vm},{ve}): {vals:?}");
                }
            }
        }
    }

    #[test]
    fn n_window_covers_every_low_summand() {
        for m in -6..=6 {
            for e in -6..=6 {
                for order in [-3, 0, 5, 20] {
                    let win = n_window(m, e, order);
                    for n in (-e).max(0)..60 {
                        let inside = win.is_some_and(|(lo, hi)| lo <= n && n <= hi);
                        assert_eq!(inside, summand_exponent(m, e, n) <= order, "m={m} e={e} n={n} order={order}");
                    }
                }
            }
        }
    }

    #[test]
    fn j_examples() {
        let j000 = tet_index_j(JTriple::from_integers(0, 0, 0), 10);
        assert_eq!(j000, tet_index(0, 0, 10));
        let base = tet_index_j(JTriple::from_integers(2, 1, 0), 12);
        let shifted = tet_index_j(JTriple::from_integers(5, 4, 3), 9);
        assert_eq!(shifted, base.scale_by_signed_half_power(-3));
        let perms = [(2, 1, 0), (2, 0, 1), (1, 2, 0), (1, 0, 2), (0, 2, 1), (0, 1, 2)];
        for (a, b, c) in perms {
            assert_eq!(tet_index_j(JTriple::from_integers(a, b, c), 12), base, "({a},{b},{c})");
        }
    }

    #[test]
    fn j_triple_validation() {
        assert!(matches!(JTriple::from_halves(1, 2, 2), Err(JError::NonIntegralDifference(..))));
        assert!(matches!(JTriple::from_halves(1, 1, 3), Err(JError::HalfIntegralShift(..))));
        assert!(JTriple::from_halves(2, 4, -6).is_ok());
    }

    #[test]
    fn cache_agrees_with_direct() {
        let cache = TetIndexCache::new();
        let lo = cache.get(2, -1, 10);
        let hi = cache.get(2, -1, 30);
        assert_eq!(hi.truncate(10), *lo);
        assert_eq!(*cache.get(2, -1, 20), *hi);
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn duality_example() {
        assert_eq!(tet_index(2, -1, 20), tet_index(1, -2, 20));
    }

    #[test]
    fn quadratic_examples() {
        let cache = TetIndexCache::new();
        let s0 = shifted_sum(&cache, &[(0, 0), (0, 0)], 20);
        assert_eq!(s0, TruncatedSeries::one(20));
        let s2 = shifted_sum(&cache, &[(0, 0), (0, 2)], 20);
        assert!(s2.is_zero());
    }

    #[test]
    fn j_quadratic_identity() {
        let cache = TetIndexCache::new();
        for b in -3..=3 {
            for c in -3..=3 {
                for x in -3..=3 {
                    let s = j_quadratic_sum(&cache, b, c, x, 20);
                    let want = if x == 0 { TruncatedSeries::one(20) } else { TruncatedSeries::zero(20) };
                    assert_eq!(s, want, "(b,c,x)=({b},{c},{x})");
                }
            }
        }
    }

    #[test]
    fn identities_small_range() {
        let report = verify_identities(1, 10);
        for o in &report.outcomes {
            assert!(o.passed(), "{}: {:?}", o.name, o.counterexample);
            assert!(o.checked > 0);
        }
    }

    proptest! {
        #[test]
        fn truncation_consistency(m in -6i64..=6, e in -6i64..=6, lo in -2i64..20, extra in 0i64..20) {
            prop_assert_eq!(tet_index(m, e, lo + extra).truncate(lo), tet_index(m, e, lo));
        }

        #[test]
        fn min_exponent_is_degree(m in -5i64..=5, e in -5i64..=5) {
            prop_assert_eq!(tet_index(m, e, degree(m, e) + 4).min_exponent(), Some(degree(m, e)));
        }
    }
}

//! Truncated Laurent series in `q^{1/2}` with arbitrary-precision integer
//! coefficients.
//!
//! Exponents are stored as integer counts of `q^{1/2}`, so `q` itself has
//! exponent 2. A series carries a truncation order: every coefficient with
//! exponent at or below the order is exact, everything above is unknown.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series is not a unit power series (needs minimum exponent 0 and constant term +1 or -1)")]
    NotAUnit,
}

/// Dense storage over `low ..= low + coeffs.len() - 1`.
///
/// Invariants: the first and last stored coefficients are nonzero, the last
/// stored exponent is at most `trunc`, and the zero series has `low == 0`
/// and no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    low: i64,
    coeffs: Vec<BigInt>,
    trunc: i64,
}

impl TruncatedSeries {
    pub fn zero(trunc: i64) -> Self {
        TruncatedSeries { low: 0, coeffs: Vec::new(), trunc }
    }

    pub fn one(trunc: i64) -> Self {
        Self::monomial(0, BigInt::one(), trunc)
    }

    /// `c * q^{exp/2}`, dropped if `exp > trunc`.
    pub fn monomial(exp: i64, c: BigInt, trunc: i64) -> Self {
        Self::from_dense(exp, vec![c], trunc)
    }

    /// Sums repeated exponents; terms above `trunc` are discarded.
    pub fn from_terms<I>(terms: I, trunc: i64) -> Self
    where
        I: IntoIterator<Item = (i64, BigInt)>,
    {
        let mut items: Vec<(i64, BigInt)> = terms.into_iter().filter(|(e, _)| *e <= trunc).collect();
        if items.is_empty() {
            return Self::zero(trunc);
        }
        items.sort_by_key(|(e, _)| *e);
        let low = items[0].0;
        let high = items[items.len() - 1].0;
        let mut coeffs = vec![BigInt::zero(); (high - low + 1) as usize];
        for (e, c) in items {
            coeffs[(e - low) as usize] += c;
        }
        Self::from_dense(low, coeffs, trunc)
    }

    /// Builds a series from coefficients of `q^{(low+i)/2}`, normalizing.
    pub fn from_dense(low: i64, mut coeffs: Vec<BigInt>, trunc: i64) -> Self {
        let keep = (trunc - low + 1).clamp(0, coeffs.len() as i64) as usize;
        coeffs.truncate(keep);
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let lead = coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == coeffs.len() {
            return Self::zero(trunc);
        }
        coeffs.drain(..lead);
        TruncatedSeries { low: low + lead as i64, coeffs, trunc }
    }

    pub fn trunc_order(&self) -> i64 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.low)
    }

    pub fn max_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.low + self.coeffs.len() as i64 - 1)
    }

    /// Smallest exponent that may carry a nonzero coefficient: the minimum
    /// exponent, or `trunc + 1` for a series with no known terms.
    pub fn valuation(&self) -> i64 {
        self.min_exponent().unwrap_or(self.trunc + 1)
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        let i = exp - self.low;
        if i < 0 || i >= self.coeffs.len() as i64 {
            BigInt::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Nonzero terms in increasing exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        let low = self.low;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (low + i as i64, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// Lowers the truncation order to `min(order, trunc)`.
    pub fn truncate(&self, order: i64) -> Self {
        if order >= self.trunc {
            return self.clone();
        }
        Self::from_dense(self.low, self.coeffs.clone(), order)
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        if self.is_zero() {
            return other.truncate(trunc);
        }
        if other.is_zero() {
            return self.truncate(trunc);
        }
        let low = self.low.min(other.low);
        let high = self.max_exponent().unwrap().max(other.max_exponent().unwrap()).min(trunc);
        if high < low {
            return Self::zero(trunc);
        }
        let mut coeffs = vec![BigInt::zero(); (high - low + 1) as usize];
        for s in [self, other] {
            for (i, c) in s.coeffs.iter().enumerate() {
                let e = s.low + i as i64;
                if e <= high {
                    coeffs[(e - low) as usize] += c;
                }
            }
        }
        Self::from_dense(low, coeffs, trunc)
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries { low: self.low, coeffs: self.coeffs.iter().map(|c| -c).collect(), trunc: self.trunc }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::from_dense(self.low, self.coeffs.iter().map(|c| c * k).collect(), self.trunc)
    }

    /// Multiplies by `q^{k/2}`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero(self.trunc + k);
        }
        TruncatedSeries { low: self.low + k, coeffs: self.coeffs.clone(), trunc: self.trunc + k }
    }

    /// Multiplies by `(-q^{1/2})^k`.
    pub fn scale_by_signed_half_power(&self, k: i64) -> Self {
        let s = self.shift(k);
        if k.rem_euclid(2) == 1 {
            s.neg()
        } else {
            s
        }
    }

    /// Result order is `min(trunc_a + v(b), trunc_b + v(a))`.
    pub fn mul(&self, other: &Self) -> Self {
        self.mul_to(other, i64::MAX)
    }

    /// Product truncated at `min(order, natural product order)`.
    pub fn mul_to(&self, other: &Self, order: i64) -> Self {
        let natural = (self.trunc + other.valuation()).min(other.trunc + self.valuation());
        let trunc = natural.min(order);
        if self.is_zero() || other.is_zero() {
            return Self::zero(trunc);
        }
        let low = self.low + other.low;
        if low > trunc {
            return Self::zero(trunc);
        }
        let len = ((self.max_exponent().unwrap() + other.max_exponent().unwrap()).min(trunc) - low + 1) as usize;
        let coeffs = convolve(&self.coeffs, &other.coeffs, len);
        Self::from_dense(low, coeffs, trunc)
    }

    /// Inverse of a power series with constant term ±1, to the same order.
    pub fn invert_unit_power_series(&self) -> Result<Self, SeriesError> {
        if self.min_exponent() != Some(0) || self.coeffs[0].abs() != BigInt::one() {
            return Err(SeriesError::NotAUnit);
        }
        let n = (self.trunc + 1).max(0) as usize;
        let c0 = self.coeffs[0].clone();
        let mut inv: Vec<BigInt> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                inv.push(c0.clone());
                continue;
            }
            let mut acc = BigInt::zero();
            for i in 1..=k.min(self.coeffs.len() - 1) {
                acc += &self.coeffs[i] * &inv[k - i];
            }
            // c0 is a unit equal to its own inverse.
            inv.push(-(acc * &c0));
        }
        Ok(Self::from_dense(0, inv, self.trunc))
    }

    /// Coefficients of `q^0, q^1, ..., q^{floor(trunc/2)}` when every stored
    /// exponent is a nonnegative even number.
    pub fn integer_q_coefficients(&self) -> Option<Vec<BigInt>> {
        if self.terms().any(|(e, _)| e < 0 || e % 2 != 0) {
            return None;
        }
        let top = self.trunc.div_euclid(2);
        if top < 0 {
            return Some(Vec::new());
        }
        Some((0..=top).map(|m| self.coeff(2 * m)).collect())
    }
}

/// First `len` coefficients of the product of two dense coefficient vectors.
fn convolve(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let bits = |v: &[BigInt]| v.iter().map(|c| c.bits()).max().unwrap_or(0);
    let terms = a.len().min(b.len()) as u64;
    let headroom = 64 - terms.leading_zeros() as u64;
    if bits(a) + bits(b) + headroom + 1 < 127 {
        let a: Vec<i128> = a.iter().map(|c| c.to_i128().unwrap()).collect();
        let b: Vec<i128> = b.iter().map(|c| c.to_i128().unwrap()).collect();
        let mut out = vec![0i128; len];
        for (i, x) in a.iter().enumerate().take(len) {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(len - i) {
                out[i + j] += x * y;
            }
        }
        return out.into_iter().map(BigInt::from).collect();
    }
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::add(self, rhs)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::sub(self, rhs)
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        TruncatedSeries::mul(self, rhs)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries::neg(self)
    }
}

fn fmt_power(f: &mut fmt::Formatter<'_>, exp: i64) -> fmt::Result {
    if exp % 2 == 0 {
        match exp / 2 {
            1 => write!(f, "q"),
            m => write!(f, "q^{m}"),
        }
    } else {
        write!(f, "q^({exp}/2)")
    }
}

/// Canonical rendering, e.g. `1 - 2*q + q^(3/2) + O(q^(7/2))`.
impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            if e == 0 {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                fmt_power(f, e)?;
            }
        }
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "O(")?;
        fmt_power(f, self.trunc + 1)?;
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(terms: &[(i64, i64)], trunc: i64) -> TruncatedSeries {
        TruncatedSeries::from_terms(terms.iter().map(|&(e, c)| (e, BigInt::from(c))), trunc)
    }

    #[test]
    fn add_cancels() {
        let a = s(&[(0, 1), (2, -1)], 20);
        let b = s(&[(2, 1)], 20);
        assert_eq!(a.add(&b), TruncatedSeries::one(20));
    }

    #[test]
    fn add_zero_truncates() {
        let a = s(&[(0, 1), (4, 3), (12, 5)], 20);
        let z = TruncatedSeries::zero(10);
        assert_eq!(z.add(&a), s(&[(0, 1), (4, 3)], 10));
    }

    #[test]
    fn add_doubles_half_power() {
        let a = s(&[(1, 1)], 6);
        assert_eq!(a.add(&a), s(&[(1, 2)], 6));
    }

    #[test]
    fn mul_difference_of_squares() {
        let a = s(&[(0, 1), (2, 1)], 40);
        let b = s(&[(0, 1), (2, -1)], 40);
        assert_eq!(a.mul(&b), s(&[(0, 1), (4, -1)], 40));
    }

    #[test]
    fn mul_identity_and_half_powers() {
        let a = s(&[(-3, 2), (0, 1), (5, -7)], 9);
        assert_eq!(a.mul(&TruncatedSeries::one(9)), a.truncate(9 - 3));
        let h = s(&[(1, 1)], 100);
        assert_eq!(h.mul(&h), s(&[(2, 1)], 101));
    }

    #[test]
    fn mul_order_uses_valuations() {
        let a = s(&[(2, 1)], 10);
        let b = s(&[(4, 1)], 7);
        // min(10 + 4, 7 + 2)
        assert_eq!(a.mul(&b).trunc_order(), 9);
        let z = TruncatedSeries::zero(3);
        assert_eq!(z.mul(&b).trunc_order(), 7);
    }

    #[test]
    fn signed_half_power_examples() {
        let one = TruncatedSeries::one(8);
        assert_eq!(one.scale_by_signed_half_power(2), s(&[(2, 1)], 10));
        assert_eq!(one.scale_by_signed_half_power(1), s(&[(1, -1)], 9));
        let a = s(&[(0, 1), (2, -1)], 8);
        assert_eq!(a.scale_by_signed_half_power(-2), s(&[(-2, 1), (0, -1)], 6));
    }

    #[test]
    fn invert_examples() {
        let a = s(&[(0, 1), (2, -1)], 6);
        assert_eq!(a.invert_unit_power_series().unwrap(), s(&[(0, 1), (2, 1), (4, 1), (6, 1)], 6));
        let one = TruncatedSeries::one(6);
        assert_eq!(one.invert_unit_power_series().unwrap(), one);
        let b = s(&[(0, -1), (2, 1)], 4);
        let inv = b.invert_unit_power_series().unwrap();
        assert_eq!(inv, s(&[(0, -1), (2, -1), (4, -1)], 4));
        assert_eq!(b.mul(&inv), TruncatedSeries::one(4));
    }

    #[test]
    fn invert_rejects_non_units() {
        assert_eq!(s(&[(0, 2)], 4).invert_unit_power_series(), Err(SeriesError::NotAUnit));
        assert_eq!(s(&[(1, 1)], 4).invert_unit_power_series(), Err(SeriesError::NotAUnit));
        assert_eq!(TruncatedSeries::zero(4).invert_unit_power_series(), Err(SeriesError::NotAUnit));
    }

    #[test]
    fn rendering() {
        let a = s(&[(0, 1), (2, -2), (3, 1), (4, -3), (-1, 5)], 6);
        assert_eq!(a.to_string(), "5*q^(-1/2) + 1 - 2*q + q^(3/2) - 3*q^2 + O(q^(7/2))");
        assert_eq!(TruncatedSeries::zero(3).to_string(), "O(q^2)");
        assert_eq!(s(&[(2, -1)], 3).to_string(), "-q + O(q^2)");
    }

    #[test]
    fn big_coefficients_fall_back_to_bigint() {
        let big: BigInt = BigInt::from(1u8) << 100;
        let a = TruncatedSeries::from_terms([(0, big.clone()), (2, big.clone())], 10);
        let sq = a.mul(&a);
        assert_eq!(sq.coeff(2), &big * &big * 2);
    }

    #[test]
    fn integer_q_coefficients() {
        let a = s(&[(0, 1), (4, -2)], 7);
        let v: Vec<i64> = a.integer_q_coefficients().unwrap().iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(v, vec![1, 0, -2, 0]);
        assert!(s(&[(1, 1)], 7).integer_q_coefficients().is_none());
    }

    prop_compose! {
        fn series()(low in -4i64..4, cs in proptest::collection::vec(-5i64..=5, 0..8), extra in 0i64..6)
            -> TruncatedSeries {
            let trunc = low + cs.len() as i64 + extra;
            TruncatedSeries::from_dense(low, cs.into_iter().map(BigInt::from).collect(), trunc)
        }
    }

    prop_compose! {
        fn unit_series()(sign in prop::bool::ANY, cs in proptest::collection::vec(-5i64..=5, 0..8), trunc in 0i64..20)
            -> TruncatedSeries {
            let mut v = vec![BigInt::from(if sign { 1 } else { -1 })];
            v.extend(cs.into_iter().map(BigInt::from));
            TruncatedSeries::from_dense(0, v, trunc)
        }
    }

    fn common(a: &TruncatedSeries, b: &TruncatedSeries) -> (TruncatedSeries, TruncatedSeries) {
        let t = a.trunc_order().min(b.trunc_order());
        (a.truncate(t), b.truncate(t))
    }

    proptest! {
        #[test]
        fn add_commutes_and_associates(a in series(), b in series(), c in series()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        }

        #[test]
        fn mul_commutes_and_associates(a in series(), b in series(), c in series()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            let (x, y) = common(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c)));
            prop_assert_eq!(x, y);
        }

        #[test]
        fn mul_distributes(a in series(), b in series(), c in series()) {
            let (x, y) = common(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(x, y);
        }

        #[test]
        fn inverse_multiplies_to_one(u in unit_series()) {
            let inv = u.invert_unit_power_series().unwrap();
            let p = u.mul(&inv);
            prop_assert_eq!(p.clone(), TruncatedSeries::one(p.trunc_order()));
            prop_assert!(p.trunc_order() >= u.trunc_order());
        }

        #[test]
        fn signed_shift_round_trips(a in series(), k in -7i64..7) {
            prop_assert_eq!(a.scale_by_signed_half_power(k).scale_by_signed_half_power(-k), a);
        }
    }
}

//! Scalars of `Q_p` at bounded relative precision.
//!
//! A nonzero scalar is stored as `p^v * u` where `u` is a unit known modulo
//! `p^r`; `r` is the number of certified digits. The absolute precision of
//! the represented element is `v + r`. Zero is a distinguished exact value.
//!
//! Two additions are provided. [`PadicScalar::checked_add`] refuses to
//! produce a value when every jointly known digit cancels, unless the two
//! operands are exact negatives of each other. The `+`/`-` operators collapse
//! such a cancellation to zero, which is the capped-absolute convention the
//! matrix kernels rely on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest modulus `p^N` we accept; sums stay in `u64`, products in `u128`.
const MAX_MODULUS: u64 = 1 << 62;

/// The prime `p` together with the relative precision cap `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicContext {
    p: u64,
    precision: u32,
    modulus: u64,
}

impl PadicContext {
    pub const DEFAULT_PRECISION: u32 = 12;

    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidContext(format!("{p} is not prime")));
        }
        if precision == 0 {
            return Err(Error::InvalidContext("precision must be at least 1".into()));
        }
        let mut modulus: u64 = 1;
        for _ in 0..precision {
            modulus = modulus
                .checked_mul(p)
                .filter(|m| *m <= MAX_MODULUS)
                .ok_or_else(|| {
                    Error::InvalidContext(format!("{p}^{precision} exceeds the 2^62 digit budget"))
                })?;
        }
        Ok(Self { p, precision, modulus })
    }

    pub fn with_default_precision(p: u64) -> Result<Self> {
        Self::new(p, Self::DEFAULT_PRECISION)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `p^N`.
    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `p^e` for `0 <= e <= N`.
    #[inline]
    pub fn pow(&self, e: u32) -> u64 {
        debug_assert!(e <= self.precision);
        self.p.pow(e)
    }

    pub fn zero(&self) -> PadicScalar {
        PadicScalar::zero(*self)
    }

    pub fn one(&self) -> PadicScalar {
        PadicScalar::from_int(1, *self)
    }

    pub fn int(&self, a: i128) -> PadicScalar {
        PadicScalar::from_int(a, *self)
    }

    /// `a / b`; panics when `b == 0`.
    pub fn ratio(&self, a: i128, b: i128) -> PadicScalar {
        PadicScalar::from_rational(a, b, *self).expect("nonzero denominator")
    }

    /// The exact power `p^e`.
    pub fn p_power(&self, e: i64) -> PadicScalar {
        PadicScalar {
            ctx: *self,
            repr: Repr::Value { val: e, unit: 1 % self.modulus, digits: self.precision },
        }
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `(v_p(a), a / p^v)` for nonzero `a`.
fn split_valuation(mut a: i128, p: u64) -> (i64, i128) {
    let p = p as i128;
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    (v, a)
}

/// Valuation of a nonzero `u64`.
fn vp_u64(mut a: u64, p: u64) -> u32 {
    let mut v = 0;
    while a.is_multiple_of(p) {
        a /= p;
        v += 1;
    }
    v
}

/// Inverse of a unit modulo `m`.
fn inv_mod(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "not a unit");
    t0.rem_euclid(m as i128) as u64
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Repr {
    Zero,
    Value { val: i64, unit: u64, digits: u32 },
}

/// An element of `Q_p` at bounded precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    ctx: PadicContext,
    repr: Repr,
}

impl PadicScalar {
    pub fn zero(ctx: PadicContext) -> Self {
        Self { ctx, repr: Repr::Zero }
    }

    pub fn one(ctx: PadicContext) -> Self {
        Self::from_int(1, ctx)
    }

    pub fn from_int(a: i128, ctx: PadicContext) -> Self {
        Self::from_rational(a, 1, ctx).expect("denominator is one")
    }

    /// `a / b` at full precision; `a == 0` gives the exact zero.
    pub fn from_rational(a: i128, b: i128, ctx: PadicContext) -> Result<Self> {
        if b == 0 {
            return Err(Error::DivisionByZero);
        }
        if a == 0 {
            return Ok(Self::zero(ctx));
        }
        let (va, ua) = split_valuation(a, ctx.p);
        let (vb, ub) = split_valuation(b, ctx.p);
        let m = ctx.modulus as i128;
        let num = ua.rem_euclid(m) as u64;
        let den = ub.rem_euclid(m) as u64;
        let unit = mul_mod(num, inv_mod(den, ctx.modulus), ctx.modulus);
        Ok(Self { ctx, repr: Repr::Value { val: va - vb, unit, digits: ctx.precision } })
    }

    /// Build `p^val * unit` with `digits` certified digits.
    pub fn from_parts(val: i64, unit: u64, digits: u32, ctx: PadicContext) -> Result<Self> {
        if digits == 0 || digits > ctx.precision {
            return Err(Error::InvalidInput(format!("digit count {digits} outside 1..={}", ctx.precision)));
        }
        let m = ctx.pow(digits);
        let unit = unit % m;
        if unit.is_multiple_of(ctx.p) {
            return Err(Error::InvalidInput(format!("{unit} is not a p-adic unit")));
        }
        Ok(Self { ctx, repr: Repr::Value { val, unit, digits } })
    }

    #[inline]
    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// `None` stands for `+infinity` (the exact zero).
    #[inline]
    pub fn valuation(&self) -> Option<i64> {
        match self.repr {
            Repr::Zero => None,
            Repr::Value { val, .. } => Some(val),
        }
    }

    pub fn unit(&self) -> Option<u64> {
        match self.repr {
            Repr::Zero => None,
            Repr::Value { unit, .. } => Some(unit),
        }
    }

    pub fn known_digits(&self) -> Option<u32> {
        match self.repr {
            Repr::Zero => None,
            Repr::Value { digits, .. } => Some(digits),
        }
    }

    /// Absolute precision `v + r`; `None` for the exact zero.
    pub fn abs_precision(&self) -> Option<i64> {
        match self.repr {
            Repr::Zero => None,
            Repr::Value { val, digits, .. } => Some(val + digits as i64),
        }
    }

    /// `|x|_p = p^(-v)`, zero for the exact zero.
    pub fn norm(&self) -> BigRational {
        match self.repr {
            Repr::Zero => BigRational::zero(),
            Repr::Value { val, .. } => p_power_rational(self.ctx.p, -val),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    fn value(val: i64, unit: u64, digits: u32, ctx: PadicContext) -> Self {
        Self { ctx, repr: Repr::Value { val, unit, digits } }
    }

    /// Digit-wise sum at the overlapping absolute precision; `None` when every
    /// jointly certified digit cancels.
    fn raw_sum(&self, other: &Self) -> Option<Self> {
        let (a, b) = match (self.repr, other.repr) {
            (Repr::Zero, _) => return Some(*other),
            (_, Repr::Zero) => return Some(*self),
            (a, b) => (a, b),
        };
        let (Repr::Value { val: va, unit: ua, digits: ra }, Repr::Value { val: vb, unit: ub, digits: rb }) = (a, b)
        else {
            unreachable!()
        };
        let ctx = self.ctx;
        let abs = (va + ra as i64).min(vb + rb as i64);
        let vmin = va.min(vb);
        let width = (abs - vmin) as u32;
        let m = ctx.pow(width);
        let shifted = |val: i64, unit: u64| -> u64 {
            let shift = (val - vmin) as u32;
            if shift >= width {
                0
            } else {
                mul_mod(unit % m, ctx.pow(shift), m)
            }
        };
        let s = (shifted(va, ua) + shifted(vb, ub)) % m;
        if s == 0 {
            return None;
        }
        let w = vp_u64(s, ctx.p);
        Some(Self::value(vmin + w as i64, s / ctx.pow(w), width - w, ctx))
    }

    fn is_exact_negative_of(&self, other: &Self) -> bool {
        match (self.repr, other.repr) {
            (Repr::Value { val: va, unit: ua, digits: ra }, Repr::Value { val: vb, unit: ub, digits: rb }) => {
                va == vb && ra == rb && (ua + ub) % self.ctx.pow(ra) == 0
            }
            _ => false,
        }
    }

    /// Addition that refuses to guess: cancellation of all jointly known
    /// digits is `PrecisionExhausted`, except for exact negatives, which give
    /// the exact zero.
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        if self.is_exact_negative_of(other) {
            return Ok(Self::zero(self.ctx));
        }
        self.raw_sum(other).ok_or_else(|| {
            Error::PrecisionExhausted(format!("{self} + {other} cancels every certified digit"))
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-*other)
    }

    pub fn inv(&self) -> Result<Self> {
        match self.repr {
            Repr::Zero => Err(Error::DivisionByZero),
            Repr::Value { val, unit, digits } => {
                Ok(Self::value(-val, inv_mod(unit, self.ctx.pow(digits)), digits, self.ctx))
            }
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        Ok(*self * other.inv()?)
    }

    fn check_ctx(&self, other: &Self) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// Forget every digit at or beyond absolute position `m`.
    pub fn truncate_abs(&self, m: i64) -> Self {
        match self.repr {
            Repr::Zero => *self,
            Repr::Value { val, unit, digits } => {
                if val >= m {
                    Self::zero(self.ctx)
                } else {
                    let d = digits.min((m - val) as u32);
                    Self::value(val, unit % self.ctx.pow(d), d, self.ctx)
                }
            }
        }
    }

    /// Whether `self - other` is certified to vanish modulo `p^abs`.
    pub fn agrees_to(&self, other: &Self, abs: i64) -> bool {
        let known = match (self.abs_precision(), other.abs_precision()) {
            (None, None) => return true,
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.min(b),
        };
        match self.raw_sum(&-*other) {
            Some(d) => d.valuation().is_none_or(|v| v >= abs),
            None => known >= abs,
        }
    }

    /// `x mod p^k` for an integral scalar certified to at least `k` digits.
    pub fn residue(&self, k: u32) -> Option<u64> {
        match self.repr {
            Repr::Zero => Some(0),
            Repr::Value { val, unit, digits } => {
                if val < 0 {
                    return None;
                }
                if val >= k as i64 {
                    return Some(0);
                }
                if val + (digits as i64) < k as i64 {
                    return None;
                }
                let m = self.ctx.p.checked_pow(k)?;
                let keep = k - val as u32;
                Some(((unit % self.ctx.p.pow(keep)) as u128 * self.ctx.p.pow(val as u32) as u128 % m as u128) as u64)
            }
        }
    }

    /// `p^e * self`, exact.
    pub fn shift(&self, e: i64) -> Self {
        match self.repr {
            Repr::Zero => *self,
            Repr::Value { val, unit, digits } => Self::value(val + e, unit, digits, self.ctx),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = *self;
        let mut acc = Self::one(self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// A small rational congruent to this scalar at its certified precision.
    ///
    /// The unit is rationally reconstructed when a numerator and denominator
    /// below `sqrt(p^r / 2)` exist; otherwise its integer representative is
    /// used.
    pub fn to_rational(&self) -> BigRational {
        match self.repr {
            Repr::Zero => BigRational::zero(),
            Repr::Value { val, unit, digits } => {
                let m = self.ctx.pow(digits);
                let (a, b) = reconstruct(unit, m, self.ctx.p).unwrap_or((unit as i128, 1));
                BigRational::new(BigInt::from(a), BigInt::from(b)) * p_power_rational(self.ctx.p, val)
            }
        }
    }

    /// Canonical rational string `a/b` (or `a` when the denominator is one).
    pub fn to_rational_string(&self) -> String {
        rational_string(&self.to_rational())
    }

    /// Parse `a/b` or `a`.
    pub fn parse(s: &str, ctx: PadicContext) -> Result<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let parse = |t: &str| -> Result<i128> {
            t.parse::<i128>().map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
        };
        let (a, b) = (parse(num)?, parse(den)?);
        if b == 0 {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Self::from_rational(a, b, ctx)
    }
}

/// Rational reconstruction of `u mod m` with both parts bounded by `sqrt(m/2)`.
fn reconstruct(u: u64, m: u64, p: u64) -> Option<(i128, i128)> {
    let bound = ((m / 2) as f64).sqrt().floor() as i128;
    let (mut r0, mut r1) = (m as i128, u as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    let _ = (r0, t0);
    if t1 == 0 || t1.abs() > bound || (t1.unsigned_abs() as u64).is_multiple_of(p) {
        return None;
    }
    let (a, b) = if t1 < 0 { (-r1, -t1) } else { (r1, t1) };
    Some((a, b))
}

pub(crate) fn p_power_rational(p: u64, e: i64) -> BigRational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// `num/den`, or `num` when the denominator is one.
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for PadicScalar {
    /// Diagnostic digit form `p^v * u (r digits)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::Value { val, unit, digits } => write!(f, "{}^{} * {} ({} digits)", self.ctx.p, val, unit, digits),
        }
    }
}

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        match self.repr {
            Repr::Zero => self,
            Repr::Value { val, unit, digits } => {
                let m = self.ctx.pow(digits);
                PadicScalar::value(val, m - unit, digits, self.ctx)
            }
        }
    }
}

impl Add for PadicScalar {
    type Output = PadicScalar;
    /// Capped addition: a total cancellation collapses to zero.
    fn add(self, rhs: PadicScalar) -> PadicScalar {
        debug_assert_eq!(self.ctx, rhs.ctx);
        self.raw_sum(&rhs).unwrap_or(PadicScalar::zero(self.ctx))
    }
}

impl Sub for PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: PadicScalar) -> PadicScalar {
        self + (-rhs)
    }
}

impl Mul for PadicScalar {
    type Output = PadicScalar;
    /// Exact: valuations add, units multiply, certified digits take the minimum.
    fn mul(self, rhs: PadicScalar) -> PadicScalar {
        debug_assert_eq!(self.ctx, rhs.ctx);
        match (self.repr, rhs.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => PadicScalar::zero(self.ctx),
            (Repr::Value { val: va, unit: ua, digits: ra }, Repr::Value { val: vb, unit: ub, digits: rb }) => {
                let d = ra.min(rb);
                let m = self.ctx.pow(d);
                PadicScalar::value(va + vb, mul_mod(ua % m, ub % m, m), d, self.ctx)
            }
        }
    }
}

impl std::iter::Sum for PadicScalar {
    fn sum<I: Iterator<Item = PadicScalar>>(mut iter: I) -> PadicScalar {
        let first = iter.next().expect("sum of an empty scalar iterator needs a context");
        iter.fold(first, |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, n: u32) -> PadicContext {
        PadicContext::new(p, n).unwrap()
    }

    #[test]
    fn context_rejects_composites_and_zero_precision() {
        assert!(PadicContext::new(4, 12).is_err());
        assert!(PadicContext::new(1, 12).is_err());
        assert!(PadicContext::new(3, 0).is_err());
        assert!(PadicContext::new(2, 62).is_ok());
        assert!(PadicContext::new(2, 63).is_err());
    }

    #[test]
    fn from_rational_examples() {
        let c = ctx(3, 6);
        let nine = PadicScalar::from_rational(9, 1, c).unwrap();
        assert_eq!(nine.valuation(), Some(2));
        assert_eq!(nine.unit(), Some(1));
        let third = PadicScalar::from_rational(1, 3, c).unwrap();
        assert_eq!(third.valuation(), Some(-1));
        assert_eq!(third.unit(), Some(1));
        assert!(PadicScalar::from_rational(0, 5, c).unwrap().is_zero());
        assert_eq!(PadicScalar::from_rational(1, 0, c), Err(Error::DivisionByZero));
    }

    #[test]
    fn ten_quarters_round_trips_by_multiplication() {
        let c = ctx(2, 8);
        let x = PadicScalar::from_rational(10, 4, c).unwrap();
        assert_eq!(x.valuation(), Some(-1));
        let back = x * c.int(4);
        // 10 known modulo 2^(-1 + 8 + 2) in absolute terms; check mod 2^7
        assert!(back.agrees_to(&c.int(10), 7));
        assert_eq!(x.to_rational_string(), "5/2");
    }

    #[test]
    fn add_mul_identities() {
        let c = ctx(3, 12);
        let s = c.int(1).checked_add(&c.int(2)).unwrap();
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.unit(), Some(1));
        let prod = c.ratio(1, 3) * c.int(3);
        assert_eq!(prod.valuation(), Some(0));
        assert_eq!(prod.unit(), Some(1));
    }

    #[test]
    fn exact_cancellation_and_exhaustion() {
        let c = ctx(3, 12);
        let x = c.ratio(7, 5);
        assert!(x.checked_add(&-x).unwrap().is_zero());
        // same digits, different certified counts: cannot certify anything
        let y = (-x).truncate_abs(5);
        assert!(matches!(x.checked_add(&y), Err(Error::PrecisionExhausted(_))));
        assert!((x + y).is_zero());
    }

    #[test]
    fn norms() {
        let c = ctx(3, 12);
        assert_eq!(c.int(9).norm(), BigRational::new(1.into(), 9.into()));
        assert_eq!(c.zero().norm(), BigRational::zero());
        assert_eq!(c.int(6).norm(), BigRational::new(1.into(), 3.into()));
        assert_eq!(c.zero().valuation(), None);
    }

    #[test]
    fn inverse_of_zero_fails() {
        let c = ctx(5, 4);
        assert_eq!(c.zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn precision_drops_on_partial_cancellation() {
        let c = ctx(3, 12);
        // 1 + 26 = 27: three digits cancel, nine survive
        let s = c.int(1).checked_add(&c.int(26)).unwrap();
        assert_eq!(s.valuation(), Some(3));
        assert_eq!(s.known_digits(), Some(9));
        assert_eq!(s.abs_precision(), Some(12));
    }

    #[test]
    fn rational_strings_and_display() {
        let c = ctx(3, 12);
        assert_eq!(c.int(-1).to_rational_string(), "-1");
        assert_eq!(c.ratio(1, 9).to_rational_string(), "1/9");
        assert_eq!(c.ratio(-7, 12).to_rational_string(), "-7/12");
        assert_eq!(PadicScalar::parse(" -7/12 ", c).unwrap(), c.ratio(-7, 12));
        assert_eq!(c.int(9).to_string(), "3^2 * 1 (12 digits)");
        assert!(PadicScalar::parse("1/0", c).is_err());
        assert!(PadicScalar::parse("x", c).is_err());
    }

    #[test]
    fn residues() {
        let c = ctx(3, 12);
        assert_eq!(c.int(10).residue(2), Some(1));
        assert_eq!(c.int(-1).residue(2), Some(8));
        assert_eq!(c.int(9).residue(2), Some(0));
        assert_eq!(c.ratio(1, 3).residue(2), None);
    }
}

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Result, WachError};

/// Sum of the base-`p` digits of `n`.
pub fn digit_sum(mut n: u64, p: u64) -> u64 {
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

/// `v_p(n!)` through the digit-sum closed form.
pub fn val_factorial(n: u64, p: u64) -> u64 {
    (n - digit_sum(n, p)) / (p - 1)
}

thread_local! {
    static POW_CACHE: RefCell<HashMap<(u64, u32), BigUint>> = RefCell::new(HashMap::new());
}

pub fn p_pow(p: u64, k: u32) -> BigUint {
    POW_CACHE.with(|c| {
        c.borrow_mut()
            .entry((p, k))
            .or_insert_with(|| BigUint::from(p).pow(k))
            .clone()
    })
}

pub fn val_biguint(x: &BigUint, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    if p == 2 {
        return x.trailing_zeros().map(|t| t as u32);
    }
    let pb = BigUint::from(p);
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        v += 1;
        y = q;
    }
}

pub fn val_bigint(x: &BigInt, p: u64) -> Option<u32> {
    val_biguint(x.magnitude(), p)
}

pub fn val_rational(q: &BigRational, p: u64) -> Option<i64> {
    let n = val_bigint(q.numer(), p)? as i64;
    let d = val_bigint(q.denom(), p).unwrap_or(0) as i64;
    Some(n - d)
}

fn inverse_mod(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    if modulus.is_one() {
        return Some(BigUint::zero());
    }
    let a = BigInt::from(a.clone());
    let m = BigInt::from(modulus.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    e.x.mod_floor(&m).to_biguint()
}

/// An element of `Z_p` known modulo `p^prec`.
///
/// `val` is the valuation of the residue, or `prec` when the residue is zero.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PadicScalar {
    p: u64,
    residue: BigUint,
    prec: u32,
    val: u32,
}

impl PadicScalar {
    fn from_residue(p: u64, residue: BigUint, prec: u32) -> Self {
        let val = val_biguint(&residue, p).unwrap_or(prec).min(prec);
        PadicScalar {
            p,
            residue,
            prec,
            val,
        }
    }

    pub fn new(p: u64, value: &BigInt, prec: u32) -> Self {
        let m = BigInt::from(p_pow(p, prec));
        let r = value.mod_floor(&m).to_biguint().expect("non-negative residue");
        Self::from_residue(p, r, prec)
    }

    pub fn from_biguint(p: u64, value: &BigUint, prec: u32) -> Self {
        Self::from_residue(p, value % p_pow(p, prec), prec)
    }

    pub fn from_i64(p: u64, value: i64, prec: u32) -> Self {
        Self::new(p, &BigInt::from(value), prec)
    }

    pub fn zero(p: u64, prec: u32) -> Self {
        PadicScalar {
            p,
            residue: BigUint::zero(),
            prec,
            val: prec,
        }
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::from_i64(p, 1, prec)
    }

    pub fn from_rational(p: u64, q: &BigRational, prec: u32) -> Result<Self> {
        if q.is_zero() {
            return Ok(Self::zero(p, prec));
        }
        let v = val_rational(q, p).unwrap_or(0);
        if v < 0 {
            return Err(WachError::IntegralityViolation(format!(
                "{q} has valuation {v} at p = {p}"
            )));
        }
        let m = p_pow(p, prec);
        let den = (q.denom().magnitude()) % &m;
        let inv = inverse_mod(&den, &m).expect("denominator is a unit");
        let num = BigInt::from(q.numer().clone()).mod_floor(&BigInt::from(m.clone()));
        let num = num.to_biguint().expect("non-negative");
        Ok(Self::from_residue(p, (num * inv) % m, prec))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn val(&self) -> u32 {
        self.val
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn lift(&self) -> BigInt {
        BigInt::from(self.residue.clone())
    }

    /// Representative in `(-p^prec/2, p^prec/2]`.
    pub fn lift_centered(&self) -> BigInt {
        let m = BigInt::from(p_pow(self.p, self.prec));
        let r = self.lift();
        if &r * 2 > m {
            r - m
        } else {
            r
        }
    }

    pub fn is_zero(&self) -> bool {
        self.val >= self.prec
    }

    pub fn is_unit(&self) -> bool {
        self.val == 0 && self.prec > 0
    }

    pub fn with_prec(&self, k: u32) -> Self {
        if k >= self.prec {
            return self.clone();
        }
        Self::from_residue(self.p, &self.residue % p_pow(self.p, k), k)
    }

    fn check_p(&self, other: &Self) {
        assert_eq!(self.p, other.p, "mixing scalars of different primes");
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        self.check_p(other);
        let prec = self.prec.min(other.prec);
        let s = &self.residue + &other.residue;
        Self::from_residue(self.p, s % p_pow(self.p, prec), prec)
    }

    pub fn neg_ref(&self) -> Self {
        if self.residue.is_zero() {
            return self.clone();
        }
        Self::from_residue(self.p, p_pow(self.p, self.prec) - &self.residue, self.prec)
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        self.check_p(other);
        let prec = (self.prec + other.val).min(other.prec + self.val);
        let prod = &self.residue * &other.residue;
        Self::from_residue(self.p, prod % p_pow(self.p, prec), prec)
    }

    pub fn mul_p_pow(&self, k: u32) -> Self {
        let r = &self.residue * p_pow(self.p, k);
        PadicScalar {
            p: self.p,
            residue: r,
            prec: self.prec + k,
            val: self.val + k,
        }
    }

    /// Exact division by `p^k`; the result loses `k` digits.
    pub fn div_p_pow(&self, k: u32) -> Result<Self> {
        if self.val < k && !self.is_zero() {
            return Err(WachError::NotDivisible(format!(
                "valuation {} below {}",
                self.val, k
            )));
        }
        let prec = self.prec.saturating_sub(k);
        if self.is_zero() || self.val < k {
            return Ok(Self::zero(self.p, prec));
        }
        let r = &self.residue / p_pow(self.p, k);
        Ok(Self::from_residue(self.p, r % p_pow(self.p, prec), prec))
    }

    pub fn invert(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(WachError::NonUnit(self.val));
        }
        let m = p_pow(self.p, self.prec);
        let inv = inverse_mod(&self.residue, &m).ok_or(WachError::NonUnit(self.val))?;
        Ok(Self::from_residue(self.p, inv, self.prec))
    }

    /// Exact quotient `self / other`, keeping the smaller relative precision.
    pub fn div_exact(&self, other: &Self) -> Result<Self> {
        self.check_p(other);
        if other.is_zero() {
            return Err(WachError::NotDivisible("division by zero".into()));
        }
        let vb = other.val;
        if self.is_zero() {
            return Ok(Self::zero(self.p, self.prec.saturating_sub(vb)));
        }
        if self.val < vb {
            return Err(WachError::NotDivisible(format!(
                "valuation {} below divisor valuation {}",
                self.val, vb
            )));
        }
        let rel_a = self.prec - self.val;
        let rel_b = other.prec - vb;
        let rel = rel_a.min(rel_b);
        let vq = self.val - vb;
        let prec = vq + rel;
        let a = self.div_p_pow(self.val)?.with_prec(rel);
        let b = other.div_p_pow(vb)?.with_prec(rel);
        let q = a.mul_ref(&b.invert()?);
        Ok(Self::from_residue(
            self.p,
            (&q.residue * p_pow(self.p, vq)) % p_pow(self.p, prec),
            prec,
        ))
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut result = Self::one(self.p, self.prec.max(1) + self.val * e as u32);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        result
    }

    /// Equality modulo the smaller of the two precisions.
    pub fn eq_to_prec(&self, other: &Self) -> bool {
        self.check_p(other);
        let k = self.prec.min(other.prec);
        let m = p_pow(self.p, k);
        (&self.residue % &m) == (&other.residue % &m)
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.residue.to_u64()
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} mod {}^{} (val {})",
            self.residue, self.p, self.prec, self.val
        )
    }
}

impl Add for &PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: &PadicScalar) -> PadicScalar {
        self.add_ref(rhs)
    }
}

impl Sub for &PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: &PadicScalar) -> PadicScalar {
        self.sub_ref(rhs)
    }
}

impl Mul for &PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: &PadicScalar) -> PadicScalar {
        self.mul_ref(rhs)
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        self.neg_ref()
    }
}

pub fn invert(a: &PadicScalar) -> Result<PadicScalar> {
    a.invert()
}

/// `exp(x)` summed until every remaining term vanishes modulo `p^prec`.
pub fn exp_padic(x: &PadicScalar) -> Result<PadicScalar> {
    let p = x.p;
    let prec = x.prec;
    if x.is_zero() {
        return Ok(PadicScalar::one(p, prec));
    }
    let v = x.val as u64;
    if v < 1 || (p == 2 && v < 2) {
        return Err(WachError::Divergent { p, val: x.val });
    }
    let mut k_max: u64 = 1;
    while (k_max * v) * (p - 1) < (prec as u64) * (p - 1) + (k_max - 1) {
        k_max += 1;
    }
    let extra = val_factorial(k_max, p) as u32;
    let work = prec + extra;
    let m_work = p_pow(p, work);
    let m_out = p_pow(p, prec);
    let r = x.residue.clone();
    let mut power = BigUint::one();
    let mut sum = BigUint::zero();
    let mut fact_unit = BigUint::one();
    let mut fact_val: u32 = 0;
    for k in 0..k_max {
        if k > 0 {
            power = (&power * &r) % &m_work;
            let mut kk = k;
            while kk % p == 0 {
                kk /= p;
                fact_val += 1;
            }
            fact_unit = (&fact_unit * BigUint::from(kk)) % &m_out;
        }
        let shifted = &power / p_pow(p, fact_val);
        let inv = inverse_mod(&fact_unit, &m_out).expect("unit");
        sum = (sum + (shifted % &m_out) * inv) % &m_out;
    }
    Ok(PadicScalar::from_residue(p, sum, prec))
}

/// `p^shift * mantissa` with a unit mantissa and a lower bound on the valuation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PadicRational {
    shift: i64,
    mantissa: PadicScalar,
    floor: i64,
}

impl PadicRational {
    pub fn from_rational(p: u64, q: &BigRational, rel_prec: u32, floor: i64) -> Result<Self> {
        if q.is_zero() {
            return Ok(PadicRational {
                shift: i64::MAX / 4,
                mantissa: PadicScalar::zero(p, rel_prec),
                floor,
            });
        }
        let v = val_rational(q, p).expect("nonzero");
        if v < floor {
            return Err(WachError::IntegralityViolation(format!(
                "valuation {v} below floor {floor}"
            )));
        }
        let pv = BigRational::from_integer(BigInt::from(p_pow(p, v.unsigned_abs() as u32)));
        let unit = if v >= 0 { q / pv } else { q * pv };
        Ok(PadicRational {
            shift: v,
            mantissa: PadicScalar::from_rational(p, &unit, rel_prec)?,
            floor,
        })
    }

    pub fn val(&self) -> i64 {
        self.shift
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    pub fn mantissa(&self) -> &PadicScalar {
        &self.mantissa
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            let rel = self.mantissa.prec.min(other.mantissa.prec);
            return Ok(PadicRational {
                shift: i64::MAX / 4,
                mantissa: PadicScalar::zero(self.mantissa.p, rel),
                floor: self.floor + other.floor,
            });
        }
        Ok(PadicRational {
            shift: self.shift + other.shift,
            mantissa: self.mantissa.mul_ref(&other.mantissa),
            floor: self.floor + other.floor,
        })
    }

    /// Integral value to absolute precision `abs_prec`.
    pub fn to_scalar(&self, abs_prec: u32) -> Result<PadicScalar> {
        let p = self.mantissa.p;
        if self.is_zero() {
            return Ok(PadicScalar::zero(p, abs_prec));
        }
        if self.shift < 0 {
            return Err(WachError::IntegralityViolation(format!(
                "negative valuation {}",
                self.shift
            )));
        }
        let s = self.shift as u32;
        if s >= abs_prec {
            return Ok(PadicScalar::zero(p, abs_prec));
        }
        Ok(self.mantissa.mul_p_pow(s).with_prec(abs_prec))
    }

    pub fn to_rational(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let m = BigRational::from_integer(self.mantissa.lift_centered());
        let pv = BigRational::from_integer(BigInt::from(p_pow(
            self.mantissa.p,
            self.shift.unsigned_abs() as u32,
        )));
        if self.shift >= 0 {
            m * pv
        } else {
            m / pv
        }
    }
}

impl fmt::Display for PadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        write!(
            f,
            "{}^{} * {}",
            self.mantissa.p, self.shift, self.mantissa
        )
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= p {
        if p % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Generalised binomial `C(c, k)` for an integer `c` of any sign.
pub fn binomial_int(c: &BigInt, k: u64) -> BigInt {
    let mut num = BigInt::one();
    for i in 0..k {
        num *= c - BigInt::from(i);
    }
    let f = BigInt::from(factorial(k));
    debug_assert!((&num % &f).is_zero());
    num / f
}

/// `C(c, k)` for a p-adic `c`; precision drops by `v_p(k!)`.
pub fn binomial_padic(c: &PadicScalar, k: u64) -> PadicScalar {
    let p = c.p;
    let mut num = PadicScalar::one(p, c.prec + 64);
    for i in 0..k {
        let term = c.sub_ref(&PadicScalar::from_i64(p, i as i64, c.prec + 64));
        num = num.mul_ref(&term);
    }
    let f = PadicScalar::from_biguint(p, &factorial(k), c.prec + 64 + val_factorial(k, p) as u32);
    num.div_exact(&f).expect("binomial coefficients are integral")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre(n: u64, p: u64) -> u64 {
        let mut s = 0;
        let mut q = p;
        while q <= n {
            s += n / q;
            q *= p;
        }
        s
    }

    #[test]
    fn digit_sum_examples() {
        assert_eq!(digit_sum(10, 3), 2);
        assert_eq!(digit_sum(3u64.pow(5), 3), 1);
        assert_eq!(digit_sum(0, 7), 0);
    }

    #[test]
    fn val_factorial_examples() {
        assert_eq!(val_factorial(10, 3), 4);
        assert_eq!(val_factorial(0, 5), 0);
        assert_eq!(val_factorial(4, 2), 3);
        for p in [2, 3, 5, 7] {
            for n in 0..2000 {
                assert_eq!(val_factorial(n, p), legendre(n, p));
            }
        }
    }

    #[test]
    fn invert_examples() {
        let two = PadicScalar::from_i64(3, 2, 3);
        assert_eq!(two.invert().unwrap().to_u64(), Some(14));
        let one = PadicScalar::one(5, 4);
        assert_eq!(one.invert().unwrap(), one);
        let three = PadicScalar::from_i64(3, 3, 4);
        assert_eq!(three.invert(), Err(WachError::NonUnit(1)));
    }

    #[test]
    fn exp_examples() {
        let x = PadicScalar::from_i64(3, 3, 3);
        assert_eq!(exp_padic(&x).unwrap().to_u64(), Some(13));
        let z = PadicScalar::zero(5, 6);
        assert_eq!(exp_padic(&z).unwrap(), PadicScalar::one(5, 6));
        let two = PadicScalar::from_i64(2, 2, 6);
        assert!(matches!(exp_padic(&two), Err(WachError::Divergent { .. })));
        let four = PadicScalar::from_i64(2, 4, 10);
        assert!(exp_padic(&four).is_ok());
    }

    #[test]
    fn exp_matches_rational_partial_sums() {
        for (p, x, prec) in [(3u64, 3i64, 6u32), (5, 10, 5), (2, 4, 8), (7, 49, 6)] {
            let xs = PadicScalar::from_i64(p, x, prec);
            let e = exp_padic(&xs).unwrap();
            let mut sum = BigRational::zero();
            let mut term = BigRational::one();
            for k in 0..200u64 {
                if k > 0 {
                    term = term * BigRational::from_integer(BigInt::from(x))
                        / BigRational::from_integer(BigInt::from(k));
                }
                sum += &term;
            }
            let oracle = PadicScalar::from_rational(p, &sum, prec).unwrap();
            assert_eq!(e, oracle, "p={p} x={x}");
        }
    }

    #[test]
    fn div_exact_loses_divisor_valuation() {
        let a = PadicScalar::from_i64(3, 18, 6);
        let b = PadicScalar::from_i64(3, 9, 8);
        let q = a.div_exact(&b).unwrap();
        assert_eq!(q.to_u64(), Some(2));
        assert_eq!(q.prec(), 4);
        let c = PadicScalar::from_i64(3, 2, 6);
        assert!(c.div_exact(&b).is_err());
    }

    #[test]
    fn rational_floor_enforced() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(9));
        let r = PadicRational::from_rational(3, &q, 5, -2).unwrap();
        assert_eq!(r.val(), -2);
        assert!(PadicRational::from_rational(3, &q, 5, -1).is_err());
        assert_eq!(r.to_rational(), q);
    }

    #[test]
    fn binomial_padic_matches_integer() {
        let c = PadicScalar::from_i64(3, 10, 20);
        for k in 0..8 {
            let b = binomial_padic(&c, k);
            let exact = PadicScalar::from_biguint(3, &binomial(10, k), 20);
            assert!(b.eq_to_prec(&exact));
        }
    }
}

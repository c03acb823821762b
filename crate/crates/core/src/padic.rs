//! Fixed-precision p-adic integers.
//!
//! A [`PadicInt`] is an element of `Z_p` known modulo `p^N`. Every value
//! carries its ring (`p`, `N`); combining values from different rings is a
//! contract violation. The fallible `checked_*` methods report it as
//! [`PadicError::Mismatch`], the operator impls panic.
//!
//! Exponentiation of principal units (`u ≡ 1 mod p`) by p-adic exponents is
//! done with the binomial series `Σ C(e, k) (u - 1)^k`. Since
//! `val((u - 1)^k) ≥ k`, the terms with `k ≥ N` vanish and truncating the
//! series after `N` terms is exact, not an approximation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(BigInt),
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("mixed rings: Z/{0}^{1} and Z/{2}^{3}")]
    Mismatch(BigInt, u32, BigInt, u32),
    #[error("not invertible at this precision")]
    NotInvertible,
    #[error("{0} ≡ 0 mod p has no Teichmüller representative")]
    NoTeichmuller(BigInt),
    #[error("base is not a principal unit (≢ 1 mod p), p-adic exponent undefined")]
    NotPrincipalUnit,
}

/// p-adic valuation of a value known modulo `p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u32),
    /// Residue is zero: the true valuation is at least the precision.
    AtLeast(u32),
}

impl Valuation {
    /// Finite valuation, or `None` for a zero residue.
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(n) => write!(f, "≥ {n}"),
        }
    }
}

#[derive(Debug)]
struct RingData {
    p: BigInt,
    precision: u32,
    modulus: BigInt,
}

/// The ring `Z/p^N`, viewed as `Z_p` truncated at precision `N`.
///
/// Cheap to clone; equality compares `(p, N)`.
#[derive(Clone, Debug)]
pub struct PadicRing(Arc<RingData>);

impl PartialEq for PadicRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.precision == other.0.precision && self.0.p == other.0.p)
    }
}

impl Eq for PadicRing {}

impl fmt::Display for PadicRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.0.p, self.0.precision)
    }
}

impl PadicRing {
    pub fn new(p: impl Into<BigInt>, precision: u32) -> Result<Self, PadicError> {
        let p = p.into();
        if p == BigInt::from(2) || !is_prime(&p) {
            return Err(PadicError::NotOddPrime(p));
        }
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        let modulus = num_traits::pow(p.clone(), precision as usize);
        Ok(PadicRing(Arc::new(RingData {
            p,
            precision,
            modulus,
        })))
    }

    pub fn p(&self) -> &BigInt {
        &self.0.p
    }

    /// `p` as a machine integer, for callers that only handle small primes.
    pub fn p_u64(&self) -> Option<u64> {
        self.0.p.to_u64()
    }

    pub fn precision(&self) -> u32 {
        self.0.precision
    }

    /// `p^N`.
    pub fn modulus(&self) -> &BigInt {
        &self.0.modulus
    }

    /// Canonical residue of `v` in `[0, p^N)`.
    pub fn reduce(&self, v: &BigInt) -> BigInt {
        v.mod_floor(&self.0.modulus)
    }

    pub fn element(&self, v: impl Into<BigInt>) -> PadicInt {
        PadicInt {
            residue: self.reduce(&v.into()),
            ring: self.clone(),
        }
    }

    pub fn zero(&self) -> PadicInt {
        self.element(0)
    }

    pub fn one(&self) -> PadicInt {
        self.element(1)
    }

    /// Valuation of an integer residue, capped at the precision.
    pub fn valuation_of(&self, v: &BigInt) -> Valuation {
        let mut r = self.reduce(v);
        if r.is_zero() {
            return Valuation::AtLeast(self.0.precision);
        }
        let mut val = 0;
        while r.is_multiple_of(&self.0.p) {
            r /= &self.0.p;
            val += 1;
        }
        Valuation::Finite(val)
    }

    pub fn ensure_same(&self, other: &PadicRing) -> Result<(), PadicError> {
        if self == other {
            Ok(())
        } else {
            Err(PadicError::Mismatch(
                self.0.p.clone(),
                self.0.precision,
                other.0.p.clone(),
                other.0.precision,
            ))
        }
    }

    /// The unique `(p-1)`-st root of unity congruent to `a` mod `p`,
    /// computed as `a^(p^(N-1)) mod p^N`.
    pub fn teichmuller(&self, a: impl Into<BigInt>) -> Result<PadicInt, PadicError> {
        let a = a.into();
        if a.is_multiple_of(&self.0.p) {
            return Err(PadicError::NoTeichmuller(a));
        }
        let e = num_traits::pow(self.0.p.clone(), self.0.precision as usize - 1);
        Ok(self.element(self.reduce(&a).modpow(&e, &self.0.modulus)))
    }

    /// `C(e, k) mod p^N`, evaluated exactly at the integer representative
    /// of `e` (the exponent itself when it is a plain integer).
    ///
    /// For a p-adic exponent the value is determined only modulo
    /// `p^(N - v_p(k!))`; callers multiply it by something of valuation at
    /// least `k`, which restores full precision.
    pub fn binom(&self, e: &PadicExponent, k: u32) -> Result<PadicInt, PadicError> {
        let rep = e.representative(self)?;
        Ok(self.element(generalized_binomial(&rep, k)))
    }
}

/// An element of `Z_p` known modulo `p^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicInt {
    ring: PadicRing,
    residue: BigInt,
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.residue, self.ring.p(), self.ring.precision())
    }
}

impl PadicInt {
    pub fn ring(&self) -> &PadicRing {
        &self.ring
    }

    /// Canonical residue in `[0, p^N)`.
    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.residue.is_one()
    }

    pub fn valuation(&self) -> Valuation {
        self.ring.valuation_of(&self.residue)
    }

    pub fn is_unit(&self) -> bool {
        !self.residue.is_multiple_of(self.ring.p())
    }

    /// `u ≡ 1 mod p`.
    pub fn is_principal_unit(&self) -> bool {
        (&self.residue - 1u32).is_multiple_of(self.ring.p())
    }

    pub fn checked_add(&self, rhs: &PadicInt) -> Result<PadicInt, PadicError> {
        self.ring.ensure_same(&rhs.ring)?;
        Ok(self.ring.element(&self.residue + &rhs.residue))
    }

    pub fn checked_sub(&self, rhs: &PadicInt) -> Result<PadicInt, PadicError> {
        self.ring.ensure_same(&rhs.ring)?;
        Ok(self.ring.element(&self.residue - &rhs.residue))
    }

    pub fn checked_mul(&self, rhs: &PadicInt) -> Result<PadicInt, PadicError> {
        self.ring.ensure_same(&rhs.ring)?;
        Ok(self.ring.element(&self.residue * &rhs.residue))
    }

    pub fn inv(&self) -> Result<PadicInt, PadicError> {
        let m = self.ring.modulus();
        let egcd = self.residue.extended_gcd(m);
        if !egcd.gcd.is_one() {
            return Err(PadicError::NotInvertible);
        }
        Ok(self.ring.element(egcd.x))
    }

    /// Integer power; negative exponents require a unit.
    pub fn pow_int(&self, e: &BigInt) -> Result<PadicInt, PadicError> {
        let m = self.ring.modulus();
        if e.is_negative() {
            let inv = self.inv()?;
            Ok(self.ring.element(inv.residue.modpow(&-e, m)))
        } else {
            Ok(self.ring.element(self.residue.modpow(e, m)))
        }
    }

    /// `self^e` for a principal unit and a p-adic exponent, via the
    /// truncated binomial series. Plain integer exponents are accepted for
    /// any base and agree with repeated multiplication.
    pub fn pow_one_unit(&self, e: &PadicExponent) -> Result<PadicInt, PadicError> {
        if !self.is_principal_unit() {
            return match e {
                PadicExponent::Integer(n) => self.pow_int(n),
                PadicExponent::Padic(_) => Err(PadicError::NotPrincipalUnit),
            };
        }
        let rep = e.representative(&self.ring)?;
        let m = self.ring.modulus();
        let t = &self.residue - 1u32;
        let mut t_pow = BigInt::one();
        let mut acc = BigInt::zero();
        for k in 0..self.ring.precision() {
            acc += generalized_binomial(&rep, k) * &t_pow;
            t_pow = (t_pow * &t).mod_floor(m);
        }
        Ok(self.ring.element(acc))
    }
}

fn binop(lhs: &PadicInt, rhs: &PadicInt, op: &str) -> PadicRing {
    if let Err(e) = lhs.ring.ensure_same(&rhs.ring) {
        panic!("p-adic {op}: {e}");
    }
    lhs.ring.clone()
}

impl Add for &PadicInt {
    type Output = PadicInt;
    fn add(self, rhs: &PadicInt) -> PadicInt {
        binop(self, rhs, "add").element(&self.residue + &rhs.residue)
    }
}

impl Sub for &PadicInt {
    type Output = PadicInt;
    fn sub(self, rhs: &PadicInt) -> PadicInt {
        binop(self, rhs, "sub").element(&self.residue - &rhs.residue)
    }
}

impl Mul for &PadicInt {
    type Output = PadicInt;
    fn mul(self, rhs: &PadicInt) -> PadicInt {
        binop(self, rhs, "mul").element(&self.residue * &rhs.residue)
    }
}

impl Neg for &PadicInt {
    type Output = PadicInt;
    fn neg(self) -> PadicInt {
        self.ring.element(-&self.residue)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PadicInt {
            type Output = PadicInt;
            fn $m(self, rhs: PadicInt) -> PadicInt {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for PadicInt {
    type Output = PadicInt;
    fn neg(self) -> PadicInt {
        -&self
    }
}

/// An exponent acting on a pro-p group: a plain integer, or an element of
/// `Z_p` (e.g. a Teichmüller root of unity).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PadicExponent {
    Integer(BigInt),
    Padic(PadicInt),
}

impl From<i64> for PadicExponent {
    fn from(v: i64) -> Self {
        PadicExponent::Integer(BigInt::from(v))
    }
}

impl From<PadicInt> for PadicExponent {
    fn from(v: PadicInt) -> Self {
        PadicExponent::Padic(v)
    }
}

impl fmt::Display for PadicExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PadicExponent::Integer(n) => write!(f, "{n}"),
            PadicExponent::Padic(x) => write!(f, "{x}"),
        }
    }
}

impl PadicExponent {
    pub fn is_integer(&self) -> bool {
        matches!(self, PadicExponent::Integer(_))
    }

    /// Integer used when evaluating binomial coefficients: the value itself
    /// for integer exponents, the canonical residue otherwise.
    pub fn representative(&self, ring: &PadicRing) -> Result<BigInt, PadicError> {
        match self {
            PadicExponent::Integer(n) => Ok(n.clone()),
            PadicExponent::Padic(x) => {
                ring.ensure_same(x.ring())?;
                Ok(x.residue().clone())
            }
        }
    }

    /// The exponent as an element of `ring`.
    pub fn to_padic(&self, ring: &PadicRing) -> Result<PadicInt, PadicError> {
        Ok(ring.element(self.representative(ring)?))
    }

    pub fn mul(&self, other: &PadicExponent) -> Result<PadicExponent, PadicError> {
        use PadicExponent::*;
        Ok(match (self, other) {
            (Integer(a), Integer(b)) => Integer(a * b),
            (Padic(a), Padic(b)) => Padic(a.checked_mul(b)?),
            (Padic(a), Integer(b)) | (Integer(b), Padic(a)) => {
                Padic(a.ring().element(a.residue() * b))
            }
        })
    }

    pub fn add(&self, other: &PadicExponent) -> Result<PadicExponent, PadicError> {
        use PadicExponent::*;
        Ok(match (self, other) {
            (Integer(a), Integer(b)) => Integer(a + b),
            (Padic(a), Padic(b)) => Padic(a.checked_add(b)?),
            (Padic(a), Integer(b)) | (Integer(b), Padic(a)) => {
                Padic(a.ring().element(a.residue() + b))
            }
        })
    }

    /// Multiplicative order of the exponent viewed in `(Z/p^N)^×`, if it is
    /// a root of unity of order dividing `p - 1`.
    pub fn root_of_unity_order(&self, ring: &PadicRing) -> Result<Option<u32>, PadicError> {
        let z = self.to_padic(ring)?;
        let Some(p) = ring.p_u64() else {
            return Ok(None);
        };
        let mut acc = z.clone();
        for k in 1..p {
            if acc.is_one() {
                return Ok(if (p - 1) % k == 0 { Some(k as u32) } else { None });
            }
            acc = &acc * &z;
        }
        Ok(None)
    }
}

/// `n (n-1) ... (n-k+1) / k!` for any integer `n`.
pub fn generalized_binomial(n: &BigInt, k: u32) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Deterministic Miller–Rabin for inputs below 3.3·10^24; a strong
/// probable-prime test beyond that.
pub fn is_prime(n: &BigInt) -> bool {
    const BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if *n < BigInt::from(2) {
        return false;
    }
    for b in BASES {
        let b = BigInt::from(b);
        if *n == b {
            return true;
        }
        if n.is_multiple_of(&b) {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let mut d = n_minus_one.clone();
    let mut s = 0;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'bases: for b in BASES {
        let mut x = BigInt::from(b).modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x).mod_floor(n);
            if x == n_minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

//! Univariate integer polynomials in `T`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::intmat::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse polynomial {input:?}: {reason}")]
pub struct PolyParseError {
    pub input: String,
    pub reason: String,
}

/// Coefficients low to high, no trailing zeros (the zero polynomial is empty).
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `T`.
    pub fn t() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    /// Monic, degree at least 1, lower coefficients divisible by `p`.
    pub fn is_distinguished(&self, p: u64) -> bool {
        let p = BigInt::from(p);
        self.is_monic()
            && self.degree().unwrap_or(0) >= 1
            && self.coeffs[..self.coeffs.len() - 1].iter().all(|c| c.is_multiple_of(&p))
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Remainder modulo a monic polynomial; exact over the integers.
    pub fn rem_monic(&self, modulus: &IntPoly) -> IntPoly {
        assert!(modulus.is_monic(), "modulus must be monic");
        let d = modulus.coeffs.len() - 1;
        let mut r = self.coeffs.clone();
        while r.len() > d {
            let lead = r.pop().expect("non-empty");
            if lead.is_zero() {
                continue;
            }
            let shift = r.len() - d;
            for (k, m) in modulus.coeffs[..d].iter().enumerate() {
                r[shift + k] -= &lead * m;
            }
        }
        Self::new(r)
    }

    /// `self^e mod modulus` by repeated squaring.
    pub fn pow_mod(&self, mut e: BigInt, modulus: &IntPoly) -> IntPoly {
        let mut base = self.rem_monic(modulus);
        let mut acc = IntPoly::one().rem_monic(modulus);
        while e.is_positive() {
            if e.is_odd() {
                acc = acc.mul(&base).rem_monic(modulus);
            }
            base = base.mul(&base).rem_monic(modulus);
            e >>= 1;
        }
        acc
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `Res(g, h) = Π_{g(α)=0} h(α)` for monic `g`, computed as the
    /// determinant of multiplication by `h` on `Z[T]/(g)`.
    pub fn resultant_monic(g: &IntPoly, h: &IntPoly) -> BigInt {
        assert!(g.is_monic(), "resultant_monic needs monic g");
        let d = g.coeffs.len() - 1;
        let hr = h.rem_monic(g);
        let mut m = IntMatrix::zeros(d, d);
        let mut col = hr;
        for j in 0..d {
            for i in 0..d {
                m[(i, j)] = col.coeff(i);
            }
            col = col.mul(&IntPoly::t()).rem_monic(g);
        }
        m.determinant()
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one() && k > 0;
            if !unit {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "T")?,
                _ => write!(f, "T^{k}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for IntPoly {
    type Err = PolyParseError;

    /// Accepts sums of terms `c`, `cT`, `c*T`, `T^k`, `c*T^k` with optional
    /// signs and whitespace, e.g. `T^2 + 3T - 6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| PolyParseError {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty"));
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in compact.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut acc = IntPoly::zero();
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, term.strip_prefix('+').unwrap_or(&term)),
            };
            if body.is_empty() {
                return Err(err("dangling sign"));
            }
            let (coef, power) = match body.find(['T', 't']) {
                None => (body.parse::<BigInt>().map_err(|_| err("bad constant"))?, 0usize),
                Some(pos) => {
                    let c = body[..pos].trim_end_matches('*');
                    let coef = if c.is_empty() {
                        BigInt::one()
                    } else {
                        c.parse::<BigInt>().map_err(|_| err("bad coefficient"))?
                    };
                    let rest = &body[pos + 1..];
                    let power = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .ok_or_else(|| err("expected ^ after T"))?
                            .parse::<usize>()
                            .map_err(|_| err("bad exponent"))?
                    };
                    (coef, power)
                }
            };
            let mut c = vec![BigInt::zero(); power + 1];
            c[power] = coef * sign;
            acc = acc.add(&IntPoly::new(c));
        }
        Ok(acc)
    }
}

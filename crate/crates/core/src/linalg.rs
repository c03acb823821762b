//! Square matrices over `Z/p^N`.
//!
//! Elimination is only sound with unit pivots (or pivots of minimal
//! valuation), so the characteristic polynomial is computed with the
//! division-free Berkowitz recurrence, and kernels come from a Smith form
//! over the chain ring `Z/p^N`. Eigenvalues are never extracted: every
//! spectral statement is phrased through characteristic polynomials.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::padic::{generalized_binomial, PadicError, PadicExponent, PadicInt, PadicRing, Valuation};

/// Mod-`p` kernels up to this dimension are searched exhaustively.
pub const EXHAUSTIVE_KERNEL_DIM: usize = 8;
/// Cap on the number of projective points visited by the exhaustive search.
const EXHAUSTIVE_POINTS: u64 = 10_000_000;
const SAMPLE_TRIES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("matrix is not square")]
    NotSquare,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("not a pro-p automorphism: M ≢ I mod p")]
    NotProP,
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("det(M - I) ≡ 0 mod p^{0}: X^Γ = 0 cannot be certified, raise precision")]
    RaisePrecision(u32),
    #[error("exponent is not a root of unity of order {0} dividing p - 1")]
    BadZetaOrder(u32),
    #[error("precision {have} too low for rank {rank}: det(M - I) vanishes mod p^N (need N ≥ {need})")]
    PrecisionTooLow { have: u32, need: u32, rank: usize },
    #[error("p too large for mod-p kernel search")]
    PrimeTooLarge,
}

/// An `r × r` matrix over `Z/p^N`, stored as canonical residues.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PadicMatrix {
    ring: PadicRing,
    dim: usize,
    data: Vec<BigInt>,
}

impl fmt::Display for PadicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.dim + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "] mod {}^{}", self.ring.p(), self.ring.precision())
    }
}

impl PadicMatrix {
    pub fn zeros(ring: &PadicRing, dim: usize) -> Self {
        PadicMatrix {
            ring: ring.clone(),
            dim,
            data: vec![BigInt::zero(); dim * dim],
        }
    }

    pub fn identity(ring: &PadicRing, dim: usize) -> Self {
        Self::scalar(ring, dim, 1)
    }

    pub fn scalar(ring: &PadicRing, dim: usize, c: impl Into<BigInt>) -> Self {
        let c = ring.reduce(&c.into());
        let mut m = Self::zeros(ring, dim);
        for i in 0..dim {
            m.data[i * dim + i] = c.clone();
        }
        m
    }

    pub fn diagonal<T: Into<BigInt> + Clone>(ring: &PadicRing, entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(ring, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = ring.reduce(&e.clone().into());
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(
        ring: &PadicRing,
        rows: &[Vec<T>],
    ) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut m = Self::zeros(ring, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::NotSquare);
            }
            for (j, v) in row.iter().enumerate() {
                m.data[i * n + j] = ring.reduce(&v.clone().into());
            }
        }
        Ok(m)
    }

    /// Block-diagonal sum. Panics if the blocks live in different rings.
    pub fn block_diagonal(ring: &PadicRing, blocks: &[PadicMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.dim).sum();
        let mut m = Self::zeros(ring, n);
        let mut off = 0;
        for b in blocks {
            assert_eq!(&b.ring, ring, "block from a different ring");
            for i in 0..b.dim {
                for j in 0..b.dim {
                    m.data[(off + i) * n + off + j] = b.data[i * b.dim + j].clone();
                }
            }
            off += b.dim;
        }
        m
    }

    pub fn ring(&self) -> &PadicRing {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> PadicInt {
        self.ring.element(self.data[i * self.dim + j].clone())
    }

    pub fn residue(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: impl Into<BigInt>) {
        self.data[i * self.dim + j] = self.ring.reduce(&v.into());
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.data.chunks(self.dim.max(1)).take(self.dim).map(<[BigInt]>::to_vec).collect()
    }

    fn check(&self, other: &PadicMatrix) -> Result<(), LinalgError> {
        self.ring.ensure_same(&other.ring)?;
        if self.dim != other.dim {
            return Err(LinalgError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    fn zip(&self, other: &PadicMatrix, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Self {
        PadicMatrix {
            ring: self.ring.clone(),
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| self.ring.reduce(&f(a, b)))
                .collect(),
        }
    }

    pub fn add(&self, other: &PadicMatrix) -> Result<Self, LinalgError> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &PadicMatrix) -> Result<Self, LinalgError> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    pub fn mul(&self, other: &PadicMatrix) -> Result<Self, LinalgError> {
        self.check(other)?;
        let n = self.dim;
        let mut out = Self::zeros(&self.ring, n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * &other.data[k * n + j];
                }
            }
        }
        for v in &mut out.data {
            *v = self.ring.reduce(v);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        PadicMatrix {
            ring: self.ring.clone(),
            dim: self.dim,
            data: self.data.iter().map(|a| self.ring.reduce(&(a * c))).collect(),
        }
    }

    /// `M - I`.
    pub fn minus_identity(&self) -> Self {
        self.sub(&Self::identity(&self.ring, self.dim)).expect("same ring")
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// `M ≡ I mod p`.
    pub fn is_principal(&self) -> bool {
        let p = self.ring.p();
        self.minus_identity().data.iter().all(|a| a.is_multiple_of(p))
    }

    pub fn pow_int(&self, e: &BigInt) -> Result<Self, LinalgError> {
        let mut base = if e.sign() == num_bigint::Sign::Minus {
            self.inverse()?
        } else {
            self.clone()
        };
        let mut k = e.magnitude().clone();
        let mut acc = Self::identity(&self.ring, self.dim);
        while !k.is_zero() {
            if k.is_odd() {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            k >>= 1;
        }
        Ok(acc)
    }

    /// Gauss–Jordan with unit pivots; a matrix over `Z/p^N` is invertible
    /// iff its reduction mod `p` is.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let n = self.dim;
        let p = self.ring.p().clone();
        let mut a = self.clone();
        let mut inv = Self::identity(&self.ring, n);
        for k in 0..n {
            let piv = (k..n)
                .find(|&i| !a.data[i * n + k].is_multiple_of(&p))
                .ok_or(LinalgError::NotInvertible)?;
            if piv != k {
                for j in 0..n {
                    a.data.swap(piv * n + j, k * n + j);
                    inv.data.swap(piv * n + j, k * n + j);
                }
            }
            let pinv = self.ring.element(a.data[k * n + k].clone()).inv()?;
            let pinv = pinv.residue().clone();
            for j in 0..n {
                a.data[k * n + j] = self.ring.reduce(&(&a.data[k * n + j] * &pinv));
                inv.data[k * n + j] = self.ring.reduce(&(&inv.data[k * n + j] * &pinv));
            }
            for i in 0..n {
                if i == k || a.data[i * n + k].is_zero() {
                    continue;
                }
                let f = a.data[i * n + k].clone();
                for j in 0..n {
                    let da = &f * &a.data[k * n + j];
                    let di = &f * &inv.data[k * n + j];
                    a.data[i * n + j] = self.ring.reduce(&(&a.data[i * n + j] - da));
                    inv.data[i * n + j] = self.ring.reduce(&(&inv.data[i * n + j] - di));
                }
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.determinant().is_unit()
    }

    pub fn determinant(&self) -> PadicInt {
        let cp = charpoly(self);
        let c0 = cp.coefficient(0);
        if self.dim % 2 == 1 {
            -c0
        } else {
            c0
        }
    }

    /// `P M P⁻¹`.
    pub fn conjugate_by(&self, p: &PadicMatrix) -> Result<Self, LinalgError> {
        p.mul(self)?.mul(&p.inverse()?)
    }

}

/// Monic characteristic polynomial `det(T·I - M)`, coefficients low to high.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CharPoly {
    ring: PadicRing,
    coeffs: Vec<BigInt>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, k: usize) -> PadicInt {
        self.ring.element(self.coeffs[k].clone())
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Number of trailing coefficients that vanish mod `p^N`.
    pub fn trailing_zeros(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Horner evaluation at a matrix.
    pub fn evaluate(&self, m: &PadicMatrix) -> Result<PadicMatrix, LinalgError> {
        self.ring.ensure_same(m.ring())?;
        let mut acc = PadicMatrix::zeros(&self.ring, m.dim());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m)?.add(&PadicMatrix::scalar(&self.ring, m.dim(), c.clone()))?;
        }
        Ok(acc)
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => write!(f, "T")?,
                1 => write!(f, "{c}·T")?,
                _ if c.is_one() => write!(f, "T^{k}")?,
                _ => write!(f, "{c}·T^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " mod {}^{}", self.ring.p(), self.ring.precision())
    }
}

/// Berkowitz: the characteristic polynomial of the leading `(k+1)`-block is
/// a lower-triangular Toeplitz matrix applied to that of the `k`-block.
pub fn charpoly(m: &PadicMatrix) -> CharPoly {
    let ring = m.ring();
    let n = m.dim();
    let red = |v: BigInt| ring.reduce(&v);
    // coefficients high to low while building
    let mut v: Vec<BigInt> = vec![BigInt::one()];
    for r in 0..n {
        let a_rr = m.residue(r, r).clone();
        // t = [1, -a_rr, -R C, -R A C, ..., -R A^{r-1} C]
        let mut t = vec![BigInt::one(), red(-a_rr)];
        let mut col: Vec<BigInt> = (0..r).map(|i| m.residue(i, r).clone()).collect();
        for _ in 0..r {
            let rc: BigInt = (0..r).map(|j| m.residue(r, j) * &col[j]).sum();
            t.push(red(-rc));
            col = (0..r)
                .map(|i| red((0..r).map(|j| m.residue(i, j) * &col[j]).sum()))
                .collect();
        }
        let mut next = vec![BigInt::zero(); v.len() + 1];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = BigInt::zero();
            for (j, vj) in v.iter().enumerate() {
                if i >= j {
                    acc += &t[i - j] * vj;
                }
            }
            *slot = red(acc);
        }
        v = next;
    }
    v.reverse();
    CharPoly {
        ring: ring.clone(),
        coeffs: v,
    }
}

/// `M^ζ = Σ_{k<N} C(ζ, k) (M - I)^k`, defined for `M ≡ I mod p`.
pub fn mat_pow_zeta(m: &PadicMatrix, zeta: &PadicExponent) -> Result<PadicMatrix, LinalgError> {
    if !m.is_principal() {
        return Err(LinalgError::NotProP);
    }
    let ring = m.ring();
    let rep = zeta.representative(ring)?;
    let nil = m.minus_identity();
    let mut term = PadicMatrix::identity(ring, m.dim());
    let mut acc = PadicMatrix::zeros(ring, m.dim());
    for k in 0..ring.precision() {
        acc = acc.add(&term.scale(&generalized_binomial(&rep, k)))?;
        term = term.mul(&nil)?;
    }
    Ok(acc)
}

/// Outcome of solving `M^ζ D = D M` for invertible `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Intertwiner {
    Witness(PadicMatrix),
    /// No kernel element is invertible mod `p`.
    Absent { kernel_dim: usize },
    /// The mod-`p` kernel was too large to search and sampling failed.
    Undetermined { kernel_dim: usize },
}

impl Intertwiner {
    pub fn witness(&self) -> Option<&PadicMatrix> {
        match self {
            Intertwiner::Witness(d) => Some(d),
            _ => None,
        }
    }
}

/// Smith form over the chain ring `Z/p^N`: `A V = U⁻¹ diag(p^{v_i})`.
/// Only the column transform is needed for kernels.
struct LocalSmith {
    valuations: Vec<Valuation>,
    v: Vec<Vec<BigInt>>,
}

fn local_smith(ring: &PadicRing, rows: usize, cols: usize, mut a: Vec<Vec<BigInt>>) -> LocalSmith {
    let mut v: Vec<Vec<BigInt>> = (0..cols)
        .map(|i| (0..cols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut valuations = Vec::new();
    let p = ring.p();
    for t in 0..rows.min(cols) {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, x) in row.iter().enumerate().skip(t) {
                if let Valuation::Finite(val) = ring.valuation_of(x) {
                    if best.is_none_or(|b| val < b.2) {
                        best = Some((i, j, val));
                    }
                }
            }
        }
        let Some((pi, pj, val)) = best else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let pv = num_traits::pow(p.clone(), val as usize);
        let unit = &a[t][t] / &pv;
        let unit_inv = ring.element(unit).inv().expect("pivot unit").residue().clone();
        for i in t + 1..rows {
            if a[i][t].is_zero() {
                continue;
            }
            let f = ring.reduce(&(&a[i][t] / &pv * &unit_inv));
            for j in t..cols {
                let d = &f * &a[t][j];
                a[i][j] = ring.reduce(&(&a[i][j] - d));
            }
        }
        for j in t + 1..cols {
            if a[t][j].is_zero() {
                continue;
            }
            let f = ring.reduce(&(&a[t][j] / &pv * &unit_inv));
            for row in a.iter_mut() {
                let d = &f * &row[t];
                row[j] = ring.reduce(&(&row[j] - d));
            }
            for row in v.iter_mut() {
                let d = &f * &row[t];
                row[j] = ring.reduce(&(&row[j] - d));
            }
        }
        valuations.push(Valuation::Finite(val));
    }
    while valuations.len() < cols {
        valuations.push(Valuation::AtLeast(ring.precision()));
    }
    LocalSmith { valuations, v }
}

/// The operator `D ↦ M^ζ D - D M` on `r²`-space, row-major `vec(D)`.
fn intertwining_operator(m_zeta: &PadicMatrix, m: &PadicMatrix) -> Vec<Vec<BigInt>> {
    let r = m.dim();
    let ring = m.ring();
    let mut op = vec![vec![BigInt::zero(); r * r]; r * r];
    for i in 0..r {
        for j in 0..r {
            let col = i * r + j;
            // M^ζ E_ij has column j equal to column i of M^ζ
            for a in 0..r {
                op[a * r + j][col] += m_zeta.residue(a, i);
            }
            // E_ij M has row i equal to row j of M
            for b in 0..r {
                op[i * r + b][col] -= m.residue(j, b);
            }
        }
    }
    for row in op.iter_mut() {
        for x in row.iter_mut() {
            *x = ring.reduce(x);
        }
    }
    op
}

fn det_mod_p(mut a: Vec<Vec<u64>>, p: u64) -> u64 {
    let n = a.len();
    let mut det = 1u64;
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| a[i][k] != 0) else {
            return 0;
        };
        if piv != k {
            a.swap(piv, k);
            det = (p - det) % p;
        }
        det = det * a[k][k] % p;
        let inv = mod_inverse(a[k][k], p);
        for i in k + 1..n {
            if a[i][k] == 0 {
                continue;
            }
            let f = a[i][k] * inv % p;
            for j in k..n {
                a[i][j] = (a[i][j] + p * p - f * a[k][j] % p) % p;
            }
        }
    }
    det
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Solves `M^ζ D = D M` for an invertible `D`.
///
/// The kernel of `D ↦ M^ζ D - D M` is read off a Smith form over `Z/p^N`.
/// Its reduction mod `p` is spanned by the columns of the transform that
/// meet a zero diagonal entry, and an invertible kernel element exists iff
/// some `F_p`-combination of those is invertible mod `p`.
pub fn intertwiner_solve(m: &PadicMatrix, zeta: &PadicExponent) -> Result<Intertwiner, LinalgError> {
    if !m.is_invertible() {
        return Err(LinalgError::NotInvertible);
    }
    let m_zeta = mat_pow_zeta(m, zeta)?;
    let ring = m.ring();
    let r = m.dim();
    let op = intertwining_operator(&m_zeta, m);
    let ls = local_smith(ring, r * r, r * r, op);
    let free: Vec<Vec<BigInt>> = ls
        .valuations
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v, Valuation::AtLeast(_)))
        .map(|(t, _)| ls.v.iter().map(|row| row[t].clone()).collect())
        .collect();
    let k = free.len();
    if k == 0 {
        return Ok(Intertwiner::Absent { kernel_dim: 0 });
    }
    let p = ring.p_u64().ok_or(LinalgError::PrimeTooLarge)?;
    let basis_mod_p: Vec<Vec<u64>> = free
        .iter()
        .map(|b| b.iter().map(|x| (x % p).to_u64().unwrap_or(0)).collect())
        .collect();

    let lift = |coef: &[u64]| -> PadicMatrix {
        let mut d = PadicMatrix::zeros(ring, r);
        for (c, b) in coef.iter().zip(&free) {
            if *c == 0 {
                continue;
            }
            for (idx, x) in b.iter().enumerate() {
                d.data[idx] += BigInt::from(*c) * x;
            }
        }
        for x in &mut d.data {
            *x = ring.reduce(x);
        }
        d
    };
    let invertible_mod_p = |coef: &[u64]| -> bool {
        let mut mat = vec![vec![0u64; r]; r];
        for (c, b) in coef.iter().zip(&basis_mod_p) {
            if *c == 0 {
                continue;
            }
            for (idx, x) in b.iter().enumerate() {
                mat[idx / r][idx % r] = (mat[idx / r][idx % r] + c * x) % p;
            }
        }
        det_mod_p(mat, p) != 0
    };

    let points = (p as f64).powi(k as i32 - 1) * (k as f64);
    if k <= EXHAUSTIVE_KERNEL_DIM && points <= EXHAUSTIVE_POINTS as f64 {
        // projective points: leading non-zero coefficient equal to 1
        for lead in 0..k {
            let tail = k - lead - 1;
            let count = p.pow(tail as u32);
            for idx in 0..count {
                let mut coef = vec![0u64; k];
                coef[lead] = 1;
                let mut rest = idx;
                for c in coef.iter_mut().skip(lead + 1) {
                    *c = rest % p;
                    rest /= p;
                }
                if invertible_mod_p(&coef) {
                    return Ok(Intertwiner::Witness(lift(&coef)));
                }
            }
        }
        return Ok(Intertwiner::Absent { kernel_dim: k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2b_3c4d);
    for _ in 0..SAMPLE_TRIES {
        let coef: Vec<u64> = (0..k).map(|_| rng.gen_range(0..p)).collect();
        if invertible_mod_p(&coef) {
            return Ok(Intertwiner::Witness(lift(&coef)));
        }
    }
    Ok(Intertwiner::Undetermined { kernel_dim: k })
}

/// Whether `M^ζ D ≡ D M` and `D` is invertible.
pub fn intertwines(m: &PadicMatrix, d: &PadicMatrix, zeta: &PadicExponent) -> Result<bool, LinalgError> {
    let lhs = mat_pow_zeta(m, zeta)?.mul(d)?;
    let rhs = d.mul(m)?;
    Ok(lhs == rhs && d.is_invertible())
}

fn check_zeta_order(ring: &PadicRing, zeta: &PadicExponent, d: u32) -> Result<(), LinalgError> {
    match zeta.root_of_unity_order(ring)? {
        Some(o) if o == d => Ok(()),
        _ => Err(LinalgError::BadZetaOrder(d)),
    }
}

/// Builds `M` of size `d·s` whose eigenvalues form `s` full `ζ`-orbits
/// `η_j, η_j^ζ, ..., η_j^(ζ^(d-1))`, with seeds `η_j = (1+p)^(1+pj)`, and
/// the block-cyclic permutation `D` satisfying `M^ζ D = D M`.
pub fn orbit_block_construct(
    ring: &PadicRing,
    d: u32,
    s: usize,
    zeta: &PadicExponent,
) -> Result<(PadicMatrix, PadicMatrix), LinalgError> {
    check_zeta_order(ring, zeta, d)?;
    let rank = d as usize * s;
    // each eigenvalue contributes valuation 1 to det(M - I)
    if rank as u32 >= ring.precision() {
        return Err(LinalgError::PrecisionTooLow {
            have: ring.precision(),
            need: rank as u32 + 1,
            rank,
        });
    }
    let p = ring.p();
    let zeta_elt = zeta.to_padic(ring)?;
    let mut m_blocks = Vec::with_capacity(s);
    let mut d_blocks = Vec::with_capacity(s);
    for j in 0..s {
        let seed_exp = 1 + p * BigInt::from(j);
        let eta = ring.element(1 + p).pow_int(&seed_exp)?;
        let mut eigen = Vec::with_capacity(d as usize);
        let mut zpow = ring.one();
        for _ in 0..d {
            eigen.push(eta.pow_one_unit(&PadicExponent::Padic(zpow.clone()))?.residue().clone());
            zpow = &zpow * &zeta_elt;
        }
        m_blocks.push(PadicMatrix::diagonal(ring, &eigen));
        let n = d as usize;
        let mut perm = PadicMatrix::zeros(ring, n);
        // D e_i = e_{i-1}
        for i in 0..n {
            perm.set((i + n - 1) % n, i, 1);
        }
        d_blocks.push(perm);
    }
    let m = PadicMatrix::block_diagonal(ring, &m_blocks);
    let dm = PadicMatrix::block_diagonal(ring, &d_blocks);
    debug_assert!(intertwines(&m, &dm, zeta)?);
    Ok((m, dm))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankVerdict {
    /// An intertwiner exists and `r ≡ 0 mod d`.
    Consistent { witness: PadicMatrix },
    /// No intertwiner exists; the divisibility claim holds vacuously.
    Vacuous,
    /// Solver could not decide.
    Undetermined { kernel_dim: usize },
    /// An intertwiner exists but `r ≢ 0 mod d`.
    Violation { rank: usize, d: u32, witness: PadicMatrix },
}

impl RankVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, RankVerdict::Consistent { .. } | RankVerdict::Vacuous)
    }
}

/// Checks `r ≡ 0 mod d` whenever an invertible intertwiner exists and
/// `X^Γ = 0` holds at precision (`det(M - I) ≢ 0 mod p^N`).
pub fn rank_divisibility_check(
    m: &PadicMatrix,
    zeta: &PadicExponent,
    d: u32,
) -> Result<RankVerdict, LinalgError> {
    check_zeta_order(m.ring(), zeta, d)?;
    if m.minus_identity().determinant().is_zero() {
        return Err(LinalgError::RaisePrecision(m.ring().precision()));
    }
    Ok(match intertwiner_solve(m, zeta)? {
        Intertwiner::Absent { .. } => RankVerdict::Vacuous,
        Intertwiner::Undetermined { kernel_dim } => RankVerdict::Undetermined { kernel_dim },
        Intertwiner::Witness(w) => {
            if m.dim().is_multiple_of(d as usize) {
                RankVerdict::Consistent { witness: w }
            } else {
                RankVerdict::Violation {
                    rank: m.dim(),
                    d,
                    witness: w,
                }
            }
        }
    })
}

/// `I + p·A` with `A` uniform mod `p^(N-1)`, resampled until
/// `det(M - I) ≢ 0 mod p^N`. Returns the matrix and the number of draws.
///
/// Since `det(M - I) = p^r det(A)`, this needs `N > r`.
pub fn random_principal_matrix<R: Rng>(
    ring: &PadicRing,
    r: usize,
    rng: &mut R,
) -> Result<(PadicMatrix, u32), LinalgError> {
    if r as u32 >= ring.precision() {
        return Err(LinalgError::PrecisionTooLow {
            have: ring.precision(),
            need: r as u32 + 1,
            rank: r,
        });
    }
    let p = ring.p().clone();
    let inner = num_traits::pow(p.clone(), ring.precision() as usize - 1);
    let bound = inner.to_u64().unwrap_or(u64::MAX);
    let mut draws = 0;
    loop {
        draws += 1;
        let mut m = PadicMatrix::identity(ring, r);
        for i in 0..r {
            for j in 0..r {
                let a = BigInt::from(rng.gen_range(0..bound));
                let base = if i == j { BigInt::one() } else { BigInt::zero() };
                m.set(i, j, base + &p * a);
            }
        }
        if !m.minus_identity().determinant().is_zero() {
            return Ok((m, draws));
        }
    }
}

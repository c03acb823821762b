//! Elementary Λ-modules, layer growth and invariant fitting, and parity
//! audits of matrix models of a torsion-free Iwasawa module.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::cohomology::{CohomologyError, FinitePModule};
use crate::intmat::IntMatrix;
use crate::linalg::{intertwiner_solve, intertwines, Intertwiner, LinalgError, PadicMatrix};
use crate::padic::{PadicError, PadicExponent};
use crate::poly::{IntPoly, PolyParseError};
use crate::smith;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IwasawaError {
    #[error("quotient not finite at level {0}")]
    NotFinite(u32),
    #[error("need at least 4 layers to fit, got {0}")]
    TooShort(usize),
    #[error("not eventually of Iwasawa shape")]
    NotIwasawaShape,
    #[error("{poly} is not distinguished for p = {p}")]
    NotDistinguished { poly: String, p: u64 },
    #[error("bad module factor {0:?}: expected a distinguished polynomial or p^k with k ≥ 1")]
    BadFactor(String),
    #[error(transparent)]
    Poly(#[from] PolyParseError),
    #[error("trailing characteristic coefficient indistinguishable from zero at precision {0} — raise N")]
    Indistinguishable(u32),
    #[error("model invariant violated: {0}")]
    ModelInvariant(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

/// `(1+T)^{p^n} - 1`.
pub fn omega_n(p: u64, n: u32) -> IntPoly {
    let one_plus_t = IntPoly::from_i64(&[1, 1]);
    let mut acc = one_plus_t.clone();
    for _ in 0..n {
        let mut next = IntPoly::one();
        for _ in 0..p {
            next = next.mul(&acc);
        }
        acc = next;
    }
    acc.sub(&IntPoly::one())
}

/// `⊕ Λ/(p^{μ_i}) ⊕ ⊕ Λ/(g_j)` with every `g_j` distinguished.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryLambdaModule {
    p: u64,
    mu_parts: Vec<u32>,
    poly_parts: Vec<IntPoly>,
}

impl ElementaryLambdaModule {
    pub fn new(p: u64, mu_parts: Vec<u32>, poly_parts: Vec<IntPoly>) -> Result<Self, IwasawaError> {
        if p < 3 || !crate::padic::is_prime(&p.into()) {
            return Err(PadicError::NotOddPrime(p.into()).into());
        }
        if mu_parts.contains(&0) {
            return Err(IwasawaError::BadFactor("p^0".into()));
        }
        if let Some(g) = poly_parts.iter().find(|g| !g.is_distinguished(p)) {
            return Err(IwasawaError::NotDistinguished {
                poly: g.to_string(),
                p,
            });
        }
        Ok(ElementaryLambdaModule {
            p,
            mu_parts,
            poly_parts,
        })
    }

    /// Parses comma-separated factors: `p^k` (or `p`) for `Λ/(p^k)`, any
    /// other term a polynomial in `T`, e.g. `T-3, p^1, T^2-3`. The empty
    /// string is the zero module.
    pub fn parse(p: u64, spec: &str) -> Result<Self, IwasawaError> {
        let mut mu_parts = Vec::new();
        let mut poly_parts = Vec::new();
        for raw in spec.split(',') {
            let f: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            if f.is_empty() {
                if spec.trim().is_empty() {
                    continue;
                }
                return Err(IwasawaError::BadFactor(raw.to_string()));
            }
            if let Some(rest) = f.strip_prefix('p') {
                let k = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .and_then(|k| k.parse::<u32>().ok())
                        .filter(|&k| k > 0)
                        .ok_or_else(|| IwasawaError::BadFactor(raw.to_string()))?
                };
                mu_parts.push(k);
            } else {
                poly_parts.push(f.parse::<IntPoly>()?);
            }
        }
        Self::new(p, mu_parts, poly_parts)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn mu_parts(&self) -> &[u32] {
        &self.mu_parts
    }

    pub fn poly_parts(&self) -> &[IntPoly] {
        &self.poly_parts
    }
}

impl fmt::Display for ElementaryLambdaModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.poly_parts.iter().map(|g| format!("Λ/({g})")).collect();
        parts.extend(self.mu_parts.iter().map(|m| format!("Λ/(p^{m})")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" ⊕ "))
        }
    }
}

impl FromStr for ElementaryLambdaModule {
    type Err = IwasawaError;

    /// `p=<prime>:<factors>`, e.g. `p=3:T-3,p^1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| IwasawaError::BadFactor(s.to_string()))?;
        let p = head
            .trim()
            .strip_prefix("p=")
            .and_then(|v| v.parse::<u64>().ok())
            .ok_or_else(|| IwasawaError::BadFactor(head.to_string()))?;
        Self::parse(p, body)
    }
}

fn p_valuation(x: &BigInt, p: u64) -> u64 {
    let p = BigInt::from(p);
    let mut v = 0;
    let mut x = x.clone();
    while x.is_multiple_of(&p) {
        x /= &p;
        v += 1;
    }
    v
}

/// `v_p(Res(g, ω_n))`, i.e. `log_p #Λ/(g, ω_n)`.
pub fn poly_layer_exponent(g: &IntPoly, p: u64, n: u32) -> Result<u64, IwasawaError> {
    let pn = num_traits::pow(BigInt::from(p), n as usize);
    let omega = IntPoly::from_i64(&[1, 1])
        .pow_mod(pn, g)
        .sub(&IntPoly::one());
    let res = IntPoly::resultant_monic(g, &omega);
    if res.is_zero() {
        return Err(IwasawaError::NotFinite(n));
    }
    Ok(p_valuation(&res, p))
}

/// `e_n = log_p #(E / ω_n E)`.
pub fn layer_size_exponent(e: &ElementaryLambdaModule, n: u32) -> Result<u64, IwasawaError> {
    let pn = e
        .p
        .checked_pow(n)
        .ok_or(IwasawaError::NotIwasawaShape)?;
    let mut total: u64 = e.mu_parts.iter().map(|&m| m as u64 * pn).sum();
    for g in &e.poly_parts {
        total += poly_layer_exponent(g, e.p, n)?;
    }
    Ok(total)
}

/// `e_0, ..., e_{n_max}`, computed in parallel.
pub fn layer_sequence(e: &ElementaryLambdaModule, n_max: u32) -> Result<Vec<u64>, IwasawaError> {
    use rayon::prelude::*;
    (0..=n_max)
        .into_par_iter()
        .map(|n| layer_size_exponent(e, n))
        .collect()
}

/// `(λ, μ) = (Σ deg g_j, Σ μ_i)`.
pub fn invariants_of(e: &ElementaryLambdaModule) -> (u64, u64) {
    let lambda = e.poly_parts.iter().map(|g| g.degree().unwrap_or(0) as u64).sum();
    let mu = e.mu_parts.iter().map(|&m| m as u64).sum();
    (lambda, mu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IwasawaInvariants {
    pub lambda: u64,
    pub mu: u64,
    pub nu: i64,
    /// First layer from which `e_n = λn + μp^n + ν` holds to the end.
    pub stable_from: usize,
}

impl fmt::Display for IwasawaInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "λ={} μ={} ν={} (n ≥ {})",
            self.lambda, self.mu, self.nu, self.stable_from
        )
    }
}

const MIN_TAIL: usize = 3;

/// Fits `e_n = λn + μp^n + ν` on the longest exactly-fitting tail of
/// `e_0, e_1, ...`.
pub fn fit_invariants(e: &[u64], p: u64) -> Result<IwasawaInvariants, IwasawaError> {
    fit_invariants_from(0, e, p)
}

/// As [`fit_invariants`] for a sequence whose first entry is `e_start`.
pub fn fit_invariants_from(start: usize, e: &[u64], p: u64) -> Result<IwasawaInvariants, IwasawaError> {
    if e.len() < 4 {
        return Err(IwasawaError::TooShort(e.len()));
    }
    let p = p as i128;
    let pow = |n: usize| -> Option<i128> { p.checked_pow(u32::try_from(n).ok()?) };
    let val = |i: usize| e[i] as i128;
    'tails: for i0 in 0..=e.len() - MIN_TAIL {
        let n0 = start + i0;
        let Some(pn0) = pow(n0) else { break };
        let d1 = val(i0 + 1) - val(i0);
        let d2 = val(i0 + 2) - 2 * val(i0 + 1) + val(i0);
        let denom = pn0 * (p - 1) * (p - 1);
        if d2 < 0 || d2 % denom != 0 {
            continue;
        }
        let mu = d2 / denom;
        let lambda = d1 - mu * pn0 * (p - 1);
        if lambda < 0 {
            continue;
        }
        let nu = val(i0) - lambda * n0 as i128 - mu * pn0;
        for (i, &v) in e.iter().enumerate().skip(i0) {
            let n = start + i;
            let Some(pn) = pow(n) else { continue 'tails };
            if lambda * n as i128 + mu * pn + nu != v as i128 {
                continue 'tails;
            }
        }
        return Ok(IwasawaInvariants {
            lambda: lambda as u64,
            mu: mu as u64,
            nu: nu as i64,
            stable_from: n0,
        });
    }
    Err(IwasawaError::NotIwasawaShape)
}

/// `X / (γ - 1)X` for `X = (Z/p^N)^r` with `γ` acting by `M`.
pub fn matrix_coinvariants(m: &PadicMatrix) -> Result<FinitePModule, IwasawaError> {
    let ring = m.ring();
    let p = ring.p_u64().ok_or(LinalgError::PrimeTooLarge)?;
    let r = m.dim();
    let a = m.minus_identity();
    let mut mat = IntMatrix::zeros(r, 2 * r);
    for i in 0..r {
        for j in 0..r {
            mat[(i, j)] = a.residue(i, j).clone();
        }
        mat[(i, r + i)] = ring.modulus().clone();
    }
    let factors: Vec<u64> = smith::cokernel_invariants(&mat)
        .iter()
        .map(|d| d.to_u64().expect("bounded by p^N"))
        .collect();
    let mut factors = factors;
    factors.sort_unstable_by(|a, b| b.cmp(a));
    Ok(FinitePModule::from_invariants(p, &factors)?)
}

/// Coinvariants of a finite module under a named action.
pub fn coinvariants(x: &FinitePModule, tau: &str) -> Result<FinitePModule, IwasawaError> {
    Ok(x.coinvariants(tau)?)
}

/// Multiplicity of `T` in `charpoly(M - I)`, certified by block structure.
///
/// Coordinates that reach no cycle of the non-zero pattern of `M - I`
/// (or, dually, are reached from none) span a block on which `M - I` is
/// nilpotent and which splits off block-triangularly. The count is exact
/// when the complementary block has `det ≢ 0 mod p^N`; otherwise the
/// answer cannot be read off at this precision.
pub fn t_multiplicity(m: &PadicMatrix) -> Result<usize, IwasawaError> {
    let a = m.minus_identity();
    let forward = |i: usize, j: usize| !a.residue(i, j).is_zero();
    let backward = |i: usize, j: usize| !a.residue(j, i).is_zero();
    for edge in [&forward as &dyn Fn(usize, usize) -> bool, &backward] {
        let rest = cycle_reaching(m.dim(), edge);
        let mut block = PadicMatrix::zeros(m.ring(), rest.len());
        for (bi, &i) in rest.iter().enumerate() {
            for (bj, &j) in rest.iter().enumerate() {
                block.set(bi, bj, a.residue(i, j).clone());
            }
        }
        if rest.is_empty() || !block.determinant().is_zero() {
            return Ok(m.dim() - rest.len());
        }
    }
    Err(IwasawaError::Indistinguishable(m.ring().precision()))
}

/// Nodes from which some cycle (self-loops included) is reachable.
fn cycle_reaching(r: usize, edge: &dyn Fn(usize, usize) -> bool) -> Vec<usize> {
    let reach = |from: usize| -> Vec<bool> {
        let mut seen = vec![false; r];
        let mut stack: Vec<usize> = (0..r).filter(|&j| edge(from, j)).collect();
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            stack.extend((0..r).filter(|&j| edge(v, j) && !seen[j]));
        }
        seen
    };
    let reachable: Vec<Vec<bool>> = (0..r).map(reach).collect();
    let on_cycle: Vec<bool> = (0..r).map(|i| reachable[i][i]).collect();
    (0..r)
        .filter(|&i| on_cycle[i] || (0..r).any(|j| on_cycle[j] && reachable[i][j]))
        .collect()
}

/// Action of `γ` on a free `Z_p`-module of rank `r` at precision, with an
/// optional `D` satisfying `M^ζ D = D M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaModel {
    m: PadicMatrix,
    d_matrix: Option<PadicMatrix>,
    zeta: PadicExponent,
    d: u32,
}

impl GammaModel {
    pub fn new(
        m: PadicMatrix,
        d_matrix: Option<PadicMatrix>,
        zeta: PadicExponent,
        d: u32,
    ) -> Result<Self, IwasawaError> {
        let ring = m.ring();
        if !m.is_principal() {
            return Err(IwasawaError::ModelInvariant("M ≢ I mod p".into()));
        }
        match zeta.root_of_unity_order(ring)? {
            Some(k) if k == d => {}
            other => {
                return Err(IwasawaError::ModelInvariant(format!(
                    "ζ has order {}, declared d = {d}",
                    other.map_or("infinite".to_string(), |k| k.to_string())
                )))
            }
        }
        if let Some(dm) = &d_matrix {
            if dm.dim() != m.dim() {
                return Err(IwasawaError::ModelInvariant(format!(
                    "D is {}x{}, M is {}x{}",
                    dm.dim(),
                    dm.dim(),
                    m.dim(),
                    m.dim()
                )));
            }
            if !dm.is_invertible() {
                return Err(IwasawaError::ModelInvariant("D not invertible".into()));
            }
            if !intertwines(&m, dm, &zeta)? {
                return Err(IwasawaError::ModelInvariant("M^ζ·D ≢ D·M mod p^N".into()));
            }
        }
        Ok(GammaModel {
            m,
            d_matrix,
            zeta,
            d,
        })
    }

    pub fn m(&self) -> &PadicMatrix {
        &self.m
    }

    pub fn d_matrix(&self) -> Option<&PadicMatrix> {
        self.d_matrix.as_ref()
    }

    pub fn zeta(&self) -> &PadicExponent {
        &self.zeta
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn rank(&self) -> usize {
        self.m.dim()
    }

    pub fn coinvariants(&self) -> Result<FinitePModule, IwasawaError> {
        matrix_coinvariants(&self.m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParityVerdict {
    /// `r ≡ s mod d`.
    Consistent { r: usize, s: usize, d: u32 },
    Violation {
        r: usize,
        s: usize,
        d: u32,
        witness: PadicMatrix,
    },
    /// The model has no `D` and none exists at this precision.
    Vacuous { r: usize, s: usize, d: u32 },
    Undetermined { kernel_dim: usize },
}

impl ParityVerdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, ParityVerdict::Violation { .. })
    }
}

impl fmt::Display for ParityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParityVerdict::Consistent { r, s, d } => {
                write!(f, "consistent: r={r} ≡ s={s} mod {d}")
            }
            ParityVerdict::Violation { r, s, d, .. } => {
                write!(f, "violation: r={r} ≢ s={s} mod {d}")
            }
            ParityVerdict::Vacuous { r, s, d } => {
                write!(f, "vacuous: no intertwiner (r={r}, s={s}, d={d})")
            }
            ParityVerdict::Undetermined { kernel_dim } => {
                write!(f, "undetermined: mod-p kernel of dimension {kernel_dim}")
            }
        }
    }
}

/// Checks `r ≡ s mod d`, where `s` is the multiplicity of `T` in
/// `charpoly(M - I)`. A model without `D` is first searched for one.
pub fn parity_audit(model: &GammaModel) -> Result<ParityVerdict, IwasawaError> {
    let r = model.rank();
    let s = t_multiplicity(&model.m)?;
    let d = model.d;
    let witness = match &model.d_matrix {
        Some(w) => w.clone(),
        None => match intertwiner_solve(&model.m, &model.zeta)? {
            Intertwiner::Witness(w) => w,
            Intertwiner::Absent { .. } => return Ok(ParityVerdict::Vacuous { r, s, d }),
            Intertwiner::Undetermined { kernel_dim } => {
                return Ok(ParityVerdict::Undetermined { kernel_dim })
            }
        },
    };
    if (r - s).is_multiple_of(d as usize) {
        Ok(ParityVerdict::Consistent { r, s, d })
    } else {
        Ok(ParityVerdict::Violation { r, s, d, witness })
    }
}

/// `true` when `g` shares no root with any `ω_n`, `n ≤ n_max`.
pub fn coprime_to_layers(g: &IntPoly, p: u64, n_max: u32) -> bool {
    (0..=n_max).all(|n| poly_layer_exponent(g, p, n).is_ok())
}

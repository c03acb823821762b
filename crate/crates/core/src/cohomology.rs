//! Finite abelian p-groups with endomorphism actions, and the Tate
//! cohomology of cyclic actions on them.
//!
//! A module `⊕ Z/p^{e_i}` is presented as `Z^k / R Z^k` with
//! `R = diag(p^{e_i})`. Every subgroup, kernel and subquotient is computed
//! by integer Smith normal form on stacked generator/relation matrices.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::intmat::IntMatrix;
use crate::metacyclic::{InvertingWitness, MetacyclicError, MetacyclicGroup};
use crate::smith::{self, smith};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomologyError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("invariant factor exponents must be positive and non-increasing: {0:?}")]
    BadExponents(Vec<u32>),
    #[error("action {name:?} has shape {rows}x{cols}, expected {k}x{k}")]
    ActionShape {
        name: String,
        rows: usize,
        cols: usize,
        k: usize,
    },
    #[error("action {name:?} is not well defined: entry ({i},{j}) must be divisible by p^{need}")]
    IncompatibleAction {
        name: String,
        i: usize,
        j: usize,
        need: u32,
    },
    #[error("action {name:?} does not have order dividing {order}")]
    OrderViolation { name: String, order: u64 },
    #[error("no action named {0:?}")]
    UnknownAction(String),
    #[error("hypothesis requires cyclic A₁ (got {0} invariant factors)")]
    NotCyclic(usize),
    #[error("A₁ must have order at least p^2")]
    TooSmall,
    #[error("τ must act non-trivially with order p")]
    BadTauAction,
    #[error(transparent)]
    Metacyclic(#[from] MetacyclicError),
}

/// A declared endomorphism: integer matrix acting on the generators
/// (column `j` is the image of generator `j`), with an optional order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub matrix: IntMatrix,
    pub order: Option<u64>,
}

/// Finite abelian p-group `⊕ Z/p^{e_i}` with named actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePModule {
    p: u64,
    exponents: Vec<u32>,
    actions: BTreeMap<String, Action>,
}

impl fmt::Display for FinitePModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .exponents
            .iter()
            .map(|e| format!("Z/{}", self.p.pow(*e)))
            .collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

impl FinitePModule {
    pub fn new(p: u64, exponents: Vec<u32>) -> Result<Self, CohomologyError> {
        if p < 3 || !crate::padic::is_prime(&p.into()) {
            return Err(CohomologyError::NotOddPrime(p));
        }
        if exponents.contains(&0) || exponents.windows(2).any(|w| w[0] < w[1]) {
            return Err(CohomologyError::BadExponents(exponents));
        }
        Ok(FinitePModule {
            p,
            exponents,
            actions: BTreeMap::new(),
        })
    }

    /// The zero module.
    pub fn zero(p: u64) -> Result<Self, CohomologyError> {
        Self::new(p, vec![])
    }

    /// Builds from invariant factors given as p-powers, e.g. `[9, 3]`.
    pub fn from_invariants(p: u64, factors: &[u64]) -> Result<Self, CohomologyError> {
        let mut exps = Vec::with_capacity(factors.len());
        for &f in factors {
            let mut e = 0;
            let mut v = f;
            while v > 1 && v % p == 0 {
                v /= p;
                e += 1;
            }
            if v != 1 || e == 0 {
                return Err(CohomologyError::BadExponents(vec![]));
            }
            exps.push(e);
        }
        Self::new(p, exps)
    }

    /// Declares an action after checking that it is well defined on the
    /// invariant factors and has the declared order.
    pub fn with_action(
        mut self,
        name: &str,
        matrix: IntMatrix,
        order: Option<u64>,
    ) -> Result<Self, CohomologyError> {
        let k = self.rank();
        if matrix.rows() != k || matrix.cols() != k {
            return Err(CohomologyError::ActionShape {
                name: name.to_string(),
                rows: matrix.rows(),
                cols: matrix.cols(),
                k,
            });
        }
        for i in 0..k {
            for j in 0..k {
                let need = self.exponents[i].saturating_sub(self.exponents[j]);
                if !matrix[(i, j)].is_multiple_of(&self.p_pow(need)) {
                    return Err(CohomologyError::IncompatibleAction {
                        name: name.to_string(),
                        i,
                        j,
                        need,
                    });
                }
            }
        }
        let matrix = self.reduce(&matrix);
        if let Some(m) = order {
            if self.power(&matrix, m) != IntMatrix::identity(k) {
                return Err(CohomologyError::OrderViolation {
                    name: name.to_string(),
                    order: m,
                });
            }
        }
        self.actions.insert(name.to_string(), Action { matrix, order });
        Ok(self)
    }

    /// Shorthand for a scalar action `x ↦ c·x`.
    pub fn with_scalar_action(
        self,
        name: &str,
        c: i64,
        order: Option<u64>,
    ) -> Result<Self, CohomologyError> {
        let k = self.rank();
        let m = IntMatrix::identity(k).map(|v| v * c);
        self.with_action(name, m, order)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Exponents `e_1 ≥ e_2 ≥ ...` of the invariant factors `p^{e_i}`.
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.exponents.iter().map(|&e| self.p_pow(e)).collect()
    }

    /// Number of cyclic summands.
    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    /// `log_p |M|`.
    pub fn size_exponent(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn size(&self) -> BigInt {
        self.p_pow(self.size_exponent())
    }

    pub fn is_zero(&self) -> bool {
        self.exponents.is_empty()
    }

    /// At most one invariant factor.
    pub fn is_cyclic(&self) -> bool {
        self.exponents.len() <= 1
    }

    pub fn action(&self, name: &str) -> Result<&Action, CohomologyError> {
        self.actions
            .get(name)
            .ok_or_else(|| CohomologyError::UnknownAction(name.to_string()))
    }

    pub fn action_names(&self) -> impl Iterator<Item = &str> {
        self.actions.keys().map(String::as_str)
    }

    fn p_pow(&self, e: u32) -> BigInt {
        num_traits::pow(BigInt::from(self.p), e as usize)
    }

    fn moduli(&self) -> Vec<BigInt> {
        self.invariant_factors()
    }

    fn relations(&self) -> IntMatrix {
        let k = self.rank();
        let mut r = IntMatrix::zeros(k, k);
        for (i, m) in self.moduli().into_iter().enumerate() {
            r[(i, i)] = m;
        }
        r
    }

    fn reduce(&self, m: &IntMatrix) -> IntMatrix {
        m.reduce_rows(&self.moduli())
    }

    fn power(&self, a: &IntMatrix, mut e: u64) -> IntMatrix {
        let mut base = a.clone();
        let mut acc = IntMatrix::identity(self.rank());
        while e > 0 {
            if e & 1 == 1 {
                acc = self.reduce(&acc.mul(&base));
            }
            base = self.reduce(&base.mul(&base));
            e >>= 1;
        }
        acc
    }

    /// Generators (columns) of the kernel of the endomorphism `a`.
    fn kernel_gens(&self, a: &IntMatrix) -> IntMatrix {
        let k = self.rank();
        let stacked = a.hcat(&self.relations());
        let ker = smith::kernel(&stacked);
        let cols: Vec<Vec<BigInt>> = ker.columns().into_iter().map(|c| c[..k].to_vec()).collect();
        IntMatrix::from_columns(k, &cols)
    }

    /// Lattice `L ⊆ Z^m` with `⟨S1⟩ / (⟨S1⟩ ∩ ⟨S2⟩) ≅ Z^m / L`, where
    /// `m` is the number of columns of `s1`.
    fn subquotient_lattice(&self, s1: &IntMatrix, s2: &IntMatrix) -> IntMatrix {
        let m = s1.cols();
        let stacked = s1.hcat(s2).hcat(&self.relations());
        let ker = smith::kernel(&stacked);
        let cols: Vec<Vec<BigInt>> = ker.columns().into_iter().map(|c| c[..m].to_vec()).collect();
        IntMatrix::from_columns(m, &cols)
    }

    fn exponents_of(&self, invariants: &[BigInt]) -> Vec<u32> {
        let p = BigInt::from(self.p);
        let mut out: Vec<u32> = invariants
            .iter()
            .map(|d| {
                assert!(!d.is_zero(), "subquotient of a finite module is finite");
                let mut v = d.clone();
                let mut e = 0;
                while v.is_multiple_of(&p) {
                    v /= &p;
                    e += 1;
                }
                debug_assert!(v.is_one(), "invariant factor {d} is not a p-power");
                e
            })
            .filter(|&e| e > 0)
            .collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// Structure of `⟨num⟩ / (⟨num⟩ ∩ ⟨den⟩)`, without actions.
    pub fn subquotient(&self, num: &IntMatrix, den: &IntMatrix) -> FinitePModule {
        let lattice = self.subquotient_lattice(num, den);
        let inv = smith::cokernel_invariants(&lattice);
        FinitePModule {
            p: self.p,
            exponents: self.exponents_of(&inv),
            actions: BTreeMap::new(),
        }
    }

    /// The submodule generated by the columns of `gens`, in a Smith basis,
    /// carrying every action that preserves it.
    pub fn submodule(&self, gens: &IntMatrix) -> FinitePModule {
        let k = self.rank();
        let lattice = self.subquotient_lattice(gens, &IntMatrix::zeros(k, 0));
        let s = smith(&lattice);
        let m = gens.cols();
        // basis vectors t with d_t ≠ 1, largest factor first
        let mut basis: Vec<(usize, u32)> = Vec::new();
        for t in 0..m {
            let d = s.diag.get(t).cloned().unwrap_or_default();
            if d.is_one() {
                continue;
            }
            let e = self.exponents_of(std::slice::from_ref(&d));
            basis.push((t, e.first().copied().unwrap_or(0)));
        }
        basis.retain(|&(_, e)| e > 0);
        basis.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let new_gens: Vec<Vec<BigInt>> = basis
            .iter()
            .map(|&(t, _)| gens.mul_vec(&s.u_inv.column(t)))
            .collect();
        let mut out = FinitePModule {
            p: self.p,
            exponents: basis.iter().map(|&(_, e)| e).collect(),
            actions: BTreeMap::new(),
        };
        let solver = gens.hcat(&self.relations());
        'actions: for (name, act) in &self.actions {
            let r = out.rank();
            let mut mat = IntMatrix::zeros(r, r);
            for (j, g) in new_gens.iter().enumerate() {
                let image = act.matrix.mul_vec(g);
                let Some(sol) = smith::solve(&solver, &image) else {
                    continue 'actions;
                };
                let coords = s.u.mul_vec(&sol[..m]);
                for (i, &(t, _)) in basis.iter().enumerate() {
                    mat[(i, j)] = coords[t].clone();
                }
            }
            let mat = out.reduce(&mat);
            out.actions.insert(
                name.clone(),
                Action {
                    matrix: mat,
                    order: act.order,
                },
            );
        }
        out
    }

    /// `M / ⟨gens⟩`, carrying every action that preserves `⟨gens⟩`.
    pub fn quotient(&self, gens: &IntMatrix) -> FinitePModule {
        let k = self.rank();
        let rel = self.relations().hcat(gens);
        let s = smith(&rel);
        let mut basis: Vec<(usize, u32)> = Vec::new();
        for t in 0..k {
            let d = s.diag.get(t).cloned().unwrap_or_default();
            if !d.is_one() {
                let e = self.exponents_of(std::slice::from_ref(&d));
                if let Some(&e) = e.first() {
                    basis.push((t, e));
                }
            }
        }
        basis.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut out = FinitePModule {
            p: self.p,
            exponents: basis.iter().map(|&(_, e)| e).collect(),
            actions: BTreeMap::new(),
        };
        'actions: for (name, act) in &self.actions {
            for g in gens.columns() {
                if smith::solve(&rel, &act.matrix.mul_vec(&g)).is_none() {
                    continue 'actions;
                }
            }
            let r = out.rank();
            let mut mat = IntMatrix::zeros(r, r);
            for (j, &(tj, _)) in basis.iter().enumerate() {
                let image = act.matrix.mul_vec(&s.u_inv.column(tj));
                let coords = s.u.mul_vec(&image);
                for (i, &(ti, _)) in basis.iter().enumerate() {
                    mat[(i, j)] = coords[ti].clone();
                }
            }
            let mat = out.reduce(&mat);
            out.actions.insert(
                name.clone(),
                Action {
                    matrix: mat,
                    order: act.order,
                },
            );
        }
        out
    }

    fn minus_identity(&self, a: &IntMatrix) -> IntMatrix {
        self.reduce(&a.sub(&IntMatrix::identity(self.rank())))
    }

    /// `1 + τ + ... + τ^{m-1}`, after checking `τ^m = 1`.
    pub fn norm_matrix(&self, tau: &str, m: u64) -> Result<IntMatrix, CohomologyError> {
        let a = &self.action(tau)?.matrix;
        if self.power(a, m) != IntMatrix::identity(self.rank()) {
            return Err(CohomologyError::OrderViolation {
                name: tau.to_string(),
                order: m,
            });
        }
        let mut acc = IntMatrix::zeros(self.rank(), self.rank());
        let mut pow = IntMatrix::identity(self.rank());
        for _ in 0..m {
            acc = self.reduce(&acc.add(&pow));
            pow = self.reduce(&pow.mul(a));
        }
        Ok(acc)
    }

    /// `M^τ = ker(τ - 1)`.
    pub fn fixed_points(&self, tau: &str) -> Result<FinitePModule, CohomologyError> {
        let a = &self.action(tau)?.matrix;
        Ok(self.submodule(&self.kernel_gens(&self.minus_identity(a))))
    }

    /// `(τ - 1) M`.
    pub fn augmentation_image(&self, tau: &str) -> Result<FinitePModule, CohomologyError> {
        let a = &self.action(tau)?.matrix;
        Ok(self.submodule(&self.minus_identity(a)))
    }

    /// `M / (τ - 1) M`.
    pub fn coinvariants(&self, tau: &str) -> Result<FinitePModule, CohomologyError> {
        let a = &self.action(tau)?.matrix;
        Ok(self.quotient(&self.minus_identity(a)))
    }

    /// `N·M` for the norm of a cyclic action of order `m`.
    pub fn norm_image(&self, tau: &str, m: u64) -> Result<FinitePModule, CohomologyError> {
        Ok(self.submodule(&self.norm_matrix(tau, m)?))
    }

    /// `Ĥ⁰ = M^τ / N·M`.
    pub fn tate_h0(&self, tau: &str, m: u64) -> Result<FinitePModule, CohomologyError> {
        let norm = self.norm_matrix(tau, m)?;
        let a = &self.action(tau)?.matrix;
        let fixed = self.kernel_gens(&self.minus_identity(a));
        Ok(self.subquotient(&fixed, &norm))
    }

    /// `Ĥ⁻¹ = ker N / (τ - 1) M`.
    pub fn tate_hm1(&self, tau: &str, m: u64) -> Result<FinitePModule, CohomologyError> {
        let norm = self.norm_matrix(tau, m)?;
        let a = &self.action(tau)?.matrix;
        let ker_norm = self.kernel_gens(&norm);
        Ok(self.subquotient(&ker_norm, &self.minus_identity(a)))
    }

    fn half_projector(&self, j: &str, sign: i64) -> Result<IntMatrix, CohomologyError> {
        let a = &self.action(j)?.matrix;
        if self.power(a, 2) != IntMatrix::identity(self.rank()) {
            return Err(CohomologyError::OrderViolation {
                name: j.to_string(),
                order: 2,
            });
        }
        let emax = self.exponents.first().copied().unwrap_or(1);
        let half = (self.p_pow(emax) + 1u32) / 2u32;
        let id = IntMatrix::identity(self.rank());
        let signed = a.map(|v| v * sign);
        Ok(self.reduce(&id.add(&signed).map(|v| v * &half)))
    }

    /// `M⁻ = (1 - J)/2 · M`.
    pub fn minus_part(&self, j: &str) -> Result<FinitePModule, CohomologyError> {
        Ok(self.submodule(&self.half_projector(j, -1)?))
    }

    /// `M⁺ = (1 + J)/2 · M`.
    pub fn plus_part(&self, j: &str) -> Result<FinitePModule, CohomologyError> {
        Ok(self.submodule(&self.half_projector(j, 1)?))
    }

    pub fn herbrand_check(&self, tau: &str, m: u64) -> Result<HerbrandVerdict, CohomologyError> {
        let h0 = self.tate_h0(tau, m)?.size_exponent();
        let hm1 = self.tate_hm1(tau, m)?.size_exponent();
        Ok(HerbrandVerdict {
            h0_exponent: h0,
            hm1_exponent: hm1,
        })
    }

    /// Coordinates of all elements, for small modules.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &e in &self.exponents {
            let n = self.p.pow(e);
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..n).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out
    }

    /// Applies a declared action to an element given in coordinates.
    pub fn apply(&self, name: &str, x: &[u64]) -> Result<Vec<u64>, CohomologyError> {
        let a = &self.action(name)?.matrix;
        let v: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
        Ok(a.mul_vec(&v)
            .iter()
            .zip(self.moduli())
            .map(|(c, m)| c.mod_floor(&m).to_u64().expect("small module"))
            .collect())
    }
}

/// Sizes `log_p |Ĥ⁰|` and `log_p |Ĥ⁻¹|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HerbrandVerdict {
    pub h0_exponent: u32,
    pub hm1_exponent: u32,
}

impl HerbrandVerdict {
    pub fn pass(&self) -> bool {
        self.h0_exponent == self.hm1_exponent
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obstruction {
    /// No automorphism of `A₁ ⋊ ⟨τ⟩` sends `τ` into `A₁ τ⁻¹`.
    Holds { p: u64, u: u32 },
    Counterexample(InvertingWitness),
}

impl Obstruction {
    pub fn holds(&self) -> bool {
        matches!(self, Obstruction::Holds { .. })
    }
}

/// For cyclic `A₁ = Z/p^{u+1}` with `τ` acting non-trivially of order `p`,
/// decides whether `A₁ ⋊ ⟨τ⟩` has an automorphism `φ` with `φ(τ) = yτ⁻¹`
/// (the conjugation a lift of an inverting involution `J` would induce).
///
/// Every order-`p` unit of `Z/p^{u+1}` is `1 + v·p^u`; replacing `τ` by a
/// suitable power reduces to the canonical twist `v = 1`.
pub fn theorem2_cyclic_obstruction(
    a1: &FinitePModule,
    tau: &str,
) -> Result<Obstruction, CohomologyError> {
    if a1.rank() != 1 {
        return Err(CohomologyError::NotCyclic(a1.rank()));
    }
    let e = a1.exponents[0];
    if e < 2 {
        return Err(CohomologyError::TooSmall);
    }
    let p = a1.p;
    let t = a1.action(tau)?.matrix[(0, 0)].clone();
    let modulus = a1.p_pow(e);
    let nontrivial = !(&t - 1u32).mod_floor(&modulus).is_zero();
    let order_p = t.modpow(&BigInt::from(p), &modulus).is_one();
    if !nontrivial || !order_p {
        return Err(CohomologyError::BadTauAction);
    }
    let g = MetacyclicGroup::new(p, e - 1)?;
    Ok(match g.find_inverting_automorphism()? {
        None => Obstruction::Holds { p, u: e - 1 },
        Some(w) => Obstruction::Counterexample(w),
    })
}

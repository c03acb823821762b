//! The metacyclic p-group `G = A₁ ⋊ G₁` with `A₁ = ⟨x⟩ ≅ Z/p^(u+1)`,
//! `G₁ = ⟨τ⟩ ≅ Z/p` and `τ x τ⁻¹ = x^(1+p^u)`, plus an exhaustive search
//! for automorphisms sending `τ` into the coset `A₁ τ⁻¹`.
//!
//! Elements are kept in normal form `x^a τ^c`. The product rule
//! `(a, c)(a', c') = (a + (1+p^u)^c a', c + c')` follows from the relation.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

/// Candidate pairs above this bound are refused by the exhaustive searches.
pub const SEARCH_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetacyclicError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("u must be at least 1")]
    ZeroU,
    #[error("group order overflows")]
    Overflow,
    #[error("search space too large: {0} candidate pairs exceeds {SEARCH_LIMIT}")]
    SearchSpaceTooLarge(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetacyclicElement {
    /// Exponent of `x`, reduced mod `p^(u+1)`.
    pub a: u64,
    /// Exponent of `τ`, reduced mod `p`.
    pub c: u64,
}

impl fmt::Display for MetacyclicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.c)
    }
}

/// Images of the generators `x` and `τ` under a candidate endomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneratorImages {
    pub image_x: MetacyclicElement,
    pub image_tau: MetacyclicElement,
}

impl fmt::Display for GeneratorImages {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x↦{}, τ↦{}", self.image_x, self.image_tau)
    }
}

/// Which defining relation a candidate failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// `image_x^(p^(u+1)) ≠ e`.
    XOrder { power: MetacyclicElement },
    /// `image_tau^p ≠ e`.
    TauOrder { power: MetacyclicElement },
    /// `image_tau · image_x · image_tau⁻¹ ≠ image_x^(1+p^u)`.
    Relation {
        conjugate: MetacyclicElement,
        twisted: MetacyclicElement,
    },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::XOrder { power } => write!(f, "order: image of x has x-power {power} ≠ e"),
            Rejection::TauOrder { power } => write!(f, "order: image of τ to the p = {power} ≠ e"),
            Rejection::Relation { conjugate, twisted } => {
                write!(f, "relation: conjugate {conjugate} ≠ twisted {twisted}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomVerdict {
    Accepted,
    Rejected(Rejection),
}

/// An automorphism `φ` with `φ(τ) ∈ A₁ τ⁻¹`, which cannot exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvertingWitness {
    pub p: u64,
    pub u: u32,
    pub images: GeneratorImages,
}

impl fmt::Display for InvertingWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G({},{}) admits {}", self.p, self.u, self.images)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetacyclicGroup {
    p: u64,
    u: u32,
    /// `p^(u+1)`, the order of `x`.
    modulus: u64,
    /// `(1+p^u)^c mod p^(u+1)` for `c = 0..p`.
    twist_powers: Vec<u64>,
}

impl MetacyclicGroup {
    pub fn new(p: u64, u: u32) -> Result<Self, MetacyclicError> {
        if p < 3 || p.is_multiple_of(2) || !crate::padic::is_prime(&p.into()) {
            return Err(MetacyclicError::NotOddPrime(p));
        }
        if u == 0 {
            return Err(MetacyclicError::ZeroU);
        }
        let modulus = p.checked_pow(u + 1).ok_or(MetacyclicError::Overflow)?;
        // the whole group order must fit, and products of residues too
        p.checked_pow(u + 2)
            .and_then(|n| n.checked_mul(n))
            .ok_or(MetacyclicError::Overflow)?;
        let twist = 1 + p.pow(u);
        let mut twist_powers = Vec::with_capacity(p as usize);
        let mut acc = 1u64;
        for _ in 0..p {
            twist_powers.push(acc);
            acc = acc * twist % modulus;
        }
        Ok(MetacyclicGroup {
            p,
            u,
            modulus,
            twist_powers,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn u(&self) -> u32 {
        self.u
    }

    /// Order of `A₁`.
    pub fn cyclic_order(&self) -> u64 {
        self.modulus
    }

    /// `p^(u+2)`.
    pub fn order(&self) -> u64 {
        self.modulus * self.p
    }

    pub fn element(&self, a: i64, c: i64) -> MetacyclicElement {
        MetacyclicElement {
            a: a.rem_euclid(self.modulus as i64) as u64,
            c: c.rem_euclid(self.p as i64) as u64,
        }
    }

    pub fn identity(&self) -> MetacyclicElement {
        MetacyclicElement { a: 0, c: 0 }
    }

    pub fn x(&self) -> MetacyclicElement {
        MetacyclicElement { a: 1, c: 0 }
    }

    pub fn tau(&self) -> MetacyclicElement {
        MetacyclicElement { a: 0, c: 1 }
    }

    pub fn elements(&self) -> impl Iterator<Item = MetacyclicElement> + '_ {
        (0..self.p).flat_map(move |c| (0..self.modulus).map(move |a| MetacyclicElement { a, c }))
    }

    fn index(&self, g: MetacyclicElement) -> usize {
        (g.c * self.modulus + g.a) as usize
    }

    pub fn mul(&self, g: MetacyclicElement, h: MetacyclicElement) -> MetacyclicElement {
        let twisted = self.twist_powers[g.c as usize] * h.a % self.modulus;
        MetacyclicElement {
            a: (g.a + twisted) % self.modulus,
            c: (g.c + h.c) % self.p,
        }
    }

    pub fn inverse(&self, g: MetacyclicElement) -> MetacyclicElement {
        let c_inv = (self.p - g.c) % self.p;
        let a = self.twist_powers[c_inv as usize] * g.a % self.modulus;
        MetacyclicElement {
            a: (self.modulus - a) % self.modulus,
            c: c_inv,
        }
    }

    pub fn pow(&self, g: MetacyclicElement, mut k: u64) -> MetacyclicElement {
        let mut base = g;
        let mut acc = self.identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn element_order(&self, g: MetacyclicElement) -> u64 {
        // the order is a power of p dividing p^(u+2)
        let mut m = 1;
        let mut h = g;
        while h != self.identity() {
            h = self.pow(h, self.p);
            m *= self.p;
        }
        m
    }

    /// Decides whether the generator images satisfy the defining relations,
    /// i.e. extend to a well-defined endomorphism of `G`.
    pub fn hom_check(&self, images: &GeneratorImages) -> HomVerdict {
        let x_pow = self.pow(images.image_x, self.modulus);
        if x_pow != self.identity() {
            return HomVerdict::Rejected(Rejection::XOrder { power: x_pow });
        }
        let tau_pow = self.pow(images.image_tau, self.p);
        if tau_pow != self.identity() {
            return HomVerdict::Rejected(Rejection::TauOrder { power: tau_pow });
        }
        let conjugate = self.mul(
            self.mul(images.image_tau, images.image_x),
            self.inverse(images.image_tau),
        );
        let twisted = self.pow(images.image_x, self.twist_powers[1]);
        if conjugate != twisted {
            return HomVerdict::Rejected(Rejection::Relation { conjugate, twisted });
        }
        HomVerdict::Accepted
    }

    /// `φ(x^a τ^c) = φ(x)^a φ(τ)^c`.
    pub fn apply(&self, images: &GeneratorImages, g: MetacyclicElement) -> MetacyclicElement {
        self.mul(
            self.pow(images.image_x, g.a),
            self.pow(images.image_tau, g.c),
        )
    }

    /// Whether `g` and `h` generate all of `G`, by closing the subgroup.
    pub fn generates(&self, g: MetacyclicElement, h: MetacyclicElement) -> bool {
        let n = self.order() as usize;
        let mut seen = vec![false; n];
        let mut stack = vec![self.identity()];
        seen[self.index(self.identity())] = true;
        let mut count = 1;
        while let Some(e) = stack.pop() {
            for s in [g, h] {
                let next = self.mul(e, s);
                let i = self.index(next);
                if !seen[i] {
                    seen[i] = true;
                    count += 1;
                    stack.push(next);
                }
            }
        }
        count == n
    }

    /// Conjugation `g ↦ h g h⁻¹`, as generator images.
    pub fn inner(&self, h: MetacyclicElement) -> GeneratorImages {
        let h_inv = self.inverse(h);
        GeneratorImages {
            image_x: self.mul(self.mul(h, self.x()), h_inv),
            image_tau: self.mul(self.mul(h, self.tau()), h_inv),
        }
    }

    fn guard(&self) -> Result<(), MetacyclicError> {
        let pairs = self.order().saturating_mul(self.order());
        if pairs > SEARCH_LIMIT {
            return Err(MetacyclicError::SearchSpaceTooLarge(pairs));
        }
        Ok(())
    }

    fn search<F>(&self, tau_filter: F) -> Result<Vec<GeneratorImages>, MetacyclicError>
    where
        F: Fn(MetacyclicElement) -> bool + Sync,
    {
        self.guard()?;
        let candidates: Vec<MetacyclicElement> = self.elements().collect();
        let taus: Vec<MetacyclicElement> =
            candidates.iter().copied().filter(|t| tau_filter(*t)).collect();
        Ok(candidates
            .par_iter()
            .flat_map_iter(|&image_x| {
                taus.iter().filter_map(move |&image_tau| {
                    let images = GeneratorImages { image_x, image_tau };
                    (self.hom_check(&images) == HomVerdict::Accepted
                        && self.generates(image_x, image_tau))
                    .then_some(images)
                })
            })
            .collect())
    }

    /// All automorphisms, as generator images, in lexicographic order of
    /// `(image_x, image_tau)`.
    pub fn enumerate_automorphisms(&self) -> Result<Vec<GeneratorImages>, MetacyclicError> {
        self.search(|_| true)
    }

    /// Searches for an automorphism with `φ(τ) = y τ⁻¹`, `y ∈ A₁`.
    pub fn find_inverting_automorphism(
        &self,
    ) -> Result<Option<InvertingWitness>, MetacyclicError> {
        let found = self.search(|t| t.c == self.p - 1)?;
        Ok(found.first().map(|&images| InvertingWitness {
            p: self.p,
            u: self.u,
            images,
        }))
    }
}

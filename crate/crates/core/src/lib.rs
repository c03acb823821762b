//! Computational core for anti-cyclotomic parity audits.
//!
//! - [`padic`]: `Z_p` at fixed precision, Teichmüller lifts, p-adic exponents.
//! - [`metacyclic`]: the groups `Z/p^(u+1) ⋊ Z/p` and their automorphisms.
//! - [`linalg`]: matrices over `Z/p^N`: characteristic polynomials,
//!   ζ-th powers, intertwiner solving and orbit-block constructions.
//! - [`iwasawa`]: elementary Λ-modules, layer growth, invariant fitting and
//!   parity audits on matrix models.
//! - [`cohomology`]: finite abelian p-groups with cyclic actions, Tate
//!   cohomology, minus parts and the cyclic obstruction.

pub mod cohomology;
pub mod intmat;
pub mod iwasawa;
pub mod linalg;
pub mod metacyclic;
pub mod padic;
pub mod poly;
pub mod smith;

pub use padic::{PadicError, PadicExponent, PadicInt, PadicRing, Valuation};

//! Desk-scale machinery for counting rational points of bounded height
//! on hypersurfaces over Q.
//!
//! The crate is organized around a handful of exact primitives:
//!
//! * [`monomials`] — ordered monomial bases and the Veronese coordinate map;
//! * [`lattice`] — integral lattices: determinants, integer kernels,
//!   successive minima, and exact counts of (primitive) lattice points in
//!   Euclidean balls;
//! * [`shortvec`] — the explicit family of short vectors orthogonal to a
//!   Veronese image;
//! * [`hypersurface`] — projective points, hypersurfaces ordered by
//!   coefficient norm, bounded-height point counts, and minimal heights
//!   (with the complete decision procedure for conics);
//! * [`manin`] — averaged point counts over the full space of hypersurfaces
//!   computed two independent ways, the associated constant, and the
//!   experiment drivers.
//!
//! Everything that can be exact is exact: norms are compared through their
//! squares as integers or rationals, and enumeration never rounds. Where a
//! result is irrational (determinants, heights) the squared value is the
//! canonical representation.

pub mod arith;
pub mod error;
pub mod hypersurface;
pub mod lattice;
pub mod manin;
pub mod monomials;
pub mod shortvec;

pub use error::{Budget, Error, Result};
pub use hypersurface::{Hypersurface, MinHeightResult, ProjectivePoint};
pub use lattice::IntegralLattice;
pub use monomials::MonomialBasis;
pub use shortvec::ShortFamily;

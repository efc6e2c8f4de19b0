//! Exact construction and certification of separated, dense subgroups of
//! `l_p` sequence spaces and of the lattice tilings they induce.
//!
//! Everything is exact: vectors carry arbitrary-precision rationals, norms
//! are compared through their `p`-th powers, and every certificate comes
//! from a complete enumeration.

#![no_std]

extern crate alloc;

pub mod abelian;
pub mod builder;
pub mod enumerate;
pub mod exactvec;
pub mod sampling;
pub mod tiling;

pub use abelian::{AlgebraError, IntegerMatrix, NormalFormResult};
pub use builder::{BuildMode, EnumerationScheme, GeneratorRecord, Subgroup};
pub use enumerate::{BallHit, BallQuery, Certificate, CertificateKind, EnumError, Lattice};
pub use exactvec::{PNorm, PowThreshold, Rational, SparseVector};
pub use tiling::{HPolytope, HalfSpace, TilingError, TilingReport};

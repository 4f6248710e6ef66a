//! Computations with one-relator pro-p group presentations.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; parsing, reporting and the command-line driver
//! live in the companion `demushkin-cli` crate.
//!
//! Module map:
//!
//! * [`words`]: freely reduced words and presentations.
//! * [`padic`]: fixed-precision p-adic integers and closed subgroups of the
//!   p-adic units.
//! * [`magnus`]: degree-2 Magnus expansion, class-2 coefficients, torsion
//!   invariant and abelianization.
//! * [`demushkin`]: cup-product matrix, standard relations, classification,
//!   Baumslag doubles and the limit-group status table.
//! * [`orientation`]: twisted Fox calculus and the orientation character
//!   solver.
//! * [`gog`]: presentations of fundamental groups of finite graphs of groups.
//! * [`matrixcheck`]: unitriangular 3x3 matrices over `Z/p^k`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod snf;

pub mod demushkin;
pub mod gog;
pub mod magnus;
pub mod matrixcheck;
pub mod orientation;
pub mod padic;
pub mod words;

pub use error::{Error, Result};
pub use words::{Gen, Presentation, Word};

/// Default number of p-adic digits carried by solvers and coefficient forms.
pub const DEFAULT_PRECISION: u32 = 16;

//! Exact automatic differentiation for layered networks with
//! piecewise-polynomial activations, plus certification of what AD computes
//! at any exactly-representable parameter and exhaustive density censuses
//! over finite parameter grids.
//!
//! The crate answers three questions about the function `w -> z(w)` a
//! network program computes, all in exact rational arithmetic:
//!
//! * what does forward/reverse AD return at `w` ([`ad`]);
//! * is the function differentiable at `w`, and is the AD output the true
//!   derivative or at least a limit of nearby gradients ([`certify`],
//!   [`oracle`]);
//! * over a whole grid, how many points fall in the non-differentiable and
//!   incorrect sets, and do the counts respect the density bounds
//!   ([`census`]).
//!
//! See the book under `book/` for a guided tour; its code blocks compile
//! and run as doctests of this crate.

pub mod ad;
pub mod census;
pub mod certify;
pub mod network;
pub mod oracle;
pub mod poly;
pub mod rat;
pub mod scalarfun;

pub use crate::network::fixtures;

/// Book chapters as doctests: each `rust` code block in the guide is
/// compiled and run by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/piecewise.md")]
    pub struct Piecewise;
    #[doc = include_str!("../../../book/src/networks.md")]
    pub struct Networks;
    #[doc = include_str!("../../../book/src/ad.md")]
    pub struct Ad;
    #[doc = include_str!("../../../book/src/certification.md")]
    pub struct Certification;
    #[doc = include_str!("../../../book/src/census.md")]
    pub struct Census;
}

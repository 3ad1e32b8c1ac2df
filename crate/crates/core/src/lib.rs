//! Fourier analysis on slices of the Boolean hypercube.
//!
//! The crate provides dense truth tables and k-monotone generators
//! ([`boolfn`]), the Young-Fourier basis on a slice ([`slice_basis`]),
//! exact slice analysis ([`slice_fourier`]), a sample-only estimation layer
//! ([`estimator`]), and on top of those a low-degree distinguisher
//! ([`distinguisher`]) and weak learner ([`learner`]). Brute-force reference
//! implementations used as ground truth live in [`oracle`].
//!
//! Sign convention: a 0/1 value `b` maps to `1 - 2b`, so `0 -> +1` and
//! `1 -> -1`. Coordinates in public APIs that take indices are 1-based;
//! bit `i - 1` of a point `x: u64` is coordinate `i`.

pub mod boolfn;
pub mod combinatorics;
pub mod distinguisher;
pub mod error;
pub mod estimator;
pub mod io;
pub mod learner;
pub mod oracle;
pub mod seed;
pub mod slice_basis;
pub mod slice_fourier;
pub mod verify;

pub use boolfn::{BooleanFunction, BooleanOracle, KMonotoneFunction, MonotoneSpec};
pub use error::{Error, Result};
pub use slice_basis::{SliceIndex, TopSet};
pub use slice_fourier::{SliceExpansion, SliceFunction};

/// Report and file format version embedded in serialized outputs.
pub const FORMAT_VERSION: u32 = 1;

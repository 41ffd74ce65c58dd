//! Exact-arithmetic workbench for sandwich block-cipher rounds over GF(2).
//!
//! A round squeezes a keyed nonlinear map between a compression matrix `A` and
//! an expansion matrix `B` with `A B^t = 0`, then mixes with an invertible `T`:
//! `F_k(x) = T(x + B^t f_k(A x))`. The crate builds such rounds, inverts them,
//! computes exact differential and linear spectra, reduces whole-round spectra
//! to the core's, and derives round-count bounds from kernel chains.

pub mod dyadic;
pub mod error;
pub mod exec;
pub mod format;
pub mod gf2;
pub mod keyed_map;
pub mod multibranch;
pub mod perpgen;
pub mod sandwich;
pub mod spectra;
pub mod templates;
pub mod trails;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use exec::Execution;
pub use gf2::{BitMatrix, BitVector, RightInverse, Subspace};
pub use keyed_map::{KeyRule, KeyedMap, RoundKey};
pub use multibranch::{Branch, MultiBranchParts, MultiBranchSpec};
pub use sandwich::{validate, Dims, LinearLayers, SchemeParts, SchemeSpec, ValidationReport};

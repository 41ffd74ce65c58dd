//! Dense linear algebra over GF(2).
//!
//! Vectors and matrix rows are packed into 64-bit words; coordinate `i` is
//! bit `i % 64` of word `i / 64`. In text form coordinate 0 is the leftmost
//! character.

mod matrix;
mod subspace;
mod vector;

pub use matrix::{apply_row_masks, combine_row_masks, BitMatrix, Echelon, RightInverse};
pub use subspace::Subspace;
pub(crate) use vector::mask;
pub use vector::BitVector;

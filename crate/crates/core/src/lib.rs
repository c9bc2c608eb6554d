//! Exponential frames near the critical density.
//!
//! The pipeline runs in finite dimensions: a Parseval frame is sparsified with
//! barrier potentials ([`sparsifier`]), its weights are quantized, the support
//! becomes an unweighted subframe ([`frame_select`]), and for a spectrum made
//! of grid cells the selected rows of a DFT submatrix give a periodic sampling
//! set whose frame bounds are exactly the extreme squared singular values of
//! that submatrix ([`expframe_line`]). [`lca_finite`] repeats the construction
//! over finite abelian groups and checks the quotient lifting property;
//! [`density`] estimates Beurling densities from point data.

pub mod density;
pub mod error;
pub mod expframe_line;
pub mod frame_select;
pub mod io;
pub mod lca_finite;
pub mod numerics;
pub mod random;
pub mod sparsifier;

pub use error::{FrameError, Result};
pub use numerics::{ComplexMatrix, HermitianMatrix, Tolerances};
pub use sparsifier::{FrameFamily, QuantizedFrame, WeightedFrame};

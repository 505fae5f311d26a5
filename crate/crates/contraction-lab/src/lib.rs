//! Contraction coefficients of finite-state Markov kernels in Orlicz and `L_p`
//! spaces, together with the strong data-processing, mixing-time and
//! concentration bounds built on them, and brute-force/exact oracles for
//! checking each bound.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod contraction;
pub mod error;
pub mod markov;
pub mod mixing;
pub mod orlicz;
pub mod par;
pub mod sdpi;

pub use error::{Error, Result};
pub use markov::{MarkovKernel, ProbVector};

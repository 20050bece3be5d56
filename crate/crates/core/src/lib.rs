//! Algorithms for detecting lexical semantic change with static word embeddings.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no I/O. It covers:
//!
//! * [`corpus`]: frequency filtering, concatenation and word injection;
//! * [`sgns`]: skip-gram with negative sampling, with optional pre-trained initialization;
//! * [`align`]: orthogonal Procrustes, vector initialization, word injection, shared-init no-alignment;
//! * [`postprocess`]: similarity order transformation, mean centring, principal component removal;
//! * [`measures`] and [`evaluation`]: cosine distance scores and Spearman evaluation;
//! * [`analysis`]: isotropy and frequency bias diagnostics;
//! * [`synthetic`]: corpus pairs with planted change for end-to-end checks.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod aggregate;
pub mod align;
pub mod analysis;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod measures;
pub mod postprocess;
mod rng;
pub mod sgns;
pub mod synthetic;
pub mod vocab;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use rng::derive_seed;

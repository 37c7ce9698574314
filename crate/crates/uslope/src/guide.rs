//! The user guide, compiled from the `book/` sources.
//!
//! Each chapter of the mdbook guide is included here verbatim, so every
//! fenced Rust block in the book runs as a doc-test and the prose can
//! never drift out of sync with the API.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/valuations.md")]
pub mod valuations {}

#[doc = include_str!("../../../book/src/qseries.md")]
pub mod qseries {}

#[doc = include_str!("../../../book/src/operator-matrices.md")]
pub mod operator_matrices {}

#[doc = include_str!("../../../book/src/spectra.md")]
pub mod spectra {}

#[doc = include_str!("../../../book/src/kernel.md")]
pub mod kernel {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

//! Exact arithmetic for 2-adic spectral computations on q-expansions.
//!
//! Everything in this crate is computed over the field `Q(sqrt2)`, the
//! smallest exact field whose elements realise every 2-adic valuation
//! regime the analysis needs (negative, positive half-integral, and
//! infinite distance to `Z_2`). No floating point is used anywhere.
//!
//! The main pieces:
//!
//! - [`scalar`]: the base field `Q(sqrt2)` and exact rationals.
//! - [`valuation`]: 2-adic valuations, the `beta`/`nu` profile of a scalar,
//!   factorial and product valuations.
//! - [`qseries`]: truncated q-expansions, the `U`/`V`/`W`/`theta` operators,
//!   the standard eta-quotient forms and formal powers `h^s`.
//! - [`opmatrices`]: closed-form operator matrices `u_ij(s)`, `eta_ij(s)`
//!   and their weight-2 twists, with independent q-expansion oracles.
//! - [`spectral`]: exact characteristic polynomials of truncations,
//!   Newton polygons and stability-checked slope tables.
//! - [`kernel`]: case classification of the weight parameter, eta-column
//!   valuation scans, and explicit kernel-of-`U` witnesses.
//! - [`verify`]: the ledger-producing verification suites used by the CLI
//!   and the acceptance tests.
//!
//! The [`guide`] module embeds the chapters of the mdbook guide so their
//! examples run as doc-tests.

pub mod error;
pub mod guide;
pub mod kernel;
pub mod opmatrices;
pub mod qseries;
pub mod scalar;
pub mod spectral;
pub mod valuation;
pub mod verify;

pub use error::Error;
pub use scalar::{Rat, Scalar};
pub use valuation::Val;

/// Convenience result type used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

//! Essential spectrum of singular block matrix differential operators.
//!
//! The operator couples a scalar second-order Sturm–Liouville part with an
//! `n`-dimensional multiplication part:
//!
//! ```text
//! A = ( -(d/dt) p (d/dt) + q     (d/dt) b* + c* )
//!     ( -b (d/dt) + c            D              )
//! ```
//!
//! on `[alpha, beta)` with a regular left endpoint and a possibly singular right
//! endpoint. The library computes the regular part of the essential spectrum
//! (eigenvalue ranges of `D − bb*/p`), the singular part produced by `beta`
//! (through the boundary asymptotics of the first Schur complement), their
//! topological structure, and the essential spectral radius.

pub mod asymptotic;
pub mod builtin;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod expr;
pub mod interval;
pub mod limits;
pub mod linalg;
pub mod model;
pub mod options;
pub mod oracle;
pub mod par;
pub mod plot;
pub mod regular;
pub mod report;
pub mod schur;
pub mod singular;

pub use error::{Error, Result};

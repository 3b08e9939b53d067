//! Arrow-of-time detection for signed-Laplacian dynamics.
//!
//! A generator `Λ` evolves signed distributions by `p(t) = exp(tΛ) p0`. When
//! `-Λ` is a symmetric signed Laplacian with a one-dimensional kernel and the
//! Renyi-2 entropy never decreases, the forward propagator `exp(tΛ)` becomes
//! strictly positive after a finite delay τ while the backward propagator
//! `exp(-tΛ)` always keeps a negative entry. Comparing the signs of the two
//! fitted propagators therefore reveals the direction of time, but only once
//! the observation window reaches τ.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`model`] | generator validation, spectral decomposition, Second-Law check |
//! | [`propagator`] | matrix exponentials, sign classification, rotation closed form |
//! | [`positivity`] | detection time τ, Perron-Frobenius test, PSD/positivity cross-check |
//! | [`entropy`] | Renyi-2 entropy, its derivative, trajectories |
//! | [`experiment`] | preparation, measurement, propagator fitting and verdict |
//! | [`io`], [`cli`] | matrix files, reports and the command surface |
//!
//! ```
//! use signed_aot::{catalog, experiment::{run_aot_protocol, ProtocolConfig, VerdictKind}};
//!
//! let generator = catalog::example1();
//! let report = run_aot_protocol(&generator, 0.20, &ProtocolConfig::default()).unwrap();
//! assert_eq!(report.verdict.kind, VerdictKind::ForwardConclusive);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod io;
pub mod model;
pub mod positivity;
pub mod propagator;
pub mod random;

pub use error::{Error, Result};
pub use model::{GeneratorMatrix, ToleranceConfig};

//! Maths-type q-deformed coherent states in both deformation regimes.
//!
//! The crate is layered bottom-up:
//!
//! - [`qcore`]: q-numbers, q-factorials and the q-exponential series with
//!   certified truncation.
//! - [`states`]: the normalized coherent state as a truncated Fock vector.
//! - [`observables`]: photon statistics, metric factor, quadrature squeezing,
//!   signal-to-quantum-noise ratio and the intelligent-state equality.
//! - [`gup`]: the deformed-commutator parameter mapping for negative α, β.
//! - [`harness`]: grid scans, CSV/JSON emission and the verification suite
//!   driven by the `qdefcs` binary.
//! - [`oracle`]: an independent double-double brute-force evaluator used by
//!   the verification suite and the tests.

pub mod error;
pub mod gup;
pub mod harness;
mod numerics;
pub mod observables;
pub mod oracle;
pub mod qcore;
pub mod states;

pub use error::{DiscViolation, Error, Result};
pub use gup::GupParameters;
pub use observables::{ObservableReport, Phase, SlopeSet};
pub use qcore::{DeformationParameter, Regime, SeriesConfig, SeriesValue, TruncationSpec};
pub use states::QCoherentState;

/// Default relative tolerance on the truncated normalization series.
pub const DEFAULT_TOLERANCE: f64 = 1e-14;

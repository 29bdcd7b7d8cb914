//! Construction and spectral verification of translation-invariant pure
//! quasifree spin-chain states with prescribed sublinear entropy growth.
//!
//! The pipeline: pick a sublinear target f_N, derive its auxiliary pair
//! (g, h), build a finite union K of dyadic intervals on the circle whose
//! translation-difference measure Λ_K dominates h on a window, then verify
//! spectrally that the block entropies S_N of the state with symbol χ_K
//! dominate f_N, with every inequality in the chain evaluated numerically
//! and an independent density-matrix oracle at small N.

pub mod construct;
pub mod eigen;
pub mod error;
pub mod interval;
pub mod oracle;
pub mod report;
pub mod target;
pub mod toeplitz;
pub mod verify;

pub use construct::{
    build_set, quantize_block, solve_recursion_step, validity_report, BlockTrain, BuildLimits,
    Construction, ConstructionLedger, StopReason, ValidityReport,
};
pub use error::{Error, Result};
pub use interval::IntervalSet;
pub use target::{Family, GrowthTarget, MonotoneEnvelope};

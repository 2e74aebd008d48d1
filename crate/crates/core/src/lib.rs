//! Solvability of fault detection and isolation (FDI) for linear
//! time-invariant systems `x' = A x + L f`, `y = C x`, and for structured
//! families of such systems described by `0` / `*` / `?` pattern matrices.
//!
//! Module map:
//!
//! - [`pattern`]: symbol arithmetic and pattern-matrix algebra
//! - [`graph`]: graph of a pattern, color change rule, pattern rank tests
//! - [`structured`]: structural indices, the pattern matrix `R`, verdicts
//! - [`linalg`]: tolerance-aware subspaces and the conditioned-invariant
//!   iteration
//! - [`numeric`]: fault indices, the matrix `R`, solvability, friends
//! - [`sim`]: error-system simulation, residual decomposition, isolation
//! - [`sampling`]: seeded members of pattern classes and Monte-Carlo checks
//! - [`io`] and [`report`]: file formats and canonical JSON reports

pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod numeric;
pub mod pattern;
pub mod report;
pub mod sampling;
pub mod sim;
pub mod structured;

pub use error::{FdiError, Result};
pub use graph::{ColoringState, ForcingStep, StructGraph};
pub use linalg::{Subspace, ToleranceConfig};
pub use numeric::{FriendGain, NumericReport, NumericTriple};
pub use pattern::{PatternMatrix, PatternSymbol};
pub use sampling::{MonteCarloSummary, SamplerConfig};
pub use sim::{FaultScenario, FaultSignal, IsolationReport, ResidualTrace};
pub use structured::{StructuredReport, StructuredTriple, StructuredVerdict, VerdictReason};

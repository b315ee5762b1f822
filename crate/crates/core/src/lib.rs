//! Non-adaptive group testing with random test matrices.
//!
//! A test matrix has one row per pooled test and one column per item; a test
//! is positive iff it contains a defective item. This crate designs random
//! matrices (independent cells or constant-weight rows), computes the closed
//! form test counts for disjunct, separable and semi-disjunct designs, decodes
//! answers by elimination with a bounded exhaustive finish, and checks the
//! matrix properties exhaustively at small scale.

pub mod bits;
pub mod decode;
pub mod design;
pub mod error;
pub mod format;
pub mod matrix;
pub mod params;
pub mod randgen;
pub mod simulate;
pub mod subsets;
pub mod verify;

pub use bits::BitVec;
pub use decode::{DecodeOutcome, DecodeResult, DecoderKind};
pub use error::{Error, Result};
pub use matrix::{answer_vector, AnswerVector, ItemSet, ModelTag, TestMatrix};
pub use params::{DesignSpec, Model, ModelKind, Property};
pub use simulate::{SimulationReport, TrialConfig};
pub use verify::PropertyReport;

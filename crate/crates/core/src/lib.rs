//! Learning binary hash codes by pulling each sample's relaxed code toward a
//! fixed, well-separated hash center.
//!
//! The crate covers the whole loop:
//!
//! - [`centers`]: Hadamard / random center generation, validation, and
//!   per-sample semantic centers (majority vote for multi-label samples).
//! - [`hamming`]: bit-packed codes and popcount distances.
//! - [`model`]: a small fully connected hash head trained with a
//!   cross-entropy pull toward the centers plus a log-cosh quantization term.
//! - [`retrieval`]: Hamming ranking, mAP@N, precision curves, PR curves and
//!   the center/code distance matrix.
//! - [`io`], [`config`], [`pipeline`]: file formats and the experiment driver
//!   behind the `central-hash` binary.
//!
//! Inner loops run on rayon when the `parallel` feature (default) is on;
//! every reduction sums in a fixed order, so results do not depend on it.

pub mod centers;
pub mod config;
pub mod data;
pub mod error;
pub mod exec;
pub mod hamming;
pub mod io;
pub mod labels;
pub mod model;
pub mod pipeline;
pub mod retrieval;
pub mod rng;

pub use centers::{CenterMethod, CenterSet, SemanticCenterMap};
pub use data::Dataset;
pub use error::{Error, Result};
pub use exec::Execution;
pub use hamming::PackedCode;
pub use labels::LabelSet;
pub use model::{HashModel, TrainConfig};
pub use retrieval::{CodeIndex, EvalReport, QuerySet};

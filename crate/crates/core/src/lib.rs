//! Density-based outlier detection over per-channel chirp features, plus
//! exact and weighted-index spatial concordance against clinically annotated
//! seizure onset zones.
//!
//! The pipeline is a two-step process applied independently per patient:
//!
//! 1. **Outlier detection** — reduce each channel's chirp events to the
//!    median triple (start frequency, end frequency, duration), z-score the
//!    features across the patient's channels, score every channel with the
//!    Local Outlier Factor (adaptive k = min(n_neighbors, n−1)) and flag the
//!    top ⌈contamination·n⌉ scores.
//! 2. **Spatial concordance** — compare the flagged channels against the
//!    annotated SOZ set via exact label intersection and a weighted index
//!    score (2 points for same electrode number and first character, 1 point
//!    for same number only), then derive precision/recall/F1 in both
//!    regimes.
//!
//! On top of the analysis, the crate emits deterministic plot-ready data
//! products (3D embeddings, radial projections, overlap grids, metric
//! heatmaps, cohort tables) and includes a seeded synthetic-cohort generator
//! for planted-truth testing. See [`pipeline`] for the stage orchestration
//! and the on-disk formats.
//!
//! All numeric kernels are generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the aliases below fix `f64`, which is what the CLI uses.

pub mod channelid;
pub mod cohort;
pub mod concordance;
pub mod error;
pub mod features;
pub mod ingest;
pub mod lof;
pub mod pipeline;
pub mod scalar;
pub mod synth;
pub mod table;
pub mod vizdata;

pub use channelid::ChannelId;
pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` instantiations used by the CLI pipeline.
pub type ChirpEventF64 = ingest::ChirpEvent<f64>;
pub type CohortF64 = ingest::Cohort<f64>;
pub type ChannelFeatureVectorF64 = features::ChannelFeatureVector<f64>;
pub type StandardizedMatrixF64 = features::StandardizedMatrix<f64>;
pub type LofConfigF64 = lof::LofConfig<f64>;
pub type LofResultF64 = lof::LofResult<f64>;
pub type ConcordanceReportF64 = concordance::ConcordanceReport<f64>;
pub type GroupSummaryF64 = cohort::GroupSummary<f64>;
pub type SynthSpecF64 = synth::SynthSpec<f64>;
pub type RunConfigF64 = pipeline::RunConfig<f64>;

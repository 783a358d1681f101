//! High-modularity bipartitions of sparse graphs via a matching-based,
//! weight-balanced bisection, with closed-form bounds and random graph models.

pub mod bisection;
pub mod bounds;
pub mod error;
pub mod generators;
pub mod graph;
pub mod io;
pub mod matching;
pub mod modularity;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod scalar;

pub use bisection::{ActiveUpdate, AlonOptions, WeightBalanceOptions};
pub use bounds::{BoundReport, Hypothesis, PkDistribution, SpectralGap};
pub use error::{Error, Result};
pub use graph::{DegreeStats, Graph, Relabeling, SimplifyReport, VertexSet};
pub use matching::{BandwidthMatching, MatchingMode, MatchingOptions};
pub use modularity::{Partition, ScoreBreakdown};
pub use pipeline::{PipelineOptions, PipelineResult, Route};
pub use scalar::{Rational, Real, Scalar};

/// Floating-point score breakdown.
pub type Score = ScoreBreakdown<f64>;
/// Exact rational score breakdown.
pub type ExactScore = ScoreBreakdown<Rational>;

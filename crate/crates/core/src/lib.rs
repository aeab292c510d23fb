//! Active-learning calibration of the decision threshold of an unsupervised
//! discrete-sequence anomaly detector.
//!
//! The crate selects which scored sequences an oracle should label ([`strategies`]),
//! simulates imperfect oracles ([`oracle`]), grid-searches a threshold from the labels
//! ([`thresholding`]) and benchmarks the whole loop over growing day splits
//! ([`harness`]). [`synthetic`] supplies seeded data and a reference scorer when no
//! external detector output is available.

pub mod dtw;
pub mod evaluation;
pub mod harness;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod strategies;
pub mod synthetic;
pub mod thresholding;

pub use model::{
    sequence_statistic, AnomalyScore, Candidate, Label, LabelSource, LabelValue, QueryState,
    Queried, Sequence,
};
pub use rng::SeededRng;
pub use strategies::{RoundRequest, Selection, StrategyKind};
pub use thresholding::{Provenance, Threshold};

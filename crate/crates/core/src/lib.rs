//! Inference for free-response (FROC) observer-performance data under the
//! initial-detection-and-candidate-analysis (IDCA) model.
//!
//! The usual path is [`data::FrocDataset`] → [`model::fit`] → an index from
//! [`indices`] with its confidence interval. [`empirical`] gives the
//! nonparametric AFROC area and [`simulate`] runs coverage studies.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod distributions;
pub mod empirical;
pub mod error;
pub mod indices;
pub mod model;
pub mod simulate;
pub mod special;

pub use data::{FrocDataset, NegativeSubject, PositiveSubject};
pub use distributions::{Family, ScoreDistribution};
pub use error::{FrocError, Result};
pub use indices::{AccuracyIndex, IndexEstimate};
pub use model::{fit, IdcaFit, IdcaParams};

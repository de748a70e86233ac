//! Stratified partial dependence for numeric and categorical features.
//!
//! Partial dependence is estimated without fitting a model of the response.
//! Rows are grouped by a regression tree fit to the other features, and
//! within-group effects of the feature of interest are combined.

pub mod bench;
pub mod catpd;
pub mod data;
pub mod error;
pub mod export;
pub mod numpd;
pub mod oracle;
pub mod rng;
pub mod stratify;
pub mod synth;

pub use catpd::{catstratpd, CatEffect, CatStratPDParams};
pub use data::{load_csv, read_csv, ColumnKind, ColumnMeta, Dataset};
pub use error::{Error, Result};
pub use numpd::{stratpd, PDCurve, StratPDParams};
pub use stratify::{fit_stratification, StratTree, StratifyParams};
pub use synth::{SynthKind, SynthSpec};

//! Density evolution and potential-function analysis of LDPC and LDGM ensembles
//! over binary memoryless symmetric channels, including spatially-coupled chains.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod coupled;
pub mod de;
pub mod ensemble;
pub mod error;
pub mod measure;
pub mod potential;
pub mod threshold;

pub use channel::{ChannelFamily, ChannelKind, ChannelSpec};
pub use ensemble::{DegreePolynomial, EnsembleKind, EnsembleSpec};
pub use error::{Error, Result};
pub use measure::{GridSpec, HatMeasure};
pub use threshold::ThresholdReport;

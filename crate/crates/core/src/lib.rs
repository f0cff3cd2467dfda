//! Universal-approximation workbench: target functions, explicit network
//! constructions (Taylor/bit-extraction, piecewise step/ramp, Fourier sine
//! networks), error metrics and table/plot generation.

pub mod bench;
pub mod bitnet;
pub mod error;
pub mod exact;
pub mod fourier;
pub mod metrics;
pub mod netcore;
pub mod par;
pub mod series;
pub mod targets;
pub mod taylor;
pub mod trapnet;

pub use error::{Error, Result};
pub use metrics::{Construction, ErrorReport, Grid, Interval, NormKind};
pub use netcore::{Activation, NetworkGraph, Unit};
pub use par::Execution;
pub use targets::{lookup, make_zoo, TargetFunction};

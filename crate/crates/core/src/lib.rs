//! Space-time coding toolkit: golden codes, the overlaid Alamouti code and
//! their maximum-likelihood decoders, plus a Monte Carlo harness that counts
//! search effort.

pub mod channel;
pub mod codes;
pub mod constellation;
pub mod decoders;
pub mod error;
pub mod harness;
pub mod matrixkit;

pub use error::{Result, StcError};

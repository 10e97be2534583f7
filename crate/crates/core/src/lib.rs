//! Risk and utility functionals on finite probability spaces, their recession functionals,
//! and decision procedures for sensitivity to large losses.

pub mod error;
pub mod ext;
pub mod function;
pub mod fixtures;
pub mod functionals;
pub mod io;
pub mod prob;
pub mod recession;
pub mod sampling;
pub mod sensitivity;
pub mod solve;

pub use error::{Error, Result};
pub use ext::{Evaluation, ExtReal};
pub use function::{LossFn, UtilityFn};
pub use functionals::{FunctionalSpec, Kind};
pub use prob::{EventMask, FiniteSpace, Position};
pub use sensitivity::DomainSpec;

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

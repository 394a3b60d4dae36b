pub mod canonical;
pub mod crystal;
pub mod duality;
pub mod error;
pub mod exactring;
pub mod filtration;
pub mod invariants;
pub mod io;
pub mod report;
pub mod semilinear;

pub use error::{Error, Result};

pub mod dataprep;
pub mod error;
pub mod harness;
pub mod hybrid;
pub mod neural;
pub mod params;
pub mod qsim;
pub mod vqc;

pub use error::{Error, Result};

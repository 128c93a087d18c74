pub mod bw;
pub mod cli;
pub mod data;
pub mod error;
pub mod flow;
pub mod linalg;
pub mod metrics;
pub mod nn;
pub mod ot;
pub mod rng;

pub use error::{Error, Result};

pub mod beliefs;
pub mod cli;
pub mod envs;
pub mod error;
pub mod metrics;
pub mod policies;
pub mod sim;
pub mod specfun;

pub use error::{Error, Result};

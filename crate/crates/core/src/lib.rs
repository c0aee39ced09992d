pub mod cli;
pub mod corpus;
pub mod error;
pub mod factor;
pub mod metrics;
pub mod pipeline;
pub mod synthetic;

pub use error::{Error, Result};

pub mod bench;
pub mod consensus;
pub mod error;
pub mod meanfield;
pub mod noise;
pub mod objectives;
pub mod par;
pub mod swarm;

pub use error::{Error, Result};

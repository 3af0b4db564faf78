pub mod baselines;
pub mod cli;
pub mod conditions;
pub mod error;
pub mod numerics;
pub mod recovery;
pub mod solver;
pub mod synthdata;

pub use error::{GmsError, Result};

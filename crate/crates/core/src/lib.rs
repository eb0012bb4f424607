pub mod certify;
pub mod cli;
pub mod error;
pub mod hermitian;
pub mod moment;
pub mod optimize;
pub mod random;
pub mod rank_one;
pub mod subdiff;
mod spectraplex;

pub use error::{Error, Result};

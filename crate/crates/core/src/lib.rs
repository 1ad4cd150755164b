pub mod cli;
pub mod coxeter;
pub mod error;
pub mod graphs;
pub mod morse;
pub mod rays;
pub mod sbe;
pub mod spaces;
pub mod sublinear;
pub mod walks;

pub use error::{Error, Result};

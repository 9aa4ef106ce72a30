//! Directed homology and cohomology bimodules of finite precubical sets.

pub mod bimodule;
pub mod chains;
pub mod cli;
pub mod error;
pub mod homalg;
pub mod obstacles;
pub mod precubical;
pub mod pvlang;

pub use error::{Error, Result};

pub mod error;
pub mod matrix;
pub mod wach;
pub mod descent;
pub mod fixtures;
pub mod cyclo;
pub mod padic;
pub mod pd;
pub mod relative;
pub mod config;
pub mod io;
pub mod random;
pub mod report;
pub mod suite;
pub mod commands;

pub use error::{Result, WachError};
pub use padic::{PadicRational, PadicScalar};

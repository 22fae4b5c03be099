pub mod analysis;
pub mod cli;
pub mod error;
pub mod field;
pub mod fourier;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod models;
pub mod phi;
pub mod singtrack;

pub use error::{Error, Result};

pub mod circuit;
pub mod cli;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod mathieu;
pub mod operator;
pub mod plaquette;
pub mod rotor;
pub mod spectra;

pub use error::{Error, Result};

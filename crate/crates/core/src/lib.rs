pub mod dynamics;
pub mod entropy_lab;
pub mod error;
pub mod format;
pub mod liegroup;
pub mod matrix;
pub mod padic;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::PadicMatrix;
pub use padic::{PadicContext, PadicScalar};

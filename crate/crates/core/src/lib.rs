//! Green's functions and exact solutions for linear constant-coefficient
//! differential equations with a reflection of the argument.

pub mod boundary;
pub mod cli;
pub mod error;
pub mod exppoly;
pub mod factor;
pub mod greens;
pub mod numeric;
pub mod operator;
pub mod pipeline;
pub mod roots;

pub use error::{Error, Result};

pub mod approx;
pub mod asym;
pub mod bie;
pub mod cavity;
pub mod error;
pub mod green;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};

//! Exact computations for twisted affine Kac-Moody algebras.

pub mod acceptance;
pub mod curve;
pub mod cyclo;
pub mod error;
pub mod gluing;
pub mod lie;
pub mod linalg;
pub mod loops;
pub mod oracle;
pub mod rep;
pub mod series;
pub mod sugawara;
pub mod verma;
pub mod twist;

pub use error::{Error, Result};

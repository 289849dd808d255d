//! Mixed f-divergences and mixed L_λ-affine surface areas of log-concave
//! functions on `R^d`, with numeric Legendre duals, Gaussian closed forms and
//! an executable catalog of the associated inequalities.

pub mod cli;
pub mod config;
pub mod conjugate;
pub mod divergence;
pub mod error;
pub mod function;
pub mod generator;
pub mod linalg;
pub mod oracle;
pub mod quadrature;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};

//! Numerical kernels: adaptive quadrature, scalar optimization/root
//! finding, and special functions.

pub mod brent;
pub mod quadrature;
pub mod special;

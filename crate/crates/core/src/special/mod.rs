//! Numerical support: gamma-family functions, Legendre functions on z >= 1,
//! and adaptive quadrature.

pub mod gamma;
pub mod legendre;
pub mod quad;

//! Numerical experiments built on `symavg-core`.

pub mod figure1;
pub mod mlp;
pub mod regression;

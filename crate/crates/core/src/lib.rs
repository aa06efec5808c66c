//! Skew tent maps, kneading theory and isentropes.

pub mod algebraic;
pub mod cli;
pub mod curves;
pub mod exec;
pub mod symbolic;
pub mod tentmap;
pub mod theta;

//! Exact second moments of cubic Dirichlet L-functions over `F_q(T)` for
//! `q = 2 mod 3`.

pub mod characters;
pub mod cli;
pub mod cyclo;
pub mod error;
pub mod field;
pub mod gauss;
pub mod lfun;
pub mod moments;
pub mod poly;
pub mod series;

pub use error::{Error, Result};

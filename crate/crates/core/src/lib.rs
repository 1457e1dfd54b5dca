pub mod acceptance;
pub mod algebra;
pub mod arith;
pub mod asymptotics;
pub mod error;
pub mod measures;
pub mod states;

pub use error::{Error, Result};

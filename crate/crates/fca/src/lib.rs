//! JSON formats and the command-line front end for `fca-core`.

pub mod cli;
pub mod json;
pub mod sample;

//! Library half of the experiment runner, kept separate from the binary
//! so integration tests can drive runs in-process and compare bytes.

pub mod config;
pub mod params;
pub mod runner;

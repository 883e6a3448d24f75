//! Library surface of the experiment tool, so integration tests can
//! drive the commands in-process.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod plot;
pub mod scenario;

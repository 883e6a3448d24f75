//! Desk-scale laboratory for the near-field (P2P) operator of
//! fast-multipole-style N-body codes: builds the spatial decomposition,
//! packs it into an indexing (SoA) and a redundant (AoS record) layout,
//! executes the pair kernel over logical threads while recording memory
//! traces, feeds the traces to a cache model, and evaluates an analytical
//! speedup model against the measurements.

pub mod cachesim;
pub mod domain;
pub mod error;
pub mod exec;
pub mod layouts;
pub mod model;

pub use error::{Error, Result};

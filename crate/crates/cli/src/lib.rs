//! Library surface of the experiment driver, shared by the `isocluster`
//! binary and the acceptance suite.

pub mod config;
pub mod runner;
pub mod summary;
pub mod svg;

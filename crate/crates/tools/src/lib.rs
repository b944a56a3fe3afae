//! Command-line front end and build pipeline for `texfm-core`.
//!
//! A manifest lists derivation steps (`afm2tfm`, `ew`, `compose`, ...) from
//! input files to output files. [`runner::run`] executes them in dependency
//! order, several at a time, and keeps every output in a content-addressed
//! [`cache::Cache`] keyed by the op, its settings and the digests of its
//! inputs.

pub mod cache;
pub mod cli;
pub mod manifest;
pub mod ops;
pub mod plan;
pub mod runner;

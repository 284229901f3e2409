//! Core of the holistic testing toolchain: the test-case model and its
//! validation, the classification taxonomy, mapping of sub-tests to research
//! infrastructures, built-in executors, and result combination.
//!
//! `no_std` with `alloc`; document IO lives in the `holotest` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
#[macro_use]
extern crate std;

pub mod combiner;
pub mod diag;
pub mod exec;
pub mod expr;
pub mod mapping;
pub mod model;
pub mod run;
pub mod scenario;
pub mod taxonomy;
pub mod validate;

pub use diag::{codes, Diagnostic, Failure, Severity};
pub use model::*;

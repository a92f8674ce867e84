//! Granular-ball borderline sampling toolkit.
//!
//! The library covers a labeled dataset with pure granular balls
//! ([`rdgbg`]), then reduces the dataset to the samples that sit on class
//! borders by sweeping ball centers along each feature axis ([`gbabs`]).
//! Around that core sit an experiment harness (synthetic data, label-noise
//! injection, a size-matched random-sampling baseline; [`harness`]),
//! built-in kNN and CART classifiers with repeated stratified
//! cross-validation ([`eval`]), CSV/JSON input and output ([`io`]), and a
//! command-line interface ([`cli`]).
//!
//! Everything randomized takes an explicit seeded stream ([`rng`]), and all
//! ordering ambiguities (distance ties, vote ties, equal-size groups) break
//! deterministically, so identical inputs reproduce identical outputs down
//! to the serialized byte.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod gbabs;
pub mod harness;
pub mod io;
pub mod rdgbg;
pub mod rng;

pub use error::{Error, Result};

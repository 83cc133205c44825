//! Core primitives for uplink ambient backscatter over LTE sounding reference
//! signals.
//!
//! A TAG switches its antenna between a reflective and a transparent state
//! once per SRS period, impressing a repetition-encoded Gold code on the
//! magnitude of the SRS seen by the base station. The base station averages
//! each SRS occurrence down to one magnitude sample, cleans the stream with a
//! hard threshold, a median filter and a standard-deviation filter, and
//! correlates the result against every candidate code.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration
//! parsing and the command line live in the `srsbs` crate.
//!
//! - [`srs`]: Zadoff-Chu pilot generation and resource-grid mapping.
//! - [`tag`]: m-sequences, the Gold code family, repetition encoding, OOK.
//! - [`channel`]: synthetic propagation with drift, noise and spikes.
//! - [`detector`]: averaging, filtering and Pearson correlation detection.
//! - [`harness`]: end-to-end experiments and metric counting.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod detector;
mod error;
pub mod harness;
pub mod srs;
pub mod tag;
pub mod timing;

pub use error::Error;

pub use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

//! Yield-curve forecasting core.
//!
//! Everything in this crate is pure computation over in-memory data and
//! builds without `std`: dense linear algebra and a simplex optimizer
//! ([`numerics`]), yield-curve containers ([`curve`]), functional bases
//! and penalized fits ([`basis`]), static Gaussian-process regression
//! ([`gp`]), the sequential dynamic GP filter ([`dynamic_gp`]), the VAR
//! and dynamic Nelson-Siegel comparators ([`ts_models`]) and the rolling
//! backtest harness ([`backtest`]).
//!
//! File formats, parallel execution and the command-line front end live in
//! the `yieldcast` crate.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod backtest;
pub mod basis;
pub mod curve;
pub mod dynamic_gp;
mod error;
pub mod gp;
pub mod numerics;
pub mod ts_models;

pub use chrono::NaiveDate;
pub use error::{Error, Result};

//! Core algorithms for estimating surface air-pollutant concentrations from
//! satellite column retrievals.
//!
//! The crate covers the whole numerical pipeline: swath-to-grid binning with
//! quality filtering ([`regrid`]), spatio-temporal joins of station, weather,
//! and land-cover data ([`join`]), feature-table assembly ([`dataset`]), a
//! from-scratch random forest regressor with impurity and permutation
//! importances ([`forest`]), the evaluation protocols and metrics ([`eval`]),
//! and grid-wide prediction aggregation ([`mapping`]).
//!
//! Everything here is pure and deterministic: all randomness flows from
//! explicit 64-bit seeds through [`rng`], so identical inputs produce
//! identical results regardless of thread count or platform. The crate is
//! `no_std` (with `alloc`); file formats, parallel drivers, and the command
//! line live in the companion `smog` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calendar;
pub mod dataset;
pub mod eval;
pub mod forest;
pub mod geo;
pub mod join;
pub mod mapping;
pub mod morton;
pub mod regrid;
pub mod rng;
pub mod wind;

pub use calendar::Timestamp;
pub use geo::{GeoPoint, PollutantKind, StationMeta, StationType};

//! Numerical toolkit for generalized principal frequencies `λ_{p,q}`,
//! `p`-capacities, Cheeger constants and punctured Poincaré constants of
//! planar (and one-dimensional) grid domains.
//!
//! The crate is organised in layers:
//!
//! * [`geometry`] rasterizes the set families used throughout (disks,
//!   annuli, strips, perforated squares, pepper windows) and measures them:
//!   inradius by an exact distance transform, topological order, projections.
//! * [`bounds`] evaluates every explicit constant and inequality bound in
//!   closed form.
//! * [`solvers`] computes the variational constants themselves on the grid.
//! * [`experiments`] composes the three into reproducible verification
//!   campaigns and asymptotic sweeps.
//! * [`cli`] is the batch front end used by the `pfreq` binary.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod solvers;

pub use error::{Error, Result};

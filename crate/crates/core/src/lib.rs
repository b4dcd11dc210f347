//! Boundary structures at infinity of model metric spaces and the asymptotics
//! of nonexpansive maps acting on them.
//!
//! The crate is organised in layers:
//!
//! * [`spaces`]: the catalog of model geometries with their distances,
//!   geodesics and extrinsic boundary charts.
//! * [`boundary`]: metric functionals, Busemann functions and horoballs.
//! * [`stars`]: halfspaces, stars, dual stars, star distance, faces and
//!   visibility, each decided with numeric witnesses.
//! * [`dynamics`]: nonexpansive self-maps, translation numbers,
//!   Denjoy–Wolff limits, spectral certificates and CAT(0) tracking.
//! * [`random`]: i.i.d. cocycles of nonexpansive maps and their escape rates.
//! * [`io`]: JSON/CSV/SVG surfaces used by the command line front end.
//! * [`acceptance`]: the executable acceptance criteria.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod boundary;
pub mod dynamics;
mod error;
pub mod io;
pub mod random;
pub mod spaces;
pub mod stars;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Absolute tolerance for equality checks unless an operation states otherwise.
pub const TOL: f64 = 1e-9;

/// Iteration stops once a point comes this close to the extrinsic boundary.
pub const BOUNDARY_GUARD: f64 = 1e-14;

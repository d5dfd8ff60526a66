//! Reachable sets and attraction sets for linear systems driven by
//! impulse-constrained controls.
//!
//! Controls are extended from step densities to finitely additive measures
//! of the form "step density plus finitely many one-sided Dirac atoms".
//! Everything that lives on the time axis (cells, partitions, breakpoints,
//! atom locations) is exact rational; function values and measure masses are
//! generic over [`Scalar`], either [`Rat`] or `f64`.

pub mod attainability;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod intervals;
pub mod lp;
pub mod measures;
pub mod piecewise;
pub mod scalar;

pub use error::{Error, Result};
pub use intervals::{Cell, Interval, Partition};
pub use measures::{FAMeasure, SideAtom};
pub use piecewise::{PiecewiseFn, Poly, Side};
pub use scalar::{Rat, Scalar};

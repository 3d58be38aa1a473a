//! Characteristic curves, seed curves and characteristic coordinates of
//! prescribed p-mean curvature fields in the plane.
//!
//! A [`FrameField`] supplies the unit normal `N`, its rotation `N_perp`,
//! `D = |grad u + F|`, the curvature datum `H = div N` and `rot F`. The
//! [`tracer`] integrates characteristics (integral curves of `N_perp`,
//! whose line curvature is `-H`) and seeds (integral curves of `N`);
//! [`charts`] builds local coordinates `(s, t)` from them; [`flux`] and
//! [`variational`] provide independent checks; [`suites`] bundles the
//! checks into [`VerificationReport`]s.
//!
//! ```
//! use charflow::{catalog, tracer, Point};
//! let radial = catalog::get("radial").unwrap();
//! let c = tracer::trace(
//!     &radial.frame,
//!     Point::new(1.0, 0.0),
//!     tracer::CurveKind::Characteristic,
//!     std::f64::consts::FRAC_PI_2,
//!     1e-3,
//!     &radial.trace_box,
//! )
//! .unwrap();
//! assert!(c.end().dist(Point::new(0.0, -1.0)) < 1e-8);
//! ```

pub mod catalog;
pub mod charts;
mod error;
pub mod fields;
pub mod flux;
pub mod funnel;
pub mod geometry;
pub mod picard;
pub mod quadrature;
pub mod report;
pub mod suites;
pub mod tracer;
pub mod variational;

pub use error::{Error, Result};
pub use fields::{FrameField, FrameSample, Scalar};
pub use geometry::{Point, Rect};
pub use report::{merge, Entry, Tolerances, VerificationReport};

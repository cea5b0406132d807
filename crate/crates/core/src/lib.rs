//! Geo-privacy (GP) and concentrated geo-privacy (CGP) mechanisms for tuples
//! of points.
//!
//! The crate is organised bottom-up:
//!
//! - [`noise`]: seedable samplers (Laplace, Gaussian, planar Laplace,
//!   generalized gamma) and closed-form tail/quantile functions.
//! - [`accounting`]: budget types, GP/CGP conversions, composition and an
//!   audit ledger.
//! - [`geometry`]: point tuples, tuple metrics and the Lipschitz functionals
//!   queried by the mechanisms.
//! - [`mechanisms`]: identity queries, the sparse vector technique, private
//!   (k-)nearest neighbours and the private convex hull.
//! - [`polygon`]: exact convex-polygon geometry for post-processing and
//!   utility measurement.
//! - [`dataset`]: taxi-trace ingestion, Mercator projection and sampling.
//! - [`statcheck`]: Monte Carlo and quadrature checks of the distributional
//!   facts the mechanisms rely on.
//!
//! Point indices are 1-based at every public boundary (see
//! [`geometry::PointId`]).

pub mod accounting;
pub mod dataset;
mod error;
pub mod geometry;
pub mod mechanisms;
pub mod noise;
pub mod polygon;
pub mod statcheck;

pub use error::{Error, Result};
pub use geometry::{Point2, PointId, PointTuple};
pub use noise::RandomStream;

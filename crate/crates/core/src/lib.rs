//! Numerical laboratory for inverse curvature flows dx/dt = F^{-p} nu of
//! closed star-shaped hypersurfaces in Euclidean space, represented as
//! radial graphs over the unit sphere.
//!
//! The crate provides sphere discretizations with covariant operators
//! ([`grid`]), the extrinsic geometry of radial graphs ([`geometry`]), the
//! admissible curvature-function family ([`curvature`]), closed-form
//! spherical solutions and barriers ([`spherical`]), explicit time
//! integration of the flow and of its rescaled form ([`flow`]), and
//! pass/fail monitors for the a-priori estimates ([`diagnostics`]).

pub mod curvature;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod serialize;
pub mod spherical;

pub use curvature::{Cone, CurvatureFunction, CurvatureKind};
pub use error::{Error, Result};
pub use flow::{estimate_blow_up, run, FlowConfig, FlowMode, Termination, Trajectory};
pub use geometry::{compute_shape, make_initial, GraphFunction, InitialShape, ShapeData};
pub use grid::{build_circle_grid, build_latlong_grid, DomainGrid};
pub use spherical::SphericalFlow;

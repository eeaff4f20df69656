//! Numerical laboratory for the first eigenvalue of the Robin Laplacian on
//! doubly connected planar domains and its comparison with a matched annulus.

pub mod contour;
pub mod distance;
pub mod error;
pub mod fem;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod parallels;
pub mod radial;
pub mod robin;
pub mod svg;

pub use error::{Result, RfkError};
pub use geometry::{DomainSpec, Point, Side, StarBoundary};
pub use radial::{lambda1_radial, RadialEigen, RadialOptions, RadialProblem};
pub use robin::{RobinPair, RobinParam};

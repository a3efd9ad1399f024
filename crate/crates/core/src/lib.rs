//! Uniformly discrete sets in R^n, their densities, the Marcin pseudo-distance
//! between packings, annulus splicing, probe-based metrics and saturation.

pub mod density;
pub mod error;
pub mod format;
pub mod marcin;
pub mod metrics;
pub mod saturate;
pub mod splice;
pub mod geom;
pub mod udset;

pub use error::{Error, Result};
pub use geom::{Annulus, Point, RotationMatrix, SpatialGrid};
pub use udset::{gen_lattice, gen_rsa, Lattice, RigidMotion, UdSet};

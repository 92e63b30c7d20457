//! Canonical smoothings of integer superharmonic functions on Z^2, and the
//! sandpile solitons, triads and nodes they produce.

pub mod error;
pub mod lattice;
pub mod oracle;
pub mod patterns;
pub mod plmin;
pub mod render;
pub mod sandpile;
pub mod smoothing;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use lattice::{IntegerField, Lattice, VertexId};
pub use plmin::{AffineForm, DirectionPair, PLMinFunction};

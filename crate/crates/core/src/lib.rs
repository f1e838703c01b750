//! Principal-curvature nets at the end points of smooth surfaces.
//!
//! The crate builds the end-point charts of a surface given by a polynomial
//! height jet, assembles the extended curvature-line equation, classifies the
//! end point and traces or renders the two principal foliations.

pub mod bde;
pub mod charts;
pub mod classify;
pub mod error;
pub mod export;
pub mod jetfile;
pub mod jets;
pub mod numeric;
pub mod oracle;
pub mod returnmap;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};

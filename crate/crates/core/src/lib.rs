//! Eigenspace anholonomy of periodically driven quantum systems.
//!
//! Floquet operators of a few model systems are diagonalized along closed
//! parameter cycles; the resulting eigenprojector frames are continued
//! along the cycle and the permutation they suffer (the monodromy) is
//! compared with the homotopy class of the cycle: its winding number
//! around the degeneracy, or the `Z_2` class of the director loop in the
//! real projective plane.

pub mod error;
pub mod geometry;
pub mod holonomy;
pub mod matrix;
pub mod models;
pub mod scenarios;

pub use error::{Error, Result};

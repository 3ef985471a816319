//! Quasi-static simulation of serially coupled bistable unit cells.
//!
//! A unit cell is a parallelogram four-bar mechanism: two blocks joined by a
//! pair of levers of length `r`, with a linear spring stretched between anchor
//! points `p` (inner block) and `q` (outer block). The lever angle is confined
//! to `[-theta_c, theta_c]` by hard stops; the two stop configurations are
//! *state 0* and *state 1*. Chaining two cells and driving the outermost block
//! with a single linear displacement yields programmable sequences of state
//! transitions, which the [`robot`] module maps onto walking gaits.
//!
//! Conventions used throughout:
//! - lengths and displacements in millimetres, angles in radians,
//!   stiffness in N/m, energies in joules, forces in newtons;
//! - energies combine SI quantities internally (mm converted at the point of
//!   use);
//! - `u` is the vertical displacement of the outermost block, zero in the
//!   (00) state.

pub mod chain;
pub mod error;
pub mod presets;
pub mod robot;
pub mod sequence;
mod solve;
pub mod unit;

pub use error::{ChainError, ModelError};

/// Millimetres to metres.
pub(crate) const MM: f64 = 1e-3;

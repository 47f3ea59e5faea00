//! Desk-scale laboratory for the cut-off soft-potential Boltzmann equation
//! on a periodic torus: exact-rational exponent algebra, phase-space grids and
//! mixed Lebesgue norms, the free-streaming group, collision quadrature,
//! Picard mild solutions and scattering maps.

pub mod collision;
pub mod exponents;
pub mod grid;
pub mod io;
pub mod scattering;
pub mod solver;
pub mod transport;

pub use collision::{collision_operator, gain_term, loss_term, CollisionKernel};
pub use exponents::{ExponentTriplet, Rat};
pub use grid::{DistributionFunction, PhaseGrid};
pub use transport::{adjoint_stream, free_stream, Interpolation, Transport};

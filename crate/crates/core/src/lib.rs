//! Numerics for multipeak solutions of the subcritical Yamabe equation on
//! products (M × X, g + ε²h): radial ground states, second-order correction
//! profiles, dimensional constants, curvature models and energy checks.

pub mod constants;
pub mod correction;
pub mod error;
pub mod geometry;
pub mod groundstate;
pub mod multipeak;
pub mod quadrature;
pub mod radial;

pub use error::{Error, Result};
pub use groundstate::{solve_ground_state, GroundState, IdentityReport, SolverConfig};
pub use radial::{RadialFunction, RadialGrid, Tail};

//! Precision-generic numerical substrate: scalars, grids, stencils, time
//! stepping, quadrature and eigenvalue bisection.

pub mod dd;
pub mod eigen;
pub mod grid;
pub mod ode;
pub mod quadrature;
pub mod real;
pub mod rk4;
pub mod stencil;

pub use dd::DoubleDouble;
pub use eigen::{tridiagonal_eigenvalues, SymBand, SymTridiagonal};
pub use grid::GridSpec;
pub use ode::{ode_profile_integrate, OdeProfile};
pub use quadrature::{inner_product, quadrature};
pub use real::{Precision, Real};
pub use rk4::{rk4_step, OdeSystem, Rk4, StepStatus};
pub use stencil::{first_derivative, second_derivative};

//! Numerical kernels shared by the solvers: adaptive quadrature with
//! endpoint-singularity handling, bracketing bisection, derivative-free
//! minimization, an embedded Runge-Kutta integrator and log-gamma/Beta.

mod ode;
mod optimize;
mod quadrature;
mod roots;
mod special;

pub use ode::{Dopri5, OdeOutcome, Sample, StepControl};
pub(crate) use ode::hermite;
pub use optimize::{minimize_scalar, nelder_mead, NelderMeadResult};
pub use quadrature::{integrate, QuadratureSpec, Quadrature};
pub use roots::bisect;
pub use special::{ln_gamma, log_beta};

//! Minimal travelling-front speeds of the doubly nonlinear reaction-diffusion
//! equation
//!
//! ```text
//! u_t = ( |(u^m)_x|^{p-2} (u^m)_x )_x + f(u)
//! ```
//!
//! computed along independent routes: phase-plane shooting ([`phaseplane`]),
//! a variational characterization evaluated on trial functions
//! ([`variational`]), closed-form two-sided bounds ([`bounds`]) and direct
//! simulation of the PDE ([`pdesim`]).

pub mod bounds;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod pdesim;
pub mod phaseplane;
pub mod reaction;
pub mod variational;

pub use bounds::{EstimateKind, Method, SpeedEstimate};
pub use error::{Error, Result};
pub use phaseplane::{PhaseTrajectory, Termination};
pub use reaction::{MediaParams, ReactionTerm};
pub use variational::TrialFunction;

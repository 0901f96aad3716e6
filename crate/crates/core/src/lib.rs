//! Numerical laboratory for the radial defocusing semilinear wave equation
//! `u_tt - Δu = -|u|^{p-1} u` in three space dimensions, `3 < p < 5`.
//!
//! Radial solutions are evolved in the reduced variable `w = r·u`, which
//! satisfies `w_tt - w_rr = -|w/r|^{p-1} (w/r) r` on the half-line with
//! `w(0, t) = 0`. On top of the solver sit the quantities that control
//! scattering: the conserved energy, the κ-weighted energy outside the
//! light cone, the localized Morawetz space-time integrals, the pointwise
//! radial decay bound, the global `L^{2(p-1)}` space-time norm, the conformal
//! charge, and free-wave profile extraction.

pub mod data;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod ledger;
pub mod linear_prop;
pub mod params;
pub mod scatter;
pub mod state;
pub mod stepper;

pub use data::{sample_data, DataFamily};
pub use error::{CoreError, Result};
pub use functionals::{
    conformal_charge, energy, exterior_energy, pointwise_decay_ratio, sobolev_norm_sq, weighted_energy,
    ChargePair, EnergySplit, PointwiseDecay,
};
pub use grid::{quad, Grid};
pub use ledger::{decay_fit, l2p2_report, morawetz_report, DecayFit, L2p2Report, Ledger, MorawetzCheck, MorawetzTerms};
pub use linear_prop::{free_evolve, linear_energy, DAlembert, FreeEvolver, FreePropagator};
pub use params::{ModelParams, WeightKind};
pub use scatter::{scatter_extract, ScatterRecord};
pub use state::RadialState;
pub use stepper::{evolve, nonlinear_force, step, BoundaryPolicy, DiscreteFreePropagator, Observer, StepperConfig};

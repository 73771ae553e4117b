//! Pure dephasing of a qubit coupled to spectrally diffusing two-level systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`ensemble`] samples quantum-TLS ensembles and holds the qubit/TLS parameter types.
//! * [`diffusion`] generates spectral-diffusion realizations (microscopic telegraph bath and
//!   a fast Lorentzian Ornstein-Uhlenbeck engine) and evaluates the diffusion densities.
//! * [`dynamics`] evolves the qubit amplitude, either with the time-local Markov rate or with
//!   the full single-excitation equations.
//! * [`analytics`] holds the closed-form correlators and asymptotic dephasing laws.
//! * [`harness`] runs Monte Carlo experiments and turns them into dephasing curves.
//!
//! All frequencies are angular (rad/s) and all times are in seconds, with ħ = 1.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod bessel;
pub mod diffusion;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod units;

pub use analytics::{Classification, LawParams, RegimeReport};
pub use diffusion::{EngineKind, EngineConfig, ShiftPath, ShiftTrajectory, ThermalBathParams, WidthParams};
pub use dynamics::{AmplitudeRecord, SolverConfig, SolverMode};
pub use ensemble::{EnsembleSpec, QubitParams, TlsParams};
pub use error::{Error, Result};
pub use harness::{DephasingCurve, GridSpec, RunConfig};

pub use num_complex::Complex64;

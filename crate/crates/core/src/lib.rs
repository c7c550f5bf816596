//! Sparse adaptive filtering under impulsive noise.
//!
//! The crate bundles the pieces needed to study maximum-correntropy (MCC)
//! adaptive filters with sparsity-inducing zero attractors:
//!
//! - [`kernels`]: Gaussian kernel, sample correntropy and the
//!   correntropy-induced metric (CIM) used as a smooth ℓ₀ surrogate.
//! - [`filters`]: LMS, ZALMS, RZALMS, LMP, MCC, ZAMCC, RZAMCC and CIMMCC as
//!   one state machine with interchangeable error and attractor terms.
//! - [`noise`]: seeded mixed-Gaussian and alpha-stable samplers.
//! - [`channels`]: time-varying sparse channels, echo paths and input
//!   processes.
//! - [`experiments`]: Monte Carlo trials, MSD aggregation and the
//!   mean-square step-size bound.

pub mod channels;
pub mod error;
pub mod experiments;
pub mod filters;
pub mod kernels;
pub mod noise;
pub mod rng;

pub use channels::{ChannelSchedule, InputKind, InputProcess, RegressorStream, TapWeights};
pub use error::{Divergence, Error, Result};
pub use experiments::{AggregateResult, ExperimentConfig, FilterAggregate, MsdScale, TrialOutcome};
pub use filters::{Algorithm, FilterParams, FilterSpec, FilterState};
pub use kernels::KernelWidth;
pub use noise::{AlphaStableParams, MixedGaussianParams, NoiseModel};

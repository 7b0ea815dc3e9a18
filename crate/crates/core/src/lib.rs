//! Lane-change decisions of cars following heavy vehicles, modelled as a
//! drift-diffusion (evidence accumulation) process.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`trajectory`] turns raw per-vehicle trajectories into heavy-vehicle /
//!    car following episodes with per-step gaps and adjacent-lane variables.
//! 2. [`cluster`] reduces each episode to a scalar feature position and splits
//!    the episodes with an exact one-dimensional 2-means, isolating the
//!    episodes whose drivers show lane-change intention.
//! 3. [`ddm`] evaluates first-passage densities of the evidence process
//!    through a constant threshold with a kernel (Volterra) recursion.
//! 4. [`estimation`] maximises the censored log-likelihood and reports
//!    standard errors.
//!
//! [`simulate`] provides the Monte-Carlo forward model used for validation
//! and synthetic parameter-recovery studies.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod ddm;
pub mod error;
pub mod estimation;
pub mod numeric;
pub mod optim;
pub mod rng;
pub mod simulate;
pub mod trajectory;

pub use cluster::{ClusterResult, FeatureWeights, PairFeatures};
pub use ddm::{DdmParams, EnvStep, FirstPassageResult};
pub use error::{Error, Result};
pub use estimation::{Convention, FitOptions, FitResult};
pub use trajectory::{Direction, Outcome, PairStep, TrajectoryPair, TrajectorySample};

//! Preparation/measurement configuration ensembles for qubits.
//!
//! - [`bloch`]: exact qubit states, Born probabilities and the Bell kernel.
//! - [`ensemble`]: configuration distributions of fixed arrangements and
//!   seeded sampling of individual runs.
//! - [`maxent`]: maximum-relative-entropy estimation of a qubit state from
//!   an observed `⟨σ_z⟩`, with density-matrix reconstruction.
//! - [`interferometer`]: single-photon beamsplitter and delayed-choice
//!   experiments.
//!
//! All sampling is keyed by `(seed, run_index)`, so results are
//! reproducible and independent of thread count.

pub mod bloch;
pub mod ensemble;
pub mod error;
pub mod grid;
pub mod interferometer;
pub mod maxent;
pub mod rng;
pub mod roots;
pub mod summation;

pub use bloch::{BlochDirection, DensityMatrix, PureQubitState, Sign, TwoQubitState};
pub use ensemble::{Arrangement, ConfigurationDistribution, Preparation};
pub use error::{Error, Result};
pub use grid::SphericalGrid;
pub use interferometer::{Layout, OpticalSetup, Placement};
pub use maxent::{JointDensity, LagrangeSolution, MarginalDensity};
pub use rng::Execution;

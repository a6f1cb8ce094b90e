//! Monte Carlo laboratory for directed last passage percolation on Z² with
//! i.i.d. Exp(1) vertex weights.
//!
//! * [`field`]: seeded, counter-based weight environments.
//! * [`passage`]: passage times by anti-diagonal dynamic programming
//!   (full grid, wavefront, checkpointed, strip-constrained, point-to-line).
//! * [`geodesic`]: maximizing paths and their geometry.
//! * [`stats`]: mergeable moment accumulators, log-log fits, KS tests.
//! * [`experiments`]: the scaling experiments and their pass criteria.

pub mod error;
pub mod experiments;
pub mod field;
pub mod geodesic;
pub mod oracle;
pub mod passage;
pub mod stats;
mod wavefront;

pub use error::{LppError, Result};
pub use experiments::{ExperimentConfig, ExperimentKind, ExperimentReport, SampleTable};
pub use field::{Environment, LatticePoint, Mirrored, WeightField, WeightTable};
pub use geodesic::{DecompositionSample, Geodesic};
pub use passage::{Orientation, PassageSurface, Profile, StripRegion};
pub use stats::{Estimate, ExponentFit, LogLogPoint, MomentAccumulator};

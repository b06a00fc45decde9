//! Genealogies of interacting-particle populations under resampling, and
//! their convergence to the Kingman coalescent.
//!
//! The crate is organised bottom-up:
//!
//! * [`partition`]: set partitions of `{1..n}` and merge profiles.
//! * [`kingman`]: the Kingman n-coalescent and its reference laws.
//! * [`particle`]: offspring counts, resampling schemes and weight models.
//! * [`genealogy`]: merger rates, the random clock and lineage tracing.
//! * [`exactprob`]: exact one-generation transition probabilities and the
//!   coupled `(Z, S)` chain.
//! * [`bounds`]: numerical checks of the inequalities used in the
//!   convergence argument.
//! * [`diagnostics`]: distributional tests against the Kingman limit.
//! * [`simulate`]: one replicate, from population dynamics to a traced
//!   genealogy.

pub mod bounds;
pub mod diagnostics;
pub mod exactprob;
pub mod genealogy;
pub mod kingman;
pub mod numeric;
pub mod particle;
pub mod partition;
pub mod simulate;

pub use genealogy::{CoalescenceClock, GenealogyPath, PartitionPath};
pub use kingman::{CoalescentPath, ReferenceLaw};
pub use particle::{OffspringCounts, ParentAssignment, ResamplingScheme, WeightModel, WeightState};
pub use partition::{MergeProfile, Partition};

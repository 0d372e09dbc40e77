//! Aggregation of likelihood judgments.
//!
//! Sources state lower bounds or exact values for the likelihood of each
//! agenda issue; rules combine a profile of such sets into a collective
//! crisp judgment set that respects the propositional constraints.

pub mod aggregate;
pub mod cli;
pub mod formula;
pub mod frame;
pub mod likelihood;
pub mod lpfeas;
pub mod properties;

pub use frame::{CrispJudgmentSet, Frame, Implicant, Literal, Profile};
pub use likelihood::{LikelihoodJudgment, LikelihoodJudgmentSet};

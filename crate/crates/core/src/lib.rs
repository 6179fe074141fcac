//! Learning the link probabilities of binary causal trees when only the
//! leaves are observed.
//!
//! * [`tree_model`]: trees, parameters, joint distribution, enumeration
//!   oracles and hidden-label relabelling.
//! * [`inference`]: exact posterior beliefs by message passing.
//! * [`sampler`]: seeded ancestral sampling.
//! * [`learner`]: the incremental unsupervised estimator.
//! * [`evaluation`]: supervised baseline, error metrics and convergence
//!   comparison.
//! * [`generate`]: random test trees.
//! * [`io`]: file formats.

pub mod error;
pub mod evaluation;
pub mod generate;
pub mod inference;
pub mod io;
pub mod learner;
pub mod sampler;
pub mod tree_model;

pub use error::{Error, Result};
pub use evaluation::{
    compare_convergence, parameter_error, supervised_estimates, CompareConfig, ComparisonTable,
    ErrorReport, InitMode,
};
pub use inference::{
    brute_force_posterior, edge_conditionals, log_likelihood, propagate, BeliefState,
    EdgeConditionals,
};
pub use learner::{
    Initializer, LearnerOptions, LearnerState, LearningTrace, RunningAverage, StopCriterion,
    WeightingMode,
};
pub use sampler::{draw_full, draw_leaf, SampleRng};
pub use tree_model::{
    exact_marginal, joint_probability, leaf_distribution, relabel_hidden, validate, CausalTree,
    FullAssignment, LeafSample, LinkParams, NodeId, TreeStructure,
};

//! Belief-state dynamic program for the prophet's Hide/Reveal decision.
//!
//! The prophet's belief is an [`InformationSet`] over [`Node`]s. Each day it
//! either reveals, after which play is closed-form, or hides, after which one
//! vote, check and kill happen and the belief is updated by Bayes' rule on
//! what it observed.

mod belief;
mod export;
mod node;
mod solver;
mod transition;

use std::path::PathBuf;

use thiserror::Error;

use crate::exact::{ExactError, Probability};

pub use belief::BeliefTracker;
pub use export::{export_policy, import_policy, policy_from_json, policy_to_json};
pub use node::{InformationSet, Node, NodeStatus, WeightedNode};
pub use solver::{
    evaluate_policy, expand, first_night_expansion, fixed_round_value, reveal_value, solve, solve_with, Action,
    Branch, Decision, Expansion, Policy, Solver, TieBreak,
};
pub use transition::{
    first_night, partition_sum, transition_table, transition_table_in, CheckClass, KillClass,
    OutcomeClass, TableMode, Transition, VoteClass,
};

#[derive(Debug, Error)]
pub enum PbeError {
    #[error("invalid node {0}")]
    InvalidNode(Node),
    #[error("nodes {0} and {1} disagree on the number of players alive")]
    InconsistentSet(Node, Node),
    #[error("an information set needs at least one node")]
    EmptySet,
    #[error("weights sum to {0}, not 1")]
    NotNormalized(Probability),
    #[error("negative weight {1} on node {0}")]
    NegativeWeight(Node, Probability),
    #[error("transition probabilities from {node} sum to {sum}, not 1")]
    Partition { node: Node, sum: Probability },
    #[error("recursion exceeded depth {depth}")]
    NonTermination { depth: u32 },
    #[error("a game needs at least one villager and one werewolf, got {villagers} and {wolves}")]
    InvalidConfig { villagers: u32, wolves: u32 },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed policy document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed policy document: {0}")]
    Format(String),
}

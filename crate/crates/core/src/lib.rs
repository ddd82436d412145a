//! Action-dependent multi-agent policy iteration on tabular Markov games
//! whose rewards and transitions decompose over a coordination graph.
//!
//! Agents are 0-based throughout the API. Documents, error messages and
//! the command line use 1-based labels.

pub mod builder;
pub mod dp;
pub mod error;
pub mod experiment;
pub mod game;
pub mod graph;
pub mod joint;
pub mod mpi;
pub mod optimality;
pub mod policy;
pub mod value;

pub use error::{Error, Result};
pub use game::{builtin_instance, MarkovGame, PolymatrixGame};
pub use graph::{ActionDependencyGraph, AgentSet, CoordinationGraph};
pub use mpi::{ad_mpi, AdMpiTrace, MpiStatus};
pub use policy::ActionDependentPolicy;
pub use value::{QTable, ValueTable};

//! Chain-graph probabilistic models: structure, decomposition, Markov
//! queries, symbolic factorization, plates, a small model language and a
//! brute-force numeric checker.

pub mod cli;
pub mod decompose;
pub mod error;
pub mod factorize;
pub mod graph;
pub mod lang;
pub mod markov;
pub mod oracle;
pub mod plates;

pub use error::{GraphError, OracleError, PlateError};
pub use graph::{ChainGraph, ChainGraphBuilder, Edge, EdgeKind, NodeAttr, NodeId, NodeKind, NodeSet};

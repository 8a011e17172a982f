use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node names must be non-empty")]
    EmptyName,
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node id out of range")]
    UnknownNodeId,
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("more than one edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("node `{0}` has domain size 0")]
    ZeroDomain(String),
    #[error("operation requires a purely directed graph")]
    NotDirected,
    #[error("operation requires a purely undirected graph")]
    NotUndirected,
    #[error("not a chain graph: {0}")]
    Invalid(String),
    #[error("component subgraphs form a cycle: {}", .0.join(" -> "))]
    CyclicMasterGraph(Vec<String>),
    #[error("deterministic node `{0}` has an undirected edge")]
    DeterministicUndirected(String),
    #[error("invalid query: {0}")]
    Query(String),
    #[error("graph has {nodes} nodes, above the clique-enumeration bound {bound}")]
    TooLarge { nodes: usize, bound: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlateError {
    #[error("duplicate plate `{0}`")]
    DuplicatePlate(String),
    #[error("unknown plate index {0}")]
    UnknownPlate(usize),
    #[error("plate nesting is not a forest at `{0}`")]
    NestingCycle(String),
    #[error("node `{node}` is in plate `{inner}` but not in its enclosing plate `{outer}`")]
    InconsistentMembership { node: String, inner: String, outer: String },
    #[error("undirected edge {0} -- {1} crosses a plate boundary")]
    UndirectedCrossing(String, String),
    #[error("arc {0} -> {1} leaves a plate (arcs may only cross into plates)")]
    ArcLeavesPlate(String, String),
    #[error("no binding for cardinality symbol `{0}`")]
    Unbound(String),
    #[error("cardinality of `{0}` is zero")]
    ZeroCardinality(String),
    #[error("binding for `{symbol}` lists {got} cardinalities but plate `{parent}` has {expected} instances")]
    RaggedMismatch {
        symbol: String,
        parent: String,
        expected: usize,
        got: usize,
    },
    #[error("per-index cardinalities for `{0}` require a nested plate")]
    RaggedTopLevel(String),
    #[error("ground node name `{0}` collides with a declared node")]
    NameCollision(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("state space of {0} configurations exceeds the 2^20 bound")]
    StateSpace(u128),
    #[error("graph has {0} nodes, above the 8-node bound for the Markov sweep")]
    TooManyNodes(usize),
    #[error("the joint has zero total mass")]
    ZeroMass,
    #[error("term {0} has no table")]
    Unassigned(usize),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("shared terms {0} and {1} have different signatures")]
    SignatureMismatch(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

//! Mixed directed/undirected graph model.
//!
//! A [`ChainGraph`] holds attributed nodes and at most one edge per node
//! pair. Nodes are addressed by [`NodeId`], a dense index that also fixes the
//! canonical node order (declaration order) used for every tie-break in the
//! crate. Structural well-formedness (unique names, no self-loops, no
//! parallel edges) is enforced by [`ChainGraphBuilder`]; the chain-graph
//! condition itself is checked by [`validate_chain_graph`], so invalid mixed
//! graphs can still be represented and diagnosed.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::GraphError;

/// Dense node index. Ordering follows declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Self {
        NodeId(index as u32)
    }
}

pub type NodeSet = BTreeSet<NodeId>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum NodeKind {
    #[default]
    Stochastic,
    Deterministic,
}

/// Default domain size consumed by the numeric oracle.
pub const DEFAULT_DOMAIN_SIZE: u32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct NodeAttr {
    pub kind: NodeKind,
    /// Shaded node: its value is given.
    pub observed: bool,
    pub domain_size: Option<u32>,
}

impl NodeAttr {
    pub fn stochastic() -> Self {
        Self::default()
    }

    pub fn deterministic() -> Self {
        NodeAttr {
            kind: NodeKind::Deterministic,
            ..Self::default()
        }
    }

    pub fn observed(mut self, observed: bool) -> Self {
        self.observed = observed;
        self
    }

    pub fn with_domain(mut self, size: u32) -> Self {
        self.domain_size = Some(size);
        self
    }

    pub fn is_deterministic(&self) -> bool {
        self.kind == NodeKind::Deterministic
    }

    pub fn domain(&self) -> u32 {
        self.domain_size.unwrap_or(DEFAULT_DOMAIN_SIZE)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub attr: NodeAttr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Directed,
    Undirected,
}

/// An edge. For directed edges `from -> to`; for undirected edges the order
/// only records how the edge was written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub kind: EdgeKind,
    pub from: NodeId,
    pub to: NodeId,
}

impl Edge {
    pub fn directed(from: NodeId, to: NodeId) -> Self {
        Edge {
            kind: EdgeKind::Directed,
            from,
            to,
        }
    }

    pub fn undirected(from: NodeId, to: NodeId) -> Self {
        Edge {
            kind: EdgeKind::Undirected,
            from,
            to,
        }
    }

    pub fn is_directed(&self) -> bool {
        self.kind == EdgeKind::Directed
    }

    fn pair(&self) -> (NodeId, NodeId) {
        unordered(self.from, self.to)
    }
}

pub(crate) fn unordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Incremental constructor for [`ChainGraph`].
#[derive(Clone, Debug, Default)]
pub struct ChainGraphBuilder {
    nodes: Vec<Node>,
    index: HashMap<String, NodeId>,
    edges: Vec<Edge>,
    pairs: HashSet<(NodeId, NodeId)>,
}

impl ChainGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str, attr: NodeAttr) -> Result<NodeId, GraphError> {
        if name.is_empty() {
            return Err(GraphError::EmptyName);
        }
        if self.index.contains_key(name) {
            return Err(GraphError::DuplicateNode(name.to_string()));
        }
        if attr.domain_size == Some(0) {
            return Err(GraphError::ZeroDomain(name.to_string()));
        }
        let id = NodeId::from_index(self.nodes.len());
        self.nodes.push(Node {
            name: name.to_string(),
            attr,
        });
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<(), GraphError> {
        let n = self.nodes.len();
        if edge.from.index() >= n || edge.to.index() >= n {
            return Err(GraphError::UnknownNodeId);
        }
        if edge.from == edge.to {
            return Err(GraphError::SelfLoop(self.nodes[edge.from.index()].name.clone()));
        }
        if !self.pairs.insert(edge.pair()) {
            return Err(GraphError::DuplicateEdge(
                self.nodes[edge.from.index()].name.clone(),
                self.nodes[edge.to.index()].name.clone(),
            ));
        }
        self.edges.push(edge);
        Ok(())
    }

    /// Adds an edge by endpoint names.
    pub fn add_edge_by_name(&mut self, kind: EdgeKind, from: &str, to: &str) -> Result<(), GraphError> {
        let f = self
            .node_id(from)
            .ok_or_else(|| GraphError::UnknownNode(from.to_string()))?;
        let t = self
            .node_id(to)
            .ok_or_else(|| GraphError::UnknownNode(to.to_string()))?;
        self.add_edge(Edge { kind, from: f, to: t })
    }

    pub fn has_pair(&self, a: NodeId, b: NodeId) -> bool {
        self.pairs.contains(&unordered(a, b))
    }

    pub fn build(self) -> ChainGraph {
        let n = self.nodes.len();
        let mut parents = vec![NodeSet::new(); n];
        let mut children = vec![NodeSet::new(); n];
        let mut neighbors = vec![NodeSet::new(); n];
        for e in &self.edges {
            match e.kind {
                EdgeKind::Directed => {
                    parents[e.to.index()].insert(e.from);
                    children[e.from.index()].insert(e.to);
                }
                EdgeKind::Undirected => {
                    neighbors[e.to.index()].insert(e.from);
                    neighbors[e.from.index()].insert(e.to);
                }
            }
        }
        ChainGraph {
            nodes: self.nodes,
            index: self.index,
            edges: self.edges,
            pairs: self.pairs,
            parents,
            children,
            neighbors,
        }
    }
}

/// Immutable mixed graph. See the module docs.
#[derive(Clone, Debug, Default)]
pub struct ChainGraph {
    nodes: Vec<Node>,
    index: HashMap<String, NodeId>,
    edges: Vec<Edge>,
    pairs: HashSet<(NodeId, NodeId)>,
    parents: Vec<NodeSet>,
    children: Vec<NodeSet>,
    neighbors: Vec<NodeSet>,
}

impl ChainGraph {
    pub fn builder() -> ChainGraphBuilder {
        ChainGraphBuilder::new()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Builder pre-loaded with this graph's nodes and edges.
    pub fn to_builder(&self) -> ChainGraphBuilder {
        ChainGraphBuilder {
            nodes: self.nodes.clone(),
            index: self.index.clone(),
            edges: self.edges.clone(),
            pairs: self.pairs.clone(),
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId::from_index)
    }

    pub fn all_nodes(&self) -> NodeSet {
        self.ids().collect()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].name
    }

    pub fn attr(&self, id: NodeId) -> &NodeAttr {
        &self.nodes[id.index()].attr
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<NodeId, GraphError> {
        self.node_id(name)
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    /// Resolves a list of names into a node set.
    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<NodeSet, GraphError> {
        names.iter().map(|n| self.require(n.as_ref())).collect()
    }

    pub fn names_of<'a, 's>(&'a self, set: impl IntoIterator<Item = &'s NodeId>) -> Vec<&'a str> {
        set.into_iter().map(|&id| self.name(id)).collect()
    }

    /// Edges in declaration order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.pairs.contains(&unordered(a, b))
    }

    pub fn has_directed(&self, from: NodeId, to: NodeId) -> bool {
        self.children[from.index()].contains(&to)
    }

    pub fn is_directed(&self) -> bool {
        self.edges.iter().all(Edge::is_directed)
    }

    pub fn is_undirected(&self) -> bool {
        self.edges.iter().all(|e| !e.is_directed())
    }

    pub fn parents_of(&self, id: NodeId) -> &NodeSet {
        &self.parents[id.index()]
    }

    pub fn children_of(&self, id: NodeId) -> &NodeSet {
        &self.children[id.index()]
    }

    pub fn neighbors_of(&self, id: NodeId) -> &NodeSet {
        &self.neighbors[id.index()]
    }

    fn check(&self, id: NodeId) -> Result<(), GraphError> {
        if id.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownNodeId)
        }
    }

    fn check_set(&self, set: &NodeSet) -> Result<(), GraphError> {
        set.iter().try_for_each(|&id| self.check(id))
    }

    pub fn observed(&self) -> NodeSet {
        self.ids().filter(|&id| self.attr(id).observed).collect()
    }

    pub fn deterministic(&self) -> NodeSet {
        self.ids().filter(|&id| self.attr(id).is_deterministic()).collect()
    }

    /// Rebuilds the graph keeping only `keep` nodes (in canonical order) and
    /// the edges accepted by `edge_filter`. Returns the old-to-new id map.
    pub(crate) fn filtered(
        &self,
        keep: &NodeSet,
        mut edge_filter: impl FnMut(&Edge) -> bool,
    ) -> (ChainGraph, HashMap<NodeId, NodeId>) {
        let mut b = ChainGraphBuilder::new();
        let mut map = HashMap::new();
        for &id in keep {
            let node = self.node(id);
            let nid = b.add_node(&node.name, node.attr).expect("names unique in source");
            map.insert(id, nid);
        }
        for e in &self.edges {
            if let (Some(&f), Some(&t)) = (map.get(&e.from), map.get(&e.to)) {
                if edge_filter(e) {
                    b.add_edge(Edge {
                        kind: e.kind,
                        from: f,
                        to: t,
                    })
                    .expect("edges unique in source");
                }
            }
        }
        (b.build(), map)
    }

    /// Name-preserving structural equality: same node names, attributes and
    /// edge sets (directed edges by orientation, undirected edges unordered).
    pub fn same_structure(&self, other: &ChainGraph) -> bool {
        if self.len() != other.len() || self.edges.len() != other.edges.len() {
            return false;
        }
        for node in &self.nodes {
            match other.node_id(&node.name) {
                Some(o) if other.attr(o) == &node.attr => {}
                _ => return false,
            }
        }
        let key = |g: &ChainGraph, e: &Edge| -> (EdgeKind, String, String) {
            let (a, b) = (g.name(e.from).to_string(), g.name(e.to).to_string());
            match e.kind {
                EdgeKind::Directed => (e.kind, a, b),
                EdgeKind::Undirected if a <= b => (e.kind, a, b),
                EdgeKind::Undirected => (e.kind, b, a),
            }
        };
        let mine: HashSet<_> = self.edges.iter().map(|e| key(self, e)).collect();
        other.edges.iter().all(|e| mine.contains(&key(other, e)))
    }
}

/// Directed-edge sources into `x`.
pub fn parents(g: &ChainGraph, x: NodeId) -> Result<NodeSet, GraphError> {
    g.check(x)?;
    Ok(g.parents_of(x).clone())
}

/// Directed-edge targets out of `x`.
pub fn children(g: &ChainGraph, x: NodeId) -> Result<NodeSet, GraphError> {
    g.check(x)?;
    Ok(g.children_of(x).clone())
}

/// Undirected-edge partners of `x`.
pub fn neighbors(g: &ChainGraph, x: NodeId) -> Result<NodeSet, GraphError> {
    g.check(x)?;
    Ok(g.neighbors_of(x).clone())
}

/// Union of member parents, minus the set itself.
pub fn parents_of_set(g: &ChainGraph, a: &NodeSet) -> Result<NodeSet, GraphError> {
    g.check_set(a)?;
    Ok(a.iter()
        .flat_map(|&x| g.parents_of(x).iter().copied())
        .filter(|p| !a.contains(p))
        .collect())
}

fn closure(g: &ChainGraph, a: &NodeSet, with_neighbors: bool) -> NodeSet {
    let mut out = a.clone();
    let mut queue: VecDeque<NodeId> = a.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        let nbrs = if with_neighbors { Some(g.neighbors_of(x)) } else { None };
        for &y in g.parents_of(x).iter().chain(nbrs.into_iter().flatten()) {
            if out.insert(y) {
                queue.push_back(y);
            }
        }
    }
    out
}

/// Least fixpoint of `B -> B ∪ parents(B)`. Requires a purely directed graph.
pub fn ancestors_directed(g: &ChainGraph, a: &NodeSet) -> Result<NodeSet, GraphError> {
    g.check_set(a)?;
    if !g.is_directed() {
        return Err(GraphError::NotDirected);
    }
    Ok(closure(g, a, false))
}

/// Least fixpoint of `B -> B ∪ neighbors(B) ∪ parents(B)`.
pub fn ancestors_chain(g: &ChainGraph, a: &NodeSet) -> Result<NodeSet, GraphError> {
    g.check_set(a)?;
    Ok(closure(g, a, true))
}

/// Non-deterministic nodes reachable from `x` along directed paths whose
/// intermediate nodes are all deterministic.
pub fn non_deterministic_children(g: &ChainGraph, x: NodeId) -> Result<NodeSet, GraphError> {
    g.check(x)?;
    let mut out = NodeSet::new();
    let mut seen = NodeSet::new();
    let mut stack: Vec<NodeId> = g.children_of(x).iter().copied().collect();
    while let Some(y) = stack.pop() {
        if !seen.insert(y) {
            continue;
        }
        if g.attr(y).is_deterministic() {
            stack.extend(g.children_of(y).iter().copied());
        } else {
            out.insert(y);
        }
    }
    Ok(out)
}

/// One problem found by [`validate_chain_graph`]. Node names are stored so
/// the issue can be displayed without the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationIssue {
    /// A directed edge whose endpoints share a chain component; the witness
    /// cycle starts with the edge and returns along undirected edges.
    IntraComponentArc {
        from: String,
        to: String,
        cycle: Vec<String>,
    },
    /// A directed cycle between chain components, expanded to a node-level
    /// semi-directed cycle.
    SemiDirectedCycle {
        cycle: Vec<String>,
    },
    DeterministicWithoutParents {
        node: String,
    },
}

impl ValidationIssue {
    /// Node names involved, in witness order.
    pub fn nodes(&self) -> Vec<&str> {
        match self {
            ValidationIssue::IntraComponentArc { cycle, .. } | ValidationIssue::SemiDirectedCycle { cycle } => {
                cycle.iter().map(String::as_str).collect()
            }
            ValidationIssue::DeterministicWithoutParents { node } => vec![node.as_str()],
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::IntraComponentArc { from, to, cycle } => write!(
                f,
                "semi-directed cycle {}: arc {from} -> {to} joins nodes of one chain component",
                cycle.join(", ")
            ),
            ValidationIssue::SemiDirectedCycle { cycle } => {
                write!(f, "semi-directed cycle {}", cycle.join(", "))
            }
            ValidationIssue::DeterministicWithoutParents { node } => {
                write!(f, "deterministic node {node} has no parents")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationWarning {
    DeterministicObserved { node: String },
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::DeterministicObserved { node } => {
                write!(f, "deterministic node {node} is also observed")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<ValidationIssue>,
    pub warnings: Vec<ValidationWarning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    /// True when no semi-directed cycle was reported (other issues aside).
    pub fn is_acyclic(&self) -> bool {
        !self.errors.iter().any(|e| {
            matches!(
                e,
                ValidationIssue::IntraComponentArc { .. } | ValidationIssue::SemiDirectedCycle { .. }
            )
        })
    }
}

/// Connected components over undirected edges, as a component index per node
/// plus the member lists (components numbered by least member).
pub(crate) fn undirected_components(g: &ChainGraph) -> (Vec<usize>, Vec<NodeSet>) {
    let n = g.len();
    let mut comp = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    for start in g.ids() {
        if comp[start.index()] != usize::MAX {
            continue;
        }
        let c = blocks.len();
        let mut block = NodeSet::new();
        let mut stack = vec![start];
        comp[start.index()] = c;
        while let Some(x) = stack.pop() {
            block.insert(x);
            for &y in g.neighbors_of(x) {
                if comp[y.index()] == usize::MAX {
                    comp[y.index()] = c;
                    stack.push(y);
                }
            }
        }
        blocks.push(block);
    }
    (comp, blocks)
}

/// Shortest undirected path from `from` to `to` (inclusive), within one chain
/// component.
fn undirected_path(g: &ChainGraph, from: NodeId, to: NodeId) -> Vec<NodeId> {
    let mut prev: HashMap<NodeId, NodeId> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = NodeSet::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        for &y in g.neighbors_of(x) {
            if seen.insert(y) {
                prev.insert(y, x);
                queue.push_back(y);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[&cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// Checks the chain-graph condition (no semi-directed cycle) through the
/// chain-component quotient, plus the deterministic-node parent rule.
pub fn validate_chain_graph(g: &ChainGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (comp, blocks) = undirected_components(g);
    let names = |path: &[NodeId]| path.iter().map(|&x| g.name(x).to_string()).collect::<Vec<_>>();

    // Quotient arcs, first witnessing edge kept per component pair.
    let mut quotient: Vec<Vec<(usize, NodeId, NodeId)>> = vec![Vec::new(); blocks.len()];
    let mut seen_pairs = HashSet::new();
    for e in g.edges().iter().filter(|e| e.is_directed()) {
        let (cf, ct) = (comp[e.from.index()], comp[e.to.index()]);
        if cf == ct {
            let mut cycle = vec![e.from];
            cycle.extend(
                undirected_path(g, e.to, e.from)
                    .into_iter()
                    .take_while(|&x| x != e.from),
            );
            report.errors.push(ValidationIssue::IntraComponentArc {
                from: g.name(e.from).to_string(),
                to: g.name(e.to).to_string(),
                cycle: names(&cycle),
            });
        } else if seen_pairs.insert((cf, ct)) {
            quotient[cf].push((ct, e.from, e.to));
        }
    }

    for cycle in quotient_cycles(&quotient) {
        // cycle: list of (component, arc into next component)
        let mut path = Vec::new();
        let k = cycle.len();
        for i in 0..k {
            let (_, _, into) = cycle[i];
            let (_, out_of, _) = cycle[(i + 1) % k];
            // into lands in component i+1; walk inside it to the next arc source
            let walk = undirected_path(g, into, out_of);
            path.extend(walk);
        }
        // rotate so the cycle starts at the source of the first arc
        let first = cycle[0].1;
        if let Some(pos) = path.iter().position(|&x| x == first) {
            path.rotate_left(pos);
        }
        report
            .errors
            .push(ValidationIssue::SemiDirectedCycle { cycle: names(&path) });
    }

    for id in g.ids() {
        let attr = g.attr(id);
        if attr.is_deterministic() {
            if g.parents_of(id).is_empty() {
                report.errors.push(ValidationIssue::DeterministicWithoutParents {
                    node: g.name(id).to_string(),
                });
            }
            if attr.observed {
                report.warnings.push(ValidationWarning::DeterministicObserved {
                    node: g.name(id).to_string(),
                });
            }
        }
    }
    report
}

/// Finds directed cycles in the component quotient. Each strongly connected
/// component of size > 1 contributes one witness cycle, returned as the arc
/// sequence `(source component, arc source, arc target)`.
fn quotient_cycles(adj: &[Vec<(usize, NodeId, NodeId)>]) -> Vec<Vec<(usize, NodeId, NodeId)>> {
    let n = adj.len();
    let sccs = tarjan(n, |v| adj[v].iter().map(|a| a.0).collect());
    let mut out = Vec::new();
    for scc in sccs.into_iter().filter(|s| s.len() > 1) {
        let members: HashSet<usize> = scc.iter().copied().collect();
        let start = *scc.iter().min().unwrap();
        // BFS inside the SCC from start back to start
        let mut prev: HashMap<usize, (usize, NodeId, NodeId)> = HashMap::new();
        let mut queue = VecDeque::from([start]);
        let mut found = None;
        'bfs: while let Some(v) = queue.pop_front() {
            for &(w, f, t) in &adj[v] {
                if !members.contains(&w) {
                    continue;
                }
                if w == start {
                    found = Some((v, f, t));
                    break 'bfs;
                }
                if let std::collections::hash_map::Entry::Vacant(slot) = prev.entry(w) {
                    slot.insert((v, f, t));
                    queue.push_back(w);
                }
            }
        }
        let (mut v, f, t) = found.expect("scc of size > 1 has a cycle through every member");
        let mut arcs = vec![(v, f, t)];
        while v != start {
            let (u, f, t) = prev[&v];
            arcs.push((u, f, t));
            v = u;
        }
        arcs.reverse();
        out.push(arcs);
    }
    out
}

pub(crate) fn tarjan(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> Vec<Vec<usize>> {
    struct State {
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(v: usize, s: &mut State, succ: &dyn Fn(usize) -> Vec<usize>) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for w in succ(v) {
            match s.index[w] {
                None => {
                    visit(w, s, succ);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut scc = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack[w] = false;
                scc.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(scc);
        }
    }
    let mut s = State {
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(v, &mut s, &succ);
        }
    }
    s.out
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn builder_rejects_malformed_structure() {
        let mut b = ChainGraphBuilder::new();
        let a = b.add_node("a", NodeAttr::stochastic()).unwrap();
        let c = b.add_node("c", NodeAttr::stochastic()).unwrap();
        assert!(matches!(
            b.add_node("a", NodeAttr::stochastic()),
            Err(GraphError::DuplicateNode(_))
        ));
        assert!(matches!(b.add_edge(Edge::directed(a, a)), Err(GraphError::SelfLoop(_))));
        b.add_edge(Edge::directed(a, c)).unwrap();
        assert!(matches!(
            b.add_edge(Edge::undirected(c, a)),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(
            b.add_node("z", NodeAttr::stochastic().with_domain(0)),
            Err(GraphError::ZeroDomain(_))
        ));
    }

    #[test]
    fn semi_directed_cycle_is_rejected() {
        let g = graph(&[], &["a -> b", "b -- c", "c -> a"]);
        let r = validate_chain_graph(&g);
        assert!(!r.is_valid());
        let names: BTreeSet<&str> = r.errors[0].nodes().into_iter().collect();
        assert_eq!(names, BTreeSet::from(["a", "b", "c"]));
        assert!(r.errors[0].to_string().contains("semi-directed cycle"));
    }

    #[test]
    fn intra_component_arc_is_rejected() {
        let g = graph(&[], &["a -- b", "b -- c", "a -> c"]);
        let r = validate_chain_graph(&g);
        assert_eq!(r.errors.len(), 1);
        match &r.errors[0] {
            ValidationIssue::IntraComponentArc { from, to, cycle } => {
                assert_eq!((from.as_str(), to.as_str()), ("a", "c"));
                assert_eq!(cycle.first().map(String::as_str), Some("a"));
                assert_eq!(cycle.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fig2_and_empty_are_valid() {
        assert!(validate_chain_graph(&fig2()).is_valid());
        assert!(validate_chain_graph(&ChainGraph::default()).is_valid());
    }

    #[test]
    fn directed_cycle_witness_follows_arcs() {
        let g = graph(&[], &["a -> b", "b -> c", "c -> a", "x -> y"]);
        let r = validate_chain_graph(&g);
        assert_eq!(r.errors.len(), 1);
        let cyc = r.errors[0].nodes();
        assert_eq!(cyc.len(), 3);
        for i in 0..3 {
            let (f, t) = (g.require(cyc[i]).unwrap(), g.require(cyc[(i + 1) % 3]).unwrap());
            assert!(g.has_directed(f, t));
        }
    }

    #[test]
    fn deterministic_rules() {
        let mut b = ChainGraphBuilder::new();
        b.add_node("d", NodeAttr::deterministic().observed(true)).unwrap();
        let r = validate_chain_graph(&b.build());
        assert_eq!(
            r.errors,
            vec![ValidationIssue::DeterministicWithoutParents { node: "d".into() }]
        );
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn fig2_neighborhoods() {
        let g = fig2();
        let id = |n| g.require(n).unwrap();
        assert_eq!(parents(&g, id("d")).unwrap(), set(&g, &["a", "c"]));
        assert_eq!(parents(&g, id("e")).unwrap(), set(&g, &["c"]));
        assert_eq!(neighbors(&g, id("e")).unwrap(), set(&g, &["f", "g"]));
        assert!(neighbors(&g, id("c")).unwrap().is_empty());
        assert_eq!(
            parents_of_set(&g, &set(&g, &["e", "f", "g", "h"])).unwrap(),
            set(&g, &["b", "c"])
        );
        assert!(parents_of_set(&g, &NodeSet::new()).unwrap().is_empty());
        assert!(parents(&g, NodeId(99)).is_err());
    }

    #[test]
    fn isolated_node_has_no_relatives() {
        let g = graph(&["x"], &[]);
        let x = g.require("x").unwrap();
        assert!(parents(&g, x).unwrap().is_empty());
        assert!(neighbors(&g, x).unwrap().is_empty());
        assert!(non_deterministic_children(&g, x).unwrap().is_empty());
    }

    #[test]
    fn fig3_parents_of_set() {
        let g = graph(
            &["a", "b", "c", "d", "e", "f"],
            &["a -- b", "a -> c", "b -> d", "c -- d", "c -> e", "d -> f", "e -> f"],
        );
        assert_eq!(parents_of_set(&g, &set(&g, &["c", "d"])).unwrap(), set(&g, &["a", "b"]));
    }

    #[test]
    fn ancestors() {
        let g = graph(&[], &["x -> y", "y -> z"]);
        assert_eq!(ancestors_directed(&g, &set(&g, &["z"])).unwrap(), g.all_nodes());
        assert_eq!(ancestors_directed(&g, &set(&g, &["x"])).unwrap(), set(&g, &["x"]));
        let f = fig2();
        assert!(matches!(
            ancestors_directed(&f, &set(&f, &["e"])),
            Err(GraphError::NotDirected)
        ));
        assert_eq!(
            ancestors_chain(&f, &set(&f, &["e"])).unwrap(),
            set(&f, &["a", "b", "c", "e", "f", "g", "h"])
        );
        assert_eq!(
            ancestors_chain(&f, &set(&f, &["c"])).unwrap(),
            set(&f, &["a", "b", "c"])
        );
        assert_eq!(ancestors_chain(&f, &f.all_nodes()).unwrap(), f.all_nodes());
    }

    #[test]
    fn non_deterministic_children_skip_deterministic_chain() {
        let mut b = ChainGraphBuilder::new();
        b.add_node("x", NodeAttr::stochastic()).unwrap();
        b.add_node("d", NodeAttr::deterministic()).unwrap();
        b.add_node("d2", NodeAttr::deterministic()).unwrap();
        b.add_node("y", NodeAttr::stochastic()).unwrap();
        b.add_node("w", NodeAttr::stochastic()).unwrap();
        for (f, t) in [("x", "d"), ("d", "d2"), ("d2", "y"), ("y", "w")] {
            b.add_edge_by_name(EdgeKind::Directed, f, t).unwrap();
        }
        let g = b.build();
        assert_eq!(
            non_deterministic_children(&g, g.require("x").unwrap()).unwrap(),
            set(&g, &["y"])
        );
    }

    #[test]
    fn same_structure_ignores_undirected_orientation() {
        let g1 = graph(&["a", "b"], &["a -- b"]);
        let g2 = graph(&["b", "a"], &["b -- a"]);
        let g3 = graph(&["a", "b"], &["b -> a"]);
        assert!(g1.same_structure(&g2));
        assert!(!g1.same_structure(&g3));
    }
}

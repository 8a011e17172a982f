//! Chain components, component subgraphs, conditional subgraphs and the
//! master graph.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::GraphError;
use crate::graph::{
    parents_of_set, undirected_components, validate_chain_graph, ChainGraph, ChainGraphBuilder, Edge, EdgeKind, NodeId,
    NodeSet,
};

/// Disjoint node sets in canonical order (least member first).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<NodeSet>,
}

impl Partition {
    pub fn new(mut blocks: Vec<NodeSet>) -> Self {
        blocks.retain(|b| !b.is_empty());
        blocks.sort_by_key(|b| *b.iter().next().unwrap());
        Partition { blocks }
    }

    pub fn blocks(&self) -> &[NodeSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block index per node id (`usize::MAX` for nodes outside every block).
    pub fn block_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (i, b) in self.blocks.iter().enumerate() {
            for x in b {
                out[x.index()] = i;
            }
        }
        out
    }

    /// Names per block, e.g. `[["a","b"],["c"]]`.
    pub fn names<'a>(&self, g: &'a ChainGraph) -> Vec<Vec<&'a str>> {
        self.blocks.iter().map(|b| g.names_of(b)).collect()
    }
}

pub fn chain_components(g: &ChainGraph) -> Partition {
    Partition::new(undirected_components(g).1)
}

/// Non-singleton chain components stay as they are; singleton
/// components merge along directed arcs (connectivity ignores direction).
pub fn component_subgraphs(g: &ChainGraph) -> Partition {
    let chain = chain_components(g);
    let singles: NodeSet = chain
        .blocks()
        .iter()
        .filter(|b| b.len() == 1)
        .flat_map(|b| b.iter().copied())
        .collect();
    let mut blocks: Vec<NodeSet> = chain.blocks().iter().filter(|b| b.len() > 1).cloned().collect();

    let mut seen = NodeSet::new();
    for &start in &singles {
        if !seen.insert(start) {
            continue;
        }
        let mut block = NodeSet::from([start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in g.parents_of(x).iter().chain(g.children_of(x)) {
                if singles.contains(&y) && seen.insert(y) {
                    block.insert(y);
                    stack.push(y);
                }
            }
        }
        blocks.push(block);
    }
    Partition::new(blocks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Directed,
    Undirected,
}

/// The graph induced on `U ∪ parents(U)` with the parents shaded and
/// completed into a clique.
#[derive(Clone, Debug)]
pub struct ConditionalSubgraph {
    /// Local graph; its node ids are indices into `origin`.
    pub graph: ChainGraph,
    /// Local id -> id in the source graph.
    pub origin: Vec<NodeId>,
    /// `U`, in source-graph ids.
    pub own_nodes: NodeSet,
    /// `parents(U)`, in source-graph ids.
    pub parent_nodes: NodeSet,
    pub flavor: Flavor,
    /// Number of trailing edges of `graph` added by the parent completion.
    pub completion_edges: usize,
}

impl ConditionalSubgraph {
    pub fn local(&self, original: NodeId) -> Option<NodeId> {
        self.origin.binary_search(&original).ok().map(NodeId::from_index)
    }

    pub fn original(&self, local: NodeId) -> NodeId {
        self.origin[local.index()]
    }

    pub fn local_set(&self, set: &NodeSet) -> NodeSet {
        set.iter().filter_map(|&x| self.local(x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasterGraph {
    /// Component subgraphs in topological order (ties: least member).
    pub nodes: Vec<NodeSet>,
    /// Arcs as index pairs into `nodes`, sorted.
    pub edges: Vec<(usize, usize)>,
}

fn ensure_valid(g: &ChainGraph) -> Result<(), GraphError> {
    let report = validate_chain_graph(g);
    match report
        .errors
        .iter()
        .find(|e| !matches!(e, crate::graph::ValidationIssue::DeterministicWithoutParents { .. }))
    {
        Some(issue) => Err(GraphError::Invalid(issue.to_string())),
        None => Ok(()),
    }
}

/// Component subgraphs ordered along the master graph. When the master graph
/// has a cycle, the least remaining block is emitted to break it and the
/// returned flag is false.
fn ordered_subgraphs(g: &ChainGraph) -> (Vec<NodeSet>, Vec<(usize, usize)>, bool) {
    let part = component_subgraphs(g);
    let block = part.block_of(g.len());
    let k = part.len();
    let mut arcs = BTreeSet::new();
    for e in g.edges().iter().filter(|e| e.is_directed()) {
        let (a, b) = (block[e.from.index()], block[e.to.index()]);
        if a != b {
            arcs.insert((a, b));
        }
    }
    let mut indeg = vec![0usize; k];
    for &(_, b) in arcs.iter() {
        indeg[b] += 1;
    }
    let mut order = Vec::with_capacity(k);
    let mut done = vec![false; k];
    let mut acyclic = true;
    while order.len() < k {
        // blocks are already sorted by least member, so the first ready index wins ties
        let next = (0..k).find(|&i| !done[i] && indeg[i] == 0).unwrap_or_else(|| {
            acyclic = false;
            (0..k).find(|&i| !done[i]).unwrap()
        });
        done[next] = true;
        order.push(next);
        for &(a, b) in arcs.iter() {
            if a == next && !done[b] {
                indeg[b] -= 1;
            }
        }
    }
    let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let nodes = order.iter().map(|&i| part.blocks()[i].clone()).collect();
    let mut edges: Vec<(usize, usize)> = arcs.iter().map(|&(a, b)| (pos[&a], pos[&b])).collect();
    edges.sort();
    (nodes, edges, acyclic)
}

/// Master graph over component subgraphs. Fails when the component
/// subgraphs are linked in a cycle, which can happen even for a valid chain
/// graph when a directed block both feeds and depends on an undirected one.
pub fn master_graph(g: &ChainGraph) -> Result<MasterGraph, GraphError> {
    ensure_valid(g)?;
    let (nodes, edges, acyclic) = ordered_subgraphs(g);
    if !acyclic {
        let label = |b: &NodeSet| format!("{{{}}}", g.names_of(b).join(","));
        let witness = cycle_witness(&nodes, &edges)
            .iter()
            .map(|&i| label(&nodes[i]))
            .collect();
        return Err(GraphError::CyclicMasterGraph(witness));
    }
    Ok(MasterGraph { nodes, edges })
}

fn cycle_witness(nodes: &[NodeSet], edges: &[(usize, usize)]) -> Vec<usize> {
    let sccs = crate::graph::tarjan(nodes.len(), |v| {
        edges.iter().filter(|e| e.0 == v).map(|e| e.1).collect()
    });
    let mut scc = sccs.into_iter().find(|s| s.len() > 1).unwrap_or_default();
    scc.sort();
    scc
}

/// One conditional subgraph per component subgraph, in master-graph order.
pub fn conditional_subgraphs(g: &ChainGraph) -> Result<Vec<ConditionalSubgraph>, GraphError> {
    ensure_valid(g)?;
    let (blocks, _, _) = ordered_subgraphs(g);
    blocks.iter().map(|u| conditional_subgraph(g, u)).collect()
}

pub(crate) fn conditional_subgraph(g: &ChainGraph, own: &NodeSet) -> Result<ConditionalSubgraph, GraphError> {
    let parents = parents_of_set(g, own)?;
    let all: NodeSet = own.union(&parents).copied().collect();
    let flavor = if own.iter().all(|&x| g.neighbors_of(x).is_empty()) {
        Flavor::Directed
    } else {
        Flavor::Undirected
    };
    let origin: Vec<NodeId> = all.iter().copied().collect();
    let local: BTreeMap<NodeId, NodeId> = origin
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, NodeId::from_index(i)))
        .collect();

    let mut b = ChainGraphBuilder::new();
    for &x in &origin {
        let node = g.node(x);
        let mut attr = node.attr;
        if parents.contains(&x) {
            attr.observed = true;
        }
        b.add_node(&node.name, attr)?;
    }

    let induced: Vec<Edge> = g
        .edges()
        .iter()
        .filter(|e| all.contains(&e.from) && all.contains(&e.to))
        .map(|e| Edge {
            kind: e.kind,
            from: local[&e.from],
            to: local[&e.to],
        })
        .collect();
    let local_parents: Vec<NodeId> = parents.iter().map(|p| local[p]).collect();

    let mut completion = 0;
    match flavor {
        Flavor::Undirected => {
            for e in &induced {
                b.add_edge(Edge::undirected(e.from, e.to))?;
            }
            for (i, &p) in local_parents.iter().enumerate() {
                for &q in &local_parents[i + 1..] {
                    if !b.has_pair(p, q) {
                        b.add_edge(Edge::undirected(p, q))?;
                        completion += 1;
                    }
                }
            }
        }
        Flavor::Directed => {
            let rank = topo_rank(origin.len(), &induced);
            let orient = |x: NodeId, y: NodeId| {
                if rank[x.index()] <= rank[y.index()] {
                    Edge::directed(x, y)
                } else {
                    Edge::directed(y, x)
                }
            };
            for e in &induced {
                match e.kind {
                    EdgeKind::Directed => b.add_edge(*e)?,
                    EdgeKind::Undirected => b.add_edge(orient(e.from, e.to))?,
                }
            }
            for (i, &p) in local_parents.iter().enumerate() {
                for &q in &local_parents[i + 1..] {
                    if !b.has_pair(p, q) {
                        b.add_edge(orient(p, q))?;
                        completion += 1;
                    }
                }
            }
        }
    }

    Ok(ConditionalSubgraph {
        graph: b.build(),
        origin,
        own_nodes: own.clone(),
        parent_nodes: parents,
        flavor,
        completion_edges: completion,
    })
}

/// Topological rank over the directed edges; ties broken by id.
fn topo_rank(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut indeg = vec![0usize; n];
    for e in edges.iter().filter(|e| e.is_directed()) {
        indeg[e.to.index()] += 1;
    }
    let mut rank = vec![usize::MAX; n];
    for r in 0..n {
        let next = (0..n)
            .find(|&i| rank[i] == usize::MAX && indeg[i] == 0)
            .or_else(|| (0..n).find(|&i| rank[i] == usize::MAX))
            .unwrap();
        rank[next] = r;
        for e in edges.iter().filter(|e| e.is_directed() && e.from.index() == next) {
            indeg[e.to.index()] = indeg[e.to.index()].saturating_sub(1);
        }
    }
    rank
}

/// Topological order of the directed edges of `g` restricted to `set`; ties
/// by canonical order.
pub(crate) fn topological_order(g: &ChainGraph, set: &NodeSet) -> Vec<NodeId> {
    let mut indeg: BTreeMap<NodeId, usize> = set.iter().map(|&x| (x, 0)).collect();
    for &x in set {
        for c in g.children_of(x) {
            if let Some(d) = indeg.get_mut(c) {
                *d += 1;
            }
        }
    }
    let mut out = Vec::with_capacity(set.len());
    while !indeg.is_empty() {
        let next = indeg
            .iter()
            .find(|(_, &d)| d == 0)
            .map(|(&x, _)| x)
            .unwrap_or_else(|| *indeg.keys().next().unwrap());
        indeg.remove(&next);
        for c in g.children_of(next) {
            if let Some(d) = indeg.get_mut(c) {
                *d = d.saturating_sub(1);
            }
        }
        out.push(next);
    }
    out
}

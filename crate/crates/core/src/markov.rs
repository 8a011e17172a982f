//! Moralization, maximal cliques, separation and conditional-independence
//! queries, plus the conditional-network simplifications for directed and
//! undirected graphs.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::decompose::chain_components;
use crate::error::GraphError;
use crate::graph::{ancestors_chain, ancestors_directed, parents_of_set, ChainGraph, NodeId, NodeSet};

/// Simple undirected graph over a subset of a source graph's node ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: BTreeMap<NodeId, NodeSet>,
}

impl UndirectedGraph {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        UndirectedGraph {
            adj: nodes.into_iter().map(|x| (x, NodeSet::new())).collect(),
        }
    }

    /// Nodes `0..n` with the given edges; handy for tests and tools.
    pub fn with_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new((0..n).map(NodeId::from_index));
        for &(a, b) in edges {
            g.add_edge(NodeId::from_index(a), NodeId::from_index(b));
        }
        g
    }

    /// Undirected skeleton of `g` restricted to `nodes`.
    pub fn skeleton(g: &ChainGraph, nodes: &NodeSet) -> Self {
        let mut u = Self::new(nodes.iter().copied());
        for e in g.edges() {
            if nodes.contains(&e.from) && nodes.contains(&e.to) {
                u.add_edge(e.from, e.to);
            }
        }
        u
    }

    /// Adds `a -- b`; self-loops are ignored and both endpoints are added
    /// as nodes if missing.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) {
        if a == b {
            return;
        }
        self.adj.entry(a).or_default().insert(b);
        self.adj.entry(b).or_default().insert(a);
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adj.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn nodes(&self) -> NodeSet {
        self.adj.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn contains(&self, x: NodeId) -> bool {
        self.adj.contains_key(&x)
    }

    pub fn neighbors(&self, x: NodeId) -> &NodeSet {
        static EMPTY: NodeSet = NodeSet::new();
        self.adj.get(&x).unwrap_or(&EMPTY)
    }

    /// Edges as `(smaller, larger)` pairs, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.adj
            .iter()
            .flat_map(|(&a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    fn complete(&mut self, set: &NodeSet) {
        let v: Vec<NodeId> = set.iter().copied().collect();
        for (i, &a) in v.iter().enumerate() {
            for &b in &v[i + 1..] {
                self.add_edge(a, b);
            }
        }
    }
}

/// Marries co-parents of every node and drops directions.
pub fn moralize_directed(g: &ChainGraph) -> Result<UndirectedGraph, GraphError> {
    if !g.is_directed() {
        return Err(GraphError::NotDirected);
    }
    let all = g.all_nodes();
    let mut m = UndirectedGraph::skeleton(g, &all);
    for x in g.ids() {
        m.complete(g.parents_of(x));
    }
    Ok(m)
}

/// Joins every two nodes having children in a common chain component and
/// drops directions.
pub fn moralize_chain(g: &ChainGraph) -> UndirectedGraph {
    moralize_within(g, &g.all_nodes())
}

/// Moral graph of the subgraph induced by `nodes`. Chain components of the
/// induced graph are the intersections of `nodes` with those of `g`.
pub(crate) fn moralize_within(g: &ChainGraph, nodes: &NodeSet) -> UndirectedGraph {
    let mut m = UndirectedGraph::skeleton(g, nodes);
    for block in chain_components(g).blocks() {
        let within: NodeSet = block.intersection(nodes).copied().collect();
        if within.is_empty() {
            continue;
        }
        let mut pa = parents_of_set(g, &within).expect("ids from g");
        pa.retain(|p| nodes.contains(p));
        m.complete(&pa);
    }
    m
}

/// Maximal cliques in canonical order: by least member, then lexicographic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliqueSet {
    cliques: Vec<NodeSet>,
}

impl CliqueSet {
    fn new(mut cliques: Vec<NodeSet>) -> Self {
        cliques.sort_by(|a, b| a.iter().cmp(b.iter()));
        CliqueSet { cliques }
    }

    pub fn cliques(&self) -> &[NodeSet] {
        &self.cliques
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn into_vec(self) -> Vec<NodeSet> {
        self.cliques
    }
}

/// Default node bound for clique enumeration.
pub const DEFAULT_CLIQUE_BOUND: usize = 64;

pub fn max_cliques(g: &UndirectedGraph) -> Result<CliqueSet, GraphError> {
    max_cliques_bounded(g, DEFAULT_CLIQUE_BOUND)
}

/// Bron–Kerbosch with Tomita pivoting. Refuses graphs above `bound` nodes.
pub fn max_cliques_bounded(g: &UndirectedGraph, bound: usize) -> Result<CliqueSet, GraphError> {
    if g.len() > bound {
        return Err(GraphError::TooLarge { nodes: g.len(), bound });
    }
    let mut out = Vec::new();
    bron_kerbosch(g, NodeSet::new(), g.nodes(), NodeSet::new(), &mut out);
    Ok(CliqueSet::new(out))
}

fn bron_kerbosch(g: &UndirectedGraph, r: NodeSet, mut p: NodeSet, mut x: NodeSet, out: &mut Vec<NodeSet>) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r);
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| (g.neighbors(u).intersection(&p).count(), std::cmp::Reverse(u)))
        .unwrap();
    let candidates: Vec<NodeId> = p.difference(g.neighbors(pivot)).copied().collect();
    for v in candidates {
        let nv = g.neighbors(v);
        let mut r2 = r.clone();
        r2.insert(v);
        bron_kerbosch(
            g,
            r2,
            p.intersection(nv).copied().collect(),
            x.intersection(nv).copied().collect(),
            out,
        );
        p.remove(&v);
        x.insert(v);
    }
}

/// Conditional-independence query `a ⟂ b | s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CiQuery {
    pub a: NodeSet,
    pub b: NodeSet,
    pub s: NodeSet,
}

impl CiQuery {
    pub fn new(a: NodeSet, b: NodeSet, s: NodeSet) -> Result<Self, GraphError> {
        if a.is_empty() || b.is_empty() {
            return Err(GraphError::Query("both sides of the query must be non-empty".into()));
        }
        if !a.is_disjoint(&b) || !a.is_disjoint(&s) || !b.is_disjoint(&s) {
            return Err(GraphError::Query("query sets must be pairwise disjoint".into()));
        }
        Ok(CiQuery { a, b, s })
    }

    /// Parses `A _||_ B | S` where each side is a comma-separated node list
    /// and `| S` is optional. Whitespace is ignored.
    pub fn parse(g: &ChainGraph, text: &str) -> Result<Self, GraphError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (lhs, rest) = compact
            .split_once("_||_")
            .ok_or_else(|| GraphError::Query(format!("missing `_||_` in `{text}`")))?;
        let (rhs, given) = match rest.split_once('|') {
            Some((r, s)) => (r, Some(s)),
            None => (rest, None),
        };
        let list = |part: &str, allow_empty: bool| -> Result<NodeSet, GraphError> {
            if part.is_empty() {
                return if allow_empty {
                    Ok(NodeSet::new())
                } else {
                    Err(GraphError::Query(format!("empty node list in `{text}`")))
                };
            }
            part.split(',')
                .map(|name| {
                    if name.is_empty() {
                        Err(GraphError::Query(format!("empty node name in `{text}`")))
                    } else {
                        g.require(name)
                    }
                })
                .collect()
        };
        CiQuery::new(list(lhs, false)?, list(rhs, false)?, list(given.unwrap_or(""), true)?)
    }

    pub fn display<'a>(&'a self, g: &'a ChainGraph) -> impl fmt::Display + 'a {
        struct D<'a>(&'a CiQuery, &'a ChainGraph);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let n = |s: &NodeSet| self.1.names_of(s).join(",");
                write!(f, "{} _||_ {}", n(&self.0.a), n(&self.0.b))?;
                if !self.0.s.is_empty() {
                    write!(f, " | {}", n(&self.0.s))?;
                }
                Ok(())
            }
        }
        D(self, g)
    }

    fn all(&self) -> NodeSet {
        self.a.iter().chain(&self.b).chain(&self.s).copied().collect()
    }
}

/// True iff every path from `a` to `b` passes through `s`.
pub fn separates(g: &UndirectedGraph, q: &CiQuery) -> bool {
    let mut seen: NodeSet = q.a.iter().copied().filter(|x| !q.s.contains(x)).collect();
    let mut queue: VecDeque<NodeId> = seen.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        if q.b.contains(&x) {
            return false;
        }
        for &y in g.neighbors(x) {
            if !q.s.contains(&y) && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    true
}

fn check_query(g: &ChainGraph, q: &CiQuery) -> Result<(), GraphError> {
    if q.all().iter().any(|x| x.index() >= g.len()) {
        return Err(GraphError::UnknownNodeId);
    }
    CiQuery::new(q.a.clone(), q.b.clone(), q.s.clone()).map(|_| ())
}

/// Global Markov query: separation in the moral graph of the ancestral set
/// of `a ∪ b ∪ s`.
pub fn implies_ci(g: &ChainGraph, q: &CiQuery) -> Result<bool, GraphError> {
    check_query(g, q)?;
    let anc = ancestors_chain(g, &q.all())?;
    Ok(separates(&moralize_within(g, &anc), q))
}

/// The directed-network form of the query: ancestors by parents only, the
/// ancestral subgraph rebuilt as its own graph and moralized by common
/// children. Gives the same answers as [`implies_ci`] on directed graphs.
pub fn implies_ci_directed(g: &ChainGraph, q: &CiQuery) -> Result<bool, GraphError> {
    check_query(g, q)?;
    let anc = ancestors_directed(g, &q.all())?;
    let (sub, map) = g.filtered(&anc, |_| true);
    let moral = moralize_directed(&sub)?;
    let remap = |s: &NodeSet| s.iter().map(|x| map[x]).collect::<NodeSet>();
    let q2 = CiQuery {
        a: remap(&q.a),
        b: remap(&q.b),
        s: remap(&q.s),
    };
    Ok(separates(&moral, &q2))
}

/// Deletes all arcs into observed nodes whose parents are all observed,
/// iterated to a fixpoint.
pub fn simplify_conditional_directed(g: &ChainGraph) -> Result<ChainGraph, GraphError> {
    if !g.is_directed() {
        return Err(GraphError::NotDirected);
    }
    let observed = g.observed();
    // Cutting arcs never changes which nodes are observed, so one pass
    // already reaches the fixpoint.
    let cut: NodeSet = observed
        .iter()
        .copied()
        .filter(|&x| g.parents_of(x).iter().all(|p| observed.contains(p)))
        .collect();
    Ok(g.filtered(&g.all_nodes(), |e| !cut.contains(&e.to)).0)
}

/// Deletes, in one simultaneous pass against the original adjacency, each
/// edge between two observed nodes whose common neighbors are all observed.
pub fn simplify_conditional_undirected(g: &ChainGraph) -> Result<ChainGraph, GraphError> {
    if !g.is_undirected() {
        return Err(GraphError::NotUndirected);
    }
    let observed = g.observed();
    let removable = |a: NodeId, b: NodeId| {
        observed.contains(&a)
            && observed.contains(&b)
            && g.neighbors_of(a)
                .intersection(g.neighbors_of(b))
                .all(|c| observed.contains(c))
    };
    Ok(g.filtered(&g.all_nodes(), |e| !removable(e.from, e.to)).0)
}

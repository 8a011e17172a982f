use crate::error::GraphError;
use crate::graph::{non_deterministic_children, ChainGraph, Edge, EdgeKind, NodeSet};

/// Removes deterministic nodes, first adding an arc from every surviving
/// node to each of its non-deterministic children so the rewritten graph
/// describes the same model on the remaining nodes.
///
/// Deterministic nodes with undirected edges are rejected.
pub fn eliminate_deterministic(g: &ChainGraph) -> Result<ChainGraph, GraphError> {
    let det = g.deterministic();
    if let Some(&d) = det.iter().find(|&&d| !g.neighbors_of(d).is_empty()) {
        return Err(GraphError::DeterministicUndirected(g.name(d).to_string()));
    }
    if det.is_empty() {
        return Ok(g.clone());
    }
    let keep: NodeSet = g.ids().filter(|x| !det.contains(x)).collect();
    let mut added = Vec::new();
    for &x in &keep {
        for y in non_deterministic_children(g, x)? {
            if !g.adjacent(x, y) {
                added.push((x, y));
            }
        }
    }
    let (reduced, map) = g.filtered(&keep, |_| true);
    let mut b = reduced.to_builder();
    for (x, y) in added {
        b.add_edge(Edge {
            kind: EdgeKind::Directed,
            from: map[&x],
            to: map[&y],
        })?;
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate_chain_graph, ChainGraphBuilder, NodeAttr};

    fn build(nodes: &[(&str, bool)], arcs: &[(&str, &str)], undirected: &[(&str, &str)]) -> ChainGraph {
        let mut b = ChainGraphBuilder::new();
        for &(n, det) in nodes {
            let attr = if det {
                NodeAttr::deterministic()
            } else {
                NodeAttr::stochastic()
            };
            b.add_node(n, attr).unwrap();
        }
        for &(f, t) in arcs {
            b.add_edge_by_name(EdgeKind::Directed, f, t).unwrap();
        }
        for &(f, t) in undirected {
            b.add_edge_by_name(EdgeKind::Undirected, f, t).unwrap();
        }
        b.build()
    }

    #[test]
    fn single_chain() {
        let g = build(
            &[("x", false), ("d", true), ("y", false)],
            &[("x", "d"), ("d", "y")],
            &[],
        );
        let out = eliminate_deterministic(&g).unwrap();
        let expected = build(&[("x", false), ("y", false)], &[("x", "y")], &[]);
        assert!(out.same_structure(&expected));
    }

    #[test]
    fn no_deterministic_nodes_is_identity() {
        let g = build(&[("x", false), ("y", false)], &[("x", "y")], &[]);
        assert!(eliminate_deterministic(&g).unwrap().same_structure(&g));
    }

    #[test]
    fn feed_forward_network() {
        let mut nodes = vec![];
        for n in ["x1", "x2", "x3"] {
            nodes.push((n, false));
        }
        for n in ["h1", "h2", "h3", "m1", "m2"] {
            nodes.push((n, true));
        }
        nodes.push(("o1", false));
        nodes.push(("o2", false));
        let mut arcs = vec![];
        for x in ["x1", "x2", "x3"] {
            for h in ["h1", "h2", "h3"] {
                arcs.push((x, h));
            }
        }
        for h in ["h1", "h2", "h3"] {
            for m in ["m1", "m2"] {
                arcs.push((h, m));
            }
        }
        arcs.push(("m1", "o1"));
        arcs.push(("m2", "o2"));
        let g = build(&nodes, &arcs, &[("o1", "o2")]);
        assert!(validate_chain_graph(&g).is_valid());
        let out = eliminate_deterministic(&g).unwrap();
        let mut expected_arcs = vec![];
        for x in ["x1", "x2", "x3"] {
            expected_arcs.push((x, "o1"));
            expected_arcs.push((x, "o2"));
        }
        let expected = build(
            &[
                ("x1", false),
                ("x2", false),
                ("x3", false),
                ("o1", false),
                ("o2", false),
            ],
            &expected_arcs,
            &[("o1", "o2")],
        );
        assert!(out.same_structure(&expected));
        assert!(validate_chain_graph(&out).is_valid());
    }

    #[test]
    fn undirected_deterministic_rejected() {
        let g = build(&[("x", false), ("d", true), ("y", false)], &[("x", "d")], &[("d", "y")]);
        assert!(matches!(
            eliminate_deterministic(&g),
            Err(GraphError::DeterministicUndirected(_))
        ));
    }
}

use std::collections::BTreeSet;

use proptest::prelude::*;

use chaingraph::decompose::{chain_components, component_subgraphs};
use chaingraph::factorize::factorize_chain;
use chaingraph::graph::validate_chain_graph;
use chaingraph::lang::{self, parse, print_ast};
use chaingraph::markov::{implies_ci, moralize_chain, CiQuery};
use chaingraph::oracle::{build_joint, random_assignment};
use chaingraph::{ChainGraph, ChainGraphBuilder, Edge, NodeAttr, NodeSet};

/// Mixed graph from a rank per node and an edge code per pair: arcs go
/// from lower to higher rank, undirected edges only join equal ranks, so
/// every result is a chain graph.
fn chain_graph(ranks: &[u8], codes: &[u8]) -> ChainGraph {
    let n = ranks.len();
    let mut b = ChainGraphBuilder::new();
    let ids: Vec<_> = (0..n)
        .map(|i| b.add_node(&format!("v{i}"), NodeAttr::stochastic()).unwrap())
        .collect();
    let mut k = 0;
    for j in 1..n {
        for i in 0..j {
            let c = codes[k % codes.len()];
            k += 1;
            if c.is_multiple_of(3) {
                continue;
            }
            let edge = match ranks[i].cmp(&ranks[j]) {
                std::cmp::Ordering::Equal => Edge::undirected(ids[i], ids[j]),
                std::cmp::Ordering::Less => Edge::directed(ids[i], ids[j]),
                std::cmp::Ordering::Greater => Edge::directed(ids[j], ids[i]),
            };
            b.add_edge(edge).unwrap();
        }
    }
    b.build()
}

fn graph_strategy(max: usize) -> impl Strategy<Value = ChainGraph> {
    (2..=max).prop_flat_map(|n| {
        (
            proptest::collection::vec(0u8..3, n),
            proptest::collection::vec(any::<u8>(), n * n),
        )
            .prop_map(|(r, c)| chain_graph(&r, &c))
    })
}

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "c", "x1", "y_2", "bid-ask", "θ", "Z"]).prop_map(String::from)
}

/// Grammar-shaped source text (not necessarily resolvable).
fn source(depth: u32) -> BoxedStrategy<String> {
    let node = (prop::bool::ANY, prop::bool::ANY, ident(), prop::option::of(1u8..9)).prop_map(|(d, o, n, dom)| {
        format!(
            "{}{}node {n}{};",
            if d { "det " } else { "" },
            if o { "obs " } else { "" },
            dom.map(|k| format!("[{k}]")).unwrap_or_default()
        )
    });
    let edge =
        (ident(), prop::bool::ANY, ident()).prop_map(|(a, d, b)| format!("{a} {} {b};", if d { "->" } else { "--" }));
    let leaf = prop_oneof![node, edge].boxed();
    let stmt = if depth == 0 {
        leaf
    } else {
        prop_oneof![
            3 => leaf,
            1 => (ident(), ident(), proptest::collection::vec(source(depth - 1), 0..3))
                .prop_map(|(p, s, body)| format!("plate {p} [{s}] {{ {} }}", body.join(" "))),
        ]
        .boxed()
    };
    proptest::collection::vec(stmt, 0..6).prop_map(|v| v.join("\n")).boxed()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_ast_parses_back(body in source(2)) {
        let src = format!("model M {{\n{body}\n}}");
        let ast = parse(&src).unwrap();
        let again = parse(&print_ast(&ast)).unwrap();
        prop_assert_eq!(ast.without_spans(), again.without_spans());
    }

    #[test]
    fn loader_never_panics(src in "\\PC{0,120}") {
        let _ = lang::load(&src);
    }

    #[test]
    fn generated_graphs_are_valid(g in graph_strategy(7)) {
        prop_assert!(validate_chain_graph(&g).is_valid());
    }

    #[test]
    fn components_are_undirected_connected_blocks(g in graph_strategy(7)) {
        let comps = chain_components(&g);
        let block = comps.block_of(g.len());
        for e in g.edges() {
            let same = block[e.from.index()] == block[e.to.index()];
            prop_assert_eq!(same, !e.is_directed());
        }
        for c in comps.blocks() {
            let start = *c.iter().next().unwrap();
            let mut seen: NodeSet = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in g.neighbors_of(v) {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
            prop_assert_eq!(&seen, c);
        }
        for c in comps.blocks() {
            prop_assert!(component_subgraphs(&g).blocks().iter().any(|s| c.is_subset(s)));
        }
    }

    #[test]
    fn moral_graph_contains_skeleton(g in graph_strategy(7)) {
        let m = moralize_chain(&g);
        for e in g.edges() {
            prop_assert!(m.has_edge(e.from, e.to));
        }
    }

    #[test]
    fn independence_is_symmetric(g in graph_strategy(6), pick in any::<u64>()) {
        let ids: Vec<_> = g.ids().collect();
        let a = ids[(pick % ids.len() as u64) as usize];
        let b = ids[((pick >> 8) % ids.len() as u64) as usize];
        prop_assume!(a != b);
        let s: NodeSet = ids.iter().copied().filter(|&v| v != a && v != b && (pick >> (16 + v.index())) & 1 == 1).collect();
        let q1 = CiQuery::new([a].into(), [b].into(), s.clone()).unwrap();
        let q2 = CiQuery::new([b].into(), [a].into(), s).unwrap();
        prop_assert_eq!(implies_ci(&g, &q1).unwrap(), implies_ci(&g, &q2).unwrap());
    }

    #[test]
    fn joints_are_normalized(g in graph_strategy(6), seed in any::<u64>()) {
        let e = factorize_chain(&g).unwrap();
        let j = build_joint(&e, &random_assignment(&e, seed)).unwrap();
        prop_assert!((j.total() - 1.0).abs() < 1e-12);
        prop_assert!(j.probs.iter().all(|&p| p >= 0.0));
    }
}

mod common;

use std::collections::BTreeSet;

use foldcons::corpus::Folksonomy;
use foldcons::graph::{build_dice_graph, ProximityMode, SocialGraph};
use foldcons::ids::UserId;
use proptest::prelude::*;

/// Best product over simple paths of at most `depth` edges, by DFS.
fn best_path(g: &SocialGraph, from: UserId, to: UserId, depth: u32) -> f64 {
    fn dfs(
        g: &SocialGraph,
        at: UserId,
        to: UserId,
        left: u32,
        acc: f64,
        seen: &mut Vec<UserId>,
        best: &mut f64,
    ) {
        if at == to {
            *best = best.max(acc);
            return;
        }
        if left == 0 {
            return;
        }
        for &(v, w) in g.neighbors(at) {
            if !seen.contains(&v) {
                seen.push(v);
                dfs(g, v, to, left - 1, acc * w, seen, best);
                seen.pop();
            }
        }
    }
    if from == to {
        return 0.0;
    }
    let mut best = 0.0;
    dfs(g, from, to, depth, 1.0, &mut vec![from], &mut best);
    best
}

fn graph() -> impl Strategy<Value = SocialGraph> {
    (2usize..8).prop_flat_map(|n| {
        prop::collection::vec((0..n as u32, 0..n as u32, 1u32..=20), 0..20).prop_map(move |edges| {
            let edges: Vec<_> = edges
                .into_iter()
                .filter(|(u, v, _)| u != v)
                .map(|(u, v, w)| (UserId(u), UserId(v), w as f64 / 20.0))
                .collect();
            SocialGraph::from_edges(n, &edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn path_proximity_equals_enumeration(g in graph(), depth in 1u32..5) {
        let n = g.user_count() as u32;
        for s in 0..n {
            let map = g.proximities_from(UserId(s), ProximityMode::Path { max_depth: depth });
            for t in 0..n {
                let expect = best_path(&g, UserId(s), UserId(t), depth);
                prop_assert_eq!(map.get(UserId(t)), expect);
                prop_assert_eq!(g.proximity(UserId(s), UserId(t), ProximityMode::Path { max_depth: depth }), expect);
            }
        }
    }

    #[test]
    fn direct_mode_is_edge_weight(g in graph()) {
        let n = g.user_count() as u32;
        for s in 0..n {
            for t in 0..n {
                let w = if s == t { 0.0 } else { g.edge(UserId(s), UserId(t)) };
                prop_assert_eq!(g.proximity(UserId(s), UserId(t), ProximityMode::Direct), w);
            }
        }
    }

    #[test]
    fn dice_weights_match_sets(f in common::folksonomy(6, 6, 3, 30)) {
        let g = build_dice_graph(&f, 0.0);
        let items = |u: u32| -> BTreeSet<u32> { f.triples().iter().filter(|t| t.user.0 == u).map(|t| t.item.0).collect() };
        for u in 0..6 {
            for v in 0..6 {
                if u == v {
                    continue;
                }
                let (a, b) = (items(u), items(v));
                let common = a.intersection(&b).count();
                let expect = if common == 0 { 0.0 } else { 2.0 * common as f64 / (a.len() + b.len()) as f64 };
                prop_assert_eq!(g.edge(UserId(u), UserId(v)), expect);
            }
        }
    }
}

#[test]
fn threshold_drops_weak_edges() {
    use foldcons::corpus::Triple;
    // Users 0 and 1 share one of three items, users 1 and 2 both of theirs.
    let f = Folksonomy::build(&[
        Triple::new(0, 0, 0),
        Triple::new(0, 1, 0),
        Triple::new(1, 1, 0),
        Triple::new(1, 2, 0),
        Triple::new(2, 1, 0),
        Triple::new(2, 2, 0),
    ]);
    let g = build_dice_graph(&f, 0.6);
    assert_eq!(g.edge(UserId(0), UserId(1)), 0.0);
    assert_eq!(g.edge(UserId(1), UserId(2)), 1.0);
}

mod common;

use std::collections::{BTreeSet, HashMap};

use foldcons::corpus::{p_core, Triple};
use proptest::prelude::*;

fn occurrences(
    triples: &[Triple],
) -> (
    HashMap<u32, usize>,
    HashMap<u32, usize>,
    HashMap<u32, usize>,
) {
    let posts: BTreeSet<(u32, u32)> = triples.iter().map(|t| (t.user.0, t.item.0)).collect();
    let (mut users, mut items, mut tags) = (HashMap::new(), HashMap::new(), HashMap::new());
    for &(u, i) in &posts {
        *users.entry(u).or_default() += 1;
        *items.entry(i).or_default() += 1;
    }
    for t in triples {
        *tags.entry(t.tag.0).or_default() += 1;
    }
    (users, items, tags)
}

fn satisfies(triples: &[Triple], p: usize) -> bool {
    let (u, i, t) = occurrences(triples);
    u.values()
        .chain(i.values())
        .chain(t.values())
        .all(|&c| c >= p)
}

/// Union of every entity-induced sub-folksonomy meeting the bound. Valid
/// sets are closed under union, so this is the maximal one.
fn oracle(triples: &[Triple], p: usize) -> BTreeSet<Triple> {
    let users: Vec<u32> = triples
        .iter()
        .map(|t| t.user.0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let items: Vec<u32> = triples
        .iter()
        .map(|t| t.item.0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let tags: Vec<u32> = triples
        .iter()
        .map(|t| t.tag.0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = users.len() + items.len() + tags.len();
    let mut union = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let keep = |k: usize| mask & (1 << k) != 0;
        let kept: Vec<Triple> = triples
            .iter()
            .copied()
            .filter(|t| {
                keep(users.iter().position(|&u| u == t.user.0).unwrap())
                    && keep(users.len() + items.iter().position(|&i| i == t.item.0).unwrap())
                    && keep(
                        users.len()
                            + items.len()
                            + tags.iter().position(|&g| g == t.tag.0).unwrap(),
                    )
            })
            .collect();
        if satisfies(&kept, p) {
            union.extend(kept);
        }
    }
    union
}

fn dedup(mut t: Vec<Triple>) -> Vec<Triple> {
    let mut seen = BTreeSet::new();
    t.retain(|x| seen.insert(*x));
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_exhaustive_oracle(t in common::triples(3, 3, 3, 14), p in 1usize..4) {
        let t = dedup(t);
        let posts: BTreeSet<_> = t.iter().map(|x| (x.user, x.item)).collect();
        prop_assume!(posts.len() <= 8);
        let got: BTreeSet<Triple> = p_core(&t, p).into_iter().collect();
        prop_assert_eq!(got, oracle(&t, p));
    }

    #[test]
    fn bound_holds_and_is_idempotent(t in common::triples(8, 8, 6, 120), p in 1usize..6) {
        let t = dedup(t);
        let core = p_core(&t, p);
        prop_assert!(satisfies(&core, p));
        prop_assert_eq!(p_core(&core, p), core.clone());
        // Order of the survivors is preserved.
        let mut it = t.iter();
        prop_assert!(core.iter().all(|c| it.any(|x| x == c)));
    }
}

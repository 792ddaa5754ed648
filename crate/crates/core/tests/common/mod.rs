#![allow(dead_code)]

use foldcons::corpus::{Folksonomy, Triple};
use proptest::prelude::*;

/// Up to `max_triples` assignments over `users × items × tags` ids.
pub fn triples(
    users: u32,
    items: u32,
    tags: u32,
    max_triples: usize,
) -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec((0..users, 0..items, 0..tags), 1..=max_triples).prop_map(|v| {
        v.into_iter()
            .map(|(u, i, t)| Triple::new(u, i, t))
            .collect()
    })
}

pub fn folksonomy(
    users: u32,
    items: u32,
    tags: u32,
    max_triples: usize,
) -> impl Strategy<Value = Folksonomy> {
    triples(users, items, tags, max_triples).prop_map(|t| Folksonomy::build(&t))
}

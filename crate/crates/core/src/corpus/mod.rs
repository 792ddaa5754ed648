//! The folksonomy data model: ingestion, p-core filtering, inverted indices
//! and train/test splitting.

mod folksonomy;
mod parse;
mod pcore;
mod split;

pub use folksonomy::{Dimensions, Folksonomy, Post, Stats};
pub use parse::{parse_triples, DatasetFormatConfig, Parsed};
pub use pcore::p_core;
pub use split::{leave_post_out, load_fixed_split, Split, TestPost};

use std::collections::HashMap;

use crate::ids::{Dictionary, Interner, ItemId, TagId, UserId};

/// A single tag assignment `(user, item, tag)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub user: UserId,
    pub item: ItemId,
    pub tag: TagId,
}

impl Triple {
    pub fn new(user: u32, item: u32, tag: u32) -> Self {
        Triple {
            user: UserId(user),
            item: ItemId(item),
            tag: TagId(tag),
        }
    }
}

/// Interned triples together with the dictionary that names them. This is
/// what a corpus snapshot persists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub dictionary: Dictionary,
    pub triples: Vec<Triple>,
}

impl Corpus {
    /// Re-interns `triples` (a subset of this corpus) so that ids are dense
    /// over the surviving entities. Relative id order is preserved.
    pub fn restrict(&self, triples: &[Triple]) -> Corpus {
        fn remap(src: &Interner, used: impl Iterator<Item = u32>) -> (Interner, HashMap<u32, u32>) {
            let mut ids: Vec<u32> = used.collect();
            ids.sort_unstable();
            ids.dedup();
            let mut out = Interner::new();
            let mut map = HashMap::with_capacity(ids.len());
            for old in ids {
                let name = src
                    .name(old)
                    .map(str::to_owned)
                    .unwrap_or_else(|| old.to_string());
                map.insert(old, out.intern(&name));
            }
            (out, map)
        }

        let (users, umap) = remap(&self.dictionary.users, triples.iter().map(|t| t.user.0));
        let (items, imap) = remap(&self.dictionary.items, triples.iter().map(|t| t.item.0));
        let (tags, tmap) = remap(&self.dictionary.tags, triples.iter().map(|t| t.tag.0));
        let triples = triples
            .iter()
            .map(|t| Triple::new(umap[&t.user.0], imap[&t.item.0], tmap[&t.tag.0]))
            .collect();
        Corpus {
            dictionary: Dictionary { users, items, tags },
            triples,
        }
    }

    pub fn folksonomy(&self) -> Folksonomy {
        Folksonomy::with_dimensions(
            &self.triples,
            Dimensions {
                users: self.dictionary.users.len(),
                items: self.dictionary.items.len(),
                tags: self.dictionary.tags.len(),
            },
        )
    }
}

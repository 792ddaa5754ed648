use std::ops::Range;

use super::Triple;
use crate::ids::{ItemId, TagId, UserId};

/// Sizes of the id spaces. Ids are dense in `0..n`, but an id may have no
/// triples (for instance a user whose only post was moved to a test set).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Dimensions {
    pub users: usize,
    pub items: usize,
    pub tags: usize,
}

impl Dimensions {
    fn covering(self, triples: &[Triple]) -> Dimensions {
        triples.iter().fold(self, |d, t| Dimensions {
            users: d.users.max(t.user.index() + 1),
            items: d.items.max(t.item.index() + 1),
            tags: d.tags.max(t.tag.index() + 1),
        })
    }
}

/// A `(user, item)` pair with the tags the user gave the item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Post {
    pub user: UserId,
    pub item: ItemId,
    pub tags: Vec<TagId>,
}

/// Table-style corpus statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub users: usize,
    pub items: usize,
    pub tags: usize,
    pub posts: usize,
    pub triples: usize,
}

/// The triple store with its inverted indices. Immutable once built.
///
/// All index lists are sorted ascending and duplicate-free.
#[derive(Clone, Debug, Default)]
pub struct Folksonomy {
    dims: Dimensions,
    triples: Vec<Triple>,
    users_of_tag: Vec<Vec<UserId>>,
    items_of_tag: Vec<Vec<ItemId>>,
    user_profile: Vec<Vec<TagId>>,
    item_profile: Vec<Vec<TagId>>,
    /// Per item: `(tag, tf(tag, item))`.
    item_tag_freq: Vec<Vec<(TagId, u32)>>,
    /// Per user: `(tag, number of items the user tagged with it)`.
    user_tag_freq: Vec<Vec<(TagId, u32)>>,
    user_items: Vec<Vec<ItemId>>,
    item_users: Vec<Vec<UserId>>,
    posts: Vec<Post>,
    user_posts: Vec<Range<usize>>,
    stats: Stats,
}

/// The indices are derived from the triples, so those and the dimensions
/// decide equality.
impl PartialEq for Folksonomy {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.triples == other.triples
    }
}

impl Eq for Folksonomy {}

fn counted<K: Copy + Ord>(mut keys: Vec<K>) -> Vec<(K, u32)> {
    keys.sort_unstable();
    let mut out: Vec<(K, u32)> = Vec::new();
    for k in keys {
        match out.last_mut() {
            Some((last, n)) if *last == k => *n += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

fn sorted_unique<K: Ord>(mut v: Vec<K>) -> Vec<K> {
    v.sort_unstable();
    v.dedup();
    v
}

impl Folksonomy {
    pub fn build(triples: &[Triple]) -> Folksonomy {
        Self::with_dimensions(triples, Dimensions::default())
    }

    /// Builds with id spaces at least as large as `dims` (grown to cover every
    /// id in `triples`). Duplicate triples are collapsed.
    pub fn with_dimensions(triples: &[Triple], dims: Dimensions) -> Folksonomy {
        let dims = dims.covering(triples);
        let mut triples = triples.to_vec();
        triples.sort_unstable();
        triples.dedup();

        let mut users_of_tag = vec![Vec::new(); dims.tags];
        let mut items_of_tag = vec![Vec::new(); dims.tags];
        let mut user_tags = vec![Vec::new(); dims.users];
        let mut item_tags = vec![Vec::new(); dims.items];
        let mut user_items = vec![Vec::new(); dims.users];
        let mut item_users = vec![Vec::new(); dims.items];
        for t in &triples {
            users_of_tag[t.tag.index()].push(t.user);
            items_of_tag[t.tag.index()].push(t.item);
            user_tags[t.user.index()].push(t.tag);
            item_tags[t.item.index()].push(t.tag);
            user_items[t.user.index()].push(t.item);
            item_users[t.item.index()].push(t.user);
        }

        // Triples are sorted by (user, item, tag): posts are contiguous runs.
        let mut posts: Vec<Post> = Vec::new();
        for t in &triples {
            match posts.last_mut() {
                Some(p) if p.user == t.user && p.item == t.item => p.tags.push(t.tag),
                _ => posts.push(Post {
                    user: t.user,
                    item: t.item,
                    tags: vec![t.tag],
                }),
            }
        }
        let mut user_posts = vec![0..0; dims.users];
        let mut start = 0;
        while start < posts.len() {
            let user = posts[start].user;
            let end = start + posts[start..].iter().take_while(|p| p.user == user).count();
            user_posts[user.index()] = start..end;
            start = end;
        }

        let user_tag_freq: Vec<_> = user_tags.into_iter().map(counted).collect();
        let item_tag_freq: Vec<_> = item_tags.into_iter().map(counted).collect();
        let user_profile: Vec<Vec<TagId>> = user_tag_freq
            .iter()
            .map(|v| v.iter().map(|&(t, _)| t).collect())
            .collect();
        let item_profile: Vec<Vec<TagId>> = item_tag_freq
            .iter()
            .map(|v| v.iter().map(|&(t, _)| t).collect())
            .collect();
        let users_of_tag: Vec<_> = users_of_tag.into_iter().map(sorted_unique).collect();
        let items_of_tag: Vec<_> = items_of_tag.into_iter().map(sorted_unique).collect();
        let user_items: Vec<_> = user_items.into_iter().map(sorted_unique).collect();
        let item_users: Vec<_> = item_users.into_iter().map(sorted_unique).collect();

        let stats = Stats {
            users: user_items.iter().filter(|v| !v.is_empty()).count(),
            items: item_users.iter().filter(|v| !v.is_empty()).count(),
            tags: users_of_tag.iter().filter(|v| !v.is_empty()).count(),
            posts: posts.len(),
            triples: triples.len(),
        };

        Folksonomy {
            dims,
            triples,
            users_of_tag,
            items_of_tag,
            user_profile,
            item_profile,
            item_tag_freq,
            user_tag_freq,
            user_items,
            item_users,
            posts,
            user_posts,
            stats,
        }
    }

    pub fn dimensions(&self) -> Dimensions {
        self.dims
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// Triples sorted by `(user, item, tag)`.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Posts sorted by `(user, item)`.
    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn posts_of_user(&self, u: UserId) -> &[Post] {
        match self.user_posts.get(u.index()) {
            Some(r) => &self.posts[r.clone()],
            None => &[],
        }
    }

    /// `T(u, i)`: the tags of post `(u, i)`, empty if there is no such post.
    pub fn post_tags(&self, u: UserId, i: ItemId) -> &[TagId] {
        let posts = self.posts_of_user(u);
        match posts.binary_search_by_key(&i, |p| p.item) {
            Ok(at) => &posts[at].tags,
            Err(_) => &[],
        }
    }

    /// `U(t)`.
    pub fn users_of_tag(&self, t: TagId) -> &[UserId] {
        self.users_of_tag.get(t.index()).map_or(&[], Vec::as_slice)
    }

    /// `I(t)`.
    pub fn items_of_tag(&self, t: TagId) -> &[ItemId] {
        self.items_of_tag.get(t.index()).map_or(&[], Vec::as_slice)
    }

    /// `T(u)`.
    pub fn user_profile(&self, u: UserId) -> &[TagId] {
        self.user_profile.get(u.index()).map_or(&[], Vec::as_slice)
    }

    /// `T(i)`.
    pub fn item_profile(&self, i: ItemId) -> &[TagId] {
        self.item_profile.get(i.index()).map_or(&[], Vec::as_slice)
    }

    /// Items the user has a post on.
    pub fn items_of_user(&self, u: UserId) -> &[ItemId] {
        self.user_items.get(u.index()).map_or(&[], Vec::as_slice)
    }

    /// Users with a post on the item.
    pub fn users_of_item(&self, i: ItemId) -> &[UserId] {
        self.item_users.get(i.index()).map_or(&[], Vec::as_slice)
    }

    /// `(tag, tf(tag, i))` for every tag assigned to `i`.
    pub fn item_tag_counts(&self, i: ItemId) -> &[(TagId, u32)] {
        self.item_tag_freq.get(i.index()).map_or(&[], Vec::as_slice)
    }

    /// `(tag, count)` where count is the number of items `u` tagged with it.
    pub fn user_tag_counts(&self, u: UserId) -> &[(TagId, u32)] {
        self.user_tag_freq.get(u.index()).map_or(&[], Vec::as_slice)
    }

    /// `tf(t, i) = |{u : (u, i, t) ∈ S}|`.
    pub fn tf(&self, t: TagId, i: ItemId) -> u32 {
        lookup(self.item_tag_counts(i), t)
    }

    pub fn user_tag_count(&self, u: UserId, t: TagId) -> u32 {
        lookup(self.user_tag_counts(u), t)
    }

    pub fn has_user(&self, u: UserId) -> bool {
        !self.items_of_user(u).is_empty()
    }

    pub fn has_item(&self, i: ItemId) -> bool {
        !self.users_of_item(i).is_empty()
    }

    pub fn has_tag(&self, t: TagId) -> bool {
        !self.users_of_tag(t).is_empty()
    }
}

fn lookup(counts: &[(TagId, u32)], t: TagId) -> u32 {
    counts
        .binary_search_by_key(&t, |&(tag, _)| tag)
        .map_or(0, |at| counts[at].1)
}

use std::collections::{HashMap, VecDeque};

use super::Triple;

#[derive(Clone, Copy)]
enum Entity {
    User(usize),
    Item(usize),
    Tag(usize),
}

struct Counter {
    count: Vec<usize>,
    dead: Vec<bool>,
    queued: Vec<bool>,
}

impl Counter {
    fn new(n: usize) -> Self {
        Counter {
            count: vec![0; n],
            dead: vec![false; n],
            queued: vec![false; n],
        }
    }

    /// Decrements and reports whether the entity just needs to be queued.
    fn decrement(&mut self, id: usize, p: usize) -> bool {
        self.count[id] -= 1;
        if self.count[id] < p && !self.dead[id] && !self.queued[id] {
            self.queued[id] = true;
            true
        } else {
            false
        }
    }
}

/// Post-core at level `p`: the largest subset of `triples` in which every
/// user, item and tag occurs in at least `p` posts.
///
/// A user's or item's occurrence count is its number of posts; a tag's is
/// the number of posts carrying it. Computed by cascading deletion from a
/// work queue. `p <= 1` returns the input unchanged. Surviving triples keep
/// their input order.
pub fn p_core(triples: &[Triple], p: usize) -> Vec<Triple> {
    if p <= 1 {
        return triples.to_vec();
    }
    let n_users = triples
        .iter()
        .map(|t| t.user.index() + 1)
        .max()
        .unwrap_or(0);
    let n_items = triples
        .iter()
        .map(|t| t.item.index() + 1)
        .max()
        .unwrap_or(0);
    let n_tags = triples.iter().map(|t| t.tag.index() + 1).max().unwrap_or(0);

    let mut post_ids: HashMap<(u32, u32), usize> = HashMap::new();
    let mut post_of = Vec::with_capacity(triples.len());
    let mut post_entities: Vec<(usize, usize)> = Vec::new();
    let mut post_triples: Vec<Vec<usize>> = Vec::new();
    for (idx, t) in triples.iter().enumerate() {
        let next = post_ids.len();
        let post = *post_ids.entry((t.user.0, t.item.0)).or_insert(next);
        if post == next {
            post_entities.push((t.user.index(), t.item.index()));
            post_triples.push(Vec::new());
        }
        post_triples[post].push(idx);
        post_of.push(post);
    }

    let mut users = Counter::new(n_users);
    let mut items = Counter::new(n_items);
    let mut tags = Counter::new(n_tags);
    let mut user_posts = vec![Vec::new(); n_users];
    let mut item_posts = vec![Vec::new(); n_items];
    let mut tag_triples = vec![Vec::new(); n_tags];
    for (post, &(u, i)) in post_entities.iter().enumerate() {
        users.count[u] += 1;
        items.count[i] += 1;
        user_posts[u].push(post);
        item_posts[i].push(post);
    }
    for (idx, t) in triples.iter().enumerate() {
        tags.count[t.tag.index()] += 1;
        tag_triples[t.tag.index()].push(idx);
    }
    let mut post_live: Vec<usize> = post_triples.iter().map(Vec::len).collect();
    let mut alive = vec![true; triples.len()];

    let mut queue = VecDeque::new();
    for (counter, wrap) in [
        (&mut users, Entity::User as fn(usize) -> Entity),
        (&mut items, Entity::Item),
        (&mut tags, Entity::Tag),
    ] {
        for id in 0..counter.count.len() {
            if counter.count[id] > 0 && counter.count[id] < p {
                counter.queued[id] = true;
                queue.push_back(wrap(id));
            }
        }
    }

    let mut doomed = Vec::new();
    while let Some(entity) = queue.pop_front() {
        doomed.clear();
        match entity {
            Entity::User(u) => {
                users.dead[u] = true;
                for &post in &user_posts[u] {
                    doomed.extend_from_slice(&post_triples[post]);
                }
            }
            Entity::Item(i) => {
                items.dead[i] = true;
                for &post in &item_posts[i] {
                    doomed.extend_from_slice(&post_triples[post]);
                }
            }
            Entity::Tag(t) => {
                tags.dead[t] = true;
                doomed.extend_from_slice(&tag_triples[t]);
            }
        }
        for &idx in &doomed {
            if !alive[idx] {
                continue;
            }
            alive[idx] = false;
            let t = triples[idx];
            if tags.decrement(t.tag.index(), p) {
                queue.push_back(Entity::Tag(t.tag.index()));
            }
            let post = post_of[idx];
            post_live[post] -= 1;
            if post_live[post] == 0 {
                let (u, i) = post_entities[post];
                if users.decrement(u, p) {
                    queue.push_back(Entity::User(u));
                }
                if items.decrement(i, p) {
                    queue.push_back(Entity::Item(i));
                }
            }
        }
    }

    triples
        .iter()
        .zip(alive)
        .filter_map(|(t, keep)| keep.then_some(*t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_one_is_identity() {
        let t = vec![Triple::new(0, 0, 0), Triple::new(3, 1, 2)];
        assert_eq!(p_core(&t, 1), t);
    }

    #[test]
    fn single_post_user_is_removed() {
        // Users 0 and 1 both tag items 0,1 with tags 0,1; user 2 has one post.
        let mut t = Vec::new();
        for u in 0..2 {
            for i in 0..2 {
                t.push(Triple::new(u, i, 0));
                t.push(Triple::new(u, i, 1));
            }
        }
        t.push(Triple::new(2, 0, 0));
        let core = p_core(&t, 2);
        assert_eq!(core, t[..8].to_vec());
        assert_eq!(p_core(&core, 2), core);
    }

    #[test]
    fn cascade_empties_chain() {
        // Removing the lone tag-1 triple leaves user 1 with a single post.
        let t = vec![
            Triple::new(0, 0, 0),
            Triple::new(0, 1, 0),
            Triple::new(1, 0, 0),
            Triple::new(1, 2, 1),
        ];
        let core = p_core(&t, 2);
        assert!(core.is_empty(), "{core:?}");
    }
}

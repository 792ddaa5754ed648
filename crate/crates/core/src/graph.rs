//! User proximity graph built from co-tagged items.

use std::io::Write;

use crate::corpus::Folksonomy;
use crate::error::{Error, Result};
use crate::ids::{Dictionary, UserId};

/// How far proximity propagates through the graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProximityMode {
    /// Only the direct edge weight counts.
    Direct,
    /// Best product of edge weights over paths of at most `max_depth` edges.
    Path { max_depth: u32 },
}

impl Default for ProximityMode {
    fn default() -> Self {
        ProximityMode::Path { max_depth: 2 }
    }
}

impl ProximityMode {
    pub fn validate(self) -> Result<()> {
        match self {
            ProximityMode::Path { max_depth: 0 } => {
                Err(Error::Config("path max_depth must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    fn depth(self) -> u32 {
        match self {
            ProximityMode::Direct => 1,
            ProximityMode::Path { max_depth } => max_depth,
        }
    }
}

/// Undirected weighted user graph. Weights lie in `(0, 1]`, there are no
/// self-loops, and every edge is stored in both endpoints' adjacency lists.
#[derive(Clone, Debug, Default)]
pub struct SocialGraph {
    adjacency: Vec<Vec<(UserId, f64)>>,
}

impl SocialGraph {
    /// Builds a graph over `n_users` vertices from an edge list. Weights
    /// outside `(0, 1]`, self-loops and out-of-range endpoints are rejected;
    /// a repeated edge keeps its last weight.
    pub fn from_edges(n_users: usize, edges: &[(UserId, UserId, f64)]) -> Result<SocialGraph> {
        let mut adjacency = vec![Vec::new(); n_users];
        for &(u, v, w) in edges {
            if u == v {
                return Err(Error::Config(format!("self-loop on user {u}")));
            }
            for x in [u, v] {
                if x.index() >= n_users {
                    return Err(Error::OutOfRange {
                        what: "user",
                        index: x.index(),
                        bound: n_users,
                    });
                }
            }
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::Config(format!("proximity {w} outside (0, 1]")));
            }
            adjacency[u.index()].push((v, w));
            adjacency[v.index()].push((u, w));
        }
        for list in &mut adjacency {
            // Stable sort then keep the last occurrence of each neighbour.
            list.sort_by_key(|&(v, _)| v);
            let mut dedup: Vec<(UserId, f64)> = Vec::with_capacity(list.len());
            for &(v, w) in list.iter() {
                match dedup.last_mut() {
                    Some(last) if last.0 == v => last.1 = w,
                    _ => dedup.push((v, w)),
                }
            }
            *list = dedup;
        }
        Ok(SocialGraph { adjacency })
    }

    pub fn user_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Neighbours of `u` sorted by user id.
    pub fn neighbors(&self, u: UserId) -> &[(UserId, f64)] {
        self.adjacency.get(u.index()).map_or(&[], Vec::as_slice)
    }

    pub fn edge(&self, u: UserId, v: UserId) -> f64 {
        let list = self.neighbors(u);
        list.binary_search_by_key(&v, |&(n, _)| n)
            .map_or(0.0, |at| list[at].1)
    }

    /// Every edge once, as `(u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = UserId(u as u32);
            list.iter()
                .filter(move |(v, _)| u < *v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// Proximity of `v` as seen from `u`. Unknown users and `u == v` give 0.
    pub fn proximity(&self, u: UserId, v: UserId, mode: ProximityMode) -> f64 {
        if u == v {
            return 0.0;
        }
        match mode {
            ProximityMode::Direct => self.edge(u, v),
            ProximityMode::Path { .. } => self.proximities_from(u, mode).get(v),
        }
    }

    /// Proximity from `source` to every user, materialized in one bounded
    /// search.
    ///
    /// Path mode relaxes all edges `max_depth` times, keeping the best product
    /// reached with at most that many edges. Since weights are at most 1, a
    /// walk that revisits a vertex never beats the simple path obtained by
    /// cutting out its cycle, so the result equals the maximum over simple
    /// paths.
    pub fn proximities_from(&self, source: UserId, mode: ProximityMode) -> ProximityMap {
        let n = self.adjacency.len();
        let mut best = vec![0.0; n];
        if source.index() >= n {
            return ProximityMap { best };
        }
        best[source.index()] = 1.0;
        let mut frontier = vec![(source.index(), 1.0)];
        let mut next = vec![0.0; n];
        let mut touched = Vec::new();
        for _ in 0..mode.depth() {
            for &(w, reach) in &frontier {
                for &(v, weight) in &self.adjacency[w] {
                    let v = v.index();
                    let cand = reach * weight;
                    if cand > next[v] {
                        if next[v] == 0.0 {
                            touched.push(v);
                        }
                        next[v] = cand;
                    }
                }
            }
            frontier.clear();
            // Only vertices whose best value improved can extend to better paths.
            for &v in &touched {
                if next[v] > best[v] {
                    best[v] = next[v];
                    frontier.push((v, next[v]));
                }
                next[v] = 0.0;
            }
            touched.clear();
            if frontier.is_empty() {
                break;
            }
        }
        best[source.index()] = 0.0;
        ProximityMap { best }
    }

    /// Writes `user<TAB>user<TAB>proximity` rows, one per edge.
    pub fn write_edge_list<W: Write>(&self, dict: Option<&Dictionary>, mut out: W) -> Result<()> {
        for (u, v, w) in self.edges() {
            match dict {
                Some(d) => writeln!(out, "{}\t{}\t{}", d.user_name(u), d.user_name(v), w)?,
                None => writeln!(out, "{u}\t{v}\t{w}")?,
            }
        }
        Ok(())
    }
}

/// Dense proximities from one source user.
#[derive(Clone, Debug)]
pub struct ProximityMap {
    best: Vec<f64>,
}

impl ProximityMap {
    pub fn get(&self, v: UserId) -> f64 {
        self.best.get(v.index()).copied().unwrap_or(0.0)
    }
}

/// Dice coefficient over the users' tagged-item sets:
/// `σ(u, v) = 2·|Iu ∩ Iv| / (|Iu| + |Iv|)` for every pair sharing an item.
/// Edges below `min_proximity` are dropped.
pub fn build_dice_graph(train: &Folksonomy, min_proximity: f64) -> SocialGraph {
    let n = train.dimensions().users;
    let mut adjacency: Vec<Vec<(UserId, f64)>> = vec![Vec::new(); n];
    let mut common = vec![0u32; n];
    let mut touched = Vec::new();
    for u in 0..n {
        let user = UserId(u as u32);
        let items_u = train.items_of_user(user);
        for &i in items_u {
            for &v in train.users_of_item(i) {
                if v.index() > u {
                    if common[v.index()] == 0 {
                        touched.push(v);
                    }
                    common[v.index()] += 1;
                }
            }
        }
        touched.sort_unstable();
        for &v in &touched {
            let c = common[v.index()] as f64;
            let denom = (items_u.len() + train.items_of_user(v).len()) as f64;
            let sigma = 2.0 * c / denom;
            if sigma >= min_proximity {
                adjacency[u].push((v, sigma));
                adjacency[v.index()].push((user, sigma));
            }
            common[v.index()] = 0;
        }
        touched.clear();
    }
    // Lower-id neighbours were appended in ascending order of their own id
    // while higher-id ones were appended afterwards, so lists are sorted.
    debug_assert!(adjacency
        .iter()
        .all(|l| l.windows(2).all(|w| w[0].0 < w[1].0)));
    SocialGraph { adjacency }
}

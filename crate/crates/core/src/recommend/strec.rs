//! Network-aware frequency scoring: a tag's frequency on the item blended
//! with the proximity-weighted votes of the user's (indirect) neighbours.
//!
//! ```text
//! score(t | u, i) = α·tf(t, i) + (1 − α)·sf(t | u, i)
//! sf(t | u, i)    = Σ_{v : (v, i, t) ∈ S} σ(u, v)
//! ```

use super::{ScoredTag, TagScorer};
use crate::corpus::Folksonomy;
use crate::error::{Error, Result};
use crate::graph::{ProximityMode, SocialGraph};
use crate::ids::{ItemId, TagId, UserId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrecConfig {
    pub alpha: f64,
    pub proximity: ProximityMode,
}

impl Default for StrecConfig {
    fn default() -> Self {
        StrecConfig {
            alpha: 0.05,
            proximity: ProximityMode::default(),
        }
    }
}

impl StrecConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        self.proximity.validate()
    }
}

/// Scores a single tag directly from the definition.
pub fn strec_score(
    train: &Folksonomy,
    g: &SocialGraph,
    cfg: &StrecConfig,
    u: UserId,
    i: ItemId,
    t: TagId,
) -> f64 {
    let tf = train.tf(t, i) as f64;
    let prox = g.proximities_from(u, cfg.proximity);
    let mut sf = 0.0;
    for &v in train.users_of_item(i) {
        if v != u && train.post_tags(v, i).binary_search(&t).is_ok() {
            sf += prox.get(v);
        }
    }
    cfg.alpha * tf + (1.0 - cfg.alpha) * sf
}

pub struct Strec<'a> {
    pub(crate) train: &'a Folksonomy,
    pub(crate) graph: &'a SocialGraph,
    pub(crate) cfg: StrecConfig,
}

impl<'a> Strec<'a> {
    pub fn new(train: &'a Folksonomy, graph: &'a SocialGraph, cfg: StrecConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Strec { train, graph, cfg })
    }

    pub fn config(&self) -> &StrecConfig {
        &self.cfg
    }
}

impl TagScorer for Strec<'_> {
    /// Candidates are `T(i)`: both `tf` and `sf` vanish for any tag nobody
    /// put on the item.
    fn candidates(&self, u: UserId, i: ItemId) -> Vec<ScoredTag> {
        let counts = self.train.item_tag_counts(i);
        if counts.is_empty() {
            return Vec::new();
        }
        let prox = self.graph.proximities_from(u, self.cfg.proximity);
        let mut sf = vec![0.0; counts.len()];
        // Same summation order as `strec_score`: ascending neighbour id.
        for &v in self.train.users_of_item(i) {
            if v == u {
                continue;
            }
            let p = prox.get(v);
            if p == 0.0 {
                continue;
            }
            for t in self.train.post_tags(v, i) {
                if let Ok(at) = counts.binary_search_by_key(t, |&(tag, _)| tag) {
                    sf[at] += p;
                }
            }
        }
        let alpha = self.cfg.alpha;
        counts
            .iter()
            .zip(sf)
            .map(|(&(tag, tf), sf)| ScoredTag::new(tag, alpha * tf as f64 + (1.0 - alpha) * sf))
            .collect()
    }

    fn score(&self, u: UserId, i: ItemId, t: TagId) -> f64 {
        strec_score(self.train, self.graph, &self.cfg, u, i, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Triple;
    use crate::recommend::top_candidates;

    /// Querying user 0; taggers of (item 0, tag 0): users 1, 2, 3 where 3 is
    /// not connected to 0.
    fn fixture() -> (Folksonomy, SocialGraph) {
        let f = Folksonomy::build(&[
            Triple::new(0, 1, 5),
            Triple::new(1, 0, 0),
            Triple::new(2, 0, 0),
            Triple::new(3, 0, 0),
            Triple::new(3, 0, 1),
        ]);
        let g = SocialGraph::from_edges(
            4,
            &[(UserId(0), UserId(1), 0.5), (UserId(0), UserId(2), 0.25)],
        )
        .unwrap();
        (f, g)
    }

    #[test]
    fn blended_score_fixture() {
        let (f, g) = fixture();
        let cfg = StrecConfig {
            alpha: 0.05,
            proximity: ProximityMode::Direct,
        };
        let s = strec_score(&f, &g, &cfg, UserId(0), ItemId(0), TagId(0));
        assert!((s - 0.8625).abs() < 1e-12, "{s}");
        let scorer = Strec::new(&f, &g, cfg).unwrap();
        let top = top_candidates(&scorer, UserId(0), ItemId(0), 5);
        assert_eq!(top.entries()[0].tag, TagId(0));
        assert_eq!(top.entries()[0].score, s);
        assert_eq!(top.len(), 2);
    }

    #[test]
    fn alpha_one_is_tf() {
        let (f, g) = fixture();
        let cfg = StrecConfig {
            alpha: 1.0,
            ..Default::default()
        };
        for t in 0..2 {
            assert_eq!(
                strec_score(&f, &g, &cfg, UserId(0), ItemId(0), TagId(t)),
                f.tf(TagId(t), ItemId(0)) as f64
            );
        }
    }

    #[test]
    fn single_neighbour_social_frequency() {
        let f = Folksonomy::build(&[Triple::new(1, 0, 0), Triple::new(0, 1, 0)]);
        let g = SocialGraph::from_edges(2, &[(UserId(0), UserId(1), 0.7)]).unwrap();
        let cfg = StrecConfig {
            alpha: 0.0,
            ..Default::default()
        };
        assert_eq!(
            strec_score(&f, &g, &cfg, UserId(0), ItemId(0), TagId(0)),
            0.7
        );
    }

    #[test]
    fn alpha_out_of_range() {
        let (f, g) = fixture();
        let cfg = StrecConfig {
            alpha: 1.5,
            ..Default::default()
        };
        assert!(Strec::new(&f, &g, cfg).is_err());
    }

    #[test]
    fn unknown_tag_scores_zero() {
        let (f, g) = fixture();
        assert_eq!(
            strec_score(&f, &g, &Default::default(), UserId(0), ItemId(0), TagId(99)),
            0.0
        );
    }
}

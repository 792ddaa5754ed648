//! Base tag recommenders and the shared top-K selection.
//!
//! Every recommender implements [`TagScorer`]: it scores one post's
//! candidate universe, and [`top_candidates`] turns that into a
//! [`RankedTags`] list ordered by descending score, ties broken by ascending
//! tag id.

mod baseline;
mod pitf;
mod strec;

pub use baseline::{baseline_score, Baseline};
pub use pitf::{
    pairwise_gradient, pairwise_loss, pitf_score, pitf_train, FactorModel, PairwiseGradient,
    PairwiseSample, Pitf, TrainConfig,
};
pub use strec::{strec_score, Strec, StrecConfig};

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::ids::{ItemId, TagId, UserId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredTag {
    pub tag: TagId,
    pub score: f64,
}

impl ScoredTag {
    pub fn new(tag: TagId, score: f64) -> Self {
        ScoredTag { tag, score }
    }
}

/// Descending score, then ascending tag id.
pub fn ranking_order(a: &ScoredTag, b: &ScoredTag) -> Ordering {
    b.score.total_cmp(&a.score).then(a.tag.cmp(&b.tag))
}

/// A ranked candidate list: sorted by [`ranking_order`], no duplicate tags,
/// finite scores.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RankedTags {
    entries: Vec<ScoredTag>,
}

impl RankedTags {
    /// Sorts `entries` into ranking order. Duplicate tags or non-finite scores
    /// are rejected.
    pub fn from_scores(entries: Vec<ScoredTag>) -> Result<RankedTags> {
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if !e.score.is_finite() {
                return Err(Error::Ranking(format!(
                    "tag {} has non-finite score {}",
                    e.tag, e.score
                )));
            }
            if !seen.insert(e.tag) {
                return Err(Error::Ranking(format!("tag {} appears twice", e.tag)));
            }
        }
        Ok(Self::sorted(entries))
    }

    /// Caller guarantees uniqueness and finiteness.
    pub(crate) fn sorted(mut entries: Vec<ScoredTag>) -> RankedTags {
        entries.sort_by(ranking_order);
        RankedTags { entries }
    }

    pub fn entries(&self) -> &[ScoredTag] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The first `min(k, len)` entries.
    pub fn top(&self, k: usize) -> &[ScoredTag] {
        &self.entries[..k.min(self.entries.len())]
    }

    pub fn truncated(&self, k: usize) -> RankedTags {
        RankedTags {
            entries: self.top(k).to_vec(),
        }
    }

    pub fn tags(&self) -> impl Iterator<Item = TagId> + '_ {
        self.entries.iter().map(|e| e.tag)
    }

    pub fn is_non_negative(&self) -> bool {
        self.entries.iter().all(|e| e.score >= 0.0)
    }
}

/// A recommender that scores the candidate tags of a post.
pub trait TagScorer: Sync {
    /// Scores for every tag in this scorer's candidate universe for `(u, i)`.
    /// Tags left out are those whose score is known to be zero.
    fn candidates(&self, u: UserId, i: ItemId) -> Vec<ScoredTag>;

    fn score(&self, u: UserId, i: ItemId, t: TagId) -> f64;
}

impl<S: TagScorer + ?Sized> TagScorer for &S {
    fn candidates(&self, u: UserId, i: ItemId) -> Vec<ScoredTag> {
        (**self).candidates(u, i)
    }

    fn score(&self, u: UserId, i: ItemId, t: TagId) -> f64 {
        (**self).score(u, i, t)
    }
}

impl<S: TagScorer + ?Sized> TagScorer for Box<S> {
    fn candidates(&self, u: UserId, i: ItemId) -> Vec<ScoredTag> {
        (**self).candidates(u, i)
    }

    fn score(&self, u: UserId, i: ItemId, t: TagId) -> f64 {
        (**self).score(u, i, t)
    }
}

/// `Top(u, i, n)`: the `n` best candidates of the scorer for post `(u, i)`.
pub fn top_candidates<S: TagScorer + ?Sized>(
    scorer: &S,
    u: UserId,
    i: ItemId,
    n: usize,
) -> RankedTags {
    top_n(scorer.candidates(u, i), n)
}

/// Partial selection of the `n` best entries, returned in ranking order.
pub fn top_n(mut entries: Vec<ScoredTag>, n: usize) -> RankedTags {
    if n == 0 {
        return RankedTags::default();
    }
    if entries.len() > n {
        entries.select_nth_unstable_by(n - 1, ranking_order);
        entries.truncate(n);
    }
    RankedTags::sorted(entries)
}

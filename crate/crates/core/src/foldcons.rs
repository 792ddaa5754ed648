//! Association-confidence re-ranking of a base recommender's candidate list.
//!
//! The pairwise confidence from tag `t` to tag `t'` combines how many of
//! `t`'s users and items also carry `t'`:
//!
//! ```text
//! PCM(t → t') = |U(t) ∩ U(t')| / |U(t)| + |I(t) ∩ I(t')| / |I(t)|
//! ```
//!
//! Each candidate is rescored as `(1 + PCM(ref → t)) · score(t)` where `ref`
//! is the top candidate (or a mean over several references), and the list is
//! sorted again. By default the two-term sum is halved and the multiplier
//! stays in `[1, 2]`.

use std::collections::HashMap;

use crate::corpus::Folksonomy;
use crate::error::{Error, Result};
use crate::ids::TagId;
use crate::recommend::{RankedTags, ScoredTag};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PcmDimensions {
    Item,
    User,
    #[default]
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PcmConfig {
    pub dimensions: PcmDimensions,
    /// Halve the two-term sum. Ignored for a single dimension.
    pub normalize: bool,
    /// Number of leading candidates used as references.
    pub references: usize,
}

impl Default for PcmConfig {
    fn default() -> Self {
        PcmConfig {
            dimensions: PcmDimensions::Both,
            normalize: true,
            references: 1,
        }
    }
}

impl PcmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.references == 0 {
            return Err(Error::Config("reference count must be at least 1".into()));
        }
        Ok(())
    }

    /// Upper bound of `1 + PCM`.
    pub fn max_multiplier(&self) -> f64 {
        if self.dimensions == PcmDimensions::Both && !self.normalize {
            3.0
        } else {
            2.0
        }
    }
}

/// The integer counts behind one PCM value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PcmTerms {
    pub user_common: usize,
    pub user_total: usize,
    pub item_common: usize,
    pub item_total: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl PcmTerms {
    pub fn value(&self, cfg: &PcmConfig) -> f64 {
        let user = ratio(self.user_common, self.user_total);
        let item = ratio(self.item_common, self.item_total);
        match cfg.dimensions {
            PcmDimensions::User => user,
            PcmDimensions::Item => item,
            PcmDimensions::Both if cfg.normalize => (user + item) / 2.0,
            PcmDimensions::Both => user + item,
        }
    }
}

fn intersection_size<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn pcm_terms(train: &Folksonomy, t: TagId, t2: TagId) -> PcmTerms {
    let (ut, ut2) = (train.users_of_tag(t), train.users_of_tag(t2));
    let (it, it2) = (train.items_of_tag(t), train.items_of_tag(t2));
    PcmTerms {
        user_common: intersection_size(ut, ut2),
        user_total: ut.len(),
        item_common: intersection_size(it, it2),
        item_total: it.len(),
    }
}

/// `PCM(t → t2)`; a fraction with an empty denominator counts as 0.
pub fn pcm(train: &Folksonomy, t: TagId, t2: TagId, cfg: &PcmConfig) -> f64 {
    pcm_terms(train, t, t2).value(cfg)
}

/// Source of reference-to-candidate confidences.
pub trait Confidence {
    fn confidence(&mut self, reference: TagId, candidate: TagId) -> f64;

    /// Upper bound of `1 + confidence`, used by pruning.
    fn max_multiplier(&self) -> f64;
}

/// PCM computed lazily from the corpus, memoised per `(reference, candidate)`.
pub struct CorpusConfidence<'a> {
    train: &'a Folksonomy,
    cfg: PcmConfig,
    memo: HashMap<(TagId, TagId), f64>,
}

impl<'a> CorpusConfidence<'a> {
    pub fn new(train: &'a Folksonomy, cfg: PcmConfig) -> Self {
        CorpusConfidence {
            train,
            cfg,
            memo: HashMap::new(),
        }
    }
}

impl Confidence for CorpusConfidence<'_> {
    fn confidence(&mut self, reference: TagId, candidate: TagId) -> f64 {
        let (train, cfg) = (self.train, &self.cfg);
        *self
            .memo
            .entry((reference, candidate))
            .or_insert_with(|| pcm(train, reference, candidate, cfg))
    }

    fn max_multiplier(&self) -> f64 {
        self.cfg.max_multiplier()
    }
}

/// The same confidence for every pair. A control for ablations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantConfidence(pub f64);

impl Confidence for ConstantConfidence {
    fn confidence(&mut self, _: TagId, _: TagId) -> f64 {
        self.0
    }

    fn max_multiplier(&self) -> f64 {
        1.0 + self.0.max(0.0)
    }
}

/// Which candidates act as references.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum References {
    /// The first `m` candidates; the multiplier uses their mean confidence.
    Leading(usize),
    /// The single candidate at this 1-based position.
    Position(usize),
}

impl References {
    pub fn resolve(self, d: &RankedTags) -> Result<Vec<TagId>> {
        if d.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        match self {
            References::Leading(0) => {
                Err(Error::Config("reference count must be at least 1".into()))
            }
            References::Leading(m) => Ok(d.tags().take(m).collect()),
            References::Position(p) if p == 0 || p > d.len() => Err(Error::OutOfRange {
                what: "reference position",
                index: p,
                bound: d.len(),
            }),
            References::Position(p) => Ok(vec![d.entries()[p - 1].tag]),
        }
    }

    /// How many leading entries pruning must keep for these references to
    /// survive it.
    fn depth(self) -> usize {
        match self {
            References::Leading(m) | References::Position(m) => m,
        }
    }
}

/// Drops every entry scoring below `score(d[k]) / 2`. Such entries cannot
/// reach the top `k` when the multiplier is at most 2. A no-op when
/// `|d| <= k` or when any score is negative.
pub fn prune(d: &RankedTags, k: usize) -> RankedTags {
    prune_with_bound(d, k, 2.0)
}

/// As [`prune`] for multipliers bounded by `max_multiplier`.
pub fn prune_with_bound(d: &RankedTags, k: usize, max_multiplier: f64) -> RankedTags {
    if k == 0 || d.len() <= k || !d.is_non_negative() {
        return d.clone();
    }
    // Compared as a product so the bound holds under rounding.
    let last = d.entries()[k - 1].score;
    RankedTags::sorted(
        d.entries()
            .iter()
            .copied()
            .filter(|e| e.score * max_multiplier >= last)
            .collect(),
    )
}

/// One candidate's rescoring, for inspection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rescored {
    pub tag: TagId,
    pub score: f64,
    /// Mean confidence from the references.
    pub confidence: f64,
    pub boosted: f64,
}

/// Rescores every entry of `d` against `refs` without sorting.
pub fn rescore<C: Confidence + ?Sized>(
    conf: &mut C,
    d: &RankedTags,
    refs: &[TagId],
) -> Vec<Rescored> {
    d.entries()
        .iter()
        .map(|e| {
            let total: f64 = refs.iter().map(|&r| conf.confidence(r, e.tag)).sum();
            let confidence = if refs.is_empty() {
                0.0
            } else {
                total / refs.len() as f64
            };
            Rescored {
                tag: e.tag,
                score: e.score,
                confidence,
                boosted: (1.0 + confidence) * e.score,
            }
        })
        .collect()
}

/// Rescores `d` against `refs`, sorts by boosted score and keeps `k`.
pub fn rerank_by<C: Confidence + ?Sized>(
    conf: &mut C,
    d: &RankedTags,
    refs: &[TagId],
    k: usize,
) -> RankedTags {
    let boosted = rescore(conf, d, refs)
        .into_iter()
        .map(|r| ScoredTag::new(r.tag, r.boosted))
        .collect();
    crate::recommend::top_n(boosted, k)
}

/// Prunes `d` for `k`, then rescores against `refs` and keeps `k`. The
/// references must be chosen from `d` before pruning.
pub fn fold_by<C: Confidence + ?Sized>(
    conf: &mut C,
    d: &RankedTags,
    refs: References,
    k: usize,
) -> Result<RankedTags> {
    let tags = refs.resolve(d)?;
    let pruned = prune_with_bound(d, k.max(refs.depth()), conf.max_multiplier());
    Ok(rerank_by(conf, &pruned, &tags, k))
}

/// Re-ranks `d` with the first `cfg.references` entries as references.
pub fn rerank(train: &Folksonomy, d: &RankedTags, k: usize, cfg: &PcmConfig) -> Result<RankedTags> {
    cfg.validate()?;
    let refs = References::Leading(cfg.references).resolve(d)?;
    Ok(rerank_by(
        &mut CorpusConfidence::new(train, *cfg),
        d,
        &refs,
        k,
    ))
}

/// Re-ranks `d` against the single reference at 1-based `ref_position`.
pub fn rerank_with_reference(
    train: &Folksonomy,
    d: &RankedTags,
    k: usize,
    cfg: &PcmConfig,
    ref_position: usize,
) -> Result<RankedTags> {
    let refs = References::Position(ref_position).resolve(d)?;
    Ok(rerank_by(
        &mut CorpusConfidence::new(train, *cfg),
        d,
        &refs,
        k,
    ))
}

/// Which profiles measure the re-ranker's contribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileSide {
    User,
    Item,
    Both,
}

/// Profile tags (sorted) hit by the first `k` entries of `list`.
fn overlap(
    list: &RankedTags,
    k: usize,
    user_prof: &[TagId],
    item_prof: &[TagId],
    which: ProfileSide,
) -> i64 {
    let hits = |prof: &[TagId]| {
        list.top(k)
            .iter()
            .filter(|e| prof.binary_search(&e.tag).is_ok())
            .count() as i64
    };
    match which {
        ProfileSide::User => hits(user_prof),
        ProfileSide::Item => hits(item_prof),
        ProfileSide::Both => hits(user_prof) + hits(item_prof),
    }
}

/// Change in profile overlap of the top `k` from `before` to `after`.
/// Profiles must be sorted ascending.
pub fn contribution(
    before: &RankedTags,
    after: &RankedTags,
    k: usize,
    user_prof: &[TagId],
    item_prof: &[TagId],
    which: ProfileSide,
) -> i64 {
    overlap(after, k, user_prof, item_prof, which) - overlap(before, k, user_prof, item_prof, which)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RerankOutcome {
    pub final_tags: RankedTags,
    /// Whether the re-ranked list replaced the original order.
    pub applied: bool,
    /// Contribution of the re-ranked list, whether or not it was kept.
    pub contribution: i64,
}

/// Keeps `reranked` only if it strictly increases profile overlap over the
/// top `k` of `d`; otherwise returns the top `k` of `d`.
pub fn guard(
    d: &RankedTags,
    reranked: &RankedTags,
    k: usize,
    user_prof: &[TagId],
    item_prof: &[TagId],
    which: ProfileSide,
) -> RerankOutcome {
    let c = contribution(d, reranked, k, user_prof, item_prof, which);
    RerankOutcome {
        final_tags: if c > 0 {
            reranked.truncated(k)
        } else {
            d.truncated(k)
        },
        applied: c > 0,
        contribution: c,
    }
}

/// [`rerank`] gated by [`guard`].
pub fn adapted_rerank(
    train: &Folksonomy,
    d: &RankedTags,
    k: usize,
    cfg: &PcmConfig,
    user_prof: &[TagId],
    item_prof: &[TagId],
    which: ProfileSide,
) -> Result<RerankOutcome> {
    let reranked = rerank(train, d, k, cfg)?;
    Ok(guard(d, &reranked, k, user_prof, item_prof, which))
}

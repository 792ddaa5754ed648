//! The experimental protocol: F1@K sweeps over a test split, gains between
//! configurations and the reference, multi-reference and dimension studies.
//!
//! Test posts are evaluated independently (in parallel when more than one
//! worker is available) and aggregated in post order, so reports do not
//! depend on the worker count.

mod metrics;
mod report;
mod study;

pub use metrics::{f1_at_k, gain, Gain};
pub use report::{posts_jsonl, report_table, study_table, Table};
pub use study::{
    run_dimension_study, run_multi_reference_study, run_reference_tag_study, run_study, StudyKind,
    StudyTable,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::Settings;
use crate::corpus::{Folksonomy, Split, TestPost};
use crate::error::{Error, Result};
use crate::foldcons::{
    contribution, fold_by, guard, ConstantConfidence, CorpusConfidence, PcmConfig, ProfileSide,
    References,
};
use crate::graph::{build_dice_graph, SocialGraph};
use crate::ids::{ItemId, TagId, UserId};
use crate::recommend::{
    pitf_train, top_candidates, Baseline, FactorModel, Pitf, RankedTags, ScoredTag, Strec,
    StrecConfig, TagScorer, TrainConfig,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RecommenderKind {
    #[default]
    Strec,
    Pitf,
    Baseline,
}

impl FromStr for RecommenderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strec" => Ok(RecommenderKind::Strec),
            "pitf" => Ok(RecommenderKind::Pitf),
            "baseline" => Ok(RecommenderKind::Baseline),
            _ => Err(Error::Config(format!(
                "unknown recommender '{s}' (strec|pitf|baseline)"
            ))),
        }
    }
}

impl fmt::Display for RecommenderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecommenderKind::Strec => "strec",
            RecommenderKind::Pitf => "pitf",
            RecommenderKind::Baseline => "baseline",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecommenderConfig {
    pub kind: RecommenderKind,
    pub strec: StrecConfig,
    /// Dice edges below this weight are dropped from the social graph.
    pub min_proximity: f64,
    pub pitf: TrainConfig,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            kind: RecommenderKind::default(),
            strec: StrecConfig::default(),
            min_proximity: 0.0,
            pitf: TrainConfig::default(),
        }
    }
}

impl RecommenderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_proximity) {
            return Err(Error::Config(format!(
                "min_proximity {} outside [0, 1]",
                self.min_proximity
            )));
        }
        match self.kind {
            RecommenderKind::Strec => self.strec.validate(),
            RecommenderKind::Pitf => self.pitf.validate(),
            RecommenderKind::Baseline => Ok(()),
        }
    }
}

/// A base recommender fitted to a training folksonomy.
pub enum Recommender<'a> {
    Strec {
        train: &'a Folksonomy,
        graph: SocialGraph,
        cfg: StrecConfig,
    },
    Pitf(FactorModel),
    Baseline(&'a Folksonomy),
}

impl<'a> Recommender<'a> {
    /// Builds the social graph or trains the factor model as needed.
    pub fn fit(train: &'a Folksonomy, cfg: &RecommenderConfig) -> Result<Recommender<'a>> {
        cfg.validate()?;
        Ok(match cfg.kind {
            RecommenderKind::Strec => Recommender::Strec {
                train,
                graph: build_dice_graph(train, cfg.min_proximity),
                cfg: cfg.strec,
            },
            RecommenderKind::Pitf => Recommender::Pitf(pitf_train(train, &cfg.pitf)?),
            RecommenderKind::Baseline => Recommender::Baseline(train),
        })
    }
}

impl TagScorer for Recommender<'_> {
    fn candidates(&self, u: UserId, i: ItemId) -> Vec<ScoredTag> {
        match self {
            Recommender::Strec { train, graph, cfg } => Strec {
                train,
                graph,
                cfg: *cfg,
            }
            .candidates(u, i),
            Recommender::Pitf(model) => Pitf::new(model).candidates(u, i),
            Recommender::Baseline(train) => Baseline::new(train).candidates(u, i),
        }
    }

    fn score(&self, u: UserId, i: ItemId, t: TagId) -> f64 {
        match self {
            Recommender::Strec { train, graph, cfg } => Strec {
                train,
                graph,
                cfg: *cfg,
            }
            .score(u, i, t),
            Recommender::Pitf(model) => Pitf::new(model).score(u, i, t),
            Recommender::Baseline(train) => Baseline::new(train).score(u, i, t),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RerankMode {
    #[default]
    None,
    FoldCons,
    /// FoldCons kept only when it improves profile overlap.
    Adapted,
}

impl FromStr for RerankMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(RerankMode::None),
            "foldcons" => Ok(RerankMode::FoldCons),
            "adapted" => Ok(RerankMode::Adapted),
            _ => Err(Error::Config(format!(
                "unknown re-ranker '{s}' (none|foldcons|adapted)"
            ))),
        }
    }
}

impl fmt::Display for RerankMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RerankMode::None => "none",
            RerankMode::FoldCons => "foldcons",
            RerankMode::Adapted => "adapted",
        })
    }
}

/// Where re-ranking confidences come from.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum ConfidenceSource {
    #[default]
    Corpus,
    /// Every pair gets this confidence.
    Constant(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RerankSpec {
    pub mode: RerankMode,
    pub pcm: PcmConfig,
    /// Use the single candidate at this 1-based position as reference
    /// instead of the first `pcm.references` candidates.
    pub reference_position: Option<usize>,
    pub profile: ProfileSide,
    pub confidence: ConfidenceSource,
}

impl Default for RerankSpec {
    fn default() -> Self {
        RerankSpec {
            mode: RerankMode::None,
            pcm: PcmConfig::default(),
            reference_position: None,
            profile: ProfileSide::Both,
            confidence: ConfidenceSource::Corpus,
        }
    }
}

impl RerankSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn foldcons(pcm: PcmConfig) -> Self {
        RerankSpec {
            mode: RerankMode::FoldCons,
            pcm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pcm.validate()?;
        if self.reference_position == Some(0) {
            return Err(Error::Config("reference position is 1-based".into()));
        }
        if let ConfidenceSource::Constant(c) = self.confidence {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Config(format!(
                    "constant confidence {c} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    /// The reference choice: `reference_position` if set, else the leading
    /// `pcm.references` candidates.
    pub fn references(&self) -> References {
        match self.reference_position {
            Some(p) => References::Position(p),
            None => References::Leading(self.pcm.references),
        }
    }

    /// A short name for report rows.
    pub fn label(&self) -> String {
        let mut s = self.mode.to_string();
        if self.mode != RerankMode::None {
            match self.reference_position {
                Some(p) => s.push_str(&format!(" ref={p}")),
                None if self.pcm.references != 1 => {
                    s.push_str(&format!(" m={}", self.pcm.references))
                }
                None => {}
            }
            if self.pcm.dimensions != Default::default() {
                s.push_str(&format!(" dims={}", self.pcm.dimensions));
            }
            if let ConfidenceSource::Constant(c) = self.confidence {
                s.push_str(&format!(" pcm={c}"));
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub k_min: usize,
    pub k_max: usize,
    /// Candidates requested from the base recommender per post.
    pub pool: usize,
    /// Seed of the random split and of PITF training.
    pub seed: u64,
    pub recommender: RecommenderConfig,
    pub rerank: RerankSpec,
    /// 0 uses all available cores.
    pub workers: usize,
    pub record_posts: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k_min: 5,
            k_max: 10,
            pool: 50,
            seed: 0,
            recommender: RecommenderConfig::default(),
            rerank: RerankSpec::default(),
            workers: 0,
            record_posts: false,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(Error::Config(format!(
                "bad k range {}..{}",
                self.k_min, self.k_max
            )));
        }
        if self.pool < self.k_max {
            return Err(Error::Config(format!(
                "candidate pool {} is smaller than the largest cutoff {}",
                self.pool, self.k_max
            )));
        }
        self.recommender.validate()?;
        self.rerank.validate()
    }

    pub fn ks(&self) -> Vec<usize> {
        (self.k_min..=self.k_max).collect()
    }

    /// Defaults overlaid with `s`. `pitf.seed` falls back to `eval.seed`,
    /// `eval.pool` to `5 * eval.k_max`, and `eval.profile` to `user` for
    /// STRec and `both` for the other recommenders.
    pub fn from_settings(s: &Settings) -> Result<EvalConfig> {
        let mut cfg = EvalConfig::default();
        if let Some(v) = s.get_parsed("eval.k_min")? {
            cfg.k_min = v;
        }
        if let Some(v) = s.get_parsed("eval.k_max")? {
            cfg.k_max = v;
        }
        cfg.pool = match s.get_parsed("eval.pool")? {
            Some(v) => v,
            None => 5 * cfg.k_max,
        };
        if let Some(v) = s.get_parsed("eval.seed")? {
            cfg.seed = v;
        }
        if let Some(v) = s.get_parsed("eval.recommender")? {
            cfg.recommender.kind = v;
        }
        if let Some(v) = s.get_parsed("eval.workers")? {
            cfg.workers = v;
        }
        if let Some(v) = s.get_parsed("graph.min_proximity")? {
            cfg.recommender.min_proximity = v;
        }
        cfg.recommender.strec = StrecConfig::from_settings(s)?;
        cfg.recommender.pitf = TrainConfig::from_settings(s)?;
        if s.get("pitf.seed").is_none() {
            cfg.recommender.pitf.seed = cfg.seed;
        }
        let mut rerank = RerankSpec {
            pcm: PcmConfig::from_settings(s)?,
            ..RerankSpec::default()
        };
        if let Some(v) = s.get_parsed("eval.rerank")? {
            rerank.mode = v;
        }
        rerank.profile = match s.get_parsed("eval.profile")? {
            Some(v) => v,
            None if cfg.recommender.kind == RecommenderKind::Strec => ProfileSide::User,
            None => ProfileSide::Both,
        };
        cfg.rerank = rerank;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The resolved configuration, one key per setting.
    pub fn to_settings(&self) -> Settings {
        let mut s = Settings::new();
        s.set("eval.k_min", self.k_min);
        s.set("eval.k_max", self.k_max);
        s.set("eval.pool", self.pool);
        s.set("eval.seed", self.seed);
        s.set("eval.recommender", self.recommender.kind);
        s.set("eval.rerank", self.rerank.mode);
        s.set("eval.profile", self.rerank.profile);
        s.set("eval.workers", self.workers);
        s.set("graph.min_proximity", self.recommender.min_proximity);
        self.recommender.strec.write_settings(&mut s);
        self.recommender.pitf.write_settings(&mut s);
        self.rerank.pcm.write_settings(&mut s);
        s
    }
}

/// One cutoff of one post.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffRecord {
    pub k: usize,
    pub recommended: Vec<TagId>,
    pub f1: f64,
    /// Whether a re-ranked list was emitted.
    pub applied: bool,
    /// Profile overlap of the emitted list minus that of the original top-k.
    pub contribution: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PostRecord {
    /// Position in the split's test list.
    pub post: usize,
    pub user: UserId,
    pub item: ItemId,
    pub truth: Vec<TagId>,
    /// User or item absent from training.
    pub unknown: bool,
    pub cutoffs: Vec<CutoffRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub label: String,
    pub ks: Vec<usize>,
    /// Mean F1 over posts, per cutoff.
    pub f1: Vec<f64>,
    pub posts: usize,
    pub unknown_posts: usize,
    /// Posts whose emitted list was re-ranked, per cutoff.
    pub applied: Vec<usize>,
    /// Posts whose emitted list lost profile overlap, per cutoff.
    pub negative_contributions: Vec<usize>,
    /// Filled when per-post recording is on.
    pub records: Vec<PostRecord>,
}

impl EvalReport {
    pub fn f1_at(&self, k: usize) -> Option<f64> {
        self.ks.iter().position(|&x| x == k).map(|p| self.f1[p])
    }
}

/// Fits the configured recommender on `split.train` and evaluates
/// `cfg.rerank` over the test posts.
pub fn evaluate(split: &Split, cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let rec = Recommender::fit(&split.train, &cfg.recommender)?;
    let mut reports = evaluate_variants(split, &rec, cfg, &[cfg.rerank])?;
    Ok(reports.remove(0))
}

/// Evaluates several re-rank settings over the same candidate lists. Reports
/// come back in the order of `specs`; `cfg.rerank` is ignored.
pub fn evaluate_variants<S: TagScorer + ?Sized>(
    split: &Split,
    scorer: &S,
    cfg: &EvalConfig,
    specs: &[RerankSpec],
) -> Result<Vec<EvalReport>> {
    cfg.validate()?;
    for spec in specs {
        spec.validate()?;
    }
    let ks = cfg.ks();
    let run = || -> Vec<Vec<PostRecord>> {
        split
            .test
            .par_iter()
            .enumerate()
            .map(|(n, post)| evaluate_post(&split.train, scorer, cfg, specs, &ks, n, post))
            .collect()
    };
    let per_post = if cfg.workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(run)
    };

    let mut reports: Vec<EvalReport> = specs
        .iter()
        .map(|spec| EvalReport {
            label: spec.label(),
            ks: ks.clone(),
            f1: vec![0.0; ks.len()],
            posts: split.test.len(),
            unknown_posts: 0,
            applied: vec![0; ks.len()],
            negative_contributions: vec![0; ks.len()],
            records: Vec::new(),
        })
        .collect();
    for post in per_post {
        for (report, record) in reports.iter_mut().zip(post) {
            report.unknown_posts += record.unknown as usize;
            for (c, cut) in record.cutoffs.iter().enumerate() {
                report.f1[c] += cut.f1;
                report.applied[c] += cut.applied as usize;
                report.negative_contributions[c] += (cut.contribution < 0) as usize;
            }
            if cfg.record_posts {
                report.records.push(record);
            }
        }
    }
    if !split.test.is_empty() {
        for report in &mut reports {
            for f in &mut report.f1 {
                *f /= split.test.len() as f64;
            }
        }
    }
    Ok(reports)
}

/// Candidates for a post, empty when its user or item is unknown to `train`.
fn candidates_for<S: TagScorer + ?Sized>(
    train: &Folksonomy,
    scorer: &S,
    u: UserId,
    i: ItemId,
    pool: usize,
) -> RankedTags {
    if !train.has_user(u) || !train.has_item(i) {
        return RankedTags::default();
    }
    top_candidates(scorer, u, i, pool)
}

/// The re-ranked top `k` of `d`, or `None` for no re-ranking or when the
/// references cannot be taken from `d` (an empty list, or one shorter than
/// the reference position); the post then keeps its original order.
fn rerank_candidates(
    train: &Folksonomy,
    d: &RankedTags,
    spec: &RerankSpec,
    k: usize,
) -> Option<RankedTags> {
    match (spec.mode, spec.confidence) {
        (RerankMode::None, _) => None,
        (_, ConfidenceSource::Corpus) => fold_by(
            &mut CorpusConfidence::new(train, spec.pcm),
            d,
            spec.references(),
            k,
        )
        .ok(),
        (_, ConfidenceSource::Constant(c)) => {
            fold_by(&mut ConstantConfidence(c), d, spec.references(), k).ok()
        }
    }
}

/// The list emitted at cutoff `k`, and whether it is the re-ranked one.
fn emitted(
    train: &Folksonomy,
    d: &RankedTags,
    reranked: Option<&RankedTags>,
    spec: &RerankSpec,
    k: usize,
    u: UserId,
    i: ItemId,
) -> (RankedTags, bool) {
    match (reranked, spec.mode) {
        (Some(r), RerankMode::Adapted) => {
            let out = guard(
                d,
                r,
                k,
                train.user_profile(u),
                train.item_profile(i),
                spec.profile,
            );
            (out.final_tags, out.applied)
        }
        (Some(r), _) => (r.truncated(k), true),
        (None, _) => (d.truncated(k), false),
    }
}

/// The final top `k` for one post: `pool` candidates from `scorer`,
/// re-ranked as `spec` says. Returns the candidates too, and whether the
/// re-ranked order was emitted.
pub fn recommend_post<S: TagScorer + ?Sized>(
    train: &Folksonomy,
    scorer: &S,
    spec: &RerankSpec,
    u: UserId,
    i: ItemId,
    pool: usize,
    k: usize,
) -> Result<(RankedTags, RankedTags, bool)> {
    spec.validate()?;
    let d = candidates_for(train, scorer, u, i, pool.max(k));
    let reranked = rerank_candidates(train, &d, spec, k);
    let (list, applied) = emitted(train, &d, reranked.as_ref(), spec, k, u, i);
    Ok((list, d, applied))
}

fn evaluate_post<S: TagScorer + ?Sized>(
    train: &Folksonomy,
    scorer: &S,
    cfg: &EvalConfig,
    specs: &[RerankSpec],
    ks: &[usize],
    n: usize,
    post: &TestPost,
) -> Vec<PostRecord> {
    let (u, i) = (post.user, post.item);
    let unknown = !train.has_user(u) || !train.has_item(i);
    let d = candidates_for(train, scorer, u, i, cfg.pool);
    let (user_prof, item_prof) = (train.user_profile(u), train.item_profile(i));
    let k_max = *ks.last().expect("non-empty k range");

    specs
        .iter()
        .map(|spec| {
            let reranked = rerank_candidates(train, &d, spec, k_max);
            let cutoffs = ks
                .iter()
                .map(|&k| {
                    let (list, applied) = emitted(train, &d, reranked.as_ref(), spec, k, u, i);
                    CutoffRecord {
                        k,
                        f1: f1_at_k(&list, &post.tags, k).unwrap_or(0.0),
                        contribution: contribution(
                            &d,
                            &list,
                            k,
                            user_prof,
                            item_prof,
                            spec.profile,
                        ),
                        recommended: list.tags().collect(),
                        applied,
                    }
                })
                .collect();
            PostRecord {
                post: n,
                user: u,
                item: i,
                truth: post.tags.clone(),
                unknown,
                cutoffs,
            }
        })
        .collect()
}

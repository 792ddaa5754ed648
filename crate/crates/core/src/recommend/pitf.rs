//! Pairwise interaction tensor factorization.
//!
//! ```text
//! score(t | u, i) = <U[u], TU[t]> + <I[i], TI[t]>
//! ```
//!
//! Trained with stochastic pairwise ranking: for a post `(u, i)`, an
//! observed tag `t+` and an unobserved tag `t-`, minimise
//! `-ln σ(score(t+) − score(t-)) + λ/2 · ‖θ‖²` over the six factor rows the
//! sample touches.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{ScoredTag, TagScorer};
use crate::corpus::Folksonomy;
use crate::error::{Error, Result};
use crate::ids::{ItemId, TagId, UserId};

const MAGIC: &[u8; 8] = b"FCPITF\0\0";
const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Factor dimension.
    pub dim: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    /// Passes over the data; one pass is as many sampled steps as there are
    /// training triples.
    pub iterations: usize,
    pub init_stddev: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 64,
            learning_rate: 0.05,
            regularization: 5e-5,
            iterations: 2000,
            init_stddev: 0.01,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("factor dimension must be positive".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.regularization.is_nan() || self.regularization < 0.0 {
            return Err(Error::Config("regularization must be non-negative".into()));
        }
        if self.init_stddev.is_nan() || self.init_stddev <= 0.0 {
            return Err(Error::Config("init stddev must be positive".into()));
        }
        Ok(())
    }
}

/// The four factor matrices, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorModel {
    users: usize,
    items: usize,
    tags: usize,
    dim: usize,
    user_factors: Vec<f64>,
    item_factors: Vec<f64>,
    tag_user_factors: Vec<f64>,
    tag_item_factors: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check(what: &'static str, index: usize, bound: usize) -> Result<()> {
    if index < bound {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, index, bound })
    }
}

impl FactorModel {
    pub fn zeros(users: usize, items: usize, tags: usize, dim: usize) -> FactorModel {
        FactorModel {
            users,
            items,
            tags,
            dim,
            user_factors: vec![0.0; users * dim],
            item_factors: vec![0.0; items * dim],
            tag_user_factors: vec![0.0; tags * dim],
            tag_item_factors: vec![0.0; tags * dim],
        }
    }

    /// Gaussian initialisation; the matrices are filled in the order user,
    /// item, tag-user, tag-item.
    pub fn random<R: Rng>(
        users: usize,
        items: usize,
        tags: usize,
        dim: usize,
        stddev: f64,
        rng: &mut R,
    ) -> Result<FactorModel> {
        let normal = Normal::new(0.0, stddev).map_err(|e| Error::Config(e.to_string()))?;
        let mut m = FactorModel::zeros(users, items, tags, dim);
        for matrix in [
            &mut m.user_factors,
            &mut m.item_factors,
            &mut m.tag_user_factors,
            &mut m.tag_item_factors,
        ] {
            for x in matrix.iter_mut() {
                *x = normal.sample(rng);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.users, self.items, self.tags)
    }

    pub fn user_row(&self, u: UserId) -> &[f64] {
        &self.user_factors[u.index() * self.dim..(u.index() + 1) * self.dim]
    }

    pub fn item_row(&self, i: ItemId) -> &[f64] {
        &self.item_factors[i.index() * self.dim..(i.index() + 1) * self.dim]
    }

    pub fn tag_user_row(&self, t: TagId) -> &[f64] {
        &self.tag_user_factors[t.index() * self.dim..(t.index() + 1) * self.dim]
    }

    pub fn tag_item_row(&self, t: TagId) -> &[f64] {
        &self.tag_item_factors[t.index() * self.dim..(t.index() + 1) * self.dim]
    }

    pub fn user_row_mut(&mut self, u: UserId) -> &mut [f64] {
        let d = self.dim;
        &mut self.user_factors[u.index() * d..(u.index() + 1) * d]
    }

    pub fn item_row_mut(&mut self, i: ItemId) -> &mut [f64] {
        let d = self.dim;
        &mut self.item_factors[i.index() * d..(i.index() + 1) * d]
    }

    pub fn tag_user_row_mut(&mut self, t: TagId) -> &mut [f64] {
        let d = self.dim;
        &mut self.tag_user_factors[t.index() * d..(t.index() + 1) * d]
    }

    pub fn tag_item_row_mut(&mut self, t: TagId) -> &mut [f64] {
        let d = self.dim;
        &mut self.tag_item_factors[t.index() * d..(t.index() + 1) * d]
    }

    fn score_unchecked(&self, u: UserId, i: ItemId, t: TagId) -> f64 {
        dot(self.user_row(u), self.tag_user_row(t)) + dot(self.item_row(i), self.tag_item_row(t))
    }

    /// Multiplies every factor by `factor`; scores scale by `factor²`.
    pub fn scale(&mut self, factor: f64) {
        for matrix in [
            &mut self.user_factors,
            &mut self.item_factors,
            &mut self.tag_user_factors,
            &mut self.tag_item_factors,
        ] {
            matrix.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            &self.user_factors,
            &self.item_factors,
            &self.tag_user_factors,
            &self.tag_item_factors,
        ]
        .iter()
        .all(|m| m.iter().all(|x| x.is_finite()))
    }

    /// Layout (all integers little-endian):
    /// `FCPITF\0\0`, u32 version, u64 users, items, tags, dim, then the user,
    /// item, tag-user and tag-item matrices as row-major f64.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        for n in [self.users, self.items, self.tags, self.dim] {
            out.write_all(&(n as u64).to_le_bytes())?;
        }
        for matrix in [
            &self.user_factors,
            &self.item_factors,
            &self.tag_user_factors,
            &self.tag_item_factors,
        ] {
            for x in matrix.iter() {
                out.write_all(&x.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<FactorModel> {
        let mut magic = [0u8; 8];
        input
            .read_exact(&mut magic)
            .map_err(|_| Error::Model("truncated header".into()))?;
        if &magic != MAGIC {
            return Err(Error::Model("bad magic".into()));
        }
        let mut word = [0u8; 4];
        input
            .read_exact(&mut word)
            .map_err(|_| Error::Model("truncated header".into()))?;
        let version = u32::from_le_bytes(word);
        if version != FORMAT_VERSION {
            return Err(Error::Model(format!("unsupported version {version}")));
        }
        let mut dims = [0usize; 4];
        for d in &mut dims {
            let mut buf = [0u8; 8];
            input
                .read_exact(&mut buf)
                .map_err(|_| Error::Model("truncated header".into()))?;
            *d = usize::try_from(u64::from_le_bytes(buf))
                .map_err(|_| Error::Model("dimension overflow".into()))?;
        }
        let [users, items, tags, dim] = dims;
        let mut m = FactorModel::zeros(users, items, tags, dim);
        let mut buf = [0u8; 8];
        for matrix in [
            &mut m.user_factors,
            &mut m.item_factors,
            &mut m.tag_user_factors,
            &mut m.tag_item_factors,
        ] {
            for x in matrix.iter_mut() {
                input
                    .read_exact(&mut buf)
                    .map_err(|_| Error::Model("truncated matrix data".into()))?;
                *x = f64::from_le_bytes(buf);
            }
        }
        if input.read(&mut buf)? != 0 {
            return Err(Error::Model("trailing bytes".into()));
        }
        if !m.is_finite() {
            return Err(Error::Model("non-finite factor".into()));
        }
        Ok(m)
    }
}

pub fn pitf_score(m: &FactorModel, u: UserId, i: ItemId, t: TagId) -> Result<f64> {
    check("user", u.index(), m.users)?;
    check("item", i.index(), m.items)?;
    check("tag", t.index(), m.tags)?;
    Ok(m.score_unchecked(u, i, t))
}

/// One training example: within post `(user, item)`, `pos` was observed and
/// `neg` was not.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairwiseSample {
    pub user: UserId,
    pub item: ItemId,
    pub pos: TagId,
    pub neg: TagId,
}

/// Gradient of [`pairwise_loss`] with respect to each touched row.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseGradient {
    pub user: Vec<f64>,
    pub item: Vec<f64>,
    pub pos_user: Vec<f64>,
    pub neg_user: Vec<f64>,
    pub pos_item: Vec<f64>,
    pub neg_item: Vec<f64>,
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `-ln σ(x+ − x-) + reg/2 · (sum of squared norms of the six rows)`.
pub fn pairwise_loss(m: &FactorModel, s: &PairwiseSample, reg: f64) -> f64 {
    let delta = m.score_unchecked(s.user, s.item, s.pos) - m.score_unchecked(s.user, s.item, s.neg);
    let penalty = squared_norm(m.user_row(s.user))
        + squared_norm(m.item_row(s.item))
        + squared_norm(m.tag_user_row(s.pos))
        + squared_norm(m.tag_user_row(s.neg))
        + squared_norm(m.tag_item_row(s.pos))
        + squared_norm(m.tag_item_row(s.neg));
    softplus(-delta) + 0.5 * reg * penalty
}

pub fn pairwise_gradient(m: &FactorModel, s: &PairwiseSample, reg: f64) -> PairwiseGradient {
    let delta = m.score_unchecked(s.user, s.item, s.pos) - m.score_unchecked(s.user, s.item, s.neg);
    // d(-ln σ(δ))/dδ = -(1 - σ(δ)) = -σ(-δ)
    let w = -sigmoid(-delta);
    let u = m.user_row(s.user);
    let i = m.item_row(s.item);
    let pu = m.tag_user_row(s.pos);
    let nu = m.tag_user_row(s.neg);
    let pi = m.tag_item_row(s.pos);
    let ni = m.tag_item_row(s.neg);
    let d = m.dim;
    let mut g = PairwiseGradient {
        user: vec![0.0; d],
        item: vec![0.0; d],
        pos_user: vec![0.0; d],
        neg_user: vec![0.0; d],
        pos_item: vec![0.0; d],
        neg_item: vec![0.0; d],
    };
    for f in 0..d {
        g.user[f] = w * (pu[f] - nu[f]) + reg * u[f];
        g.item[f] = w * (pi[f] - ni[f]) + reg * i[f];
        g.pos_user[f] = w * u[f] + reg * pu[f];
        g.neg_user[f] = -w * u[f] + reg * nu[f];
        g.pos_item[f] = w * i[f] + reg * pi[f];
        g.neg_item[f] = -w * i[f] + reg * ni[f];
    }
    g
}

fn descend(row: &mut [f64], grad: &[f64], lr: f64) {
    for (x, g) in row.iter_mut().zip(grad) {
        *x -= lr * g;
    }
}

fn apply(m: &mut FactorModel, s: &PairwiseSample, g: &PairwiseGradient, lr: f64) {
    descend(m.user_row_mut(s.user), &g.user, lr);
    descend(m.item_row_mut(s.item), &g.item, lr);
    descend(m.tag_user_row_mut(s.pos), &g.pos_user, lr);
    descend(m.tag_user_row_mut(s.neg), &g.neg_user, lr);
    descend(m.tag_item_row_mut(s.pos), &g.pos_item, lr);
    descend(m.tag_item_row_mut(s.neg), &g.neg_item, lr);
}

/// Trains a model on every post of `train`. Single-threaded and
/// deterministic for a fixed seed. Posts that carry every tag admit no
/// negative and are skipped.
pub fn pitf_train(train: &Folksonomy, cfg: &TrainConfig) -> Result<FactorModel> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Validation(
            "cannot train on an empty folksonomy".into(),
        ));
    }
    let dims = train.dimensions();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = FactorModel::random(
        dims.users,
        dims.items,
        dims.tags,
        cfg.dim,
        cfg.init_stddev,
        &mut rng,
    )?;
    let posts = train.posts();
    let steps = cfg.iterations.saturating_mul(train.stats().triples);
    for _ in 0..steps {
        let post = &posts[rng.random_range(0..posts.len())];
        if post.tags.len() >= dims.tags {
            continue;
        }
        let pos = post.tags[rng.random_range(0..post.tags.len())];
        let neg = loop {
            let t = TagId(rng.random_range(0..dims.tags as u32));
            if post.tags.binary_search(&t).is_err() {
                break t;
            }
        };
        let sample = PairwiseSample {
            user: post.user,
            item: post.item,
            pos,
            neg,
        };
        let grad = pairwise_gradient(&model, &sample, cfg.regularization);
        apply(&mut model, &sample, &grad, cfg.learning_rate);
    }
    if !model.is_finite() {
        return Err(Error::Model("training diverged".into()));
    }
    Ok(model)
}

/// Scores every tag in the model.
pub struct Pitf<'a> {
    model: &'a FactorModel,
}

impl<'a> Pitf<'a> {
    pub fn new(model: &'a FactorModel) -> Self {
        Pitf { model }
    }
}

impl TagScorer for Pitf<'_> {
    fn candidates(&self, u: UserId, i: ItemId) -> Vec<ScoredTag> {
        let m = self.model;
        if u.index() >= m.users || i.index() >= m.items {
            return Vec::new();
        }
        (0..m.tags as u32)
            .map(|t| ScoredTag::new(TagId(t), m.score_unchecked(u, i, TagId(t))))
            .collect()
    }

    fn score(&self, u: UserId, i: ItemId, t: TagId) -> f64 {
        pitf_score(self.model, u, i, t).unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Dimensions, Triple};
    use crate::recommend::top_candidates;

    #[test]
    fn zero_model_scores_zero() {
        let m = FactorModel::zeros(2, 2, 3, 4);
        assert_eq!(pitf_score(&m, UserId(1), ItemId(1), TagId(2)).unwrap(), 0.0);
    }

    #[test]
    fn hand_inner_product() {
        let mut m = FactorModel::zeros(1, 1, 1, 2);
        m.user_row_mut(UserId(0)).copy_from_slice(&[1.0, 2.0]);
        m.tag_user_row_mut(TagId(0)).copy_from_slice(&[3.0, 4.0]);
        m.item_row_mut(ItemId(0)).copy_from_slice(&[0.0, 1.0]);
        m.tag_item_row_mut(TagId(0)).copy_from_slice(&[5.0, 6.0]);
        assert_eq!(
            pitf_score(&m, UserId(0), ItemId(0), TagId(0)).unwrap(),
            17.0
        );
    }

    #[test]
    fn out_of_range_is_error() {
        let m = FactorModel::zeros(1, 1, 1, 2);
        assert!(matches!(
            pitf_score(&m, UserId(0), ItemId(3), TagId(0)),
            Err(Error::OutOfRange { what: "item", .. })
        ));
        assert!(Pitf::new(&m).candidates(UserId(5), ItemId(0)).is_empty());
    }

    #[test]
    fn zero_iterations_keep_initialisation() {
        let f = Folksonomy::build(&[Triple::new(0, 0, 0), Triple::new(1, 1, 1)]);
        let cfg = TrainConfig {
            dim: 8,
            iterations: 0,
            seed: 11,
            ..Default::default()
        };
        let trained = pitf_train(&f, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let init = FactorModel::random(2, 2, 2, 8, cfg.init_stddev, &mut rng).unwrap();
        assert_eq!(trained, init);
    }

    #[test]
    fn dominant_tag_ranks_first() {
        // Tag 0 is on every post; tags 1..5 exist but are never used.
        let triples: Vec<Triple> = (0..6)
            .flat_map(|u| (0..4).map(move |i| Triple::new(u, i, 0)))
            .collect();
        let f = Folksonomy::with_dimensions(
            &triples,
            Dimensions {
                users: 6,
                items: 4,
                tags: 6,
            },
        );
        let cfg = TrainConfig {
            dim: 8,
            iterations: 50,
            seed: 3,
            ..Default::default()
        };
        let m = pitf_train(&f, &cfg).unwrap();
        for p in f.posts() {
            let top = top_candidates(&Pitf::new(&m), p.user, p.item, 1);
            assert_eq!(top.entries()[0].tag, TagId(0));
        }
    }

    #[test]
    fn training_is_deterministic() {
        let f = Folksonomy::build(&[
            Triple::new(0, 0, 0),
            Triple::new(0, 0, 1),
            Triple::new(1, 1, 2),
            Triple::new(1, 0, 0),
        ]);
        let cfg = TrainConfig {
            dim: 4,
            iterations: 20,
            seed: 9,
            ..Default::default()
        };
        assert_eq!(pitf_train(&f, &cfg).unwrap(), pitf_train(&f, &cfg).unwrap());
    }

    #[test]
    fn empty_training_set_rejected() {
        assert!(pitf_train(&Folksonomy::build(&[]), &TrainConfig::default()).is_err());
    }

    #[test]
    fn binary_round_trip_and_corruption() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = FactorModel::random(3, 2, 4, 5, 0.1, &mut rng).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 32 + 8 * 5 * (3 + 2 + 4 + 4));
        assert_eq!(FactorModel::read_from(buf.as_slice()).unwrap(), m);

        assert!(FactorModel::read_from(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(FactorModel::read_from(bad.as_slice()).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(FactorModel::read_from(long.as_slice()).is_err());
    }

    #[test]
    fn stable_softplus() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(-800.0), 0.0);
        assert_eq!(softplus(800.0), 800.0);
        assert!((sigmoid(-800.0)).abs() < 1e-300);
    }
}

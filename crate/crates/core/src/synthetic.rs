//! Seeded synthetic folksonomies with planted tag co-occurrence.
//!
//! Items belong to topics, and every topic owns a small tag vocabulary. A
//! post on an item usually carries the item's anchor tag, often a second
//! core tag, and other tags of the same topic. Users also have a few
//! personal tags that they put on arbitrary posts, which makes them frequent
//! for the user but loosely associated with any topic.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Triple};
use crate::error::{Error, Result};
use crate::ids::Dictionary;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub users: usize,
    pub topics: usize,
    pub tags_per_topic: usize,
    pub items_per_topic: usize,
    pub posts_per_user: usize,
    /// Topics each user posts in.
    pub topics_per_user: usize,
    pub personal_tags: usize,
    /// Chance that a post carries one of the user's personal tags.
    pub personal_rate: f64,
    /// Chance of the item's anchor tag being kept.
    pub anchor_rate: f64,
    /// Chance of the item's second core tag being kept.
    pub core_rate: f64,
    /// Additional topic tags per post, on average.
    pub extra_tags: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            users: 120,
            topics: 8,
            tags_per_topic: 8,
            items_per_topic: 60,
            posts_per_user: 60,
            topics_per_user: 2,
            personal_tags: 3,
            personal_rate: 0.5,
            anchor_rate: 0.9,
            core_rate: 0.6,
            extra_tags: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.topics == 0 || self.posts_per_user == 0 {
            return Err(Error::Config(
                "synthetic corpus needs users, topics and posts".into(),
            ));
        }
        if self.tags_per_topic < 2 {
            return Err(Error::Config("each topic needs at least two tags".into()));
        }
        if self.topics_per_user == 0 || self.topics_per_user > self.topics {
            return Err(Error::Config(
                "topics per user must lie in 1..=topics".into(),
            ));
        }
        if self.posts_per_user > self.topics_per_user * self.items_per_topic {
            return Err(Error::Config(
                "not enough items for the requested posts per user".into(),
            ));
        }
        for (name, p) in [
            ("personal_rate", self.personal_rate),
            ("anchor_rate", self.anchor_rate),
            ("core_rate", self.core_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} {p} outside [0, 1]")));
            }
        }
        if !(self.extra_tags >= 0.0 && self.extra_tags.is_finite()) {
            return Err(Error::Config("extra_tags must be non-negative".into()));
        }
        Ok(())
    }
}

/// Every user ends up with exactly `posts_per_user` posts on distinct items.
pub fn generate(cfg: &SyntheticConfig) -> Result<Corpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dictionary = Dictionary::new();
    for u in 0..cfg.users {
        dictionary.users.intern(&format!("u{u}"));
    }
    for t in 0..cfg.topics {
        for i in 0..cfg.items_per_topic {
            dictionary.items.intern(&format!("topic{t}/item{i}"));
        }
    }
    for t in 0..cfg.topics {
        for k in 0..cfg.tags_per_topic {
            dictionary.tags.intern(&format!("topic{t}-tag{k}"));
        }
    }
    for u in 0..cfg.users {
        for k in 0..cfg.personal_tags {
            dictionary.tags.intern(&format!("u{u}-own{k}"));
        }
    }
    let topic_tag = |topic: usize, k: usize| (topic * cfg.tags_per_topic + k) as u32;
    let personal_tag =
        |u: usize, k: usize| (cfg.topics * cfg.tags_per_topic + u * cfg.personal_tags + k) as u32;

    // Two distinct core tags per item.
    let cores: Vec<[usize; 2]> = (0..cfg.topics * cfg.items_per_topic)
        .map(|_| {
            let a = rng.random_range(0..cfg.tags_per_topic);
            let b = (a + rng.random_range(1..cfg.tags_per_topic)) % cfg.tags_per_topic;
            [a, b]
        })
        .collect();

    let all_topics: Vec<usize> = (0..cfg.topics).collect();
    let mut triples = Vec::new();
    for u in 0..cfg.users {
        let topics: Vec<usize> = all_topics
            .choose_multiple(&mut rng, cfg.topics_per_user)
            .copied()
            .collect();
        let mut pool: Vec<usize> = topics
            .iter()
            .flat_map(|&t| (0..cfg.items_per_topic).map(move |i| t * cfg.items_per_topic + i))
            .collect();
        for _ in 0..cfg.posts_per_user {
            let item = pool.swap_remove(rng.random_range(0..pool.len()));
            let topic = item / cfg.items_per_topic;
            let mut tags = Vec::new();
            for (&c, rate) in cores[item].iter().zip([cfg.anchor_rate, cfg.core_rate]) {
                if rng.random_bool(rate) {
                    tags.push(topic_tag(topic, c));
                }
            }
            let extra =
                cfg.extra_tags.floor() as usize + rng.random_bool(cfg.extra_tags.fract()) as usize;
            for _ in 0..extra {
                tags.push(topic_tag(topic, rng.random_range(0..cfg.tags_per_topic)));
            }
            if cfg.personal_tags > 0 && rng.random_bool(cfg.personal_rate) {
                tags.push(personal_tag(u, rng.random_range(0..cfg.personal_tags)));
            }
            if tags.is_empty() {
                tags.push(topic_tag(topic, cores[item][0]));
            }
            tags.sort_unstable();
            tags.dedup();
            for t in tags {
                triples.push(Triple::new(u as u32, item as u32, t));
            }
        }
    }
    Ok(Corpus {
        dictionary,
        triples,
    })
}

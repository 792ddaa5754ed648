use super::{ScoredTag, TagScorer};
use crate::corpus::Folksonomy;
use crate::ids::{ItemId, TagId, UserId};

/// `tf(t, i)` plus the number of items `u` has tagged with `t`.
pub fn baseline_score(train: &Folksonomy, u: UserId, i: ItemId, t: TagId) -> f64 {
    (train.tf(t, i) + train.user_tag_count(u, t)) as f64
}

/// Most-popular mix of item and user tag frequencies. Candidates are
/// `T(i) ∪ T(u)`.
pub struct Baseline<'a> {
    train: &'a Folksonomy,
}

impl<'a> Baseline<'a> {
    pub fn new(train: &'a Folksonomy) -> Self {
        Baseline { train }
    }
}

impl TagScorer for Baseline<'_> {
    fn candidates(&self, u: UserId, i: ItemId) -> Vec<ScoredTag> {
        let item = self.train.item_tag_counts(i);
        let user = self.train.user_tag_counts(u);
        let mut out = Vec::with_capacity(item.len() + user.len());
        let (mut a, mut b) = (0, 0);
        while a < item.len() || b < user.len() {
            let next = match (item.get(a), user.get(b)) {
                (Some(&(ta, ca)), Some(&(tb, cb))) if ta == tb => {
                    a += 1;
                    b += 1;
                    (ta, ca + cb)
                }
                (Some(&(ta, ca)), Some(&(tb, _))) if ta < tb => {
                    a += 1;
                    (ta, ca)
                }
                (Some(&(ta, ca)), None) => {
                    a += 1;
                    (ta, ca)
                }
                (_, Some(&(tb, cb))) => {
                    b += 1;
                    (tb, cb)
                }
                (None, None) => unreachable!(),
            };
            out.push(ScoredTag::new(next.0, next.1 as f64));
        }
        out
    }

    fn score(&self, u: UserId, i: ItemId, t: TagId) -> f64 {
        baseline_score(self.train, u, i, t)
    }
}

use std::collections::BTreeMap;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{parse_triples, DatasetFormatConfig, Folksonomy, Triple};
use crate::error::{Error, Result};
use crate::ids::{Dictionary, ItemId, TagId, UserId};

/// A held-out post and the tags its user actually assigned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestPost {
    pub user: UserId,
    pub item: ItemId,
    pub tags: Vec<TagId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Folksonomy,
    pub test: Vec<TestPost>,
    /// `None` for a fixed split loaded from files.
    pub seed: Option<u64>,
}

impl Split {
    /// Triples of the held-out posts.
    pub fn test_triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.test.iter().flat_map(|p| {
            p.tags.iter().map(move |&tag| Triple {
                user: p.user,
                item: p.item,
                tag,
            })
        })
    }
}

/// LeavePostOut: moves one uniformly drawn post of every user to the test
/// set. Every user id in `0..dimensions().users` must have at least one post.
pub fn leave_post_out(f: &Folksonomy, seed: u64) -> Result<Split> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = f.dimensions();
    let mut test = Vec::with_capacity(dims.users);
    for u in 0..dims.users as u32 {
        let user = UserId(u);
        let posts = f.posts_of_user(user);
        if posts.is_empty() {
            return Err(Error::EmptyUser(user));
        }
        let post = &posts[rng.random_range(0..posts.len())];
        test.push(TestPost {
            user,
            item: post.item,
            tags: post.tags.clone(),
        });
    }
    let train: Vec<Triple> = f
        .triples()
        .iter()
        .filter(|t| test[t.user.index()].item != t.item)
        .copied()
        .collect();
    Ok(Split {
        train: Folksonomy::with_dimensions(&train, dims),
        test,
        seed: Some(seed),
    })
}

/// Loads a predefined train/test split. Train and test share one dictionary;
/// every test user, item and tag must occur in train, and no test post may
/// also appear in train.
pub fn load_fixed_split<R1: BufRead, R2: BufRead>(
    train_source: R1,
    test_source: R2,
    cfg: &DatasetFormatConfig,
) -> Result<(Dictionary, Split)> {
    let mut dict = Dictionary::new();
    let train = parse_triples(train_source, cfg, &mut dict)?;
    let train = Folksonomy::build(&train.triples);
    let test = parse_triples(test_source, cfg, &mut dict)?;

    let mut posts: BTreeMap<(UserId, ItemId), Vec<TagId>> = BTreeMap::new();
    for t in &test.triples {
        if !train.has_user(t.user) {
            return Err(Error::Validation(format!(
                "test user '{}' does not occur in train",
                dict.user_name(t.user)
            )));
        }
        if !train.has_item(t.item) {
            return Err(Error::Validation(format!(
                "test item '{}' does not occur in train",
                dict.item_name(t.item)
            )));
        }
        if !train.has_tag(t.tag) {
            return Err(Error::Validation(format!(
                "test tag '{}' does not occur in train",
                dict.tag_name(t.tag)
            )));
        }
        posts.entry((t.user, t.item)).or_default().push(t.tag);
    }
    let mut test_posts = Vec::with_capacity(posts.len());
    for ((user, item), mut tags) in posts {
        if !train.post_tags(user, item).is_empty() {
            return Err(Error::Validation(format!(
                "test post ('{}', '{}') also occurs in train",
                dict.user_name(user),
                dict.item_name(item)
            )));
        }
        tags.sort_unstable();
        test_posts.push(TestPost { user, item, tags });
    }
    Ok((
        dict,
        Split {
            train,
            test: test_posts,
            seed: None,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_posts() -> Folksonomy {
        Folksonomy::build(&[
            Triple::new(0, 0, 0),
            Triple::new(0, 0, 1),
            Triple::new(0, 1, 0),
            Triple::new(0, 2, 2),
        ])
    }

    #[test]
    fn single_user_split() {
        let split = leave_post_out(&three_posts(), 7).unwrap();
        assert_eq!(split.test.len(), 1);
        assert_eq!(split.train.posts().len(), 2);
        let again = leave_post_out(&three_posts(), 7).unwrap();
        assert_eq!(split.test, again.test);
        assert_eq!(split.train.triples(), again.train.triples());
    }

    #[test]
    fn user_without_posts_is_rejected() {
        let f = Folksonomy::build(&[Triple::new(1, 0, 0)]);
        assert!(matches!(
            leave_post_out(&f, 0),
            Err(Error::EmptyUser(UserId(0)))
        ));
    }

    #[test]
    fn fixed_split_containment() {
        let train = "u1\ti1\tt1\nu2\ti2\tt2\n";
        let ok = load_fixed_split(
            train.as_bytes(),
            "u1\ti2\tt2\nu1\ti2\tt1\n".as_bytes(),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(ok.1.test.len(), 1);
        assert_eq!(ok.1.test[0].tags.len(), 2);

        let err = load_fixed_split(
            train.as_bytes(),
            "u1\ti2\tnovel\n".as_bytes(),
            &Default::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("novel"), "{err}");

        let err = load_fixed_split(
            train.as_bytes(),
            "u1\ti1\tt2\n".as_bytes(),
            &Default::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn empty_test_file() {
        let (_, split) =
            load_fixed_split("u\ti\tt\n".as_bytes(), "".as_bytes(), &Default::default()).unwrap();
        assert!(split.test.is_empty());
        assert_eq!(split.train.stats().triples, 1);
    }
}

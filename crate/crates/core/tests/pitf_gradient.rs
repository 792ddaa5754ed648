use foldcons::corpus::{Dimensions, Folksonomy, Triple};
use foldcons::ids::{ItemId, TagId, UserId};
use foldcons::recommend::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rows<'a>(m: &'a mut FactorModel, s: &PairwiseSample, which: usize) -> &'a mut [f64] {
    match which {
        0 => m.user_row_mut(s.user),
        1 => m.item_row_mut(s.item),
        2 => m.tag_user_row_mut(s.pos),
        3 => m.tag_user_row_mut(s.neg),
        4 => m.tag_item_row_mut(s.pos),
        _ => m.tag_item_row_mut(s.neg),
    }
}

fn grad_part(g: &PairwiseGradient, which: usize) -> &[f64] {
    match which {
        0 => &g.user,
        1 => &g.item,
        2 => &g.pos_user,
        3 => &g.neg_user,
        4 => &g.pos_item,
        _ => &g.neg_item,
    }
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-6;
    for point in 0..10 {
        let dim = 4 + point % 3;
        let mut m = FactorModel::random(3, 3, 4, dim, 0.8, &mut rng).unwrap();
        let pos = rng.random_range(0..4u32);
        let s = PairwiseSample {
            user: UserId(rng.random_range(0..3)),
            item: ItemId(rng.random_range(0..3)),
            pos: TagId(pos),
            neg: TagId((pos + rng.random_range(1..4)) % 4),
        };
        let reg = 0.05 * point as f64;
        let g = pairwise_gradient(&m, &s, reg);
        for which in 0..6 {
            for f in 0..dim {
                let x = rows(&mut m, &s, which)[f];
                rows(&mut m, &s, which)[f] = x + h;
                let up = pairwise_loss(&m, &s, reg);
                rows(&mut m, &s, which)[f] = x - h;
                let down = pairwise_loss(&m, &s, reg);
                rows(&mut m, &s, which)[f] = x;
                let numeric = (up - down) / (2.0 * h);
                let analytic = grad_part(&g, which)[f];
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    rel < 1e-4,
                    "point {point} row {which} dim {f}: {analytic} vs {numeric}"
                );
            }
        }
    }
}

#[test]
fn positive_scaling_keeps_rankings() {
    let dims = Dimensions {
        users: 4,
        items: 5,
        tags: 9,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let triples: Vec<Triple> = (0..40)
        .map(|_| {
            Triple::new(
                rng.random_range(0..4),
                rng.random_range(0..5),
                rng.random_range(0..9),
            )
        })
        .collect();
    let f = Folksonomy::with_dimensions(&triples, dims);
    let cfg = TrainConfig {
        dim: 8,
        iterations: 30,
        ..Default::default()
    };
    let model = pitf_train(&f, &cfg).unwrap();
    for factor in [0.25, 3.0] {
        let mut scaled = model.clone();
        scaled.scale(factor);
        for u in 0..4 {
            for i in 0..5 {
                let a: Vec<_> = top_candidates(&Pitf::new(&model), UserId(u), ItemId(i), 9)
                    .tags()
                    .collect();
                let b: Vec<_> = top_candidates(&Pitf::new(&scaled), UserId(u), ItemId(i), 9)
                    .tags()
                    .collect();
                assert_eq!(a, b);
            }
        }
    }
}

#[test]
fn training_is_seed_deterministic() {
    let triples: Vec<Triple> = (0..30).map(|n| Triple::new(n % 3, n % 5, n % 7)).collect();
    let f = Folksonomy::build(&triples);
    let cfg = TrainConfig {
        dim: 6,
        iterations: 20,
        seed: 3,
        ..Default::default()
    };
    assert_eq!(pitf_train(&f, &cfg).unwrap(), pitf_train(&f, &cfg).unwrap());
    let other = pitf_train(&f, &TrainConfig { seed: 4, ..cfg }).unwrap();
    assert_ne!(other, pitf_train(&f, &cfg).unwrap());
}

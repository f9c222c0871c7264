//! Seeded synthetic data generators used by the evaluation commands and the
//! acceptance tests: rating matrices with planted structure and logged
//! interaction streams with a linearly recoverable best arm.

use banditmf_core::seed::{derive_seed, rng_from_seed};
use banditmf_core::{RatingMatrix, ReplayLog};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Sparse ratings drawn from a planted bias-plus-two-factor model:
/// rating = 3.2 + b_u + b_i + p_u·q_i + noise, with b ~ U(-0.8, 0.8),
/// factors ~ U(-0.7, 0.7), noise ~ U(-0.15, 0.15). The construction keeps
/// every rating inside (0, 6], so the scale is fixed at 6.
pub fn planted_biased_ratings(
    num_users: usize,
    num_items: usize,
    density: f64,
    seed: u64,
) -> RatingMatrix {
    const GLOBAL_MEAN: f64 = 3.2;
    const LATENT_DIM: usize = 2;
    let mut rng = rng_from_seed(derive_seed(seed, "synth/planted"));
    let user_bias: Vec<f64> = (0..num_users).map(|_| rng.random_range(-0.8..0.8)).collect();
    let item_bias: Vec<f64> = (0..num_items).map(|_| rng.random_range(-0.8..0.8)).collect();
    let factor = |rng: &mut ChaCha8Rng, count: usize| -> Vec<f64> {
        (0..count * LATENT_DIM).map(|_| rng.random_range(-0.7..0.7)).collect()
    };
    let user_factors = factor(&mut rng, num_users);
    let item_factors = factor(&mut rng, num_items);

    let mut entries = Vec::new();
    for user in 0..num_users {
        for item in 0..num_items {
            if rng.random::<f64>() >= density {
                continue;
            }
            let dot: f64 = (0..LATENT_DIM)
                .map(|d| user_factors[user * LATENT_DIM + d] * item_factors[item * LATENT_DIM + d])
                .sum();
            let noise = rng.random_range(-0.15..0.15);
            let rating = GLOBAL_MEAN + user_bias[user] + item_bias[item] + dot + noise;
            entries.push((user, item, rating));
        }
    }
    RatingMatrix::from_entries(num_users, num_items, entries, 6.0)
        .expect("planted ratings stay within (0, 6]")
}

/// A dense rating matrix with planted taste groups on a 5-point scale.
/// Users in group `c` rate their own item block high (4.8 sloping down to
/// 4.0 across the block) and every other block around `foreign_base`, plus
/// uniform noise in `[-noise, noise]`; values are clamped to [0.5, 5].
/// A small `foreign_base` gives sharply separated tastes; one close to 4
/// makes the groups hard to tell apart from a few ratings.
pub fn clustered_ratings(
    users_per_cluster: usize,
    num_clusters: usize,
    items_per_cluster: usize,
    foreign_base: f64,
    noise: f64,
    seed: u64,
) -> RatingMatrix {
    assert!(users_per_cluster > 0 && num_clusters > 0 && items_per_cluster > 0);
    assert!((0.0..=1.0).contains(&noise), "noise must stay within the clamp margin");
    assert!((1.0..=4.0).contains(&foreign_base), "foreign block level must sit below the planted block");
    let mut rng = rng_from_seed(derive_seed(seed, "synth/clustered"));
    let num_users = users_per_cluster * num_clusters;
    let num_items = items_per_cluster * num_clusters;
    let slope_step = if items_per_cluster > 1 {
        0.8 / (items_per_cluster - 1) as f64
    } else {
        0.0
    };
    let mut entries = Vec::with_capacity(num_users * num_items);
    for user in 0..num_users {
        let group = user / users_per_cluster;
        for item in 0..num_items {
            let base = if item / items_per_cluster == group {
                4.8 - slope_step * (item % items_per_cluster) as f64
            } else {
                foreign_base
            };
            let value = base + rng.random_range(-noise..=noise);
            entries.push((user, item, value.clamp(0.5, 5.0)));
        }
    }
    RatingMatrix::from_entries(num_users, num_items, entries, 5.0)
        .expect("clustered ratings stay within (0, 5]")
}

/// A logged interaction stream with a disjoint linear reward model: arm
/// `a`'s planted weight vector averages its own feature block and ignores
/// the rest, and rewards are Bernoulli in that linear value. Each event
/// heats one arm's block (values in [0.8, 1)) against background noise in
/// [0, 0.2), so the heated arm pays ~0.9 and the rest ~0.1; logged actions
/// are uniform, giving a uniform-random policy a click rate near 0.18.
pub fn linear_replay_log(num_arms: usize, dim: usize, rows: usize, seed: u64) -> ReplayLog {
    assert!(num_arms > 0 && dim >= num_arms, "need at least one feature per arm");
    let mut rng = rng_from_seed(derive_seed(seed, "synth/replay"));
    let block = dim / num_arms;
    let mut events = Vec::with_capacity(rows);
    for _ in 0..rows {
        let best = rng.random_range(0..num_arms);
        let mut context: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..0.2)).collect();
        for value in context.iter_mut().skip(best * block).take(block) {
            *value = rng.random_range(0.8..1.0);
        }
        let action = rng.random_range(0..num_arms);
        let hit_rate =
            context[action * block..(action + 1) * block].iter().sum::<f64>() / block as f64;
        let reward = if rng.random::<f64>() < hit_rate { 1.0 } else { 0.0 };
        events.push((action, reward, context));
    }
    ReplayLog::from_rows(events).expect("generated rows are uniform width with binary rewards")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_ratings_have_expected_shape_and_range() {
        let matrix = planted_biased_ratings(25, 100, 0.3, 7);
        assert_eq!(matrix.num_users(), 25);
        assert_eq!(matrix.num_items(), 100);
        assert_eq!(matrix.rating_max(), 6.0);
        let count = matrix.len();
        assert!((600..=900).contains(&count), "density 0.3 gave {count} of 2500 cells");
        for (_, _, rating) in matrix.entries() {
            assert!(rating > 0.0 && rating <= 6.0);
        }
    }

    #[test]
    fn planted_ratings_are_seed_deterministic() {
        let a = planted_biased_ratings(10, 20, 0.5, 11);
        let b = planted_biased_ratings(10, 20, 0.5, 11);
        let c = planted_biased_ratings(10, 20, 0.5, 12);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn clustered_ratings_prefer_their_own_block() {
        let matrix = clustered_ratings(4, 3, 5, 0.3, 5);
        assert_eq!(matrix.num_users(), 12);
        assert_eq!(matrix.num_items(), 15);
        assert_eq!(matrix.len(), 12 * 15);
        for user in 0..12 {
            let group = user / 4;
            let mut own = 0.0;
            let mut foreign = 0.0;
            for item in 0..15 {
                let value = matrix.get(user, item).unwrap();
                if item / 5 == group {
                    own += value / 5.0;
                } else {
                    foreign += value / 10.0;
                }
            }
            assert!(own > foreign + 1.0, "user {user}: own {own:.2} vs foreign {foreign:.2}");
        }
    }

    #[test]
    fn replay_log_pays_a_random_policy_about_its_design_rate() {
        let log = linear_replay_log(10, 100, 20000, 3);
        assert_eq!(log.len(), 20000);
        assert_eq!(log.dim(), 100);
        let mut reward_sum = 0.0;
        for row in 0..log.len() {
            assert!(log.action(row) < 10);
            let reward = log.reward(row);
            assert!(reward == 0.0 || reward == 1.0);
            reward_sum += reward;
        }
        let logged_ctr = reward_sum / log.len() as f64;
        assert!((logged_ctr - 0.18).abs() < 0.02, "logged CTR {logged_ctr:.3}");
    }

    #[test]
    fn replay_log_heats_the_planted_block() {
        let log = linear_replay_log(4, 8, 50, 9);
        for row in 0..log.len() {
            let context = log.context(row);
            let mut hot = 0;
            for arm in 0..4 {
                let slice = &context[arm * 2..arm * 2 + 2];
                if slice.iter().all(|v| *v >= 0.8) {
                    hot += 1;
                }
            }
            assert_eq!(hot, 1, "exactly one heated block per event");
        }
    }
}

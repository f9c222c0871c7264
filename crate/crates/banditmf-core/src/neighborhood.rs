//! User-based neighborhood recommendation and the hybrid latent-similarity
//! recommender.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::matrix::RatingMatrix;
use crate::mf::LatentModel;

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float as _;

/// Fewest co-rated items required for a defined Pearson correlation.
pub const MIN_PEARSON_OVERLAP: usize = 2;

/// Error raised by similarity computations and recommenders.
#[derive(Debug, Clone, PartialEq)]
pub enum SimilarityError {
    /// Pearson needs at least [`MIN_PEARSON_OVERLAP`] co-rated items.
    TooFewPoints { overlap: usize },
    /// Pearson is undefined when either vector is constant.
    ConstantVector,
    /// Cosine is undefined for a zero vector.
    ZeroVector,
    /// No candidate neighbor shares enough rated items with the target.
    InsufficientOverlap,
    /// The target user has rated every item; nothing left to recommend.
    AllItemsRated,
}

impl fmt::Display for SimilarityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimilarityError::TooFewPoints { overlap } => {
                write!(f, "similarity needs {MIN_PEARSON_OVERLAP} co-rated items, got {overlap}")
            }
            SimilarityError::ConstantVector => {
                write!(f, "Pearson correlation is undefined for a constant vector")
            }
            SimilarityError::ZeroVector => write!(f, "cosine is undefined for a zero vector"),
            SimilarityError::InsufficientOverlap => {
                write!(f, "no neighbor shares enough rated items with the target")
            }
            SimilarityError::AllItemsRated => {
                write!(f, "target user has rated every item")
            }
        }
    }
}

impl core::error::Error for SimilarityError {}

/// Pearson similarity of one neighbor against the target user.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityScore {
    pub user: usize,
    /// Number of co-rated items the correlation was computed over.
    pub overlap: usize,
    pub value: f64,
}

/// A ranked recommendation.
#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub item: usize,
    pub score: f64,
    /// 1-based position in the ranked list.
    pub rank: usize,
}

/// Pearson correlation of two aligned rating vectors.
///
/// Means are taken over the supplied (co-rated) values only.
///
/// # Panics
/// Panics if the slices differ in length.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    assert_eq!(a.len(), b.len(), "pearson inputs must be aligned");
    if a.len() < MIN_PEARSON_OVERLAP {
        return Err(SimilarityError::TooFewPoints { overlap: a.len() });
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(SimilarityError::ConstantVector);
    }
    Ok(cov / (var_a.sqrt() * var_b.sqrt()))
}

/// Cosine similarity of two vectors.
///
/// # Panics
/// Panics if the slices differ in length.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    assert_eq!(a.len(), b.len(), "cosine inputs must be aligned");
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>();
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

/// Ranks existing users by how many of the target's items they rated.
///
/// Returns `(user, overlap)` pairs for users with at least one shared item,
/// ordered by overlap descending (ties: user index ascending) and truncated
/// to `top_groups`.
pub fn find_similar_users(
    matrix: &RatingMatrix,
    target: &[(usize, f64)],
    top_groups: usize,
) -> Vec<(usize, usize)> {
    let mut target_items: Vec<usize> = target.iter().map(|&(i, _)| i).collect();
    target_items.sort_unstable();
    let mut ranked: Vec<(usize, usize)> = (0..matrix.num_users())
        .filter_map(|u| {
            let (items, _) = matrix.user_row(u);
            let overlap = items.iter().filter(|i| target_items.binary_search(i).is_ok()).count();
            (overlap > 0).then_some((u, overlap))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_groups);
    ranked
}

/// Pearson similarity between the target's ratings and one user, over their
/// co-rated items. A constant co-rated vector yields similarity 0 (it
/// carries no preference signal either way).
fn target_user_similarity(
    matrix: &RatingMatrix,
    target: &[(usize, f64)],
    user: usize,
) -> Result<SimilarityScore, SimilarityError> {
    let mut shared_target = Vec::new();
    let mut shared_user = Vec::new();
    for &(item, rating) in target {
        if let Some(r) = matrix.get(user, item) {
            shared_target.push(rating);
            shared_user.push(r);
        }
    }
    let overlap = shared_target.len();
    if overlap < MIN_PEARSON_OVERLAP {
        return Err(SimilarityError::TooFewPoints { overlap });
    }
    let value = match pearson(&shared_target, &shared_user) {
        Ok(v) => v,
        Err(SimilarityError::ConstantVector) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(SimilarityScore { user, overlap, value })
}

/// User-based collaborative filtering for a user outside the matrix.
///
/// The `top_groups` most-overlapping users become the neighborhood; each
/// neighbor's Pearson similarity weights its ratings of items the target
/// has not rated, and every candidate item is scored by the
/// similarity-weighted average rating. Items whose similarity weights sum
/// to zero are skipped.
pub fn recommend_user_based(
    matrix: &RatingMatrix,
    target: &[(usize, f64)],
    top_n: usize,
    top_groups: usize,
) -> Result<Vec<Recommendation>, SimilarityError> {
    let candidates = find_similar_users(matrix, target, top_groups);
    let sims: Vec<SimilarityScore> = candidates
        .iter()
        .filter_map(|&(user, _)| target_user_similarity(matrix, target, user).ok())
        .collect();
    if sims.is_empty() {
        return Err(SimilarityError::InsufficientOverlap);
    }

    let mut target_items: Vec<usize> = target.iter().map(|&(i, _)| i).collect();
    target_items.sort_unstable();
    let n = matrix.num_items();
    let mut weighted = vec![0.0f64; n];
    let mut sim_sum = vec![0.0f64; n];
    let mut touched = vec![false; n];
    for s in &sims {
        let (items, values) = matrix.user_row(s.user);
        for (&item, &rating) in items.iter().zip(values) {
            if target_items.binary_search(&item).is_ok() {
                continue;
            }
            weighted[item] += s.value * rating;
            sim_sum[item] += s.value;
            touched[item] = true;
        }
    }

    let mut scored: Vec<Recommendation> = (0..n)
        .filter(|&i| touched[i] && sim_sum[i] != 0.0)
        .map(|i| Recommendation { item: i, score: weighted[i] / sim_sum[i], rank: 0 })
        .collect();
    rank(&mut scored, top_n);
    Ok(scored)
}

/// Hybrid recommendation from a trained factor model.
///
/// The model's highest-predicted unrated item for `target_user` seeds the
/// search; the remaining unrated items are ranked by cosine similarity of
/// their latent factor rows to the seed's. Returns the seed item and the
/// ranked list.
///
/// # Panics
/// Panics if `target_user` is out of range or the model shape does not
/// match the matrix.
pub fn recommend_hybrid(
    model: &LatentModel,
    matrix: &RatingMatrix,
    target_user: usize,
    top_n: usize,
) -> Result<(usize, Vec<Recommendation>), SimilarityError> {
    assert!(target_user < matrix.num_users(), "target user out of range");
    assert_eq!(model.num_users(), matrix.num_users(), "model/matrix user mismatch");
    assert_eq!(model.num_items(), matrix.num_items(), "model/matrix item mismatch");

    let (rated, _) = matrix.user_row(target_user);
    let mut seed: Option<(usize, f64)> = None;
    for item in 0..matrix.num_items() {
        if rated.binary_search(&item).is_ok() {
            continue;
        }
        let pred = model.predict(target_user, item);
        // Strictly-greater keeps the lowest index on ties.
        if seed.map_or(true, |(_, best)| pred > best) {
            seed = Some((item, pred));
        }
    }
    let (seed_item, _) = seed.ok_or(SimilarityError::AllItemsRated)?;

    let seed_factor = model.item_factor(seed_item);
    let mut scored: Vec<Recommendation> = (0..matrix.num_items())
        .filter(|&i| i != seed_item && rated.binary_search(&i).is_err())
        .filter_map(|i| {
            cosine(model.item_factor(i), seed_factor)
                .ok()
                .map(|score| Recommendation { item: i, score, rank: 0 })
        })
        .collect();
    rank(&mut scored, top_n);
    Ok((seed_item, scored))
}

/// Sorts by score descending (ties: item ascending), truncates, and fills
/// in 1-based ranks.
fn rank(scored: &mut Vec<Recommendation>, top_n: usize) {
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.item.cmp(&b.item)));
    scored.truncate(top_n);
    for (pos, rec) in scored.iter_mut().enumerate() {
        rec.rank = pos + 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::mf::LatentModel;

    #[test]
    fn pearson_matches_direct_formula() {
        let a = [1.0, 2.0, 3.0, 5.0];
        let b = [2.0, 2.0, 4.0, 4.0];
        // By hand: covariance 5, deviations 8.75 and 4 -> 5 / (2 sqrt 8.75).
        let expected = 5.0 / (2.0 * 8.75f64.sqrt());
        let got = pearson(&a, &b).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.845_154_254_728_517).abs() < 1e-12);
    }

    #[test]
    fn pearson_extremes() {
        let a = [1.0, 2.0, 3.0];
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let negated = [3.0, 2.0, 1.0];
        assert!((pearson(&a, &negated).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_is_symmetric_and_affine_invariant() {
        use crate::seed;
        use rand::Rng;
        let mut rng = seed::rng_from_seed(17);
        for _ in 0..200 {
            let n = rng.random_range(2..10usize);
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let (Ok(ab), Ok(ba)) = (pearson(&a, &b), pearson(&b, &a)) else {
                continue;
            };
            assert!((ab - ba).abs() < 1e-12);
            let scaled: Vec<f64> = a.iter().map(|x| 2.5 * x + 3.0).collect();
            let sb = pearson(&scaled, &b).unwrap();
            assert!((ab - sb).abs() < 1e-9, "affine map changed correlation");
        }
    }

    #[test]
    fn pearson_error_cases() {
        assert_eq!(
            pearson(&[1.0], &[2.0]),
            Err(SimilarityError::TooFewPoints { overlap: 1 })
        );
        assert_eq!(
            pearson(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(SimilarityError::ConstantVector)
        );
    }

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), Err(SimilarityError::ZeroVector));
    }

    fn neighborhood_matrix() -> RatingMatrix {
        // Items 1..=3 are co-rated by everyone; item 0 is rated only by
        // user 0 and item 4 only by users 1 and 2.
        RatingMatrix::from_entries(
            3,
            5,
            vec![
                (0, 0, 2.0),
                (0, 1, 5.0),
                (0, 2, 3.0),
                (0, 3, 4.0),
                (1, 1, 4.0),
                (1, 2, 3.0),
                (1, 3, 5.0),
                (1, 4, 5.0),
                (2, 1, 3.0),
                (2, 2, 2.0),
                (2, 3, 4.0),
                (2, 4, 4.0),
            ],
            5.0,
        )
        .unwrap()
    }

    fn target() -> Vec<(usize, f64)> {
        vec![(1, 4.0), (2, 3.0), (3, 5.0)]
    }

    #[test]
    fn similar_users_ranked_by_overlap_then_index() {
        let m = neighborhood_matrix();
        let ranked = find_similar_users(&m, &target(), 10);
        // All three users share items 1..=3; ties break by user index.
        assert_eq!(ranked, vec![(0, 3), (1, 3), (2, 3)]);
        assert_eq!(find_similar_users(&m, &target(), 2), vec![(0, 3), (1, 3)]);
        // A target rating only item 0 overlaps solely with user 0.
        assert_eq!(find_similar_users(&m, &[(0, 3.0)], 10), vec![(0, 1)]);
        assert!(find_similar_users(&m, &[], 10).is_empty());
    }

    #[test]
    fn weighted_average_scores_match_hand_computation() {
        let m = neighborhood_matrix();
        // Pearson vs target (4, 3, 5) over items 1..=3:
        //   user 0 (5, 3, 4): 0.5;  user 1 (4, 3, 5): 1.0;  user 2 (3, 2, 4): 1.0.
        let recs = recommend_user_based(&m, &target(), 10, 10).unwrap();
        assert_eq!(recs.len(), 2);
        // item 4: (1.0 * 5 + 1.0 * 4) / 2 = 4.5; item 0: (0.5 * 2) / 0.5 = 2.
        assert_eq!(recs[0].item, 4);
        assert!((recs[0].score - 4.5).abs() < 1e-12);
        assert_eq!(recs[0].rank, 1);
        assert_eq!(recs[1].item, 0);
        assert!((recs[1].score - 2.0).abs() < 1e-12);
        assert_eq!(recs[1].rank, 2);
    }

    #[test]
    fn top_groups_restricts_the_neighborhood() {
        let m = neighborhood_matrix();
        // Only users 0 and 1 remain; item 4 is then backed by user 1 alone.
        let recs = recommend_user_based(&m, &target(), 10, 2).unwrap();
        assert_eq!(recs[0].item, 4);
        assert!((recs[0].score - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_similarity_sum_skips_the_item() {
        // The single neighbor has a constant co-rated vector, so its
        // similarity is 0 and its unshared item cannot be scored.
        let m = RatingMatrix::from_entries(
            1,
            4,
            vec![(0, 0, 3.0), (0, 1, 3.0), (0, 2, 3.0), (0, 3, 5.0)],
            5.0,
        )
        .unwrap();
        let target = [(0usize, 1.0), (1, 2.0), (2, 3.0)];
        let recs = recommend_user_based(&m, &target, 10, 10).unwrap();
        assert!(recs.is_empty());
    }

    #[test]
    fn no_usable_neighbor_is_an_error() {
        let m = neighborhood_matrix();
        // Overlap of exactly one item is below the Pearson minimum.
        let err = recommend_user_based(&m, &[(1, 4.0)], 10, 10).unwrap_err();
        assert_eq!(err, SimilarityError::InsufficientOverlap);
    }

    fn hybrid_model() -> LatentModel {
        let user_factors = DenseMatrix::from_vec(1, 2, vec![1.0, 0.0]);
        let item_factors = DenseMatrix::from_vec(
            5,
            2,
            vec![
                1.0, 0.0, // item 0 (rated)
                0.9, 0.1, // item 1: prediction 0.9 -> seed
                0.2, 0.9, // item 2
                0.88, -0.1, // item 3: prediction 0.88
                -0.5, 0.5, // item 4
            ],
        );
        LatentModel::from_parts(user_factors, item_factors, None)
    }

    #[test]
    fn hybrid_seeds_on_best_prediction_and_ranks_by_cosine() {
        let m =
            RatingMatrix::from_entries(1, 5, vec![(0, 0, 5.0)], 5.0).unwrap();
        let model = hybrid_model();
        let (seed, recs) = recommend_hybrid(&model, &m, 0, 10).unwrap();
        assert_eq!(seed, 1);
        let order: Vec<usize> = recs.iter().map(|r| r.item).collect();
        assert_eq!(order, vec![3, 2, 4]);
        for (n, r) in recs.iter().enumerate() {
            assert_eq!(r.rank, n + 1);
            let expected = cosine(model.item_factor(r.item), model.item_factor(1)).unwrap();
            assert!((r.score - expected).abs() < 1e-12);
        }
        let (_, top2) = recommend_hybrid(&model, &m, 0, 2).unwrap();
        assert_eq!(top2.len(), 2);
    }

    #[test]
    fn hybrid_with_identical_directions_ties_by_index() {
        // One latent factor, all items pointing the same way: every cosine
        // is exactly 1 and ranking falls back to item order.
        let user_factors = DenseMatrix::from_vec(1, 1, vec![1.0]);
        let item_factors = DenseMatrix::from_vec(4, 1, vec![0.5, 2.0, 1.0, 0.25]);
        let model = LatentModel::from_parts(user_factors, item_factors, None);
        let m = RatingMatrix::from_entries(1, 4, vec![(0, 0, 5.0)], 5.0).unwrap();
        let (seed, recs) = recommend_hybrid(&model, &m, 0, 10).unwrap();
        assert_eq!(seed, 1); // highest prediction 2.0
        assert_eq!(recs.iter().map(|r| r.item).collect::<Vec<_>>(), vec![2, 3]);
        assert!(recs.iter().all(|r| (r.score - 1.0).abs() < 1e-12));
    }

    #[test]
    fn hybrid_errors_when_everything_is_rated() {
        let m = RatingMatrix::from_entries(1, 2, vec![(0, 0, 5.0), (0, 1, 3.0)], 5.0).unwrap();
        let model = LatentModel::from_parts(
            DenseMatrix::from_vec(1, 1, vec![1.0]),
            DenseMatrix::from_vec(2, 1, vec![1.0, 1.0]),
            None,
        );
        assert_eq!(
            recommend_hybrid(&model, &m, 0, 5),
            Err(SimilarityError::AllItemsRated)
        );
    }
}

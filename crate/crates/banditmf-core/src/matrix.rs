//! Rating and dense matrix containers.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::seed;

/// Error raised while building or splitting a [`RatingMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixError {
    /// An entry referenced a user or item index outside the declared shape.
    EntryOutOfRange { user: usize, item: usize },
    /// The same (user, item) pair appeared more than once.
    DuplicateEntry { user: usize, item: usize },
    /// A rating was NaN or infinite.
    NonFiniteRating { user: usize, item: usize },
    /// A rating exceeded the declared rating scale maximum.
    RatingAboveMax { user: usize, item: usize },
    /// The rating scale maximum must be positive and finite.
    InvalidRatingMax,
    /// A holdout split would leave the train or test side empty.
    DegenerateSplit { test_size: usize, total: usize },
    /// The holdout fraction must lie in (0, 1).
    InvalidFraction,
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::EntryOutOfRange { user, item } => {
                write!(f, "entry ({user}, {item}) is outside the matrix shape")
            }
            MatrixError::DuplicateEntry { user, item } => {
                write!(f, "duplicate rating for user {user}, item {item}")
            }
            MatrixError::NonFiniteRating { user, item } => {
                write!(f, "non-finite rating for user {user}, item {item}")
            }
            MatrixError::RatingAboveMax { user, item } => {
                write!(f, "rating for user {user}, item {item} exceeds the rating scale")
            }
            MatrixError::InvalidRatingMax => write!(f, "rating scale maximum must be positive"),
            MatrixError::DegenerateSplit { test_size, total } => write!(
                f,
                "holdout split of {test_size}/{total} entries leaves one side empty"
            ),
            MatrixError::InvalidFraction => write!(f, "holdout fraction must lie in (0, 1)"),
        }
    }
}

impl core::error::Error for MatrixError {}

/// Sparse user-item rating matrix in compressed-row form.
///
/// Absent entries mean "not rated"; an explicit 0.0 is a legitimate rating.
/// `rating_max` records the scale ceiling used for reward normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    num_users: usize,
    num_items: usize,
    rating_max: f64,
    row_start: Vec<usize>,
    items: Vec<usize>,
    values: Vec<f64>,
}

impl RatingMatrix {
    /// Builds a matrix from `(user, item, rating)` triples.
    ///
    /// Entries may arrive in any order; they are stored sorted by user then
    /// item. Duplicate pairs, out-of-range indices, non-finite ratings and
    /// ratings above `rating_max` are rejected.
    pub fn from_entries(
        num_users: usize,
        num_items: usize,
        mut entries: Vec<(usize, usize, f64)>,
        rating_max: f64,
    ) -> Result<Self, MatrixError> {
        if !(rating_max.is_finite() && rating_max > 0.0) {
            return Err(MatrixError::InvalidRatingMax);
        }
        for &(u, i, r) in &entries {
            if u >= num_users || i >= num_items {
                return Err(MatrixError::EntryOutOfRange { user: u, item: i });
            }
            if !r.is_finite() {
                return Err(MatrixError::NonFiniteRating { user: u, item: i });
            }
            if r > rating_max {
                return Err(MatrixError::RatingAboveMax { user: u, item: i });
            }
        }
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(MatrixError::DuplicateEntry { user: w[0].0, item: w[0].1 });
            }
        }
        let mut row_start = vec![0usize; num_users + 1];
        for &(u, _, _) in &entries {
            row_start[u + 1] += 1;
        }
        for u in 0..num_users {
            row_start[u + 1] += row_start[u];
        }
        let items = entries.iter().map(|e| e.1).collect();
        let values = entries.iter().map(|e| e.2).collect();
        Ok(Self { num_users, num_items, rating_max, row_start, items, values })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// Ceiling of the rating scale (r-star in reward normalization).
    pub fn rating_max(&self) -> f64 {
        self.rating_max
    }

    /// Number of observed ratings.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rating of `(user, item)` if observed.
    pub fn get(&self, user: usize, item: usize) -> Option<f64> {
        let (items, values) = self.user_row(user);
        items.binary_search(&item).ok().map(|pos| values[pos])
    }

    /// Item indices and ratings of one user, sorted by item index.
    ///
    /// # Panics
    /// Panics if `user` is out of range.
    pub fn user_row(&self, user: usize) -> (&[usize], &[f64]) {
        let lo = self.row_start[user];
        let hi = self.row_start[user + 1];
        (&self.items[lo..hi], &self.values[lo..hi])
    }

    /// Number of ratings by one user.
    pub fn user_count(&self, user: usize) -> usize {
        self.row_start[user + 1] - self.row_start[user]
    }

    /// All `(user, item, rating)` triples, sorted by user then item.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_users).flat_map(move |u| {
            let (items, values) = self.user_row(u);
            items.iter().zip(values).map(move |(&i, &r)| (u, i, r))
        })
    }

    /// Mean of all observed ratings, or `None` for an empty matrix.
    pub fn mean_rating(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
    }

    /// Splits the observed entries uniformly at random into train and test
    /// matrices over the same index spaces and rating scale.
    ///
    /// The test side receives exactly `floor(fraction * len)` entries; the
    /// split is a partition (every entry lands on exactly one side) and is
    /// fully determined by `seed`.
    pub fn split_holdout(
        &self,
        fraction: f64,
        seed: u64,
    ) -> Result<(RatingMatrix, RatingMatrix), MatrixError> {
        if !(fraction.is_finite() && fraction > 0.0 && fraction < 1.0) {
            return Err(MatrixError::InvalidFraction);
        }
        let total = self.len();
        let test_size = (fraction * total as f64) as usize;
        if test_size == 0 || test_size == total {
            return Err(MatrixError::DegenerateSplit { test_size, total });
        }
        let mut order: Vec<usize> = (0..total).collect();
        let mut rng = seed::rng_from_seed(seed);
        seed::shuffle(&mut order, &mut rng);
        let all: Vec<(usize, usize, f64)> = self.entries().collect();
        let test_entries: Vec<_> = order[..test_size].iter().map(|&n| all[n]).collect();
        let train_entries: Vec<_> = order[test_size..].iter().map(|&n| all[n]).collect();
        let train = RatingMatrix::from_entries(
            self.num_users,
            self.num_items,
            train_entries,
            self.rating_max,
        )?;
        let test = RatingMatrix::from_entries(
            self.num_users,
            self.num_items,
            test_entries,
            self.rating_max,
        )?;
        Ok((train, test))
    }
}

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Wraps a row-major buffer.
    ///
    /// # Panics
    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "dense matrix shape mismatch");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

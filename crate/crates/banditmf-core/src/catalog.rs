//! Item metadata and target-user input resolution.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Error raised while building a catalog or resolving target ratings.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogError {
    /// Two items carried the same external id.
    DuplicateExternalId { id: String },
    /// A target rating referenced an id or title not present in the catalog.
    UnknownItem { key: String },
    /// The same item appeared twice in one target-user input.
    DuplicateTargetItem { key: String },
    /// A target rating fell outside `[0, rating_max]`.
    RatingOutOfRange { key: String, rating: f64 },
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogError::DuplicateExternalId { id } => {
                write!(f, "duplicate external item id {id:?}")
            }
            CatalogError::UnknownItem { key } => {
                write!(f, "item {key:?} matches no catalog id or title")
            }
            CatalogError::DuplicateTargetItem { key } => {
                write!(f, "item {key:?} rated twice in target input")
            }
            CatalogError::RatingOutOfRange { key, rating } => {
                write!(f, "rating {rating} for item {key:?} is outside the rating scale")
            }
        }
    }
}

impl core::error::Error for CatalogError {}

/// Maps dense item indices to external ids and display titles.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemCatalog {
    external_ids: Vec<String>,
    titles: Vec<String>,
}

impl ItemCatalog {
    /// Builds a catalog from parallel id/title lists indexed by item.
    ///
    /// External ids must be unique; titles need not be.
    pub fn new(external_ids: Vec<String>, titles: Vec<String>) -> Result<Self, CatalogError> {
        assert_eq!(external_ids.len(), titles.len(), "catalog id/title length mismatch");
        let mut sorted: Vec<&String> = external_ids.iter().collect();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(CatalogError::DuplicateExternalId { id: w[0].clone() });
            }
        }
        Ok(Self { external_ids, titles })
    }

    pub fn len(&self) -> usize {
        self.external_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external_ids.is_empty()
    }

    pub fn external_id(&self, item: usize) -> &str {
        &self.external_ids[item]
    }

    pub fn title(&self, item: usize) -> &str {
        &self.titles[item]
    }

    /// Finds an item by external id, falling back to exact title match
    /// (first matching index wins).
    pub fn find(&self, key: &str) -> Option<usize> {
        if let Some(idx) = self.external_ids.iter().position(|id| id == key) {
            return Some(idx);
        }
        self.titles.iter().position(|t| t == key)
    }
}

/// Ratings supplied interactively for a user outside the training matrix,
/// keyed by external item id or title.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetUserInput {
    pub ratings: Vec<(String, f64)>,
}

impl TargetUserInput {
    pub fn new(ratings: Vec<(String, f64)>) -> Self {
        Self { ratings }
    }

    /// Resolves every key against the catalog, producing `(item, rating)`
    /// pairs. Rejects unknown keys, duplicate items and ratings outside
    /// `[0, rating_max]`.
    pub fn resolve(
        &self,
        catalog: &ItemCatalog,
        rating_max: f64,
    ) -> Result<Vec<(usize, f64)>, CatalogError> {
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.ratings.len());
        for (key, rating) in &self.ratings {
            let item = catalog
                .find(key)
                .ok_or_else(|| CatalogError::UnknownItem { key: key.clone() })?;
            if out.iter().any(|&(seen, _)| seen == item) {
                return Err(CatalogError::DuplicateTargetItem { key: key.clone() });
            }
            if !(rating.is_finite() && *rating >= 0.0 && *rating <= rating_max) {
                return Err(CatalogError::RatingOutOfRange { key: key.clone(), rating: *rating });
            }
            out.push((item, *rating));
        }
        Ok(out)
    }
}

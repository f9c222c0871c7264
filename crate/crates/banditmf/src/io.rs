//! Loaders and writers for the on-disk data formats: sparse rating CSVs,
//! dense rating grids, logged bandit interaction files, and item catalogs.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::Write as _;
use std::path::Path;

use banditmf_core::replay_log::ReplayLogError;
use banditmf_core::{MatrixError, RatingMatrix, ReplayLog};
use thiserror::Error;

/// Error raised by file loading or writing.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: file not found")]
    Missing { path: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: expected header {expected}, got {got}")]
    Header { path: String, expected: String, got: String },
    #[error("{path} line {line}: {problem}")]
    Row { path: String, line: u64, problem: String },
    #[error("{path} line {line}: duplicate rating for user {user}, item {item}")]
    Duplicate { path: String, line: u64, user: String, item: String },
    #[error("{path}: no ratings")]
    NoRatings { path: String },
    #[error("{path}: no positive rating to infer the scale from; pass an explicit rating max")]
    NoPositiveRatings { path: String },
    #[error("{path}: {source}")]
    Matrix { path: String, source: MatrixError },
    #[error("{path}: {source}")]
    Replay { path: String, source: ReplayLogError },
}

impl IoError {
    /// True when the problem is a missing input file (a usage error for
    /// the CLI, not a computation failure).
    pub fn is_missing(&self) -> bool {
        matches!(self, IoError::Missing { .. })
    }
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn open_error(path: &Path, source: std::io::Error) -> IoError {
    if source.kind() == std::io::ErrorKind::NotFound {
        IoError::Missing { path: path_str(path) }
    } else {
        IoError::Io { path: path_str(path), source }
    }
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| open_error(path, e))
}

/// A rating matrix together with the external ids its dense indices were
/// assigned from, in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsTable {
    pub matrix: RatingMatrix,
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
}

const RATINGS_HEADER: [&str; 3] = ["userId", "movieId", "rating"];

/// Loads a sparse ratings CSV (`userId,movieId,rating[,timestamp]`).
///
/// User and item ids are densified in first-appearance order. The rating
/// scale is the observed maximum unless `rating_max` overrides it;
/// timestamps are ignored.
pub fn load_ratings_csv(
    path: &Path,
    rating_max: Option<f64>,
) -> Result<RatingsTable, IoError> {
    let file = File::open(path).map_err(|e| open_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| IoError::Csv { path: path_str(path), source: e })?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    let with_ts = ["userId", "movieId", "rating", "timestamp"];
    if fields != RATINGS_HEADER && fields != with_ts {
        return Err(IoError::Header {
            path: path_str(path),
            expected: "userId,movieId,rating[,timestamp]".into(),
            got: fields.join(","),
        });
    }

    let mut user_index: HashMap<String, usize> = HashMap::new();
    let mut item_index: HashMap<String, usize> = HashMap::new();
    let mut user_ids: Vec<String> = Vec::new();
    let mut item_ids: Vec<String> = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut observed_max = f64::NEG_INFINITY;

    for record in reader.records() {
        let record = record.map_err(|e| IoError::Csv { path: path_str(path), source: e })?;
        let line = record.position().map_or(0, |p| p.line());
        let row_err = |problem: String| IoError::Row { path: path_str(path), line, problem };
        if record.len() != headers.len() {
            return Err(row_err(format!(
                "expected {} fields, got {}",
                headers.len(),
                record.len()
            )));
        }
        let user_key = record[0].trim();
        let item_key = record[1].trim();
        let rating_text = record[2].trim();
        if user_key.is_empty() || item_key.is_empty() {
            return Err(row_err("empty id field".into()));
        }
        let rating: f64 = rating_text
            .parse()
            .map_err(|_| row_err(format!("unparseable rating {rating_text:?}")))?;
        if !rating.is_finite() || rating < 0.0 {
            return Err(row_err(format!("rating {rating} must be finite and non-negative")));
        }
        if let Some(max) = rating_max {
            if rating > max {
                return Err(row_err(format!("rating {rating} exceeds rating max {max}")));
            }
        }

        let next_user = user_ids.len();
        let user = *user_index.entry(user_key.to_string()).or_insert_with(|| {
            user_ids.push(user_key.to_string());
            next_user
        });
        let next_item = item_ids.len();
        let item = *item_index.entry(item_key.to_string()).or_insert_with(|| {
            item_ids.push(item_key.to_string());
            next_item
        });
        if !seen.insert((user, item)) {
            return Err(IoError::Duplicate {
                path: path_str(path),
                line,
                user: user_key.to_string(),
                item: item_key.to_string(),
            });
        }
        observed_max = observed_max.max(rating);
        entries.push((user, item, rating));
    }

    if entries.is_empty() {
        return Err(IoError::NoRatings { path: path_str(path) });
    }
    let scale = match rating_max {
        Some(max) => max,
        None if observed_max > 0.0 => observed_max,
        None => return Err(IoError::NoPositiveRatings { path: path_str(path) }),
    };
    let matrix = RatingMatrix::from_entries(user_ids.len(), item_ids.len(), entries, scale)
        .map_err(|e| IoError::Matrix { path: path_str(path), source: e })?;
    Ok(RatingsTable { matrix, user_ids, item_ids })
}

/// Writes a ratings table as a canonical sparse CSV: `userId,movieId,rating`
/// header, entries sorted by (user, item) index.
pub fn write_ratings_csv(path: &Path, table: &RatingsTable) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| open_error(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(RATINGS_HEADER)
        .map_err(|e| IoError::Csv { path: path_str(path), source: e })?;
    for (user, item, rating) in table.matrix.entries() {
        writer
            .write_record([
                table.user_ids[user].as_str(),
                table.item_ids[item].as_str(),
                &format!("{rating}"),
            ])
            .map_err(|e| IoError::Csv { path: path_str(path), source: e })?;
    }
    writer.flush().map_err(|e| IoError::Io { path: path_str(path), source: e })?;
    Ok(())
}

/// Writes an `index,<id_column>` sidecar mapping dense indices back to
/// external ids.
pub fn write_id_map(path: &Path, id_column: &str, ids: &[String]) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| open_error(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(["index", id_column])
        .map_err(|e| IoError::Csv { path: path_str(path), source: e })?;
    for (index, id) in ids.iter().enumerate() {
        writer
            .write_record([&index.to_string(), id])
            .map_err(|e| IoError::Csv { path: path_str(path), source: e })?;
    }
    writer.flush().map_err(|e| IoError::Io { path: path_str(path), source: e })?;
    Ok(())
}

/// Loads a dense numeric grid (whitespace- or comma-separated). Zero cells
/// mean "unobserved", never "rated zero". The rating scale defaults to the
/// observed maximum (or 1 for an all-zero grid) unless overridden.
pub fn load_dense_matrix(
    path: &Path,
    rating_max: Option<f64>,
) -> Result<RatingMatrix, IoError> {
    let text = read_text(path)?;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut width: Option<usize> = None;
    let mut observed_max = f64::NEG_INFINITY;
    let mut rows = 0usize;
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no as u64 + 1;
        let tokens: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            continue;
        }
        let row_err = |problem: String| IoError::Row {
            path: path_str(path),
            line: line_no,
            problem,
        };
        match width {
            None => width = Some(tokens.len()),
            Some(w) if w != tokens.len() => {
                return Err(row_err(format!("expected {w} columns, got {}", tokens.len())));
            }
            _ => {}
        }
        for (col, token) in tokens.iter().enumerate() {
            let value: f64 = token
                .parse()
                .map_err(|_| row_err(format!("unparseable value {token:?}")))?;
            if !value.is_finite() || value < 0.0 {
                return Err(row_err(format!("value {value} must be finite and non-negative")));
            }
            if value != 0.0 {
                observed_max = observed_max.max(value);
                entries.push((rows, col, value));
            }
        }
        rows += 1;
    }
    let cols = width.unwrap_or(0);
    let scale = match rating_max {
        Some(max) => max,
        None if observed_max > 0.0 => observed_max,
        None => 1.0,
    };
    RatingMatrix::from_entries(rows, cols, entries, scale)
        .map_err(|e| IoError::Matrix { path: path_str(path), source: e })
}

/// Loads a logged-interaction file: one event per line, whitespace
/// separated — action index, binary reward, then the feature values.
pub fn load_replay_log(path: &Path) -> Result<ReplayLog, IoError> {
    let text = read_text(path)?;
    let mut rows: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no as u64 + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let row_err = |problem: String| IoError::Row {
            path: path_str(path),
            line: line_no,
            problem,
        };
        if tokens.len() < 2 {
            return Err(row_err("need at least an action and a reward".into()));
        }
        let action_value: f64 = tokens[0]
            .parse()
            .map_err(|_| row_err(format!("unparseable action {:?}", tokens[0])))?;
        if !(action_value.is_finite() && action_value >= 0.0 && action_value.fract() == 0.0) {
            return Err(row_err(format!("action {action_value} must be a non-negative integer")));
        }
        let reward: f64 = tokens[1]
            .parse()
            .map_err(|_| row_err(format!("unparseable reward {:?}", tokens[1])))?;
        if reward != 0.0 && reward != 1.0 {
            return Err(row_err(format!("reward {reward} must be 0 or 1")));
        }
        let mut context = Vec::with_capacity(tokens.len() - 2);
        for token in &tokens[2..] {
            let value: f64 = token
                .parse()
                .map_err(|_| row_err(format!("unparseable feature {token:?}")))?;
            context.push(value);
        }
        rows.push((action_value as usize, reward, context));
    }
    ReplayLog::from_rows(rows).map_err(|e| IoError::Replay { path: path_str(path), source: e })
}

/// Writes a replay log in the format [`load_replay_log`] reads.
pub fn write_replay_log(path: &Path, log: &ReplayLog) -> Result<(), IoError> {
    let mut out = String::new();
    for row in 0..log.len() {
        out.push_str(&format!("{} {}", log.action(row), log.reward(row)));
        for value in log.context(row) {
            out.push_str(&format!(" {value}"));
        }
        out.push('\n');
    }
    let mut file = File::create(path).map_err(|e| open_error(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| IoError::Io { path: path_str(path), source: e })?;
    Ok(())
}

/// Loads an item catalog CSV (`movieId,title`, extra columns ignored) as
/// `(external_id, title)` pairs in file order.
pub fn load_catalog_csv(path: &Path) -> Result<Vec<(String, String)>, IoError> {
    let file = File::open(path).map_err(|e| open_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| IoError::Csv { path: path_str(path), source: e })?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    if fields.len() < 2 || fields[0] != "movieId" || fields[1] != "title" {
        return Err(IoError::Header {
            path: path_str(path),
            expected: "movieId,title[,...]".into(),
            got: fields.join(","),
        });
    }
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IoError::Csv { path: path_str(path), source: e })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < 2 {
            return Err(IoError::Row {
                path: path_str(path),
                line,
                problem: "need at least id and title".into(),
            });
        }
        pairs.push((record[0].trim().to_string(), record[1].to_string()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn temp_file(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn loads_sparse_ratings_with_densified_ids() {
        let file = temp_file("userId,movieId,rating\n1,10,4.0\n1,20,3.0\n2,10,5.0\n");
        let table = load_ratings_csv(file.path(), None).unwrap();
        assert_eq!(table.matrix.num_users(), 2);
        assert_eq!(table.matrix.num_items(), 2);
        assert_eq!(table.matrix.len(), 3);
        assert_eq!(table.matrix.rating_max(), 5.0);
        assert_eq!(table.user_ids, vec!["1", "2"]);
        assert_eq!(table.item_ids, vec!["10", "20"]);
        assert_eq!(table.matrix.get(0, 1), Some(3.0));
    }

    #[test]
    fn accepts_and_ignores_timestamps() {
        let file = temp_file("userId,movieId,rating,timestamp\n1,10,4.0,964982703\n");
        let table = load_ratings_csv(file.path(), None).unwrap();
        assert_eq!(table.matrix.len(), 1);
    }

    #[test]
    fn rejects_wrong_header() {
        let file = temp_file("user,item,stars\n1,10,4.0\n");
        assert!(matches!(
            load_ratings_csv(file.path(), None),
            Err(IoError::Header { .. })
        ));
    }

    #[test]
    fn reports_the_failing_line() {
        let file = temp_file("userId,movieId,rating\n1,10,4.0\n2,10,oops\n");
        match load_ratings_csv(file.path(), None) {
            Err(IoError::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_pairs_with_line() {
        let file = temp_file("userId,movieId,rating\n1,10,4.0\n1,10,2.0\n");
        match load_ratings_csv(file.path(), None) {
            Err(IoError::Duplicate { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn empty_data_section_is_an_error() {
        let file = temp_file("userId,movieId,rating\n");
        assert!(matches!(
            load_ratings_csv(file.path(), None),
            Err(IoError::NoRatings { .. })
        ));
    }

    #[test]
    fn missing_file_is_distinguished() {
        let err = load_ratings_csv(Path::new("/definitely/not/here.csv"), None).unwrap_err();
        assert!(err.is_missing());
    }

    #[test]
    fn rating_max_override_validates_rows() {
        let file = temp_file("userId,movieId,rating\n1,10,4.0\n");
        let table = load_ratings_csv(file.path(), Some(10.0)).unwrap();
        assert_eq!(table.matrix.rating_max(), 10.0);
        let file = temp_file("userId,movieId,rating\n1,10,7.0\n");
        assert!(matches!(
            load_ratings_csv(file.path(), Some(5.0)),
            Err(IoError::Row { .. })
        ));
    }

    #[test]
    fn dense_zeros_are_missing() {
        let file = temp_file("1 0\n0 2\n");
        let matrix = load_dense_matrix(file.path(), None).unwrap();
        assert_eq!(matrix.num_users(), 2);
        assert_eq!(matrix.num_items(), 2);
        assert_eq!(matrix.len(), 2);
        assert_eq!(matrix.get(0, 0), Some(1.0));
        assert_eq!(matrix.get(0, 1), None);
        assert_eq!(matrix.get(1, 1), Some(2.0));
    }

    #[test]
    fn dense_accepts_commas_and_all_zero_grids() {
        let file = temp_file("0,0\n0,0\n");
        let matrix = load_dense_matrix(file.path(), None).unwrap();
        assert_eq!(matrix.len(), 0);
        assert_eq!(matrix.num_users(), 2);
    }

    #[test]
    fn dense_rejects_ragged_rows() {
        let file = temp_file("1 2 3\n4 5\n");
        match load_dense_matrix(file.path(), None) {
            Err(IoError::Row { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected ragged-row error, got {other:?}"),
        }
    }

    #[test]
    fn replay_log_round_trip_and_validation() {
        let file = temp_file("3 1 0.1 0.2\n0 0 -0.5 0.9\n");
        let log = load_replay_log(file.path()).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log.dim(), 2);
        assert_eq!(log.action(0), 3);
        assert_eq!(log.reward(1), 0.0);
        assert_eq!(log.context(1), &[-0.5, 0.9]);

        let out = tempfile::NamedTempFile::new().unwrap();
        write_replay_log(out.path(), &log).unwrap();
        let again = load_replay_log(out.path()).unwrap();
        assert_eq!(again.len(), 2);
        assert_eq!(again.context(0), log.context(0));

        let empty = temp_file("");
        assert!(load_replay_log(empty.path()).unwrap().is_empty());

        let bad_reward = temp_file("0 0.5 1.0\n");
        assert!(matches!(
            load_replay_log(bad_reward.path()),
            Err(IoError::Row { .. })
        ));

        let ragged = temp_file("0 1 1.0 2.0\n0 1 1.0\n");
        assert!(matches!(
            load_replay_log(ragged.path()),
            Err(IoError::Replay { .. })
        ));
    }

    #[test]
    fn catalog_reads_quoted_titles() {
        let file =
            temp_file("movieId,title,genres\n1,\"Heat, The (1995)\",Action\n2,Jumanji,Kids\n");
        let pairs = load_catalog_csv(file.path()).unwrap();
        assert_eq!(pairs[0], ("1".to_string(), "Heat, The (1995)".to_string()));
        assert_eq!(pairs[1].1, "Jumanji");
    }

    #[test]
    fn sparse_round_trip_preserves_entries() {
        let file = temp_file("userId,movieId,rating\n7,a,4.5\n7,b,3\n9,a,0.5\n");
        let table = load_ratings_csv(file.path(), None).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_ratings_csv(out.path(), &table).unwrap();
        let again = load_ratings_csv(out.path(), None).unwrap();
        assert_eq!(again, table);
    }
}

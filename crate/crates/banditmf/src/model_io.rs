//! Versioned flat-text serialization for trained factor models.
//!
//! Layout: a `banditmf-model v1` magic line, then `variant`, `users`,
//! `items`, `factors` header fields; bias models add `mu`, `buser`, and
//! `bitem` lines; then one `p ...` line per user row and one `q ...` line
//! per item row. Floats are printed with 17 significant digits so a
//! load/save cycle reproduces every bit.

use std::fs;
use std::path::Path;

use banditmf_core::mf::BiasTerms;
use banditmf_core::{DenseMatrix, LatentModel, ModelVariant};
use thiserror::Error;

const MAGIC: &str = "banditmf-model v1";

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("{path}: file not found")]
    Missing { path: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path} line {line}: {problem}")]
    Parse { path: String, line: usize, problem: String },
}

impl ModelIoError {
    pub fn is_missing(&self) -> bool {
        matches!(self, ModelIoError::Missing { .. })
    }
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn float(value: f64) -> String {
    format!("{value:.16e}")
}

fn float_row(values: &[f64]) -> String {
    values.iter().map(|v| float(*v)).collect::<Vec<_>>().join(" ")
}

/// Serializes a model to `path` in the v1 flat-text format.
pub fn save_model(path: &Path, model: &LatentModel) -> Result<(), ModelIoError> {
    let m = model.num_users();
    let n = model.num_items();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let variant = match model.variant() {
        ModelVariant::Base => "base",
        ModelVariant::Bias => "bias",
    };
    out.push_str(&format!("variant {variant}\n"));
    out.push_str(&format!("users {m}\n"));
    out.push_str(&format!("items {n}\n"));
    out.push_str(&format!("factors {}\n", model.latent_dim()));
    if let Some(bias) = model.bias() {
        out.push_str(&format!("mu {}\n", float(bias.global_mean)));
        out.push_str(&format!("buser {}\n", float_row(&bias.user_bias)));
        out.push_str(&format!("bitem {}\n", float_row(&bias.item_bias)));
    }
    for user in 0..m {
        out.push_str(&format!("p {}\n", float_row(model.user_factors().row(user))));
    }
    for item in 0..n {
        out.push_str(&format!("q {}\n", float_row(model.item_factors().row(item))));
    }
    fs::write(path, out).map_err(|e| ModelIoError::Io { path: path_str(path), source: e })
}

struct Parser<'a> {
    path: String,
    lines: std::str::Lines<'a>,
    line: usize,
}

impl<'a> Parser<'a> {
    fn fail(&self, problem: impl Into<String>) -> ModelIoError {
        ModelIoError::Parse { path: self.path.clone(), line: self.line, problem: problem.into() }
    }

    fn next_line(&mut self) -> Result<&'a str, ModelIoError> {
        self.line += 1;
        self.lines.next().ok_or_else(|| self.fail("unexpected end of file"))
    }

    /// Consumes a `tag rest...` line, returning the part after the tag.
    fn tagged(&mut self, tag: &str) -> Result<&'a str, ModelIoError> {
        let text = self.next_line()?;
        match text.strip_prefix(tag) {
            Some(rest) if rest.starts_with(' ') => Ok(rest.trim_start()),
            _ => Err(self.fail(format!("expected a {tag:?} line, got {text:?}"))),
        }
    }

    fn usize_field(&mut self, tag: &str) -> Result<usize, ModelIoError> {
        let rest = self.tagged(tag)?;
        rest.parse().map_err(|_| self.fail(format!("unparseable {tag} count {rest:?}")))
    }

    fn float_fields(&mut self, tag: &str, expected: usize) -> Result<Vec<f64>, ModelIoError> {
        let rest = self.tagged(tag)?;
        let mut values = Vec::with_capacity(expected);
        for token in rest.split_whitespace() {
            let value: f64 = token
                .parse()
                .map_err(|_| self.fail(format!("unparseable float {token:?}")))?;
            values.push(value);
        }
        if values.len() != expected {
            return Err(self.fail(format!(
                "expected {expected} values after {tag:?}, got {}",
                values.len()
            )));
        }
        Ok(values)
    }
}

/// Loads a model saved by [`save_model`].
pub fn load_model(path: &Path) -> Result<LatentModel, ModelIoError> {
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ModelIoError::Missing { path: path_str(path) }
        } else {
            ModelIoError::Io { path: path_str(path), source: e }
        }
    })?;
    let mut parser = Parser { path: path_str(path), lines: text.lines(), line: 0 };

    let magic = parser.next_line()?;
    if magic != MAGIC {
        return Err(parser.fail(format!("expected {MAGIC:?}, got {magic:?}")));
    }
    let variant = match parser.tagged("variant")? {
        "base" => ModelVariant::Base,
        "bias" => ModelVariant::Bias,
        other => return Err(parser.fail(format!("unknown variant {other:?}"))),
    };
    let m = parser.usize_field("users")?;
    let n = parser.usize_field("items")?;
    let k = parser.usize_field("factors")?;

    let bias = match variant {
        ModelVariant::Base => None,
        ModelVariant::Bias => {
            let mu = parser.float_fields("mu", 1)?[0];
            let user_bias = parser.float_fields("buser", m)?;
            let item_bias = parser.float_fields("bitem", n)?;
            Some(BiasTerms { global_mean: mu, user_bias, item_bias })
        }
    };

    let mut user_data = Vec::with_capacity(m * k);
    for _ in 0..m {
        user_data.extend(parser.float_fields("p", k)?);
    }
    let mut item_data = Vec::with_capacity(n * k);
    for _ in 0..n {
        item_data.extend(parser.float_fields("q", k)?);
    }
    if let Some(extra) = parser.lines.next() {
        if !extra.trim().is_empty() {
            parser.line += 1;
            return Err(parser.fail(format!("unexpected trailing content {extra:?}")));
        }
    }

    let user_factors = DenseMatrix::from_vec(m, k, user_data);
    let item_factors = DenseMatrix::from_vec(n, k, item_data);
    Ok(LatentModel::from_parts(user_factors, item_factors, bias))
}

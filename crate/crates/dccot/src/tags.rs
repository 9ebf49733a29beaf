//! Tag vocabulary for the director/worker transcript format.
//!
//! A response interleaves free director text with spawn blocks of the shape
//! `<spawn_workers><worker_1>...</worker_1>...<worker_K>...</worker_K></spawn_workers>`.
//! All tag strings are configurable; the defaults match the format above.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Placeholder substituted with the 1-based worker index in the worker tag templates.
pub const INDEX_PLACEHOLDER: &str = "{i}";

/// Invalid tag configuration.
#[derive(Debug, Error)]
pub enum TagConfigError {
    #[error("tag `{0}` must be non-empty")]
    EmptyTag(&'static str),
    #[error("worker tag template `{0}` must contain `{{i}}`")]
    MissingPlaceholder(&'static str),
    #[error("tags must be pairwise distinct: `{0}` occurs twice")]
    DuplicateTag(String),
}

/// The tag strings delimiting spawn rounds and worker segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagConfig {
    /// Opens a spawn round. Also the director's finish string during inference.
    pub spawn_open: String,
    /// Closes a spawn round.
    pub spawn_close: String,
    /// Template for the tag opening worker `i`; `{i}` is replaced by the index.
    pub worker_open_template: String,
    /// Template for the tag closing worker `i`; the worker's finish string.
    pub worker_close_template: String,
    /// End-of-sequence marker understood by the scripted backend.
    pub eos_marker: String,
}

impl Default for TagConfig {
    fn default() -> Self {
        Self {
            spawn_open: "<spawn_workers>".to_string(),
            spawn_close: "</spawn_workers>".to_string(),
            worker_open_template: "<worker_{i}>".to_string(),
            worker_close_template: "</worker_{i}>".to_string(),
            eos_marker: "[EOS]".to_string(),
        }
    }
}

impl TagConfig {
    /// Checks the structural invariants: non-empty tags, templates carry the
    /// index placeholder, and no two tags collide.
    pub fn validate(&self) -> Result<(), TagConfigError> {
        let named = [
            ("spawn_open", &self.spawn_open),
            ("spawn_close", &self.spawn_close),
            ("worker_open_template", &self.worker_open_template),
            ("worker_close_template", &self.worker_close_template),
            ("eos_marker", &self.eos_marker),
        ];
        for (name, value) in &named {
            if value.is_empty() {
                return Err(TagConfigError::EmptyTag(name));
            }
        }
        for (name, value) in [
            ("worker_open_template", &self.worker_open_template),
            ("worker_close_template", &self.worker_close_template),
        ] {
            if !value.contains(INDEX_PLACEHOLDER) {
                return Err(TagConfigError::MissingPlaceholder(name));
            }
        }
        // Distinctness over the fixed tags plus a rendered worker pair. Distinctness
        // across worker indices follows from the placeholder being present.
        let rendered = [
            self.spawn_open.clone(),
            self.spawn_close.clone(),
            self.worker_open(1),
            self.worker_close(1),
            self.eos_marker.clone(),
        ];
        for (i, a) in rendered.iter().enumerate() {
            for b in rendered.iter().skip(i + 1) {
                if a == b {
                    return Err(TagConfigError::DuplicateTag(a.clone()));
                }
            }
        }
        Ok(())
    }

    /// The tag opening worker `index`.
    pub fn worker_open(&self, index: usize) -> String {
        self.worker_open_template
            .replace(INDEX_PLACEHOLDER, &index.to_string())
    }

    /// The tag closing worker `index`.
    pub fn worker_close(&self, index: usize) -> String {
        self.worker_close_template
            .replace(INDEX_PLACEHOLDER, &index.to_string())
    }

    /// If `text` starts with a rendered worker-open tag, returns the index and tag length.
    pub fn match_worker_open(&self, text: &str) -> Option<(usize, usize)> {
        match_template(&self.worker_open_template, text)
    }

    /// If `text` starts with a rendered worker-close tag, returns the index and tag length.
    pub fn match_worker_close(&self, text: &str) -> Option<(usize, usize)> {
        match_template(&self.worker_close_template, text)
    }
}

/// Matches `text` against `template` with `{i}` bound to a positive integer.
/// Returns `(index, matched_len)` on success.
fn match_template(template: &str, text: &str) -> Option<(usize, usize)> {
    let split = template.find(INDEX_PLACEHOLDER)?;
    let (pre, rest) = template.split_at(split);
    let post = &rest[INDEX_PLACEHOLDER.len()..];
    let after_pre = text.strip_prefix(pre)?;
    let digits: String = after_pre.chars().take_while(char::is_ascii_digit).collect();
    if digits.is_empty() {
        return None;
    }
    let after_digits = &after_pre[digits.len()..];
    if !after_digits.starts_with(post) {
        return None;
    }
    let index: usize = digits.parse().ok()?;
    if index == 0 {
        return None;
    }
    Some((index, pre.len() + digits.len() + post.len()))
}

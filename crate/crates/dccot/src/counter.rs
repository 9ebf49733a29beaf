//! Token counting behind a pluggable trait.
//!
//! Segment lengths, budgets, and position arithmetic are all measured in
//! tokens, but the definition of a token belongs to whatever model is in
//! play. The trait below abstracts it; the whitespace counter is the default
//! used throughout the tests, and an external counter can shell out to a real
//! tokenizer.

use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::Arc;

/// Counts tokens in text. Implementations must be deterministic and additive
/// over segment-boundary concatenation: `count(a) + count(b) = count(ab)`
/// whenever `a` ends a segment and `b` starts the next one.
pub trait TokenCounter: Send + Sync {
    /// Number of tokens in `text`.
    fn count(&self, text: &str) -> usize;

    /// Byte length of a prefix of `text` containing exactly
    /// `min(n, count(text))` tokens. Used to truncate generation at a budget.
    fn prefix_bytes(&self, text: &str, n: usize) -> usize {
        if n >= self.count(text) {
            return text.len();
        }
        // Binary search over char boundaries; valid because count is
        // monotone in the prefix length.
        let boundaries: Vec<usize> = text
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(text.len()))
            .collect();
        let mut lo = 0;
        let mut hi = boundaries.len() - 1;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.count(&text[..boundaries[mid]]) <= n {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        boundaries[lo]
    }
}

/// Shared handle to a token counter.
pub type CounterHandle = Arc<dyn TokenCounter>;

/// Whitespace-delimited word count. The default test counter.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceCounter;

impl TokenCounter for WhitespaceCounter {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }

    fn prefix_bytes(&self, text: &str, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        let mut words = 0;
        let mut in_word = false;
        for (i, ch) in text.char_indices() {
            if ch.is_whitespace() {
                if in_word {
                    words += 1;
                    if words == n {
                        return i;
                    }
                    in_word = false;
                }
            } else {
                in_word = true;
            }
        }
        text.len()
    }
}

/// One token per character.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharCounter;

impl TokenCounter for CharCounter {
    fn count(&self, text: &str) -> usize {
        text.chars().count()
    }

    fn prefix_bytes(&self, text: &str, n: usize) -> usize {
        text.char_indices()
            .nth(n)
            .map_or(text.len(), |(i, _)| i)
    }
}

/// Delegates counting to an external command: the text is piped to stdin and
/// the command must print the token count as a decimal integer on stdout.
#[derive(Debug, Clone)]
pub struct ExternalCounter {
    command: String,
    args: Vec<String>,
}

impl ExternalCounter {
    pub fn new(command: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            command: command.into(),
            args,
        }
    }

    /// Builds the counter from a shell-style string: first word is the
    /// program, the rest are arguments.
    pub fn from_command_line(line: &str) -> Option<Self> {
        let mut parts = line.split_whitespace().map(str::to_string);
        let command = parts.next()?;
        Some(Self::new(command, parts.collect()))
    }
}

impl TokenCounter for ExternalCounter {
    fn count(&self, text: &str) -> usize {
        let mut child = Command::new(&self.command)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap_or_else(|e| panic!("external counter `{}` failed to start: {e}", self.command));
        child
            .stdin
            .take()
            .expect("stdin piped")
            .write_all(text.as_bytes())
            .expect("write to external counter");
        let out = child.wait_with_output().expect("external counter output");
        let stdout = String::from_utf8_lossy(&out.stdout);
        stdout
            .trim()
            .parse()
            .unwrap_or_else(|_| panic!("external counter `{}` printed `{stdout}`", self.command))
    }
}

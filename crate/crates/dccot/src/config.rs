//! Top-level configuration shared by the CLI subcommands.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backend::HttpBackendConfig;
use crate::counter::{CharCounter, CounterHandle, ExternalCounter, WhitespaceCounter};
use crate::tags::TagConfig;

/// Which token counter measures segment lengths and budgets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CounterChoice {
    #[default]
    Whitespace,
    Chars,
    External {
        command: String,
    },
}

impl CounterChoice {
    pub fn build(&self) -> Result<CounterHandle, String> {
        match self {
            CounterChoice::Whitespace => Ok(Arc::new(WhitespaceCounter)),
            CounterChoice::Chars => Ok(Arc::new(CharCounter)),
            CounterChoice::External { command } => ExternalCounter::from_command_line(command)
                .map(|c| Arc::new(c) as CounterHandle)
                .ok_or_else(|| format!("empty external counter command `{command}`")),
        }
    }

    /// Parses the CLI spelling: `whitespace`, `chars`, or `external:CMD`.
    pub fn from_flag(flag: &str) -> Result<Self, String> {
        match flag {
            "whitespace" => Ok(CounterChoice::Whitespace),
            "chars" => Ok(CounterChoice::Chars),
            other => match other.strip_prefix("external:") {
                Some(cmd) if !cmd.trim().is_empty() => Ok(CounterChoice::External {
                    command: cmd.trim().to_string(),
                }),
                _ => Err(format!(
                    "unknown counter `{other}` (expected whitespace, chars, or external:CMD)"
                )),
            },
        }
    }
}

/// Configuration file schema (`--config FILE`). Every field has a default;
/// command-line flags override file values.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct GlobalConfig {
    pub tags: TagConfig,
    pub token_counter: CounterChoice,
    /// Connection settings used when the HTTP backend is selected.
    pub http: Option<HttpBackendConfig>,
}

impl GlobalConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: GlobalConfig = serde_json::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        cfg.tags.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

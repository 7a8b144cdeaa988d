use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// Provenance block embedded in every artifact.
///
/// Pretty-printed JSON puts `timestamp` on a line of its own, so two runs
/// with the same arguments differ only on that line.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, params: &impl Serialize, seed: Option<u64>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            params: serde_json::to_value(params).unwrap_or(Value::Null),
            seed,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    /// `# key: value` lines for text artifacts such as CSV.
    pub fn comment_lines(&self) -> String {
        format!(
            "# {} {} {}\n# params: {}\n# seed: {}\n# timestamp: {}\n",
            self.tool,
            self.version,
            self.subcommand,
            self.params,
            self.seed.map_or("none".to_string(), |s| s.to_string()),
            self.timestamp
        )
    }
}

#[derive(Serialize)]
struct Document<'a, T> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: &'a T,
}

/// The body with the manifest as its first field, pretty-printed.
pub fn render(manifest: &RunManifest, body: &impl Serialize) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(&Document { manifest, body })?;
    s.push('\n');
    Ok(s)
}

use std::path::Path;

use serde::Serialize;

use schmlab::schmidt::Effort;
use schmlab::states::Tolerances;

pub const TOOL: &str = "schmlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Search {
    pub effort: Effort,
    pub trials: usize,
    pub seed: u64,
}

/// Envelope shared by every command. `timing_ms` is the last field so that
/// a report minus that line is reproducible byte for byte.
#[derive(Debug, Serialize)]
pub struct Report<C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: serde_json::Value,
    pub search: Search,
    pub tolerances: Tolerances,
    #[serde(flatten)]
    pub body: C,
    pub timing_ms: u128,
}

impl<C: Serialize> Report<C> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: Option<&Path>) -> std::io::Result<()> {
        match path {
            Some(p) => std::fs::write(p, self.to_json()),
            None => Ok(()),
        }
    }
}

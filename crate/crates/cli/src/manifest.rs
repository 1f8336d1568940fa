//! Run manifests: the reproducibility record written next to every set of
//! generated files.

use crate::{CliError, Ctx};
use nbp_core::CodeGraph;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeIdentity {
    /// Where the code came from: a file path or a construction recipe.
    pub source: String,
    pub sha256: String,
    pub n: usize,
    pub num_checks: usize,
}

impl CodeIdentity {
    pub fn of(g: &CodeGraph, source: impl Into<String>) -> Self {
        CodeIdentity {
            source: source.into(),
            sha256: g.code_hash(),
            n: g.n(),
            num_checks: g.num_checks(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub schema: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// The argument vector (without the program name) that produced the run.
    pub command: Vec<String>,
    pub out_dir: String,
    pub code: Option<CodeIdentity>,
    pub master_seed: Option<u64>,
    /// Fully resolved configuration (defaults included) where applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Collects outputs during a command and writes the manifest at the end.
pub struct ManifestBuilder {
    started_at: String,
    command: Vec<String>,
    out_dir: String,
    code: Option<CodeIdentity>,
    master_seed: Option<u64>,
    config: Option<serde_json::Value>,
    outputs: Vec<OutputEntry>,
}

impl ManifestBuilder {
    pub fn new(ctx: &Ctx) -> Self {
        ManifestBuilder {
            started_at: chrono::Utc::now().to_rfc3339(),
            command: ctx.argv.clone(),
            out_dir: ctx.out_dir.display().to_string(),
            code: None,
            master_seed: None,
            config: None,
            outputs: Vec::new(),
        }
    }

    pub fn code(&mut self, identity: CodeIdentity) -> &mut Self {
        self.code = Some(identity);
        self
    }

    pub fn config(&mut self, value: serde_json::Value) -> &mut Self {
        self.config = Some(value);
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.master_seed = Some(seed);
        self
    }

    pub fn output(&mut self, path: &Path, schema: &str) -> &mut Self {
        self.outputs.push(OutputEntry {
            path: path.display().to_string(),
            schema: schema.to_string(),
        });
        self
    }

    /// Write the manifest as `<name>` inside the output directory and return
    /// its path.
    pub fn write(self, ctx: &Ctx, name: &str) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            out_dir: self.out_dir,
            code: self.code,
            master_seed: self.master_seed,
            config: self.config,
            started_at: self.started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
            outputs: self.outputs,
        };
        let path = ctx.out_path(name);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}

//! Corpus manifests: one row per input/output pair.
//!
//! CSV is the primary format with a JSON alternative; the schema is
//! documented in `docs/manifest.schema.json`. Columns: `id`, `input_path`,
//! `output_path`, `label` (optional `good`|`bad`), `rater_votes`
//! (optional, semicolon-joined), `vocoder_tag`. Paths are resolved
//! relative to the manifest's directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use voxscreen::Quality;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("invalid manifest: {0}")]
    ManifestInvalid(String),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub input_path: String,
    pub output_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Quality>,
    /// One vote per rater.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rater_votes: Option<Vec<Quality>>,
    pub vocoder_tag: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub rows: Vec<ManifestRow>,
}

// Flat CSV row with votes joined by semicolons.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    id: String,
    input_path: String,
    output_path: String,
    label: String,
    rater_votes: String,
    vocoder_tag: String,
}

fn parse_quality(s: &str) -> Result<Quality, ManifestError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "good" => Ok(Quality::Good),
        "bad" => Ok(Quality::Bad),
        other => Err(ManifestError::ManifestInvalid(format!(
            "unknown label '{other}' (expected good|bad)"
        ))),
    }
}

fn quality_str(q: Quality) -> &'static str {
    match q {
        Quality::Good => "good",
        Quality::Bad => "bad",
    }
}

impl CorpusManifest {
    /// Loads a manifest (`.csv` or `.json` by extension) and validates it:
    /// ids must be unique and every referenced file must exist.
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let manifest = Self::parse(path)?;
        manifest.validate(path.parent().unwrap_or(Path::new(".")))?;
        Ok(manifest)
    }

    fn parse(path: &Path) -> Result<Self, ManifestError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => {
                let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                Ok(serde_json::from_str(&text)?)
            }
            Some("csv") => {
                let mut reader =
                    csv::Reader::from_path(path).map_err(ManifestError::Csv)?;
                let mut rows = Vec::new();
                for row in reader.deserialize::<CsvRow>() {
                    let row = row?;
                    let label = if row.label.trim().is_empty() {
                        None
                    } else {
                        Some(parse_quality(&row.label)?)
                    };
                    let rater_votes = if row.rater_votes.trim().is_empty() {
                        None
                    } else {
                        Some(
                            row.rater_votes
                                .split(';')
                                .map(parse_quality)
                                .collect::<Result<Vec<_>, _>>()?,
                        )
                    };
                    rows.push(ManifestRow {
                        id: row.id,
                        input_path: row.input_path,
                        output_path: row.output_path,
                        label,
                        rater_votes,
                        vocoder_tag: row.vocoder_tag,
                    });
                }
                Ok(CorpusManifest { rows })
            }
            _ => Err(ManifestError::ManifestInvalid(format!(
                "unsupported manifest extension on {}",
                path.display()
            ))),
        }
    }

    pub fn validate(&self, base_dir: &Path) -> Result<(), ManifestError> {
        if self.rows.is_empty() {
            return Err(ManifestError::ManifestInvalid("manifest has no rows".into()));
        }
        let mut seen = BTreeSet::new();
        for row in &self.rows {
            if !seen.insert(&row.id) {
                return Err(ManifestError::ManifestInvalid(format!(
                    "duplicate id '{}'",
                    row.id
                )));
            }
            for p in [&row.input_path, &row.output_path] {
                if !base_dir.join(p).exists() {
                    return Err(ManifestError::ManifestInvalid(format!(
                        "file '{p}' referenced by '{}' does not exist",
                        row.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), ManifestError> {
        let mut writer = csv::Writer::from_path(path)?;
        for row in &self.rows {
            writer.serialize(CsvRow {
                id: row.id.clone(),
                input_path: row.input_path.clone(),
                output_path: row.output_path.clone(),
                label: row.label.map(quality_str).unwrap_or("").to_string(),
                rater_votes: row
                    .rater_votes
                    .as_ref()
                    .map(|v| {
                        v.iter()
                            .map(|&q| quality_str(q))
                            .collect::<Vec<_>>()
                            .join(";")
                    })
                    .unwrap_or_default(),
                vocoder_tag: row.vocoder_tag.clone(),
            })?;
        }
        writer.flush().map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(())
    }

    pub fn save_json(&self, path: &Path) -> Result<(), ManifestError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

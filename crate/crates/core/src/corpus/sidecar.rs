//! Augmentation sidecar files: one JSON object per line, sorted by doc id.
//!
//! The sidecar is the cache boundary between LLM generation and everything
//! downstream; writes are canonical (sorted, compact JSON) so that two writes
//! of the same record set are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::types::AugmentationRecord;
use crate::{Error, Result};

const KNOWN_FIELDS: [&str; 5] = [
    "doc_id",
    "synthetic_title",
    "synthetic_queries",
    "model_tag",
    "prompt_hash",
];

/// Writes records sorted by `doc_id`, one JSON object per line.
pub fn write_sidecar(path: &Path, records: &[AugmentationRecord]) -> Result<()> {
    let mut sorted: BTreeMap<&str, &AugmentationRecord> = BTreeMap::new();
    for rec in records {
        rec.validate()?;
        if sorted.insert(rec.doc_id.as_str(), rec).is_some() {
            return Err(Error::DuplicateDocId {
                doc_id: rec.doc_id.clone(),
                context: format!("sidecar {}", path.display()),
            });
        }
    }
    let mut out = String::new();
    for rec in sorted.values() {
        out.push_str(&serde_json::to_string(rec).expect("record serializes"));
        out.push('\n');
    }
    fs::write(path, out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Reads a sidecar; unknown fields are ignored and reported as warnings.
pub fn read_sidecar(path: &Path) -> Result<(Vec<AugmentationRecord>, Vec<String>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(path, lineno, e.to_string()))?;
        if let Some(obj) = value.as_object() {
            for key in obj.keys() {
                if !KNOWN_FIELDS.contains(&key.as_str()) {
                    warnings.push(format!(
                        "{}:{lineno}: ignoring unknown field `{key}`",
                        path.display()
                    ));
                }
            }
        }
        let rec: AugmentationRecord = serde_json::from_value(value)
            .map_err(|e| Error::malformed(path, lineno, e.to_string()))?;
        rec.validate()?;
        if !seen.insert(rec.doc_id.clone()) {
            return Err(Error::DuplicateDocId {
                doc_id: rec.doc_id,
                context: format!("sidecar {}", path.display()),
            });
        }
        records.push(rec);
    }
    Ok((records, warnings))
}

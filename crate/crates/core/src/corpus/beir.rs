//! BEIR-format corpus loading.
//!
//! Expected directory layout:
//!
//! ```text
//! corpus.jsonl    one {"_id"|"id", "title", "text"} object per line
//! queries.jsonl   one {"_id"|"id", "text"} object per line
//! qrels.tsv       tab-separated with header `query-id  corpus-id  score`
//!                 (falls back to qrels/test.tsv, the upstream layout)
//! ```
//!
//! Documents stream one record at a time; queries and judgments load eagerly.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Lines};
use std::path::{Path, PathBuf};

use crate::types::{DocRecord, QueryRecord, RelevanceJudgments};
use crate::{Error, Result};

/// Streaming iterator over corpus documents. Detects duplicate ids as it goes.
pub struct BeirDocs {
    path: PathBuf,
    lines: Lines<BufReader<fs::File>>,
    lineno: usize,
    seen: BTreeSet<String>,
    failed: bool,
}

impl BeirDocs {
    fn open(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(BeirDocs {
            path: path.to_path_buf(),
            lines: BufReader::new(file).lines(),
            lineno: 0,
            seen: BTreeSet::new(),
            failed: false,
        })
    }

    /// Ids seen so far; complete once the stream is exhausted.
    pub fn seen_ids(&self) -> &BTreeSet<String> {
        &self.seen
    }

    fn parse_line(&mut self, line: &str) -> Result<DocRecord> {
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::malformed(&self.path, self.lineno, e.to_string()))?;
        let doc_id = value
            .get("_id")
            .or_else(|| value.get("id"))
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::malformed(&self.path, self.lineno, "missing id field"))?
            .to_string();
        if doc_id.is_empty() {
            return Err(Error::malformed(&self.path, self.lineno, "empty doc id"));
        }
        if !self.seen.insert(doc_id.clone()) {
            return Err(Error::DuplicateDocId {
                doc_id,
                context: self.path.display().to_string(),
            });
        }
        let title = value
            .get("title")
            .and_then(|v| v.as_str())
            .filter(|t| !t.is_empty())
            .map(str::to_string);
        let text = value
            .get("text")
            .and_then(|v| v.as_str())
            .unwrap_or_default()
            .to_string();
        Ok(DocRecord {
            doc_id,
            title,
            text,
        })
    }
}

impl Iterator for BeirDocs {
    type Item = Result<DocRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.lineno += 1;
            match self.lines.next()? {
                Ok(line) => {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let parsed = self.parse_line(&line);
                    if parsed.is_err() {
                        self.failed = true;
                    }
                    return Some(parsed);
                }
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::io(&self.path, e)));
                }
            }
        }
    }
}

/// A loaded BEIR dataset: streaming docs, eager queries and judgments.
pub struct BeirCorpus {
    pub docs: BeirDocs,
    pub queries: Vec<QueryRecord>,
    pub judgments: RelevanceJudgments,
    pub warnings: Vec<String>,
}

/// Loads a BEIR directory. Documents are streamed; consume `corpus.docs`.
pub fn load_beir_corpus(dir: &Path) -> Result<BeirCorpus> {
    let corpus_path = dir.join("corpus.jsonl");
    let queries_path = dir.join("queries.jsonl");
    let qrels_path = {
        let flat = dir.join("qrels.tsv");
        if flat.exists() {
            flat
        } else {
            dir.join("qrels").join("test.tsv")
        }
    };

    let docs = BeirDocs::open(&corpus_path)?;
    let queries = load_queries(&queries_path)?;
    let mut warnings = Vec::new();
    let judgments = load_qrels(&qrels_path, &queries, &mut warnings)?;

    Ok(BeirCorpus {
        docs,
        queries,
        judgments,
        warnings,
    })
}

fn load_queries(path: &Path) -> Result<Vec<QueryRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut queries = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::malformed(path, lineno, e.to_string()))?;
        let query_id = value
            .get("_id")
            .or_else(|| value.get("id"))
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::malformed(path, lineno, "missing id field"))?
            .to_string();
        let text = value
            .get("text")
            .and_then(|v| v.as_str())
            .unwrap_or_default()
            .to_string();
        if text.is_empty() {
            return Err(Error::malformed(path, lineno, "empty query text"));
        }
        if !seen.insert(query_id.clone()) {
            return Err(Error::DuplicateQueryId(query_id));
        }
        queries.push(QueryRecord { query_id, text });
    }
    Ok(queries)
}

fn load_qrels(
    path: &Path,
    queries: &[QueryRecord],
    warnings: &mut Vec<String>,
) -> Result<RelevanceJudgments> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let known: BTreeSet<&str> = queries.iter().map(|q| q.query_id.as_str()).collect();
    let mut judgments = RelevanceJudgments::new();
    let mut lines = text.lines().enumerate();

    match lines.next() {
        Some((_, header)) => {
            let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
            if cols != ["query-id", "corpus-id", "score"] {
                return Err(Error::malformed(
                    path,
                    1,
                    format!("expected header `query-id\\tcorpus-id\\tscore`, found {header:?}"),
                ));
            }
        }
        None => return Err(Error::bad_format(path, "empty qrels file")),
    }

    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::malformed(
                path,
                lineno,
                format!("expected 3 tab-separated columns, found {}", cols.len()),
            ));
        }
        let grade: u32 = cols[2].trim().parse().map_err(|_| {
            Error::malformed(path, lineno, format!("score `{}` is not an integer", cols[2]))
        })?;
        if !known.contains(cols[0]) {
            warnings.push(format!(
                "{}:{lineno}: qrel references unknown query id `{}`",
                path.display(),
                cols[0]
            ));
        }
        judgments.insert(cols[0], cols[1], grade);
    }
    Ok(judgments)
}

//! LoTTE-format corpus loading.
//!
//! Expected directory layout for a topic:
//!
//! ```text
//! collection.tsv          pid<TAB>text
//! questions.<split>.tsv   qid<TAB>text
//! qas.<split>.jsonl       one {"qid", "answer_pids"} object per line
//! ```
//!
//! Judgments are binary: every answer pid gets grade 1. Passages carry no
//! titles. The loader takes the split explicitly and makes no assumption
//! about collections being shared between splits.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Lines};
use std::path::{Path, PathBuf};

use crate::types::{DocRecord, QueryRecord, RelevanceJudgments};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LotteSplit {
    Search,
    Forum,
}

impl LotteSplit {
    pub fn as_str(&self) -> &'static str {
        match self {
            LotteSplit::Search => "search",
            LotteSplit::Forum => "forum",
        }
    }
}

impl fmt::Display for LotteSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LotteSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "search" => Ok(LotteSplit::Search),
            "forum" => Ok(LotteSplit::Forum),
            other => Err(Error::InvalidArgument(format!(
                "unknown LoTTE split `{other}` (expected `search` or `forum`)"
            ))),
        }
    }
}

/// Streaming iterator over collection passages.
pub struct LotteDocs {
    path: PathBuf,
    lines: Lines<BufReader<fs::File>>,
    lineno: usize,
    seen: BTreeSet<String>,
    failed: bool,
}

impl LotteDocs {
    fn open(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(LotteDocs {
            path: path.to_path_buf(),
            lines: BufReader::new(file).lines(),
            lineno: 0,
            seen: BTreeSet::new(),
            failed: false,
        })
    }

    pub fn seen_ids(&self) -> &BTreeSet<String> {
        &self.seen
    }
}

impl Iterator for LotteDocs {
    type Item = Result<DocRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.lineno += 1;
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(Error::io(&self.path, e)));
                }
            };
            if line.is_empty() {
                continue;
            }
            let Some((pid, text)) = line.split_once('\t') else {
                self.failed = true;
                return Some(Err(Error::malformed(
                    &self.path,
                    self.lineno,
                    "expected pid<TAB>text",
                )));
            };
            if !self.seen.insert(pid.to_string()) {
                self.failed = true;
                return Some(Err(Error::DuplicateDocId {
                    doc_id: pid.to_string(),
                    context: self.path.display().to_string(),
                }));
            }
            return Some(Ok(DocRecord {
                doc_id: pid.to_string(),
                title: None,
                text: text.to_string(),
            }));
        }
    }
}

/// A loaded LoTTE split: streaming passages, eager questions and answers.
pub struct LotteCorpus {
    pub docs: LotteDocs,
    pub queries: Vec<QueryRecord>,
    pub judgments: RelevanceJudgments,
    pub warnings: Vec<String>,
}

pub fn load_lotte_corpus(dir: &Path, split: LotteSplit) -> Result<LotteCorpus> {
    let docs = LotteDocs::open(&dir.join("collection.tsv"))?;
    let queries = load_questions(&dir.join(format!("questions.{split}.tsv")))?;
    let mut warnings = Vec::new();
    let judgments = load_answers(
        &dir.join(format!("qas.{split}.jsonl")),
        &queries,
        &mut warnings,
    )?;
    Ok(LotteCorpus {
        docs,
        queries,
        judgments,
        warnings,
    })
}

fn load_questions(path: &Path) -> Result<Vec<QueryRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut queries = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let Some((qid, text)) = line.split_once('\t') else {
            return Err(Error::malformed(path, lineno, "expected qid<TAB>text"));
        };
        if text.is_empty() {
            return Err(Error::malformed(path, lineno, "empty question text"));
        }
        if !seen.insert(qid.to_string()) {
            return Err(Error::DuplicateQueryId(qid.to_string()));
        }
        queries.push(QueryRecord {
            query_id: qid.to_string(),
            text: text.to_string(),
        });
    }
    Ok(queries)
}

fn load_answers(
    path: &Path,
    queries: &[QueryRecord],
    warnings: &mut Vec<String>,
) -> Result<RelevanceJudgments> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let known: BTreeSet<&str> = queries.iter().map(|q| q.query_id.as_str()).collect();
    let mut judgments = RelevanceJudgments::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::malformed(path, lineno, e.to_string()))?;
        let qid = match value.get("qid") {
            Some(serde_json::Value::Number(n)) => n.to_string(),
            Some(serde_json::Value::String(s)) => s.clone(),
            _ => return Err(Error::malformed(path, lineno, "missing qid")),
        };
        let pids = value
            .get("answer_pids")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::malformed(path, lineno, "missing answer_pids array"))?;
        if !known.contains(qid.as_str()) {
            warnings.push(format!(
                "{}:{lineno}: answers reference unknown question id `{qid}`",
                path.display()
            ));
        }
        if pids.is_empty() {
            warnings.push(format!(
                "{}:{lineno}: question `{qid}` has no answer pids",
                path.display()
            ));
        }
        for pid in pids {
            let pid = match pid {
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::String(s) => s.clone(),
                _ => return Err(Error::malformed(path, lineno, "non-scalar answer pid")),
            };
            judgments.insert(qid.clone(), pid, 1);
        }
    }
    Ok(judgments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write_fixture(dir: &Path) {
        fs::write(dir.join("collection.tsv"), "0\tfirst passage\n1\tsecond passage\n").unwrap();
        fs::write(dir.join("questions.forum.tsv"), "10\thow to cook rice?\n11\twhat is tofu?\n")
            .unwrap();
        fs::write(
            dir.join("qas.forum.jsonl"),
            "{\"qid\": 10, \"answer_pids\": [4, 7]}\n{\"qid\": 11, \"answer_pids\": []}\n",
        )
        .unwrap();
    }

    #[test]
    fn loads_fixture_with_absent_titles() {
        let dir = tempdir().unwrap();
        write_fixture(dir.path());
        let corpus = load_lotte_corpus(dir.path(), LotteSplit::Forum).unwrap();
        let docs: Vec<_> = corpus.docs.map(|d| d.unwrap()).collect();
        assert_eq!(docs.len(), 2);
        assert!(docs.iter().all(|d| d.title.is_none()));
        assert_eq!(corpus.queries.len(), 2);
    }

    #[test]
    fn answer_pids_become_binary_judgments() {
        let dir = tempdir().unwrap();
        write_fixture(dir.path());
        let corpus = load_lotte_corpus(dir.path(), LotteSplit::Forum).unwrap();
        let rel = corpus.judgments.relevant_docs("10");
        assert_eq!(rel, ["4", "7"].into_iter().collect());
    }

    #[test]
    fn empty_answer_list_is_kept_and_flagged() {
        let dir = tempdir().unwrap();
        write_fixture(dir.path());
        let corpus = load_lotte_corpus(dir.path(), LotteSplit::Forum).unwrap();
        assert!(corpus
            .warnings
            .iter()
            .any(|w| w.contains("`11`") && w.contains("no answer pids")));
    }

    #[test]
    fn pid_collision_is_error() {
        let dir = tempdir().unwrap();
        write_fixture(dir.path());
        fs::write(dir.path().join("collection.tsv"), "0\ta\n0\tb\n").unwrap();
        let corpus = load_lotte_corpus(dir.path(), LotteSplit::Forum).unwrap();
        let results: Vec<_> = corpus.docs.collect();
        assert!(matches!(
            results[1].as_ref().unwrap_err(),
            Error::DuplicateDocId { .. }
        ));
    }

    #[test]
    fn split_selects_files() {
        let dir = tempdir().unwrap();
        write_fixture(dir.path());
        fs::write(dir.path().join("questions.search.tsv"), "20\tsearch q\n").unwrap();
        fs::write(
            dir.path().join("qas.search.jsonl"),
            "{\"qid\": 20, \"answer_pids\": [1]}\n",
        )
        .unwrap();
        let corpus = load_lotte_corpus(dir.path(), LotteSplit::Search).unwrap();
        assert_eq!(corpus.queries.len(), 1);
        assert_eq!(corpus.queries[0].query_id, "20");
    }
}

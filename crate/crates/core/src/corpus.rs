//! Dated, source-tagged document ingestion and tokenization.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Issuing institution of a document.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Ecb,
    Fed,
    Other(String),
}

impl Source {
    pub fn label(&self) -> &str {
        match self {
            Source::Ecb => "ECB",
            Source::Fed => "FED",
            Source::Other(s) => s,
        }
    }
}

impl std::str::FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidArgument("empty source label".into()));
        }
        Ok(match s.to_ascii_uppercase().as_str() {
            "ECB" => Source::Ecb,
            "FED" => Source::Fed,
            _ => Source::Other(s.to_string()),
        })
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Source {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// A tokenized document. Tokens are lowercased runs of alphabetic characters.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub source: Source,
    pub date: NaiveDate,
    pub text: String,
    tokens: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, source: Source, date: NaiveDate, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Self {
            id: id.into(),
            source,
            date,
            text,
            tokens,
        }
    }

    /// Builds a document directly from a token list (no source text).
    /// Tokens that are not normalized are re-normalized through [`tokenize`].
    pub fn from_tokens<S: AsRef<str>>(id: impl Into<String>, source: Source, date: NaiveDate, tokens: &[S]) -> Self {
        let text = tokens.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(" ");
        Self::new(id, source, date, text)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }
}

/// Splits text into maximal runs of alphabetic characters, lowercased.
/// Digits, punctuation, whitespace and symbols separate tokens and are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphabetic() {
            // Lowercasing can expand into combining marks; keep letters only.
            current.extend(ch.to_lowercase().filter(|c| c.is_alphabetic()));
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// One row of the corpus manifest (`file,date,source`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub file: String,
    pub date: NaiveDate,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub rows: Vec<ManifestRow>,
}

impl CorpusManifest {
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Format(format!("unreadable manifest header: {e}")))?;
        if headers.iter().collect::<Vec<_>>() != ["file", "date", "source"] {
            return Err(Error::Format("manifest header must be `file,date,source`".into()));
        }
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 2;
            let record = record.map_err(|e| Error::Validation {
                row,
                message: e.to_string(),
            })?;
            let file = record[0].to_string();
            if file.is_empty() {
                return Err(Error::Validation {
                    row,
                    message: "empty file name".into(),
                });
            }
            let date = NaiveDate::parse_from_str(&record[1], "%Y-%m-%d").map_err(|e| Error::Validation {
                row,
                message: format!("date `{}`: {e}", &record[1]),
            })?;
            let source = record[2].parse().map_err(|e: Error| Error::Validation {
                row,
                message: e.to_string(),
            })?;
            if !seen.insert(file.clone()) {
                return Err(Error::Validation {
                    row,
                    message: format!("duplicate manifest entry `{file}`"),
                });
            }
            rows.push(ManifestRow { file, date, source });
        }
        if rows.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self { rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }
}

/// Per-source document count and mean token count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSummary {
    pub source: Source,
    pub documents: usize,
    pub mean_tokens: f64,
}

/// Ingested documents, sorted by `(source, date, id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn new(mut documents: Vec<Document>) -> Self {
        documents.sort_by(|a, b| (&a.source, a.date, &a.id).cmp(&(&b.source, b.date, &b.id)));
        Self { documents }
    }

    pub fn summary(&self) -> Vec<SourceSummary> {
        let mut acc: BTreeMap<&Source, (usize, usize)> = BTreeMap::new();
        for d in &self.documents {
            let e = acc.entry(&d.source).or_default();
            e.0 += 1;
            e.1 += d.token_count();
        }
        acc.into_iter()
            .map(|(source, (n, tokens))| SourceSummary {
                source: source.clone(),
                documents: n,
                mean_tokens: tokens as f64 / n as f64,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Reads every file named in `manifest` (relative to `root`), tokenizes it and
/// returns the sorted corpus. Files are read and tokenized in parallel.
pub fn ingest_corpus(root: impl AsRef<Path>, manifest: impl AsRef<Path>) -> Result<Corpus> {
    let manifest = CorpusManifest::load(manifest)?;
    ingest_manifest(root, &manifest)
}

pub fn ingest_manifest(root: impl AsRef<Path>, manifest: &CorpusManifest) -> Result<Corpus> {
    let root = root.as_ref();
    if manifest.rows.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let documents = manifest
        .rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let path: PathBuf = root.join(&row.file);
            let text = fs::read_to_string(&path).map_err(|e| Error::Ingestion {
                row: i + 2,
                message: format!("{}: {e}", path.display()),
            })?;
            Ok(Document::new(row.file.clone(), row.source.clone(), row.date, text))
        })
        .collect::<Result<Vec<_>>>()?;
    let corpus = Corpus::new(documents);
    for s in corpus.summary() {
        log::info!(
            "corpus: {} documents from {}, mean {:.1} tokens",
            s.documents,
            s.source,
            s.mean_tokens
        );
    }
    Ok(corpus)
}

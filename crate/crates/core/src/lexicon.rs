//! VAD emotion lexicons: loading, validation and lookup with a neutral fallback.
//!
//! The on-disk format is a UTF-8 CSV with the exact header
//! `word,valence,arousal,dominance`. Ratings are validated against a scale the
//! caller declares; the scale is never inferred from the data.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point in Valence-Arousal-Dominance space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct VadVector<T> {
    pub valence: T,
    pub arousal: T,
    pub dominance: T,
}

impl<T: Scalar> VadVector<T> {
    pub fn new(valence: T, arousal: T, dominance: T) -> Self {
        Self {
            valence,
            arousal,
            dominance,
        }
    }

    pub fn splat(x: T) -> Self {
        Self::new(x, x, x)
    }

    pub fn get(&self, dim: Dimension) -> T {
        match dim {
            Dimension::Valence => self.valence,
            Dimension::Arousal => self.arousal,
            Dimension::Dominance => self.dominance,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.valence.is_finite() && self.arousal.is_finite() && self.dominance.is_finite()
    }

    pub(crate) fn scaled(self, w: T) -> Self {
        Self::new(self.valence * w, self.arousal * w, self.dominance * w)
    }

    pub(crate) fn add(self, o: Self) -> Self {
        Self::new(
            self.valence + o.valence,
            self.arousal + o.arousal,
            self.dominance + o.dominance,
        )
    }
}

/// One of the three affective dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Valence,
    Arousal,
    Dominance,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Valence, Dimension::Arousal, Dimension::Dominance];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Valence => "valence",
            Dimension::Arousal => "arousal",
            Dimension::Dominance => "dominance",
        }
    }

    pub fn short(self) -> char {
        match self {
            Dimension::Valence => 'V',
            Dimension::Arousal => 'A',
            Dimension::Dominance => 'D',
        }
    }
}

impl std::str::FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v" | "valence" => Ok(Dimension::Valence),
            "a" | "arousal" => Ok(Dimension::Arousal),
            "d" | "dominance" => Ok(Dimension::Dominance),
            other => Err(Error::InvalidArgument(format!("unknown dimension `{other}`"))),
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed rating interval of a lexicon, with its neutral midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scale<T> {
    min: T,
    max: T,
}

impl<T: Scalar> Scale<T> {
    pub fn new(min: T, max: T) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::InvalidArgument(format!(
                "scale must satisfy min < max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> T {
        self.min
    }

    pub fn max(&self) -> T {
        self.max
    }

    pub fn midpoint(&self) -> T {
        (self.min + self.max) / T::of(2.0)
    }

    pub fn contains(&self, x: T) -> bool {
        x.is_finite() && x >= self.min && x <= self.max
    }

    pub fn contains_vector(&self, v: &VadVector<T>) -> bool {
        self.contains(v.valence) && self.contains(v.arousal) && self.contains(v.dominance)
    }
}

/// Result of a lexicon lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup<T> {
    pub vad: VadVector<T>,
    pub in_vocabulary: bool,
}

/// Immutable mapping from lowercase word forms to VAD ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionLexicon<T> {
    entries: HashMap<String, VadVector<T>>,
    scale: Scale<T>,
    duplicates: usize,
    skipped_multiword: usize,
}

const HEADER: [&str; 4] = ["word", "valence", "arousal", "dominance"];

impl<T: Scalar> EmotionLexicon<T> {
    /// Builds a lexicon from in-memory entries, applying the same validation
    /// and first-wins duplicate policy as the CSV loader.
    pub fn from_entries<I, S>(entries: I, scale: Scale<T>) -> Result<Self>
    where
        I: IntoIterator<Item = (S, VadVector<T>)>,
        S: AsRef<str>,
    {
        let mut lex = Self {
            entries: HashMap::new(),
            scale,
            duplicates: 0,
            skipped_multiword: 0,
        };
        for (i, (word, vad)) in entries.into_iter().enumerate() {
            lex.insert(i + 1, word.as_ref(), vad)?;
        }
        if lex.entries.is_empty() {
            return Err(Error::EmptyLexicon);
        }
        Ok(lex)
    }

    pub fn from_reader<R: Read>(reader: R, scale: Scale<T>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Format(format!("unreadable lexicon header: {e}")))?;
        if headers.len() != HEADER.len() || headers.iter().zip(HEADER).any(|(h, e)| h != e) {
            return Err(Error::Format(format!(
                "lexicon header must be `{}`, found `{}`",
                HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }

        let mut lex = Self {
            entries: HashMap::new(),
            scale,
            duplicates: 0,
            skipped_multiword: 0,
        };
        for (i, record) in rdr.records().enumerate() {
            // Row 1 is the header.
            let row = i + 2;
            let record = record.map_err(|e| Error::Validation {
                row,
                message: e.to_string(),
            })?;
            if record.len() != 4 {
                return Err(Error::Validation {
                    row,
                    message: format!("expected 4 fields, found {}", record.len()),
                });
            }
            let parse = |idx: usize| -> Result<T> {
                record[idx].parse::<T>().map_err(|_| Error::Validation {
                    row,
                    message: format!("{} `{}` is not a number", HEADER[idx], &record[idx]),
                })
            };
            let vad = VadVector::new(parse(1)?, parse(2)?, parse(3)?);
            lex.insert(row, &record[0], vad)?;
        }
        if lex.entries.is_empty() {
            return Err(Error::EmptyLexicon);
        }
        if lex.duplicates > 0 {
            log::warn!(
                "lexicon: {} duplicate entries ignored (first occurrence kept)",
                lex.duplicates
            );
        }
        if lex.skipped_multiword > 0 {
            log::warn!("lexicon: {} multi-word entries skipped", lex.skipped_multiword);
        }
        Ok(lex)
    }

    fn insert(&mut self, row: usize, word: &str, vad: VadVector<T>) -> Result<()> {
        let word = word.trim();
        if word.is_empty() {
            return Err(Error::Validation {
                row,
                message: "empty word".into(),
            });
        }
        for (name, x) in [
            ("valence", vad.valence),
            ("arousal", vad.arousal),
            ("dominance", vad.dominance),
        ] {
            if !self.scale.contains(x) {
                return Err(Error::Validation {
                    row,
                    message: format!(
                        "{name} {x} of `{word}` outside scale [{}, {}]",
                        self.scale.min, self.scale.max
                    ),
                });
            }
        }
        // Multi-word expressions can never match a single token.
        if word.chars().any(char::is_whitespace) {
            self.skipped_multiword += 1;
            return Ok(());
        }
        let key = word.to_lowercase();
        match self.entries.entry(key) {
            Entry::Occupied(_) => self.duplicates += 1,
            Entry::Vacant(e) => {
                e.insert(vad);
            }
        }
        Ok(())
    }

    /// Returns the stored vector for `token`, or the neutral midpoint vector
    /// when the token is not covered. `token` must already be lowercase.
    pub fn lookup(&self, token: &str) -> Lookup<T> {
        debug_assert!(
            token.to_lowercase() == token,
            "lookup expects normalized tokens, got `{token}`"
        );
        match self.entries.get(token) {
            Some(&vad) => Lookup {
                vad,
                in_vocabulary: true,
            },
            None => Lookup {
                vad: self.neutral(),
                in_vocabulary: false,
            },
        }
    }

    pub fn get(&self, token: &str) -> Option<&VadVector<T>> {
        self.entries.get(token)
    }

    pub fn neutral(&self) -> VadVector<T> {
        VadVector::splat(self.scale.midpoint())
    }

    pub fn scale(&self) -> Scale<T> {
        self.scale
    }

    pub fn midpoint(&self) -> T {
        self.scale.midpoint()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of duplicate rows dropped while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn skipped_multiword(&self) -> usize {
        self.skipped_multiword
    }

    /// Entries sorted by word.
    pub fn sorted_entries(&self) -> Vec<(&str, VadVector<T>)> {
        let mut v: Vec<_> = self.entries.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// Writes the lexicon in the CSV format accepted by [`load_lexicon`].
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(HEADER).map_err(csv_err)?;
        for (word, v) in self.sorted_entries() {
            w.write_record([
                word.to_string(),
                v.valence.to_string(),
                v.arousal.to_string(),
                v.dominance.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))?;
        Ok(())
    }
}

/// Loads a lexicon CSV, validating every rating against `[scale_min, scale_max]`.
pub fn load_lexicon<T: Scalar>(path: impl AsRef<Path>, scale_min: T, scale_max: T) -> Result<EmotionLexicon<T>> {
    let path = path.as_ref();
    let scale = Scale::new(scale_min, scale_max)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    EmotionLexicon::from_reader(file, scale)
}

//! Document-level emotion scoring.
//!
//! A document's score is the weighted average of the lexicon vectors of its
//! words, with absolute term frequency as the weight:
//!
//! ```text
//! score(d) = sum_w tf(w, d) * e(w) / sum_w tf(w, d)
//! ```
//!
//! Under [`OovMode::Neutral`] an uncovered word contributes the lexicon's
//! midpoint vector; under [`OovMode::Skip`] it contributes nothing.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Source};
use crate::error::{Error, Result};
use crate::lexicon::{EmotionLexicon, VadVector};
use crate::scalar::Scalar;

/// Term weighting function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum WeightingMode {
    /// Raw count of the word in the document.
    #[default]
    AbsoluteTf,
}

/// Treatment of tokens missing from the lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OovMode {
    /// Uncovered tokens count as the neutral midpoint vector.
    #[default]
    Neutral,
    /// Uncovered tokens are left out of numerator and denominator.
    Skip,
}

impl std::str::FromStr for OovMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neutral" => Ok(OovMode::Neutral),
            "skip" => Ok(OovMode::Skip),
            other => Err(Error::InvalidArgument(format!("unknown OOV mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocumentScore<T> {
    pub vad: VadVector<T>,
    /// Fraction of tokens covered by the lexicon.
    pub coverage: T,
}

/// Scores one document against a lexicon.
pub fn score_document<T: Scalar>(
    doc: &Document,
    lexicon: &EmotionLexicon<T>,
    weighting: WeightingMode,
    oov: OovMode,
) -> Result<DocumentScore<T>> {
    let tokens = doc.tokens();
    if tokens.is_empty() {
        return Err(Error::UnscorableDocument {
            id: doc.id.clone(),
            reason: "document has no tokens".into(),
        });
    }

    // Term frequencies over word types, iterated in sorted order so the
    // floating point summation order is fixed.
    let mut tf: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokens {
        *tf.entry(t.as_str()).or_default() += 1;
    }

    let mut numerator = VadVector::splat(T::zero());
    let mut denominator = T::zero();
    let mut covered = 0usize;
    let mut uncovered = 0usize;
    for (word, count) in tf {
        let weight = match weighting {
            WeightingMode::AbsoluteTf => T::of_usize(count),
        };
        match lexicon.get(word) {
            Some(&vad) => {
                covered += count;
                numerator = numerator.add(vad.scaled(weight));
                denominator = denominator + weight;
            }
            None => uncovered += count,
        }
    }

    if oov == OovMode::Neutral && uncovered > 0 {
        let weight = T::of_usize(uncovered);
        numerator = numerator.add(lexicon.neutral().scaled(weight));
        denominator = denominator + weight;
    }
    if denominator <= T::zero() {
        return Err(Error::UnscorableDocument {
            id: doc.id.clone(),
            reason: "no token is covered by the lexicon".into(),
        });
    }

    let vad = VadVector::new(
        numerator.valence / denominator,
        numerator.arousal / denominator,
        numerator.dominance / denominator,
    );
    Ok(DocumentScore {
        vad,
        coverage: T::of_usize(covered) / T::of_usize(covered + uncovered),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredRow<T> {
    pub id: String,
    pub source: Source,
    pub date: NaiveDate,
    pub vad: VadVector<T>,
    pub coverage: T,
}

/// A document left out of a scoring run, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCorpus<T> {
    pub rows: Vec<ScoredRow<T>>,
    pub exclusions: Vec<Exclusion>,
}

/// Scores every document; unscorable documents are recorded as exclusions.
pub fn score_corpus<T: Scalar>(
    docs: &[Document],
    lexicon: &EmotionLexicon<T>,
    weighting: WeightingMode,
    oov: OovMode,
) -> Result<ScoredCorpus<T>> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let results: Vec<_> = docs
        .par_iter()
        .map(|d| (d, score_document(d, lexicon, weighting, oov)))
        .collect();

    let mut rows = Vec::with_capacity(docs.len());
    let mut exclusions = Vec::new();
    for (doc, res) in results {
        match res {
            Ok(s) => rows.push(ScoredRow {
                id: doc.id.clone(),
                source: doc.source.clone(),
                date: doc.date,
                vad: s.vad,
                coverage: s.coverage,
            }),
            Err(e) => {
                log::warn!("excluding {}: {e}", doc.id);
                exclusions.push(Exclusion {
                    id: doc.id.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    Ok(ScoredCorpus { rows, exclusions })
}

const SCORED_HEADER: [&str; 7] = ["id", "source", "date", "valence", "arousal", "dominance", "coverage"];

impl<T: Scalar> ScoredCorpus<T> {
    /// Writes `id,source,date,valence,arousal,dominance,coverage`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(SCORED_HEADER).map_err(err)?;
        for r in &self.rows {
            w.write_record([
                r.id.clone(),
                r.source.to_string(),
                r.date.format("%Y-%m-%d").to_string(),
                r.vad.valence.to_string(),
                r.vad.arousal.to_string(),
                r.vad.dominance.to_string(),
                r.coverage.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != SCORED_HEADER {
            return Err(Error::Format(format!(
                "scored corpus header must be `{}`",
                SCORED_HEADER.join(",")
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::Validation {
                row,
                message: e.to_string(),
            })?;
            let num = |idx: usize| -> Result<T> {
                rec[idx].parse::<T>().map_err(|_| Error::Validation {
                    row,
                    message: format!("`{}` is not a number", &rec[idx]),
                })
            };
            let date = NaiveDate::parse_from_str(&rec[2], "%Y-%m-%d").map_err(|e| Error::Validation {
                row,
                message: e.to_string(),
            })?;
            rows.push(ScoredRow {
                id: rec[0].to_string(),
                source: rec[1].parse()?,
                date,
                vad: VadVector::new(num(3)?, num(4)?, num(5)?),
                coverage: num(6)?,
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptyResult);
        }
        Ok(Self {
            rows,
            exclusions: Vec::new(),
        })
    }

    pub fn rows_for<'a>(&'a self, source: &'a Source) -> impl Iterator<Item = &'a ScoredRow<T>> + 'a {
        self.rows.iter().filter(move |r| &r.source == source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Scale;
    use proptest::prelude::*;

    fn lexicon() -> EmotionLexicon<f64> {
        EmotionLexicon::from_entries(
            [
                ("good", VadVector::new(7.0, 5.0, 6.0)),
                ("bad", VadVector::new(2.0, 6.0, 3.0)),
            ],
            Scale::new(1.0, 9.0).unwrap(),
        )
        .unwrap()
    }

    fn doc(id: &str, tokens: &[&str]) -> Document {
        Document::from_tokens(id, Source::Ecb, NaiveDate::from_ymd_opt(2019, 6, 6).unwrap(), tokens)
    }

    fn score(tokens: &[&str], oov: OovMode) -> Result<DocumentScore<f64>> {
        score_document(&doc("d", tokens), &lexicon(), WeightingMode::AbsoluteTf, oov)
    }

    #[test]
    fn hand_evaluated_average() {
        let s = score(&["good", "good", "bad"], OovMode::Neutral).unwrap();
        assert!((s.vad.valence - 16.0 / 3.0).abs() < 1e-12);
        assert!((s.vad.arousal - 16.0 / 3.0).abs() < 1e-12);
        assert!((s.vad.dominance - 5.0).abs() < 1e-12);
        assert_eq!(s.coverage, 1.0);
    }

    #[test]
    fn all_oov_is_midpoint() {
        let s = score(&["xyzzy", "plugh"], OovMode::Neutral).unwrap();
        assert_eq!(s.vad, VadVector::splat(5.0));
        assert_eq!(s.coverage, 0.0);
    }

    #[test]
    fn oov_enters_denominator() {
        let s = score(&["good", "xyzzy"], OovMode::Neutral).unwrap();
        assert_eq!(s.vad.valence, 6.0);
        assert_eq!(s.coverage, 0.5);
    }

    #[test]
    fn skip_mode_ignores_oov() {
        let s = score(&["good", "xyzzy"], OovMode::Skip).unwrap();
        assert_eq!(s.vad, VadVector::new(7.0, 5.0, 6.0));
        assert_eq!(s.coverage, 0.5);
        assert!(matches!(
            score(&["xyzzy"], OovMode::Skip),
            Err(Error::UnscorableDocument { .. })
        ));
    }

    #[test]
    fn empty_document_is_unscorable() {
        assert!(matches!(
            score(&[], OovMode::Neutral),
            Err(Error::UnscorableDocument { .. })
        ));
    }

    #[test]
    fn corpus_records_exclusions() {
        let docs = vec![doc("a", &["good"]), doc("b", &[]), doc("c", &["bad", "good"])];
        let scored = score_corpus(&docs, &lexicon(), WeightingMode::AbsoluteTf, OovMode::Neutral).unwrap();
        assert_eq!(scored.rows.len(), 2);
        assert_eq!(scored.rows[0].id, "a");
        assert_eq!(scored.rows[1].id, "c");
        assert_eq!(
            scored.exclusions,
            [Exclusion {
                id: "b".into(),
                reason: scored.exclusions[0].reason.clone()
            }]
        );

        let empty = vec![doc("x", &[])];
        assert!(matches!(
            score_corpus(&empty, &lexicon(), WeightingMode::AbsoluteTf, OovMode::Neutral),
            Err(Error::EmptyResult)
        ));
        assert!(matches!(
            score_corpus::<f64>(&[], &lexicon(), WeightingMode::AbsoluteTf, OovMode::Neutral),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn csv_round_trip() {
        let docs = vec![doc("a", &["good"]), doc("c", &["bad", "good", "meh"])];
        let scored = score_corpus(&docs, &lexicon(), WeightingMode::AbsoluteTf, OovMode::Neutral).unwrap();
        let mut buf = Vec::new();
        scored.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,source,date,valence,arousal,dominance,coverage\na,ECB,2019-06-06,7,5,6,1\n"));
        let back = ScoredCorpus::<f64>::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.rows, scored.rows);
    }

    proptest! {
        #[test]
        fn adding_covered_token_never_lowers_coverage(
            tokens in prop::collection::vec(prop::sample::select(vec!["good", "bad", "zz", "qq"]), 1..30)
        ) {
            let before = score(&tokens, OovMode::Neutral).unwrap().coverage;
            let mut more = tokens.clone();
            more.push("good");
            let after = score(&more, OovMode::Neutral).unwrap().coverage;
            prop_assert!(after >= before);
        }
    }
}

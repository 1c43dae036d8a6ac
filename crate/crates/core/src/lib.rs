//! Lexicon-based Valence-Arousal-Dominance scoring of dated document
//! collections, and the monthly time-series econometrics used to relate the
//! resulting emotion series to economic indicators.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! `*F64` aliases below name the double-precision instantiations used by the
//! command-line front end.

#![allow(clippy::needless_range_loop)]

pub mod calendar;
pub mod corpus;
pub mod econ;
pub mod error;
pub mod lexicon;
pub mod scalar;
pub mod scorer;
pub mod series;

pub use calendar::{YearMonth, YearQuarter};
pub use corpus::{ingest_corpus, tokenize, Corpus, CorpusManifest, Document, Source};
pub use error::{Error, ErrorKind, Result};
pub use lexicon::{load_lexicon, Dimension, EmotionLexicon, Scale, VadVector};
pub use scalar::Scalar;
pub use scorer::{score_corpus, score_document, DocumentScore, OovMode, ScoredCorpus, WeightingMode};
pub use series::{
    aggregate_quarterly, build_monthly, detrend, difference, impute_by_regression, interpolate_linear, zscore,
    IndicatorSet, MonthlySeries, Provenance, QuarterlySeries,
};

pub type VadVectorF64 = VadVector<f64>;
pub type VadVectorF32 = VadVector<f32>;
pub type EmotionLexiconF64 = EmotionLexicon<f64>;
pub type EmotionLexiconF32 = EmotionLexicon<f32>;
pub type ScoredCorpusF64 = ScoredCorpus<f64>;
pub type MonthlySeriesF64 = MonthlySeries<f64>;
pub type MonthlySeriesF32 = MonthlySeries<f32>;
pub type IndicatorSetF64 = IndicatorSet<f64>;
pub type OlsFitF64 = econ::OlsFit<f64>;
pub type TestResultF64 = econ::TestResult<f64>;
pub type AdfResultF64 = econ::AdfResult<f64>;
pub type BreakResultF64 = econ::BreakResult<f64>;

//! Run configuration: a TOML file, command-line overrides, and validation.
//!
//! Relative paths in the file are resolved against the file's directory;
//! relative paths given on the command line against the working directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use vadscope_core::econ::BreakModelConfig;
use vadscope_core::{OovMode, Scale, Source};

use crate::error::CliError;
use crate::plot::{Annotation, AnnotationStyle};

/// How gaps in a monthly emotion series are handled before testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpMode {
    #[default]
    Linear,
    Regression,
    /// No filling; the analysis runs on quarterly means of observed months.
    #[serde(alias = "none", alias = "quarterly")]
    NoneQuarterly,
}

impl FromStr for InterpMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "linear" => Ok(InterpMode::Linear),
            "regression" => Ok(InterpMode::Regression),
            "none" | "quarterly" | "none_quarterly" => Ok(InterpMode::NoneQuarterly),
            other => Err(CliError::Config(format!(
                "unknown interpolation mode `{other}` (linear, regression, none)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorSpec {
    pub name: String,
    pub path: PathBuf,
    /// Source whose series this indicator is correlated with; all sources
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl IndicatorSpec {
    pub fn applies_to(&self, source: &Source) -> bool {
        self.source
            .as_deref()
            .is_none_or(|s| s.parse::<Source>().is_ok_and(|s| &s == source))
    }
}

impl FromStr for IndicatorSpec {
    type Err = CliError;

    /// `name=path` or `name:source=path`.
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("indicator `{s}` must look like name[:source]=path"));
        let (lhs, path) = s.split_once('=').ok_or_else(bad)?;
        let (name, source) = match lhs.split_once(':') {
            Some((n, src)) => (n, Some(src.to_string())),
            None => (lhs, None),
        };
        if name.is_empty() || path.is_empty() {
            return Err(bad());
        }
        Ok(IndicatorSpec {
            name: name.to_string(),
            path: PathBuf::from(path),
            source,
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileCorpus {
    root: Option<PathBuf>,
    manifest: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLexicon {
    path: Option<PathBuf>,
    scale_min: Option<f64>,
    scale_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileInterpolation {
    mode: Option<InterpMode>,
    #[serde(default)]
    sources: BTreeMap<String, InterpMode>,
    #[serde(default)]
    references: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileBreaks {
    max_breaks: Option<usize>,
    trim_fraction: Option<f64>,
    ar_order: Option<usize>,
    differences: Option<bool>,
}

/// The TOML file as written; every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    out: Option<PathBuf>,
    oov: Option<OovMode>,
    #[serde(default)]
    sources: Vec<String>,
    #[serde(default)]
    corpus: FileCorpus,
    #[serde(default)]
    lexicon: FileLexicon,
    #[serde(default)]
    interpolation: FileInterpolation,
    #[serde(default)]
    indicators: Vec<IndicatorSpec>,
    #[serde(default)]
    breaks: FileBreaks,
    #[serde(default)]
    annotations: Vec<Annotation>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub corpus: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub scale_min: Option<f64>,
    pub scale_max: Option<f64>,
    /// Replaces the file's indicator list when non-empty.
    pub indicators: Vec<IndicatorSpec>,
    pub interp: Option<InterpMode>,
    pub oov: Option<OovMode>,
    pub out: Option<PathBuf>,
    pub quarterly: bool,
    pub max_breaks: Option<usize>,
    pub trim: Option<f64>,
    pub ar_order: Option<usize>,
}

/// A complete, validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub corpus_root: PathBuf,
    pub manifest: PathBuf,
    pub lexicon: PathBuf,
    pub scale_min: f64,
    pub scale_max: f64,
    /// Sources to analyze; empty means every source in the corpus.
    pub sources: Vec<String>,
    pub oov: OovMode,
    pub interpolation: InterpMode,
    pub interpolation_by_source: BTreeMap<String, InterpMode>,
    /// Indicators used as regressors for regression imputation; empty means
    /// every indicator that applies to the source.
    pub references: Vec<String>,
    pub indicators: Vec<IndicatorSpec>,
    pub breaks: BreakModelConfig,
    pub break_differences: bool,
    pub annotations: Vec<Annotation>,
    /// Not echoed in the run manifest, so bundles written to different
    /// directories stay identical.
    #[serde(skip)]
    pub out: PathBuf,
}

fn anchored(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn require<T>(v: Option<T>, what: &str, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing {what} (set it in the config file or pass {flag})")))
}

impl RunConfig {
    /// Merges an optional config file with command-line overrides and
    /// validates the result. Nothing is written.
    pub fn resolve(file: Option<&Path>, o: Overrides) -> Result<Self, CliError> {
        let (f, base) = match file {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let f: FileConfig =
                    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (f, base)
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let rel = |p: Option<PathBuf>| p.map(|p| anchored(&base, p));

        let mut interpolation = o.interp.or(f.interpolation.mode).unwrap_or_default();
        let mut interpolation_by_source = f.interpolation.sources;
        if o.interp.is_some() {
            interpolation_by_source.clear();
        }
        if o.quarterly {
            interpolation = InterpMode::NoneQuarterly;
            interpolation_by_source.clear();
        }

        let indicators = if o.indicators.is_empty() {
            f.indicators
                .into_iter()
                .map(|i| IndicatorSpec {
                    path: anchored(&base, i.path),
                    ..i
                })
                .collect()
        } else {
            o.indicators
        };

        let defaults = BreakModelConfig::default();
        let breaks = BreakModelConfig {
            max_breaks: o.max_breaks.or(f.breaks.max_breaks).unwrap_or(defaults.max_breaks),
            trim_fraction: o.trim.or(f.breaks.trim_fraction).unwrap_or(defaults.trim_fraction),
            ar_order: o.ar_order.or(f.breaks.ar_order).unwrap_or(defaults.ar_order),
        };

        let config = RunConfig {
            corpus_root: require(o.corpus.or(rel(f.corpus.root)), "corpus root", "--corpus")?,
            manifest: require(o.manifest.or(rel(f.corpus.manifest)), "corpus manifest", "--manifest")?,
            lexicon: require(o.lexicon.or(rel(f.lexicon.path)), "lexicon path", "--lexicon")?,
            scale_min: require(
                o.scale_min.or(f.lexicon.scale_min),
                "lexicon scale minimum",
                "--scale-min",
            )?,
            scale_max: require(
                o.scale_max.or(f.lexicon.scale_max),
                "lexicon scale maximum",
                "--scale-max",
            )?,
            sources: f.sources,
            oov: o.oov.or(f.oov).unwrap_or_default(),
            interpolation,
            interpolation_by_source,
            references: f.interpolation.references,
            indicators,
            breaks,
            break_differences: f.breaks.differences.unwrap_or(true),
            annotations: f.annotations,
            out: require(o.out.or(rel(f.out)), "output directory", "--out")?,
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks everything that can be checked without doing the work.
    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(m));
        if !self.corpus_root.is_dir() {
            return err(format!("corpus root {} is not a directory", self.corpus_root.display()));
        }
        for (what, p) in [("corpus manifest", &self.manifest), ("lexicon", &self.lexicon)] {
            if !p.is_file() {
                return err(format!("{what} {} does not exist", p.display()));
            }
        }
        Scale::new(self.scale_min, self.scale_max).map_err(|e| CliError::Config(e.to_string()))?;
        self.breaks.validate().map_err(|e| CliError::Config(e.to_string()))?;

        for s in self.sources.iter().chain(self.interpolation_by_source.keys()) {
            s.parse::<Source>().map_err(|e| CliError::Config(e.to_string()))?;
        }
        let mut names = std::collections::BTreeSet::new();
        for ind in &self.indicators {
            if !names.insert(ind.name.as_str()) {
                return err(format!("indicator `{}` is listed twice", ind.name));
            }
            if !ind.path.is_file() {
                return err(format!(
                    "indicator `{}`: {} does not exist",
                    ind.name,
                    ind.path.display()
                ));
            }
        }
        for r in &self.references {
            if !names.contains(r.as_str()) {
                return err(format!("imputation reference `{r}` is not a configured indicator"));
            }
        }
        let uses_regression = self.interpolation == InterpMode::Regression
            || self
                .interpolation_by_source
                .values()
                .any(|m| *m == InterpMode::Regression);
        if uses_regression && self.indicators.is_empty() {
            return err("regression imputation needs at least one indicator".into());
        }
        for a in &self.annotations {
            match (a.style, a.end) {
                (AnnotationStyle::RecessionShaded, None) => {
                    return err(format!("shaded annotation `{}` needs an end month", a.label));
                }
                (_, Some(end)) if end < a.date => {
                    return err(format!("annotation `{}` ends before it starts", a.label));
                }
                _ => {}
            }
        }
        self.check_output_dir()
    }

    fn check_output_dir(&self) -> Result<(), CliError> {
        let mut probe = self.out.as_path();
        loop {
            if probe.exists() {
                let meta = fs::metadata(probe).map_err(|e| CliError::io(probe, e))?;
                if !meta.is_dir() {
                    return Err(CliError::Config(format!("{} is not a directory", probe.display())));
                }
                if meta.permissions().readonly() {
                    return Err(CliError::Config(format!("{} is not writable", probe.display())));
                }
                return Ok(());
            }
            match probe.parent() {
                Some(p) if !p.as_os_str().is_empty() => probe = p,
                _ => return Ok(()),
            }
        }
    }

    pub fn interp_for(&self, source: &Source) -> InterpMode {
        self.interpolation_by_source
            .iter()
            .find(|(k, _)| k.parse::<Source>().is_ok_and(|k| &k == source))
            .map_or(self.interpolation, |(_, m)| *m)
    }

    pub fn wants_source(&self, source: &Source) -> bool {
        self.sources.is_empty()
            || self
                .sources
                .iter()
                .any(|s| s.parse::<Source>().is_ok_and(|s| &s == source))
    }
}

/// Reads only the `[[annotations]]` tables of a TOML file.
pub fn load_annotations(path: &Path) -> Result<Vec<Annotation>, CliError> {
    #[derive(Deserialize)]
    struct Only {
        #[serde(default)]
        annotations: Vec<Annotation>,
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let only: Only = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(only.annotations)
}

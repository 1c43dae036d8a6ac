//! End-to-end run: ingest, score, build series, test, and write the bundle.
//!
//! Inputs are loaded and checked before anything is created on disk. Once
//! the output directory exists every written file is tracked, and a failing
//! stage removes what the run created.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use vadscope_core::corpus::{CorpusManifest, SourceSummary};
use vadscope_core::econ::{
    adf_test, detect_breaks, mann_whitney_u, pearson, pearson_pairwise, AdfResult, BreakResult, Deterministic,
    TestResult,
};
use vadscope_core::series::ImputationDiagnostics;
use vadscope_core::{
    aggregate_quarterly, build_monthly, detrend, impute_by_regression, interpolate_linear, load_lexicon, score_corpus,
    zscore, Corpus, Dimension, EmotionLexicon, IndicatorSet, MonthlySeries, QuarterlySeries, ScoredCorpus, Source,
    WeightingMode, YearMonth,
};

use crate::config::{InterpMode, RunConfig};
use crate::error::{CliError, StageExt};
use crate::plot::render_svg;

/// What a run produces. Each target includes the files its analysis
/// depends on; `Report` produces everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Score,
    Series,
    Correlate,
    Compare,
    Adf,
    Breaks,
    Report,
}

impl Target {
    fn series(self) -> bool {
        !matches!(self, Target::Score | Target::Compare)
    }

    fn includes(self, other: Target) -> bool {
        self == other || self == Target::Report
    }
}

/// One file of a bundle, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BundleFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// A test that could not be run on one series, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub stage: &'static str,
    pub series: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub out_dir: PathBuf,
    /// Every file written, in path order; the run manifest is last.
    pub files: Vec<BundleFile>,
    pub skipped: Vec<Skipped>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct BundleWriter {
    root: PathBuf,
    files: BTreeMap<String, BundleFile>,
    created_dirs: Vec<PathBuf>,
}

impl BundleWriter {
    fn create(root: &Path) -> Result<Self, CliError> {
        let mut w = Self {
            root: root.to_path_buf(),
            files: BTreeMap::new(),
            created_dirs: Vec::new(),
        };
        w.ensure_dir(root)?;
        Ok(w)
    }

    fn ensure_dir(&mut self, dir: &Path) -> Result<(), CliError> {
        let missing: Vec<PathBuf> = dir
            .ancestors()
            .take_while(|a| !a.as_os_str().is_empty() && !a.exists())
            .map(Path::to_path_buf)
            .collect();
        for d in missing.into_iter().rev() {
            fs::create_dir(&d).map_err(|e| CliError::io(&d, e))?;
            self.created_dirs.push(d);
        }
        Ok(())
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            self.ensure_dir(parent)?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.insert(
            rel.to_string(),
            BundleFile {
                path: rel.to_string(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            },
        );
        Ok(())
    }

    fn write_json<S: Serialize>(&mut self, rel: &str, value: &S) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// Best-effort removal of everything this run created.
    fn discard(self) {
        for rel in self.files.keys() {
            let _ = fs::remove_file(self.root.join(rel));
        }
        for d in self.created_dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

fn csv_bytes(
    f: impl FnOnce(&mut Vec<u8>) -> vadscope_core::Result<()>,
    stage: &'static str,
) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).stage(stage)?;
    Ok(buf)
}

fn table(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn file_stem(source: &Source) -> String {
    source
        .label()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

struct Inputs {
    lexicon: EmotionLexicon<f64>,
    manifest: CorpusManifest,
    corpus: Corpus,
    indicators: IndicatorSet<f64>,
}

fn load_inputs(config: &RunConfig) -> Result<Inputs, CliError> {
    let lexicon = load_lexicon(&config.lexicon, config.scale_min, config.scale_max).stage("lexicon")?;
    log::info!("lexicon: {} entries", lexicon.len());
    let manifest = CorpusManifest::load(&config.manifest).stage("corpus")?;
    let corpus = vadscope_core::corpus::ingest_manifest(&config.corpus_root, &manifest).stage("corpus")?;
    let mut indicators = IndicatorSet::new();
    for spec in &config.indicators {
        let s = MonthlySeries::load_indicator(&spec.name, &spec.path).stage("indicators")?;
        indicators.insert(spec.name.clone(), s);
    }
    Ok(Inputs {
        lexicon,
        manifest,
        corpus,
        indicators,
    })
}

/// The analysis form of one source/dimension series.
struct Analyzed {
    source: Source,
    dim: Dimension,
    raw: MonthlySeries<f64>,
    monthly: Option<MonthlySeries<f64>>,
    quarterly: Option<QuarterlySeries<f64>>,
    imputation: Option<ImputationDiagnostics<f64>>,
}

impl Analyzed {
    fn label(&self) -> String {
        format!("{}-{}", self.source, self.dim)
    }

    fn stem(&self) -> String {
        format!("{}_{}", file_stem(&self.source), self.dim.name())
    }

    /// Present values of the analysis series, with the month each starts.
    fn points(&self) -> Vec<(YearMonth, f64)> {
        match (&self.monthly, &self.quarterly) {
            (Some(m), _) => m.present().into_iter().map(|(i, v)| (m.month_at(i), v)).collect(),
            (None, Some(q)) => q
                .values
                .iter()
                .enumerate()
                .filter_map(|(i, v)| Some((q.quarter_at(i).first_month(), (*v)?)))
                .collect(),
            (None, None) => unreachable!("every analyzed series has a monthly or quarterly form"),
        }
    }

    /// The series that is drawn: the filled monthly series, or the raw one
    /// when the analysis is quarterly.
    fn plotted(&self) -> &MonthlySeries<f64> {
        self.monthly.as_ref().unwrap_or(&self.raw)
    }
}

fn analyzed_sources(config: &RunConfig, scored: &ScoredCorpus<f64>) -> Vec<Source> {
    let mut sources: Vec<Source> = scored.rows.iter().map(|r| r.source.clone()).collect();
    sources.sort();
    sources.dedup();
    sources.retain(|s| config.wants_source(s));
    sources
}

fn build_series(
    config: &RunConfig,
    scored: &ScoredCorpus<f64>,
    sources: &[Source],
    indicators: &IndicatorSet<f64>,
) -> Result<Vec<Analyzed>, CliError> {
    let mut out = Vec::new();
    for source in sources {
        let mode = config.interp_for(source);
        for dim in Dimension::ALL {
            let raw = build_monthly(scored, source, dim).stage("series")?;
            let mut a = Analyzed {
                source: source.clone(),
                dim,
                raw,
                monthly: None,
                quarterly: None,
                imputation: None,
            };
            match mode {
                InterpMode::Linear => {
                    a.monthly = Some(if a.raw.missing_count() == 0 {
                        a.raw.clone()
                    } else {
                        interpolate_linear(&a.raw).stage("interpolation")?
                    });
                }
                InterpMode::Regression => {
                    let names: Vec<&str> = if config.references.is_empty() {
                        config
                            .indicators
                            .iter()
                            .filter(|i| i.applies_to(source))
                            .map(|i| i.name.as_str())
                            .collect()
                    } else {
                        config.references.iter().map(String::as_str).collect()
                    };
                    if names.is_empty() {
                        return Err(CliError::Config(format!(
                            "regression imputation for {source}: no indicator applies to this source"
                        )));
                    }
                    let (filled, diag) = impute_by_regression(&a.raw, indicators, &names).stage("imputation")?;
                    a.monthly = Some(filled);
                    a.imputation = Some(diag);
                }
                InterpMode::NoneQuarterly => a.quarterly = Some(aggregate_quarterly(&a.raw)),
            }
            out.push(a);
        }
    }
    Ok(out)
}

fn write_series(w: &mut BundleWriter, analyzed: &[Analyzed]) -> Result<(), CliError> {
    for a in analyzed {
        let main = a.monthly.as_ref().unwrap_or(&a.raw);
        w.write(
            &format!("series/{}.csv", a.stem()),
            &csv_bytes(|b| main.write_csv(b), "series")?,
        )?;
        if let Some(q) = &a.quarterly {
            w.write(
                &format!("series/{}_quarterly.csv", a.stem()),
                &csv_bytes(|b| q.write_csv(b), "series")?,
            )?;
        }
        if let Some(d) = &a.imputation {
            w.write_json(&format!("series/{}_imputation.json", a.stem()), d)?;
        }
    }
    Ok(())
}

/// Pairs of the analysis series with an indicator, in the same frequency.
fn indicator_pairs(a: &Analyzed, ind: &MonthlySeries<f64>) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    match (&a.monthly, &a.quarterly) {
        (Some(m), _) => (m.values().to_vec(), ind.aligned(m.start(), m.len())),
        (None, Some(q)) => {
            let iq = aggregate_quarterly(ind);
            let by_quarter: BTreeMap<i64, Option<f64>> = iq
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| (iq.quarter_at(i).ordinal(), *v))
                .collect();
            let y = (0..q.values.len())
                .map(|i| by_quarter.get(&q.quarter_at(i).ordinal()).copied().flatten())
                .collect();
            (q.values.clone(), y)
        }
        (None, None) => unreachable!(),
    }
}

fn correlations(config: &RunConfig, analyzed: &[Analyzed], indicators: &IndicatorSet<f64>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for a in analyzed {
        for spec in config.indicators.iter().filter(|i| i.applies_to(&a.source)) {
            let (x, y) = indicator_pairs(a, &indicators[&spec.name]);
            let n = x.iter().zip(&y).filter(|(p, q)| p.is_some() && q.is_some()).count();
            let r = match pearson_pairwise(&x, &y) {
                Ok(r) => r.to_string(),
                Err(e) => {
                    log::warn!("correlation {} vs {}: {e}", a.label(), spec.name);
                    String::new()
                }
            };
            rows.push(vec![
                a.source.to_string(),
                a.dim.name().to_string(),
                spec.name.clone(),
                r,
                n.to_string(),
            ]);
        }
    }
    rows
}

#[derive(Debug, Serialize)]
struct SourceComparison {
    a: String,
    b: String,
    dimension: Dimension,
    mean_z_a: f64,
    mean_z_b: f64,
    test: TestResult<f64>,
}

#[derive(Debug, Serialize)]
struct Comparison {
    documents: usize,
    valence_dominance_r: Option<f64>,
    comparisons: Vec<SourceComparison>,
}

fn compare(scored: &ScoredCorpus<f64>, sources: &[Source]) -> Result<(Comparison, Vec<Vec<String>>), CliError> {
    let rows: Vec<_> = scored.rows.iter().filter(|r| sources.contains(&r.source)).collect();
    let mut z: BTreeMap<Dimension, Vec<f64>> = BTreeMap::new();
    for dim in Dimension::ALL {
        let xs: Vec<f64> = rows.iter().map(|r| r.vad.get(dim)).collect();
        z.insert(dim, zscore(&xs).stage("compare")?);
    }

    let mut comparisons = Vec::new();
    for (i, sa) in sources.iter().enumerate() {
        for sb in &sources[i + 1..] {
            for dim in Dimension::ALL {
                let pick = |s: &Source| -> Vec<f64> {
                    rows.iter()
                        .zip(&z[&dim])
                        .filter(|(r, _)| &r.source == s)
                        .map(|(_, &v)| v)
                        .collect()
                };
                let (xa, xb) = (pick(sa), pick(sb));
                let test = mann_whitney_u(&xa, &xb).stage("compare")?;
                comparisons.push(SourceComparison {
                    a: sa.to_string(),
                    b: sb.to_string(),
                    dimension: dim,
                    mean_z_a: xa.iter().sum::<f64>() / xa.len() as f64,
                    mean_z_b: xb.iter().sum::<f64>() / xb.len() as f64,
                    test,
                });
            }
        }
    }
    let vd = match pearson(&z[&Dimension::Valence], &z[&Dimension::Dominance]) {
        Ok(r) => Some(r),
        Err(e) => {
            log::warn!("valence-dominance correlation: {e}");
            None
        }
    };
    let scatter = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                r.id.clone(),
                r.source.to_string(),
                r.date.format("%Y-%m-%d").to_string(),
                z[&Dimension::Valence][i].to_string(),
                z[&Dimension::Arousal][i].to_string(),
                z[&Dimension::Dominance][i].to_string(),
            ]
        })
        .collect();
    Ok((
        Comparison {
            documents: rows.len(),
            valence_dominance_r: vd,
            comparisons,
        },
        scatter,
    ))
}

#[derive(Debug, Serialize)]
struct AdfEntry {
    series: String,
    transform: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<AdfResult<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn differences(points: &[(YearMonth, f64)]) -> Vec<(YearMonth, f64)> {
    points.windows(2).map(|w| (w[1].0, w[1].1 - w[0].1)).collect()
}

fn adf_entries(analyzed: &[Analyzed], skipped: &mut Vec<Skipped>) -> Vec<AdfEntry> {
    let mut out = Vec::new();
    for a in analyzed {
        let levels: Vec<f64> = a.points().iter().map(|p| p.1).collect();
        let diffs: Vec<f64> = differences(&a.points()).iter().map(|p| p.1).collect();
        let runs = [
            ("levels", &levels, Deterministic::Constant),
            ("levels", &levels, Deterministic::ConstantTrend),
            ("differences", &diffs, Deterministic::Constant),
        ];
        for (transform, xs, spec) in runs {
            let (result, error) = match adf_test(xs, spec, None) {
                Ok(r) => (Some(r), None),
                Err(e) => {
                    skipped.push(Skipped {
                        stage: "adf",
                        series: format!("{} {transform} {spec:?}", a.label()),
                        reason: e.to_string(),
                    });
                    (None, Some(e.to_string()))
                }
            };
            out.push(AdfEntry {
                series: a.label(),
                transform,
                result,
                error,
            });
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct BreakSummary {
    series: String,
    transform: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_breaks: Option<usize>,
    break_months: Vec<YearMonth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn run_breaks(
    points: &[(YearMonth, f64)],
    config: &RunConfig,
    detrended: bool,
) -> vadscope_core::Result<BreakResult<f64>> {
    let xs: Vec<f64> = points.iter().map(|p| p.1).collect();
    let xs = if detrended { detrend(&xs)? } else { xs };
    let mut r = detect_breaks(&xs, &config.breaks)?;
    r.break_months = r.break_indices.iter().map(|&i| points[i].0).collect();
    Ok(r)
}

fn write_break_files(w: &mut BundleWriter, stem: &str, r: &BreakResult<f64>) -> Result<(), CliError> {
    w.write_json(&format!("breaks/{stem}.json"), r)?;
    let bic: Vec<Vec<String>> = (0..r.bic_by_m.len())
        .map(|m| vec![m.to_string(), r.bic_by_m[m].to_string(), r.ssr_by_m[m].to_string()])
        .collect();
    w.write(&format!("breaks/{stem}_bic.csv"), &table(&["m", "bic", "ssr"], &bic))?;
    let list: Vec<Vec<String>> = r
        .break_indices
        .iter()
        .zip(&r.break_months)
        .map(|(i, m)| vec![i.to_string(), m.to_string()])
        .collect();
    w.write(
        &format!("breaks/{stem}_breaks.csv"),
        &table(&["break_index", "break_month"], &list),
    )
}

fn breaks_stage(
    w: &mut BundleWriter,
    config: &RunConfig,
    analyzed: &[Analyzed],
    skipped: &mut Vec<Skipped>,
) -> Result<BTreeMap<String, Vec<YearMonth>>, CliError> {
    let mut summary = Vec::new();
    let mut detrended_breaks = BTreeMap::new();
    for a in analyzed {
        let points = a.points();
        let mut variants = vec![("detrended", points.clone(), true)];
        if config.break_differences {
            variants.push(("differenced", differences(&points), false));
        }
        for (transform, pts, detrended) in variants {
            match run_breaks(&pts, config, detrended) {
                Ok(r) => {
                    write_break_files(w, &format!("{}_{transform}", a.stem()), &r)?;
                    if detrended {
                        detrended_breaks.insert(a.stem(), r.break_months.clone());
                    }
                    summary.push(BreakSummary {
                        series: a.label(),
                        transform,
                        n_breaks: Some(r.n_breaks),
                        break_months: r.break_months,
                        error: None,
                    });
                }
                Err(e) => {
                    skipped.push(Skipped {
                        stage: "breaks",
                        series: format!("{} {transform}", a.label()),
                        reason: e.to_string(),
                    });
                    summary.push(BreakSummary {
                        series: a.label(),
                        transform,
                        n_breaks: None,
                        break_months: Vec::new(),
                        error: Some(e.to_string()),
                    });
                }
            }
        }
    }
    w.write_json("breaks/summary.json", &summary)?;
    Ok(detrended_breaks)
}

fn produce(
    config: &RunConfig,
    target: Target,
    inputs: &Inputs,
    w: &mut BundleWriter,
) -> Result<Vec<Skipped>, CliError> {
    let mut skipped = Vec::new();
    let scored = score_corpus(
        &inputs.corpus.documents,
        &inputs.lexicon,
        WeightingMode::AbsoluteTf,
        config.oov,
    )
    .stage("scoring")?;
    w.write("scored.csv", &csv_bytes(|b| scored.write_csv(b), "scoring")?)?;
    if !scored.exclusions.is_empty() {
        let rows: Vec<Vec<String>> = scored
            .exclusions
            .iter()
            .map(|e| vec![e.id.clone(), e.reason.clone()])
            .collect();
        w.write("exclusions.csv", &table(&["id", "reason"], &rows))?;
    }
    let sources = analyzed_sources(config, &scored);
    if sources.is_empty() {
        return Err(CliError::Config(
            "none of the configured sources occur in the corpus".into(),
        ));
    }

    if target.includes(Target::Compare) {
        log::info!("comparing sources");
        let (cmp, scatter) = compare(&scored, &sources)?;
        w.write_json("comparison.json", &cmp)?;
        w.write(
            "scatter.csv",
            &table(
                &["id", "source", "date", "valence_z", "arousal_z", "dominance_z"],
                &scatter,
            ),
        )?;
    }
    if !target.series() {
        return Ok(skipped);
    }

    log::info!("building monthly series");
    let analyzed = build_series(config, &scored, &sources, &inputs.indicators)?;
    write_series(w, &analyzed)?;

    if target.includes(Target::Correlate) {
        let rows = correlations(config, &analyzed, &inputs.indicators);
        w.write(
            "correlations.csv",
            &table(&["source", "dimension", "indicator", "r", "n"], &rows),
        )?;
    }
    if target.includes(Target::Adf) {
        log::info!("unit-root tests");
        let entries = adf_entries(&analyzed, &mut skipped);
        w.write_json("adf.json", &entries)?;
    }
    if target.includes(Target::Breaks) {
        log::info!("break search");
        let breaks = breaks_stage(w, config, &analyzed, &mut skipped)?;
        if target == Target::Report {
            for a in &analyzed {
                let months = breaks.get(&a.stem()).map(Vec::as_slice).unwrap_or(&[]);
                let svg = render_svg(a.plotted(), months, &config.annotations);
                w.write(&format!("plots/{}.svg", a.stem()), svg.as_bytes())?;
            }
        }
    }
    Ok(skipped)
}

#[derive(Serialize)]
struct InputFile {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    created_at: String,
    target: Target,
    config: &'a RunConfig,
    corpus: Vec<SourceSummary>,
    inputs: Vec<InputFile>,
    outputs: Vec<&'a BundleFile>,
    skipped: &'a [Skipped],
}

fn hash_file(path: &Path) -> Result<InputFile, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(InputFile {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// `SOURCE_DATE_EPOCH` when set, for fully reproducible manifests.
fn timestamp() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|t| chrono::DateTime::from_timestamp(t, 0));
    fixed
        .unwrap_or_else(chrono::Utc::now)
        .format("%Y-%m-%dT%H:%M:%SZ")
        .to_string()
}

/// Runs the stages `target` needs and writes their outputs under
/// `config.out`, finishing with `manifest.json`.
pub fn run(config: &RunConfig, target: Target) -> Result<ReportBundle, CliError> {
    config.validate()?;
    let inputs = load_inputs(config)?;

    let mut input_files = vec![hash_file(&config.lexicon)?, hash_file(&config.manifest)?];
    for row in &inputs.manifest.rows {
        input_files.push(hash_file(&config.corpus_root.join(&row.file))?);
    }
    for spec in &config.indicators {
        input_files.push(hash_file(&spec.path)?);
    }

    let mut w = BundleWriter::create(&config.out)?;
    let skipped = match produce(config, target, &inputs, &mut w) {
        Ok(s) => s,
        Err(e) => {
            log::error!("run failed, removing partial outputs in {}", config.out.display());
            w.discard();
            return Err(e);
        }
    };

    let manifest = RunManifest {
        tool: "vadscope",
        version: env!("CARGO_PKG_VERSION"),
        created_at: timestamp(),
        target,
        config,
        corpus: inputs.corpus.summary(),
        inputs: input_files,
        outputs: w.files.values().collect(),
        skipped: &skipped,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    if let Err(e) = w.write("manifest.json", text.as_bytes()) {
        w.discard();
        return Err(e);
    }
    let mut files: Vec<BundleFile> = w
        .files
        .values()
        .filter(|f| f.path != "manifest.json")
        .cloned()
        .collect();
    files.push(w.files["manifest.json"].clone());
    Ok(ReportBundle {
        out_dir: config.out.clone(),
        files,
        skipped,
    })
}

/// The full pipeline.
pub fn run_pipeline(config: &RunConfig) -> Result<ReportBundle, CliError> {
    run(config, Target::Report)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vadscope::config::load_annotations;
use vadscope::{emit_plot, run, CliError, IndicatorSpec, InterpMode, Overrides, RunConfig, Target};
use vadscope_core::{MonthlySeries, OovMode, YearMonth};

/// Emotion scores for dated document collections, and the time-series
/// tests that relate them to economic indicators.
#[derive(Parser)]
#[command(name = "vadscope", version)]
struct Cli {
    /// Log more (repeat for debug output). Logs go to standard error.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every document: scored.csv.
    Score(RunArgs),
    /// Scores plus monthly series per source and dimension.
    Series(RunArgs),
    /// Series plus correlations against the indicators.
    Correlate(RunArgs),
    /// Scores plus the pooled z-scored source comparison.
    Compare(RunArgs),
    /// Series plus unit-root tests.
    Adf(RunArgs),
    /// Series plus structural break search.
    Breaks(RunArgs),
    /// The full pipeline, including plots.
    Report(RunArgs),
    /// Draw one series CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory the manifest's file names are relative to.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Corpus manifest CSV (file,date,source).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Lexicon CSV (word,valence,arousal,dominance).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    scale_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    scale_max: Option<f64>,
    /// Indicator as name[:source]=path; repeatable. Replaces the file's list.
    #[arg(long = "indicators", value_name = "SPEC")]
    indicators: Vec<String>,
    /// linear, regression or none (quarterly analysis).
    #[arg(long)]
    interp: Option<String>,
    /// neutral or skip.
    #[arg(long)]
    oov: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Analyze quarterly means of observed months instead of filling gaps.
    #[arg(long)]
    quarterly: bool,
    #[arg(long)]
    max_breaks: Option<usize>,
    #[arg(long)]
    trim: Option<f64>,
    #[arg(long)]
    ar_order: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// Series CSV (month,value,provenance).
    #[arg(long)]
    series: PathBuf,
    /// Break list CSV (break_index,break_month).
    #[arg(long)]
    breaks: Option<PathBuf>,
    /// TOML file whose [[annotations]] are drawn.
    #[arg(long)]
    annotations: Option<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let overrides = Overrides {
            corpus: self.corpus,
            manifest: self.manifest,
            lexicon: self.lexicon,
            scale_min: self.scale_min,
            scale_max: self.scale_max,
            indicators: self
                .indicators
                .iter()
                .map(|s| s.parse::<IndicatorSpec>())
                .collect::<Result<_, _>>()?,
            interp: self.interp.map(|s| s.parse::<InterpMode>()).transpose()?,
            oov: self
                .oov
                .map(|s| s.parse::<OovMode>().map_err(|e| CliError::Config(e.to_string())))
                .transpose()?,
            out: self.out,
            quarterly: self.quarterly,
            max_breaks: self.max_breaks,
            trim: self.trim,
            ar_order: self.ar_order,
        };
        RunConfig::resolve(self.config.as_deref(), overrides)
    }
}

fn read_break_months(path: &PathBuf) -> Result<Vec<YearMonth>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let col = rdr
        .headers()
        .map_err(|e| CliError::Config(e.to_string()))?
        .iter()
        .position(|h| h == "break_month")
        .ok_or_else(|| CliError::Config(format!("{}: no break_month column", path.display())))?;
    rdr.records()
        .map(|r| {
            let r = r.map_err(|e| CliError::Config(e.to_string()))?;
            r[col]
                .parse()
                .map_err(|e: vadscope_core::Error| CliError::Config(e.to_string()))
        })
        .collect()
}

fn plot(args: PlotArgs) -> Result<(), CliError> {
    let file = std::fs::File::open(&args.series).map_err(|e| CliError::io(&args.series, e))?;
    let label = args
        .series
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let series =
        MonthlySeries::<f64>::read_csv(label, file).map_err(|source| CliError::Stage { stage: "plot", source })?;
    let breaks = args
        .breaks
        .as_ref()
        .map(read_break_months)
        .transpose()?
        .unwrap_or_default();
    let annotations = args
        .annotations
        .as_deref()
        .map(load_annotations)
        .transpose()?
        .unwrap_or_default();
    emit_plot(&series, &breaks, &annotations, &args.output)
}

fn execute(command: Command) -> Result<(), CliError> {
    let (args, target) = match command {
        Command::Plot(p) => return plot(p),
        Command::Score(a) => (a, Target::Score),
        Command::Series(a) => (a, Target::Series),
        Command::Correlate(a) => (a, Target::Correlate),
        Command::Compare(a) => (a, Target::Compare),
        Command::Adf(a) => (a, Target::Adf),
        Command::Breaks(a) => (a, Target::Breaks),
        Command::Report(a) => (a, Target::Report),
    };
    let config = args.resolve()?;
    let bundle = run(&config, target)?;
    for s in &bundle.skipped {
        log::warn!("skipped {} for {}: {}", s.stage, s.series, s.reason);
    }
    log::info!("wrote {} files to {}", bundle.files.len(), bundle.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

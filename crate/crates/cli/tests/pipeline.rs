use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sha2::{Digest, Sha256};
use vadscope::{run_pipeline, CliError, Overrides, RunConfig};

const LEXICON: &str = "word,valence,arousal,dominance
good,7,5,6
bad,2,6,3
calm,6,2,6
risk,3,6,4
growth,7,6,7
";

const DOCS: [(&str, &str, &str, &str); 6] = [
    ("e1.txt", "2019-01-10", "ECB", "Good good bad."),
    ("e2.txt", "2019-01-20", "ECB", "Growth, calm; and risk!"),
    ("e3.txt", "2019-03-05", "ECB", "bad risk 2.5% bad"),
    ("f1.txt", "2019-01-15", "FED", "calm growth"),
    ("f2.txt", "2019-02-15", "FED", "risk risk good"),
    ("f3.txt", "2019-03-15", "FED", "The economy is calm."),
];

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        fs::write(p.join("lexicon.csv"), LEXICON).unwrap();
        let mut manifest = String::from("file,date,source\n");
        for (file, date, source, text) in DOCS {
            fs::write(p.join(file), text).unwrap();
            manifest.push_str(&format!("{file},{date},{source}\n"));
        }
        fs::write(p.join("manifest.csv"), manifest).unwrap();
        fs::write(
            p.join("activity.csv"),
            "month,value\n2018-12,0.5\n2019-01,1\n2019-02,2\n2019-03,4\n2019-04,3\n",
        )
        .unwrap();
        fs::write(
            p.join("run.toml"),
            r#"
[corpus]
root = "."
manifest = "manifest.csv"

[lexicon]
path = "lexicon.csv"
scale_min = 1
scale_max = 9

[[indicators]]
name = "activity"
path = "activity.csv"

[[annotations]]
date = "2019-02"
label = "event"
style = "presidency-dotted"
"#,
        )
        .unwrap();
        Fixture { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn config(&self, out: &str) -> RunConfig {
        RunConfig::resolve(
            Some(&self.path("run.toml")),
            Overrides {
                out: Some(self.path(out)),
                ..Overrides::default()
            },
        )
        .unwrap()
    }
}

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            headers
                .iter()
                .map(String::from)
                .zip(r.unwrap().iter().map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[test]
fn tiny_fixture_bundle_matches_hand_values() {
    let fx = Fixture::new();
    let bundle = run_pipeline(&fx.config("out")).unwrap();
    let out = fx.path("out");

    let mut expected = vec![
        "adf.json",
        "breaks/summary.json",
        "comparison.json",
        "correlations.csv",
        "scatter.csv",
        "scored.csv",
    ];
    let stems = [
        "ECB_valence",
        "ECB_arousal",
        "ECB_dominance",
        "FED_valence",
        "FED_arousal",
        "FED_dominance",
    ];
    let series: Vec<String> = stems.iter().map(|s| format!("series/{s}.csv")).collect();
    let plots: Vec<String> = stems.iter().map(|s| format!("plots/{s}.svg")).collect();
    expected.extend(series.iter().map(String::as_str));
    expected.extend(plots.iter().map(String::as_str));
    expected.push("manifest.json");
    for f in &expected {
        let meta = fs::metadata(out.join(f)).unwrap_or_else(|_| panic!("{f} missing"));
        assert!(meta.len() > 0, "{f} is empty");
    }
    assert!(!out.join("exclusions.csv").exists());
    // Six points per series are far too few for unit-root and break tests.
    assert!(bundle.skipped.iter().any(|s| s.stage == "adf"));
    assert!(bundle.skipped.iter().any(|s| s.stage == "breaks"));

    let scored = read_csv(&out.join("scored.csv"));
    assert_eq!(scored.len(), 6);
    let by_id: BTreeMap<&str, &BTreeMap<String, String>> = scored.iter().map(|r| (r["id"].as_str(), r)).collect();
    let e1 = by_id["e1.txt"];
    assert!(close(num(e1, "valence"), 16.0 / 3.0) && close(num(e1, "dominance"), 5.0));
    let e2 = by_id["e2.txt"];
    assert!(close(num(e2, "valence"), 5.25) && close(num(e2, "coverage"), 0.75));
    let f3 = by_id["f3.txt"];
    assert!(close(num(f3, "valence"), 21.0 / 4.0) && close(num(f3, "coverage"), 0.25));
    // Sorted by source, then date.
    let ids: Vec<&str> = scored.iter().map(|r| r["id"].as_str()).collect();
    assert_eq!(ids, ["e1.txt", "e2.txt", "e3.txt", "f1.txt", "f2.txt", "f3.txt"]);

    let ecb_v = read_csv(&out.join("series/ECB_valence.csv"));
    let jan = (16.0 / 3.0 + 21.0 / 4.0) / 2.0;
    let mar = 7.0 / 3.0;
    let feb = (jan + mar) / 2.0;
    let vals: Vec<f64> = ecb_v.iter().map(|r| num(r, "value")).collect();
    assert!(close(vals[0], jan) && close(vals[1], feb) && close(vals[2], mar));
    let prov: Vec<&str> = ecb_v.iter().map(|r| r["provenance"].as_str()).collect();
    assert_eq!(prov, ["OBSERVED", "LINEAR_INTERP", "OBSERVED"]);

    let corr = read_csv(&out.join("correlations.csv"));
    let row = corr
        .iter()
        .find(|r| r["source"] == "ECB" && r["dimension"] == "valence")
        .unwrap();
    assert_eq!(row["indicator"], "activity");
    assert_eq!(row["n"], "3");
    assert!((num(row, "r") - pearson_oracle(&vals, &[1.0, 2.0, 4.0])).abs() < 1e-12);

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len() + 1, bundle.files.len());
    for o in outputs {
        let bytes = fs::read(out.join(o["path"].as_str().unwrap())).unwrap();
        assert_eq!(o["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    let inputs = manifest["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 2 + DOCS.len() + 1);
    let lex_sha = hex::encode(Sha256::digest(LEXICON.as_bytes()));
    assert!(inputs.iter().any(|i| i["sha256"] == lex_sha.as_str()));
}

fn strip_timestamp(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec())
        .unwrap()
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"created_at\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn repeated_runs_are_byte_identical() {
    let fx = Fixture::new();
    let a = run_pipeline(&fx.config("a")).unwrap();
    let b = run_pipeline(&fx.config("b")).unwrap();
    assert_eq!(a.files.len(), b.files.len());
    for (fa, fb) in a.files.iter().zip(&b.files) {
        assert_eq!(fa.path, fb.path);
        let (x, y) = (
            fs::read(fx.path("a").join(&fa.path)).unwrap(),
            fs::read(fx.path("b").join(&fb.path)).unwrap(),
        );
        if fa.path == "manifest.json" {
            assert_eq!(strip_timestamp(&x), strip_timestamp(&y));
        } else {
            assert_eq!(x, y, "{} differs", fa.path);
        }
    }
}

#[test]
fn missing_lexicon_fails_before_any_output() {
    let fx = Fixture::new();
    let err = RunConfig::resolve(
        Some(&fx.path("run.toml")),
        Overrides {
            lexicon: Some(fx.path("absent.csv")),
            out: Some(fx.path("never")),
            ..Overrides::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    assert_eq!(err.exit_code(), 2);
    assert!(!fx.path("never").exists());
}

#[test]
fn failing_stage_removes_partial_outputs() {
    let fx = Fixture::new();
    // Constant scores: standardization in the comparison stage fails after
    // scored.csv has been written.
    fs::write(fx.path("lexicon.csv"), "word,valence,arousal,dominance\nzzz,5,5,5\n").unwrap();
    let err = run_pipeline(&fx.config("deep/out")).unwrap_err();
    assert_eq!(err.exit_code(), 4, "{err}");
    assert!(!fx.path("deep").exists());
}

fn vadscope(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_vadscope"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let fx = Fixture::new();
    let cfg = fx.path("run.toml");
    let cfg = cfg.to_str().unwrap();

    let missing = fx.path("absent.csv");
    let o = vadscope(&[
        "report",
        "--config",
        cfg,
        "--lexicon",
        missing.to_str().unwrap(),
        "--out",
        "/nonexistent-dir-x/y",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.csv"));
    assert!(o.stdout.is_empty());

    // Every document unscorable under SKIP: a data error.
    fs::write(fx.path("lexicon2.csv"), "word,valence,arousal,dominance\nzzz,5,5,5\n").unwrap();
    let out = fx.path("skip-out");
    let o = vadscope(&[
        "score",
        "--config",
        cfg,
        "--lexicon",
        fx.path("lexicon2.csv").to_str().unwrap(),
        "--oov",
        "skip",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());

    let out = fx.path("ok");
    let o = vadscope(&["series", "--config", cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("series/FED_arousal.csv").exists());
    assert!(!out.join("adf.json").exists());

    let svg = fx.path("one.svg");
    let o = vadscope(&[
        "plot",
        "--series",
        out.join("series/ECB_valence.csv").to_str().unwrap(),
        "--annotations",
        cfg,
        "--output",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(svg).unwrap();
    assert_eq!(text.matches("class=\"annotation\"").count(), 1);
}

#[test]
fn quarterly_and_regression_modes_run() {
    let fx = Fixture::new();
    let mut config = fx.config("q");
    config.interpolation = vadscope::InterpMode::NoneQuarterly;
    run_pipeline(&config).unwrap();
    let q = read_csv(&fx.path("q/series/ECB_valence_quarterly.csv"));
    assert_eq!(q.len(), 1);
    // Observed months only: Jan (two documents averaged) and Mar.
    let want = ((16.0 / 3.0 + 21.0 / 4.0) / 2.0 + 7.0 / 3.0) / 2.0;
    assert!(close(num(&q[0], "value"), want));

    // Two observed months cannot support a fit on intercept plus one reference.
    let mut config = fx.config("r");
    config.interpolation = vadscope::InterpMode::Regression;
    let err = run_pipeline(&config).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
    assert!(!fx.path("r").exists());

    fs::write(fx.path("e4.txt"), "growth good").unwrap();
    let mut manifest = fs::read_to_string(fx.path("manifest.csv")).unwrap();
    manifest.push_str("e4.txt,2019-04-02,ECB\n");
    fs::write(fx.path("manifest.csv"), manifest).unwrap();
    run_pipeline(&config).unwrap();
    let r = read_csv(&fx.path("r/series/ECB_valence.csv"));
    assert_eq!(r[1]["provenance"], "REGRESSION_IMPUTED");
    assert!(fx.path("r/series/ECB_valence_imputation.json").exists());
}

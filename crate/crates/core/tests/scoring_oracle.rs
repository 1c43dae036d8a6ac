use chrono::NaiveDate;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vadscope_core::{score_document, Document, EmotionLexicon, OovMode, Scale, Source, VadVector, WeightingMode};

const VOCAB: [&str; 12] = [
    "growth",
    "inflation",
    "risk",
    "stable",
    "weak",
    "strong",
    "decline",
    "recovery",
    "uncertain",
    "firm",
    "the",
    "of",
];

fn date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 5, 6).unwrap()
}

fn doc(tokens: &[&str]) -> Document {
    Document::from_tokens("d", Source::Ecb, date(), tokens)
}

/// Per-token evaluation of the weighted average, one occurrence at a time.
fn brute_force(tokens: &[&str], lex: &[(&str, [f64; 3])], mid: f64, skip_oov: bool) -> Option<[f64; 3]> {
    let mut num = [0.0; 3];
    let mut den = 0.0;
    for t in tokens {
        let e = match lex.iter().find(|(w, _)| w == t) {
            Some((_, v)) => *v,
            None if skip_oov => continue,
            None => [mid; 3],
        };
        for d in 0..3 {
            num[d] += e[d];
        }
        den += 1.0;
    }
    (den > 0.0).then(|| num.map(|x| x / den))
}

fn random_case(rng: &mut ChaCha8Rng) -> (Vec<&'static str>, Vec<(&'static str, [f64; 3])>) {
    let mut words = VOCAB.to_vec();
    words.shuffle(rng);
    let covered = rng.random_range(1..VOCAB.len());
    let lex = words[..covered]
        .iter()
        .map(|&w| (w, [0; 3].map(|_| rng.random_range(1.0..=9.0))))
        .collect();
    let len = rng.random_range(1..200);
    let tokens = (0..len).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect();
    (tokens, lex)
}

fn lexicon(lex: &[(&str, [f64; 3])]) -> EmotionLexicon<f64> {
    let scale = Scale::new(1.0, 9.0).unwrap();
    EmotionLexicon::from_entries(lex.iter().map(|(w, v)| (*w, VadVector::new(v[0], v[1], v[2]))), scale).unwrap()
}

#[test]
fn matches_per_token_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..1000 {
        let (tokens, entries) = random_case(&mut rng);
        let lex = lexicon(&entries);
        for (mode, skip) in [(OovMode::Neutral, false), (OovMode::Skip, true)] {
            let got = score_document(&doc(&tokens), &lex, WeightingMode::AbsoluteTf, mode);
            match brute_force(&tokens, &entries, 5.0, skip) {
                Some(want) => {
                    let got = got.unwrap().vad;
                    for (d, w) in want.iter().enumerate() {
                        let g = [got.valence, got.arousal, got.dominance][d];
                        assert!((g - w).abs() <= 1e-12, "case {case} {mode:?} dim {d}: {g} vs {w}");
                    }
                }
                None => assert!(got.is_err(), "case {case}: expected unscorable"),
            }
        }
    }
}

#[test]
fn permutation_and_duplication_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..300 {
        let (tokens, entries) = random_case(&mut rng);
        let lex = lexicon(&entries);
        let base = score_document(&doc(&tokens), &lex, WeightingMode::AbsoluteTf, OovMode::Neutral).unwrap();

        let mut shuffled = tokens.clone();
        shuffled.shuffle(&mut rng);
        let perm = score_document(&doc(&shuffled), &lex, WeightingMode::AbsoluteTf, OovMode::Neutral).unwrap();
        assert_eq!(perm, base);

        let doubled: Vec<&str> = tokens.iter().chain(&tokens).copied().collect();
        let dup = score_document(&doc(&doubled), &lex, WeightingMode::AbsoluteTf, OovMode::Neutral).unwrap();
        assert_eq!(dup, base);
    }
}

#[test]
fn worked_examples() {
    let lex = lexicon(&[("good", [7.0, 5.0, 6.0]), ("bad", [2.0, 6.0, 3.0])]);
    let s = score_document(
        &doc(&["good", "good", "bad"]),
        &lex,
        WeightingMode::AbsoluteTf,
        OovMode::Neutral,
    )
    .unwrap();
    assert!((s.vad.valence - 16.0 / 3.0).abs() < 1e-12);
    assert!((s.vad.arousal - 16.0 / 3.0).abs() < 1e-12);
    assert!((s.vad.dominance - 5.0).abs() < 1e-12);
    assert_eq!(s.coverage, 1.0);

    let s = score_document(
        &doc(&["good", "xyzzy"]),
        &lex,
        WeightingMode::AbsoluteTf,
        OovMode::Neutral,
    )
    .unwrap();
    assert_eq!(s.vad.valence, 6.0);
    assert_eq!(s.coverage, 0.5);

    let s = score_document(
        &doc(&["xyzzy", "plugh"]),
        &lex,
        WeightingMode::AbsoluteTf,
        OovMode::Neutral,
    )
    .unwrap();
    assert_eq!(s.vad, VadVector::splat(5.0));
    assert_eq!(s.coverage, 0.0);
    assert!(score_document(&doc(&["xyzzy"]), &lex, WeightingMode::AbsoluteTf, OovMode::Skip).is_err());
}

proptest! {
    #[test]
    fn score_is_convex_and_coverage_is_monotone(
        idx in prop::collection::vec(0usize..VOCAB.len(), 1..60),
        vals in prop::collection::vec(prop::array::uniform3(1.0f64..=9.0), 6),
        extra in 0usize..6,
    ) {
        let entries: Vec<(&str, [f64; 3])> = VOCAB[..6].iter().copied().zip(vals).collect();
        let lex = lexicon(&entries);
        let tokens: Vec<&str> = idx.iter().map(|&i| VOCAB[i]).collect();
        let s = score_document(&doc(&tokens), &lex, WeightingMode::AbsoluteTf, OovMode::Neutral).unwrap();
        for d in 0..3 {
            let contrib: Vec<f64> = tokens
                .iter()
                .map(|t| entries.iter().find(|(w, _)| w == t).map_or(5.0, |(_, v)| v[d]))
                .collect();
            let lo = contrib.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = contrib.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let g = [s.vad.valence, s.vad.arousal, s.vad.dominance][d];
            prop_assert!(g >= lo - 1e-12 && g <= hi + 1e-12);
        }

        let mut more = tokens.clone();
        more.push(VOCAB[extra]);
        let s2 = score_document(&doc(&more), &lex, WeightingMode::AbsoluteTf, OovMode::Neutral).unwrap();
        prop_assert!(s2.coverage >= s.coverage);
    }
}

//! Checks on the shipped fixture files.

use std::collections::HashSet;
use std::path::PathBuf;

use medvocab_core::dataset::{load_jsonl, load_wordlist};
use medvocab_core::metrics::{corpus_stats, oov_tally};
use medvocab_core::slicer::score_record;
use medvocab_core::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn tok(name: &str) -> Tokenizer {
    Tokenizer::load(fixture(name)).unwrap()
}

fn words_of(tokens: &[&str]) -> Vec<String> {
    tokens.iter().map(|s| s.to_string()).collect()
}

#[test]
fn over_fragmented_medical_words() {
    let t = tok("over_fragmentation.json");
    let r = t.tokenize_word("cardiomyopathy");
    assert_eq!(r.tokens, words_of(&["▁card", "iom", "y", "op", "ath", "y"]));
    assert_eq!(r.subword_count, 6);
    let r = t.tokenize_word("antipyretics");
    assert_eq!(r.tokens, words_of(&["▁ant", "ip", "y", "ret", "ics"]));
    assert_eq!(r.subword_count, 5);
}

#[test]
fn antipyretics_alone_has_equal_difficult_and_all_concentration() {
    let t = tok("over_fragmentation.json");
    let lex = DomainLexicon::from_words(["antipyretics"]).unwrap();
    let rec = DatasetRecord::new("r", "", "fever was treated", "antipyretics were given");
    let s = score_record(&t, &rec, &lex).unwrap();
    assert_eq!(s.difficult_rs, s.all_rs);
    assert!((s.all_rs - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn cholesterol_needs_one_scaffold() {
    let t = tok("iterative_addition.json");
    assert_eq!(t.tokenize_word("cholesterol").tokens, words_of(&["cho", "le", "sterol"]));
    let syn = synthesize_merges(&t, "cholesterol");
    assert_eq!(
        syn.new_merges,
        vec![
            ("cho".to_string(), "le".to_string()),
            ("chole".to_string(), "sterol".to_string())
        ]
    );
    let v = AddedVocabulary::synthesize(&t, &["cholesterol"], Strategy::Medvoc);
    assert_eq!(v.scaffold_tokens, vec!["chole"]);
    let ext = apply_added_vocab(&t, &v).unwrap();
    assert_eq!(ext.tokenize_word("cholesterol").tokens, vec!["cholesterol"]);
}

#[test]
fn morphology_base_and_adapted() {
    let base = tok("morphology_base.json");
    let added = AddedVocabulary::load(fixture("morphology_added.json")).unwrap();
    let ext = apply_added_vocab(&base, &added).unwrap();
    let adapt = AdaptBpe::new(&ext);
    let cases: [(&str, &[&str], &[&str]); 4] = [
        ("microbiologically", &["Ġmicrobi", "ologically"], &["Ġmicro", "biological", "ly"]),
        ("inhibitory", &["Ġinhib", "itory"], &["Ġ", "inhibitor", "y"]),
        ("chronically", &["Ġchron", "ically"], &["Ġ", "chronic", "ally"]),
        ("antibacterial", &["Ġantib", "acterial"], &["Ġanti", "bacteria", "l"]),
    ];
    for (word, base_tokens, adapted) in cases {
        assert_eq!(base.tokenize_word(word).tokens, words_of(base_tokens), "{word}");
        assert_eq!(adapt.tokenize_word(word).tokens, words_of(adapted), "{word}");
    }
}

#[test]
fn toy_tokenizer_shape() {
    let t = tok("toy_llama.json");
    assert_eq!(t.vocab_size(), 200);
    assert_eq!(t.marker(), "▁");
    assert!(t.added().is_empty());
    // vocab = marker, sorted alphabet, then one token per merge
    assert_eq!(t.tokens()[0], "▁");
    let alphabet = t.vocab_size() - t.merges().len();
    let chars: Vec<&String> = t.tokens()[1..alphabet].iter().collect();
    assert!(chars.windows(2).all(|w| w[0] < w[1]));
    for (i, (l, r)) in t.merges().iter().enumerate() {
        assert_eq!(t.tokens()[alphabet + i], format!("{l}{r}"));
    }
    // the file is the canonical serialization
    let text = std::fs::read_to_string(fixture("toy_llama.json")).unwrap();
    assert_eq!(t.to_json_string(), text);
}

#[test]
fn medical_text_is_more_fragmented() {
    let t = tok("toy_llama.json");
    let read = |n| WordCounts::from_text(&std::fs::read_to_string(fixture(n)).unwrap());
    let general = corpus_stats(&t, &read("general_corpus.txt")).unwrap();
    let medical = corpus_stats(&t, &read("medical_corpus.txt")).unwrap();
    assert!(medical.fragment_score > general.fragment_score);
    assert!(medical.split_gt3_fraction > general.split_gt3_fraction);
}

#[test]
fn datasets_are_well_formed() {
    let test = load_jsonl(fixture("dataset_test.jsonl")).unwrap();
    assert_eq!(test.len(), 424);
    let train = load_jsonl(fixture("dataset_train.jsonl")).unwrap();
    assert!(train.len() >= 100);
    let novelty: Vec<f64> = test.iter().map(|r| novelty_fraction(r).unwrap()).collect();
    assert!(novelty.contains(&0.0), "some summaries are extractive");
    assert!(novelty.iter().any(|&n| n > 0.3), "some summaries are abstractive");
}

#[test]
fn lexicon_and_wordlist_are_disjoint() {
    let lex = DomainLexicon::load(fixture("medical_lexicon.txt")).unwrap();
    let general = load_wordlist(fixture("general_wordlist.txt")).unwrap();
    assert!(lex.len() >= 100);
    assert!(lex.iter().all(|w| !general.contains(w)));
}

#[test]
fn scaffold_targets_are_fragmented_lexicon_words() {
    let t = tok("toy_llama.json");
    let lex = DomainLexicon::load(fixture("medical_lexicon.txt")).unwrap();
    let text = std::fs::read_to_string(fixture("scaffold_targets.tsv")).unwrap();
    let rows: Vec<(&str, &str)> = text.lines().map(|l| l.split_once('\t').unwrap()).collect();
    assert_eq!(rows.len(), 100);
    assert_eq!(rows.iter().map(|r| r.0).collect::<HashSet<_>>().len(), 100);
    for (w, seg) in &rows {
        assert!(lex.contains(w));
        let r = t.tokenize_word(w);
        assert!(r.subword_count > 1, "{w}");
        assert_eq!(r.tokens.join(" "), *seg, "{w}");
        assert!(w.chars().all(|c| t.contains(&c.to_string())), "{w}");
    }
}

#[test]
fn test_set_has_varied_concentrations() {
    let t = tok("toy_llama.json");
    let lex = DomainLexicon::load(fixture("medical_lexicon.txt")).unwrap();
    let test = load_jsonl(fixture("dataset_test.jsonl")).unwrap();
    let distinct: HashSet<u64> = test
        .iter()
        .map(|r| oov_tally(&t, &WordCounts::from_text(&r.summary), &lex).difficult_concentration().to_bits())
        .collect();
    assert!(distinct.len() > 20);
}

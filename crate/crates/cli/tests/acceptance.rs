//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use medvocab_core::metrics::corpus_stats;
use medvocab_core::slicer::slice_size;
use medvocab_core::{
    apply_added_vocab, extend_matrix, extract_candidate_words, fragment_score, percentile_slice,
    rouge_l_f, scaffix_select, scaffolding_stats, score_records, synthesize_merges, train_bpe, AdaptBpe,
    AddedVocabulary, DomainLexicon, EmbeddingMatrix, Setting, Strategy, Tokenizer, WordCounts,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let held: bool = $cond;
        if !held {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn load_tokenizer(name: &str) -> Result<Tokenizer, String> {
    Tokenizer::load(fixture(name)).map_err(|e| format!("{name}: {e}"))
}

fn read(name: &str) -> Result<String, String> {
    std::fs::read_to_string(fixture(name)).map_err(|e| format!("{name}: {e}"))
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0x5eed_acce_97a0);
    r.set_stream(stream);
    r
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

// ---------------------------------------------------------------------------
// brute-force oracles

fn is_single_digit(s: &str) -> bool {
    let mut c = s.chars();
    matches!((c.next(), c.next()), (Some(d), None) if d.is_ascii_digit())
}

/// Recounts every adjacent pair at each step; ties go to the smallest pair.
fn oracle_merges(words: &[(String, u64)], budget: usize, marker: &str) -> Vec<(String, String)> {
    let mut segs: Vec<(Vec<String>, u64)> = words
        .iter()
        .map(|(w, c)| {
            let mut s = Vec::new();
            if !marker.is_empty() {
                s.push(marker.to_owned());
            }
            s.extend(w.chars().map(String::from));
            (s, *c)
        })
        .collect();
    let mut out: Vec<(String, String)> = Vec::new();
    for _ in 0..budget {
        let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (s, c) in &segs {
            for w in s.windows(2) {
                let p = (w[0].clone(), w[1].clone());
                if is_single_digit(&p.0) || is_single_digit(&p.1) || out.contains(&p) {
                    continue;
                }
                *counts.entry(p).or_default() += c;
            }
        }
        let mut best: Option<(&(String, String), u64)> = None;
        for (p, &c) in &counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((p, c));
            }
        }
        let Some((best, _)) = best else { break };
        let best = best.clone();
        for (s, _) in &mut segs {
            let mut next = Vec::with_capacity(s.len());
            let mut i = 0;
            while i < s.len() {
                if i + 1 < s.len() && s[i] == best.0 && s[i + 1] == best.1 {
                    next.push(format!("{}{}", s[i], s[i + 1]));
                    i += 2;
                } else {
                    next.push(s[i].clone());
                    i += 1;
                }
            }
            *s = next;
        }
        out.push(best);
    }
    out
}

/// LCS length by enumerating every subsequence of `a`.
fn oracle_lcs(a: &[u8], b: &[u8]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        if (mask.count_ones() as usize) <= best {
            continue;
        }
        let mut it = b.iter();
        if (0..a.len()).filter(|i| mask >> i & 1 == 1).all(|i| it.any(|y| *y == a[i])) {
            best = mask.count_ones() as usize;
        }
    }
    best
}

fn random_corpus(r: &mut ChaCha8Rng, alphabet: &[char], max_words: usize) -> Vec<(String, u64)> {
    let n = r.gen_range(1..=max_words);
    let mut seen = HashSet::new();
    (0..n)
        .map(|_| {
            let len = r.gen_range(1..=7);
            let w: String = (0..len).map(|_| *alphabet.choose(r).unwrap()).collect();
            (w, r.gen_range(1..=5))
        })
        .filter(|(w, _)| seen.insert(w.clone()))
        .collect()
}

// ---------------------------------------------------------------------------
// criteria

fn bpe_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    for case in 0..200 {
        let corpus = random_corpus(&mut r, &['a', 'b', 'c', 'd', 'e', '1'], 20);
        let budget = r.gen_range(0..=10);
        let marker = *["", "▁", "Ġ"].choose(&mut r).unwrap();
        let words: WordCounts = corpus.iter().cloned().collect();
        let t = train_bpe(&words, budget, marker).map_err(|e| e.to_string())?;
        let expected = oracle_merges(&corpus, budget, marker);
        ensure!(t.merges() == expected.as_slice(), "case {case}: {:?} != {expected:?}", t.merges());
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("200 corpora in {:.2}s", elapsed.as_secs_f64()))
}

fn iterative_addition() -> Outcome {
    let t = load_tokenizer("iterative_addition.json")?;
    let base = t.tokenize_word("cholesterol").tokens;
    ensure!(base == strings(&["cho", "le", "sterol"]), "base segmentation {base:?}");
    let syn = synthesize_merges(&t, "cholesterol");
    ensure!(syn.new_merges.len() == 2, "merges {:?}", syn.new_merges);
    let v = AddedVocabulary::synthesize(&t, &["cholesterol"], Strategy::Medvoc);
    ensure!(v.scaffold_tokens == strings(&["chole"]), "scaffolds {:?}", v.scaffold_tokens);
    let ext = apply_added_vocab(&t, &v).map_err(|e| e.to_string())?;
    let got = ext.tokenize_word("cholesterol").tokens;
    ensure!(got == strings(&["cholesterol"]), "extended segmentation {got:?}");
    Ok("2 merges, scaffold [chole], 1 token".into())
}

fn morphology_segmentation() -> Outcome {
    let base = load_tokenizer("morphology_base.json")?;
    let added = AddedVocabulary::load(fixture("morphology_added.json")).map_err(|e| e.to_string())?;
    let ext = apply_added_vocab(&base, &added).map_err(|e| e.to_string())?;
    let adapt = AdaptBpe::new(&ext);
    for (word, want) in [
        ("inhibitory", &["Ġ", "inhibitor", "y"][..]),
        ("microbiologically", &["Ġmicro", "biological", "ly"][..]),
    ] {
        let got = adapt.tokenize_word(word).tokens;
        ensure!(got == strings(want), "{word}: {got:?}");
    }
    Ok("inhibitory, microbiologically".into())
}

fn dominance() -> Outcome {
    let mut r = rng(4);
    for case in 0..100 {
        let corpus = random_corpus(&mut r, &['a', 'b', 'c', 'd', 'e', '7'], 20);
        let words: WordCounts = corpus.iter().cloned().collect();
        let marker = *["", "▁", "Ġ"].choose(&mut r).unwrap();
        let t = train_bpe(&words, r.gen_range(0..=12), marker).map_err(|e| e.to_string())?;
        let k = r.gen_range(1..=corpus.len());
        let picked: Vec<&str> = corpus.choose_multiple(&mut r, k).map(|(w, _)| w.as_str()).collect();
        let targets: Vec<String> = picked.iter().map(|w| format!("{marker}{w}")).collect();
        let base = fragment_score(&t, &words).map_err(|e| e.to_string())?;
        for strategy in [Strategy::Medvoc, Strategy::Scaffix] {
            let v = match strategy {
                Strategy::Scaffix => AddedVocabulary::scaffix(picked.iter().copied()),
                _ => AddedVocabulary::synthesize(&t, &targets, strategy),
            };
            let ext = apply_added_vocab(&t, &v).map_err(|e| e.to_string())?;
            let after = fragment_score(&ext, &words).map_err(|e| e.to_string())?;
            ensure!(after <= base, "case {case} {strategy}: {after} > {base}");
        }
        // every word added whole: AdaptBPE leaves one subword per word
        let all = apply_added_vocab(&t, &AddedVocabulary::scaffix(corpus.iter().map(|(w, _)| w.clone())))
            .map_err(|e| e.to_string())?;
        let fs = fragment_score(&AdaptBpe::new(&all), &words).map_err(|e| e.to_string())?;
        ensure!(fs == 1.0, "case {case}: ScafFix over all words gives {fs}");
    }

    // fixture scale: quota covering every OOV lexicon word of the medical corpus
    let t = load_tokenizer("toy_llama.json")?;
    let lexicon = DomainLexicon::load(fixture("medical_lexicon.txt")).map_err(|e| e.to_string())?;
    let corpus = WordCounts::from_text(&read("medical_corpus.txt")?);
    let oov = extract_candidate_words(&t, &corpus, &lexicon).map_err(|e| e.to_string())?;
    let search = scaffix_select(&oov, &[oov.len()], &t, &oov, 0.0).map_err(|e| e.to_string())?;
    let ext = apply_added_vocab(&t, &search.added).map_err(|e| e.to_string())?;
    let lexicon_words: WordCounts = corpus
        .iter()
        .filter(|(w, _)| lexicon.contains(w))
        .map(|(w, c)| (w.to_owned(), c))
        .collect();
    let before = fragment_score(&t, &lexicon_words).map_err(|e| e.to_string())?;
    let after = fragment_score(&AdaptBpe::new(&ext), &lexicon_words).map_err(|e| e.to_string())?;
    ensure!(after == 1.0, "fixture lexicon fragment score {after}");
    Ok(format!("100 triples; fixture lexicon {before:.3} -> {after}"))
}

fn domain_fragmentation() -> Outcome {
    let t = load_tokenizer("toy_llama.json")?;
    let general = corpus_stats(&t, &WordCounts::from_text(&read("general_corpus.txt")?)).map_err(|e| e.to_string())?;
    let medical = corpus_stats(&t, &WordCounts::from_text(&read("medical_corpus.txt")?)).map_err(|e| e.to_string())?;
    ensure!(
        medical.fragment_score > general.fragment_score,
        "fragment score {} <= {}",
        medical.fragment_score,
        general.fragment_score
    );
    ensure!(
        medical.split_gt3_fraction > general.split_gt3_fraction,
        "split>3 {} <= {}",
        medical.split_gt3_fraction,
        general.split_gt3_fraction
    );
    Ok(format!(
        "fragment {:.3} > {:.3}, split>3 {:.4} > {:.4}",
        medical.fragment_score, general.fragment_score, medical.split_gt3_fraction, general.split_gt3_fraction
    ))
}

fn scaffolding_accounting() -> Outcome {
    let t = load_tokenizer("toy_llama.json")?;
    let text = read("scaffold_targets.tsv")?;
    let mut words = Vec::new();
    let mut segmentations = Vec::new();
    for line in text.lines() {
        let (w, seg) = line.split_once('\t').ok_or_else(|| format!("bad line {line:?}"))?;
        words.push(w.to_owned());
        segmentations.push(seg.split(' ').map(str::to_owned).collect::<Vec<_>>());
    }
    ensure!(words.len() == 100, "{} targets", words.len());
    let targets: Vec<String> = words.iter().map(|w| format!("{}{w}", t.marker())).collect();
    let target_set: HashSet<&str> = targets.iter().map(String::as_str).collect();

    // every left-to-right prefix of the known segmentation that is neither
    // in the base vocabulary nor itself a target
    let mut scaffolds: HashSet<String> = HashSet::new();
    for (target, seg) in targets.iter().zip(&segmentations) {
        ensure!(seg.concat() == *target, "segmentation of {target} does not spell it");
        let mut prefix = seg[0].clone();
        for piece in &seg[1..] {
            prefix.push_str(piece);
            if !t.contains(&prefix) && !target_set.contains(prefix.as_str()) {
                scaffolds.insert(prefix.clone());
            }
        }
    }
    let expected = scaffolds.len() as f64 / (scaffolds.len() + target_set.len()) as f64;
    let stats = scaffolding_stats(&t, &targets);
    ensure!(stats.scaffold_count == scaffolds.len(), "{} scaffolds, oracle {}", stats.scaffold_count, scaffolds.len());
    ensure!(
        (stats.overhead_fraction - expected).abs() < 1e-12,
        "overhead {} vs oracle {expected}",
        stats.overhead_fraction
    );

    let scaffix = AddedVocabulary::scaffix(words.iter().cloned());
    ensure!(scaffix.scaffold_tokens.is_empty(), "ScafFix scaffolds {:?}", scaffix.scaffold_tokens);
    let counts: WordCounts = words.iter().map(|w| (w.clone(), 1)).collect();
    let selected = scaffix_select(&counts, &[100], &t, &counts, 0.0).map_err(|e| e.to_string())?;
    ensure!(selected.added.scaffold_tokens.is_empty(), "ScafFix search added scaffolds");
    Ok(format!("{} scaffolds, overhead {:.4}; ScafFix 0", stats.scaffold_count, stats.overhead_fraction))
}

fn rouge_oracle() -> Outcome {
    let mut r = rng(7);
    let text = |v: &[u8]| v.iter().map(|x| format!("t{x}")).collect::<Vec<_>>().join(" ");
    for case in 0..500 {
        let a: Vec<u8> = (0..r.gen_range(1..=10)).map(|_| r.gen_range(0..5)).collect();
        let b: Vec<u8> = (0..r.gen_range(1..=10)).map(|_| r.gen_range(0..5)).collect();
        let s = rouge_l_f(&text(&a), &text(&b)).map_err(|e| e.to_string())?;
        let l = oracle_lcs(&a, &b) as f64;
        let (p, rc) = (l / b.len() as f64, l / a.len() as f64);
        let f = if l == 0.0 { 0.0 } else { 2.0 * p * rc / (p + rc) };
        ensure!((s.f1 - f).abs() < 1e-9, "case {case}: {} vs {f}", s.f1);
    }
    let s = rouge_l_f("a b c d", "a c d e").map_err(|e| e.to_string())?;
    ensure!((s.f1 - 0.75).abs() < 1e-12, "worked example gives {}", s.f1);
    Ok("500 pairs; worked example 0.75".into())
}

fn slice_determinism() -> Outcome {
    let t = load_tokenizer("toy_llama.json")?;
    let lexicon = DomainLexicon::load(fixture("medical_lexicon.txt")).map_err(|e| e.to_string())?;
    let mut records = medvocab_core::dataset::load_jsonl(fixture("dataset_test.jsonl")).map_err(|e| e.to_string())?;
    ensure!(records.len() == 424, "{} records", records.len());
    let scored = score_records(&t, &records, &lexicon).map_err(|e| e.to_string())?;
    ensure!(scored.skipped.is_empty(), "records skipped: {:?}", scored.skipped);
    records.shuffle(&mut rng(8));
    let shuffled = score_records(&t, &records, &lexicon).map_err(|e| e.to_string())?;
    for setting in Setting::RANKED {
        let a = percentile_slice(&scored.scores, setting).map_err(|e| e.to_string())?;
        let b = percentile_slice(&shuffled.scores, setting).map_err(|e| e.to_string())?;
        ensure!(a == b, "{setting}: order changed the slice");
        ensure!(a.ids.len() == 43 && slice_size(424) == 43, "{setting}: size {}", a.ids.len());
        let members: HashSet<&str> = a.ids.iter().map(String::as_str).collect();
        let score = |r: &&medvocab_core::RecordScore| r.score(setting).unwrap();
        let min_in = scored.scores.iter().filter(|r| members.contains(r.id.as_str())).map(|r| score(&r)).fold(f64::INFINITY, f64::min);
        let max_out = scored.scores.iter().filter(|r| !members.contains(r.id.as_str())).map(|r| score(&r)).fold(f64::NEG_INFINITY, f64::max);
        ensure!(min_in >= max_out, "{setting}: min in {min_in} < max out {max_out}");
    }
    Ok("5 slices of 43, shuffle invariant".into())
}

fn embedding_init() -> Outcome {
    let mut r = rng(9);
    for case in 0..100 {
        let rows = r.gen_range(3..=50);
        let dims = r.gen_range(1..=16);
        let mut tokens = strings(&["a", "b", "c"]);
        tokens.extend((3..rows).map(|i| format!("x{i}")));
        let base = Tokenizer::from_parts("", tokens, vec![], vec![]).map_err(|e| e.to_string())?;
        let values: Vec<f64> = (0..rows * dims).map(|_| r.gen_range(-1e3..1e3)).collect();
        let m = EmbeddingMatrix::new(rows, dims, values).map_err(|e| e.to_string())?;
        let added: Vec<String> = (0..r.gen_range(1..=5))
            .map(|_| (0..r.gen_range(2..=6)).map(|_| *['a', 'b', 'c'].choose(&mut r).unwrap()).collect())
            .collect();
        let ext = apply_added_vocab(&base, &AddedVocabulary::scaffix(added)).map_err(|e| e.to_string())?;
        let out = extend_matrix(&m, &base, &ext).map_err(|e| e.to_string())?;
        ensure!(out.rows() == ext.vocab_size(), "case {case}: {} rows", out.rows());
        ensure!(&out.values()[..rows * dims] == m.values(), "case {case}: base rows changed");
        for id in rows..out.rows() {
            let tok = ext.token(id as u32).unwrap();
            let src = medvocab_core::embed::base_subword_ids(&base, tok);
            for (j, v) in out.row(id).iter().enumerate() {
                let col = src.iter().map(|&s| m.row(s as usize)[j]);
                let lo = col.clone().fold(f64::INFINITY, f64::min);
                let hi = col.fold(f64::NEG_INFINITY, f64::max);
                ensure!(lo <= *v && *v <= hi, "case {case}: {tok} dim {j} outside [{lo}, {hi}]");
            }
        }
    }
    // two base subwords sharing one row
    let e: Vec<f64> = (0..16).map(|_| r.gen_range(-1e6..1e6)).collect();
    let base = Tokenizer::from_parts("", strings(&["a", "b"]), vec![], vec![]).map_err(|e| e.to_string())?;
    let m = EmbeddingMatrix::from_rows(&[e.clone(), e.clone()]).map_err(|e| e.to_string())?;
    let ext = apply_added_vocab(&base, &AddedVocabulary::scaffix(["ab", "abba", "bbb"])).map_err(|e| e.to_string())?;
    let out = extend_matrix(&m, &base, &ext).map_err(|e| e.to_string())?;
    for id in 2..out.rows() {
        ensure!(out.row(id) == &e[..], "shared row not reproduced bit-exactly");
    }
    Ok("100 matrices; shared row exact".into())
}

// ---------------------------------------------------------------------------
// end-to-end

fn cli(config: &Path, out: &Path, args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_medvocab"))
        .arg("--config")
        .arg(config)
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .env("RUST_LOG", "error")
        .status()
        .map_err(|e| e.to_string())?;
    ensure!(status.success(), "`{}` exited with {status}", args.join(" "));
    Ok(())
}

fn run_pipeline(out: &Path) -> Result<(), String> {
    let config = fixture("pipeline.json");
    let ext = out.join("tokenizer_extended.json");
    let ext = ext.to_str().unwrap();
    let embeddings = fixture("toy_llama_embeddings.txt");
    let predictions = fixture("predictions_test.jsonl");
    let targets = fixture("scaffold_targets.tsv");
    let steps: Vec<Vec<&str>> = vec![
        vec!["analyze", "--split", "train"],
        vec!["analyze", "--split", "test"],
        vec!["build-vocab"],
        vec!["extend"],
        vec!["--tokenizer-path", ext, "analyze", "--adaptbpe", "--out", "placeholder"],
        vec!["slice"],
        vec!["rouge", "--predictions", predictions.to_str().unwrap()],
        vec!["scaffold-stats", "--targets", targets.to_str().unwrap()],
        vec!["init-embed", "--matrix", embeddings.to_str().unwrap()],
    ];
    let adapted = out.join("analyze_test_extended_adaptbpe.json");
    for mut step in steps {
        if let Some(p) = step.iter().position(|s| *s == "placeholder") {
            step[p] = adapted.to_str().unwrap();
        }
        cli(&config, out, &step)?;
    }
    for setting in Setting::RANKED {
        let slice = out.join("slices").join(format!("{setting}.json"));
        cli(&config, out, &["profile", "--slice", slice.to_str().unwrap()])?;
    }
    Ok(())
}

fn snapshot(dir: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
                files.insert(path.strip_prefix(dir).unwrap().to_path_buf(), bytes);
            }
        }
    }
    Ok(files)
}

fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tmp.path().join("out");
    let start = Instant::now();
    run_pipeline(&out)?;
    let first = snapshot(&out)?;
    std::fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
    run_pipeline(&out)?;
    let second = snapshot(&out)?;
    let elapsed = start.elapsed();
    ensure!(first.len() >= 14, "only {} artifacts", first.len());
    ensure!(
        first.keys().eq(second.keys()),
        "artifact sets differ: {:?} vs {:?}",
        first.keys().collect::<Vec<_>>(),
        second.keys().collect::<Vec<_>>()
    );
    for (path, bytes) in &first {
        ensure!(second[path] == *bytes, "{} differs between runs", path.display());
    }
    ensure!(elapsed < Duration::from_secs(60), "two runs took {elapsed:?}");
    Ok(format!("{} artifacts identical, {:.1}s for two runs", first.len(), elapsed.as_secs_f64()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("BPE oracle", bpe_oracle),
        ("iterative addition (cholesterol)", iterative_addition),
        ("morphology-aware segmentation", morphology_segmentation),
        ("fragment-score dominance", dominance),
        ("domain text fragments more", domain_fragmentation),
        ("scaffolding accounting", scaffolding_accounting),
        ("Rouge-L oracle", rouge_oracle),
        ("slice determinism", slice_determinism),
        ("embedding initialization", embedding_init),
        ("end-to-end idempotence", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

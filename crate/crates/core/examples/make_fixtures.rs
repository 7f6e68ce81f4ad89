//! Regenerates everything under `crates/core/fixtures`.
//!
//! cargo run -p medvocab-core --example make_fixtures
//!
//! Output is fully determined by the seed, so re-running leaves the tree
//! unchanged.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use medvocab_core::bpe::train_bpe;
use medvocab_core::dataset::{to_jsonl, DatasetRecord};
use medvocab_core::{AddedVocabulary, EmbeddingMatrix, Tokenizer, WordCounts};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SEED: u64 = 0x6d65_6476_6f63;

const GENERAL: &str = "the of and to in a is that for it as was with be by on not he this are or his \
from at which but have an they you were her she there been one all we their has would when if so no \
will more can who its time than only into other some them two may these could first any new years \
people like then over now also after very made many most even back such where good much through way \
well down should because each just those how long little work world own same still great year since \
while part day place however last life both high during under between never old house home water \
number small large general case another state point fact against country important every family \
order system form public children city away night often need room given free kind within power among \
least things mind side give think make know take see come look use find tell ask seem feel try leave \
call keep show hear play run move live believe bring happen write provide sit stand lose pay meet \
include continue set learn change lead understand watch follow stop create speak read allow add spend \
grow open walk win offer remember love consider appear buy wait serve die send expect build stay fall \
cut reach remain suggest raise pass sell require report decide pull patients study group results \
treatment effect compared received showed found total increased reduced higher lower risk outcome \
trial days weeks months age women men adults score level rate dose daily single usual early late";

const MEDICAL: &str = "cardiomyopathy antipyretics cholesterol inhibitory microbiologically chronically \
antibacterial hypertension hypotension tachycardia bradycardia arrhythmia myocardial infarction \
angioplasty atherosclerosis thrombosis embolism anticoagulant antiplatelet fibrillation ventricular \
pericarditis endocarditis hyperlipidemia dyslipidemia atorvastatin simvastatin metformin hyperglycemia \
hypoglycemia nephropathy neuropathy retinopathy glomerulonephritis creatinine proteinuria hematuria \
pancreatitis amylase lipase hepatitis cirrhosis cholestasis cholecystectomy appendectomy laparoscopic \
gastroenteritis esophagitis diverticulitis helicobacter omeprazole bronchitis pneumonia tuberculosis \
bronchiectasis emphysema bronchodilator corticosteroid prednisone dexamethasone inflammation \
immunosuppressive immunotherapy chemotherapy radiotherapy carcinoma adenocarcinoma lymphoma leukemia \
melanoma metastasis tumorigenesis angiogenesis apoptosis antioxidant antiviral antifungal antibiotic \
amoxicillin vancomycin ciprofloxacin bacteremia septicemia meningitis encephalitis epilepsy \
anticonvulsant neurodegenerative parkinsonism dementia schizophrenia antipsychotic antidepressant \
anxiolytic benzodiazepine analgesic acetaminophen ibuprofen opioid morphine anesthesia intubation \
tracheostomy osteoporosis osteoarthritis arthritis spondylitis fibromyalgia dermatitis psoriasis \
urticaria anaphylaxis hypersensitivity immunoglobulin antibody antigen lymphocyte neutrophil \
eosinophil thrombocytopenia anemia hemoglobin erythropoietin hemorrhage hematoma coagulopathy \
electrocardiogram echocardiography angiography tomography ultrasonography endoscopy colonoscopy biopsy \
histopathology cytology pathogenesis etiology epidemiology prophylaxis vaccination seroprevalence \
pharmacokinetics bioavailability contraindication randomized placebo comorbidity mortality morbidity \
postoperative preoperative perioperative intraoperative neonatal preeclampsia gestational obstetric \
hysterectomy endometriosis polycystic infertility contraception osteomyelitis cellulitis";

fn words(list: &str) -> Vec<&str> {
    list.split_whitespace().collect()
}

fn write(dir: &Path, name: &str, contents: &str) {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap_or_else(|e| panic!("writing {}: {e}", path.display()));
    println!("wrote {}", path.display());
}

/// Tokenizer whose vocabulary is the marker, `a`-`z`, then the merge
/// results in merge order.
fn hand_tokenizer(marker: &str, merges: &[(&str, &str)]) -> Tokenizer {
    let mut tokens: Vec<String> = Vec::new();
    if !marker.is_empty() {
        tokens.push(marker.to_owned());
    }
    tokens.extend(('a'..='z').map(|c| c.to_string()));
    let mut seen: BTreeSet<String> = tokens.iter().cloned().collect();
    for (l, r) in merges {
        let m = format!("{l}{r}");
        if seen.insert(m.clone()) {
            tokens.push(m);
        }
    }
    let merges = merges.iter().map(|(l, r)| (l.to_string(), r.to_string())).collect();
    Tokenizer::from_parts(marker, tokens, merges, vec![]).expect("hand-built tokenizer is valid")
}

/// Left-branching merges that build `word` one character at a time.
fn chain(word: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut chars = word.chars();
    let mut acc = match word.strip_prefix(['Ġ', '▁']) {
        Some(rest) => {
            chars = rest.chars();
            word[..word.len() - rest.len()].to_string()
        }
        None => chars.next().expect("non-empty").to_string(),
    };
    for c in chars {
        out.push((acc.clone(), c.to_string()));
        acc.push(c);
    }
    out
}

fn over_fragmentation_tokenizer() -> Tokenizer {
    hand_tokenizer(
        "▁",
        &[
            ("▁", "c"),
            ("▁c", "a"),
            ("▁ca", "r"),
            ("▁car", "d"),
            ("i", "o"),
            ("io", "m"),
            ("o", "p"),
            ("a", "t"),
            ("at", "h"),
            ("▁", "a"),
            ("▁a", "n"),
            ("▁an", "t"),
            ("i", "p"),
            ("r", "e"),
            ("re", "t"),
            ("i", "c"),
            ("ic", "s"),
        ],
    )
}

fn iterative_addition_tokenizer() -> Tokenizer {
    hand_tokenizer(
        "",
        &[
            ("c", "h"),
            ("ch", "o"),
            ("l", "e"),
            ("s", "t"),
            ("st", "e"),
            ("ste", "r"),
            ("ster", "o"),
            ("stero", "l"),
        ],
    )
}

fn morphology_tokenizer() -> Tokenizer {
    let mut merges: Vec<(String, String)> = Vec::new();
    for w in ["Ġmicrobi", "Ġinhib", "Ġchron", "Ġantib", "ologically", "ically", "itory", "acterial"] {
        merges.extend(chain(w));
    }
    for (l, r) in [("a", "l"), ("al", "l"), ("all", "y"), ("l", "y")] {
        merges.push((l.into(), r.into()));
    }
    let refs: Vec<(&str, &str)> = merges.iter().map(|(l, r)| (l.as_str(), r.as_str())).collect();
    hand_tokenizer("Ġ", &refs)
}

fn sentence(rng: &mut ChaCha8Rng, general: &[&str], medical: &[&str], density: f64) -> String {
    let len = rng.gen_range(8..16);
    let mut out: Vec<String> = Vec::with_capacity(len + 1);
    for _ in 0..len {
        let w = if rng.gen_bool(density) {
            medical.choose(rng).unwrap()
        } else {
            general.choose(rng).unwrap()
        };
        out.push(w.to_string());
    }
    if rng.gen_bool(0.15) {
        let n: u32 = rng.gen_range(2..500);
        let at = rng.gen_range(0..out.len());
        out.insert(at, n.to_string());
    }
    let mut s = out.join(" ");
    if rng.gen_bool(0.3) {
        let at = s[..s.len() / 2].rfind(' ').unwrap_or(0);
        if at > 0 {
            s.insert(at, ',');
        }
    }
    s.push('.');
    s
}

fn corpus(rng: &mut ChaCha8Rng, lines: usize, general: &[&str], medical: &[&str], density: f64) -> String {
    let mut out = String::new();
    for _ in 0..lines {
        out.push_str(&sentence(rng, general, medical, density));
        out.push('\n');
    }
    out
}

fn record(rng: &mut ChaCha8Rng, id: String, general: &[&str], medical: &[&str]) -> DatasetRecord {
    let density = rng.gen_range(0.0..0.45);
    let n_sent = rng.gen_range(3..8);
    let sents: Vec<String> = (0..n_sent)
        .map(|_| sentence(rng, general, medical, density))
        .collect();
    let source = sents.join(" ");
    let topic = medical.choose(rng).unwrap();
    let query = format!("what is the effect of {topic} on {}?", general.choose(rng).unwrap());
    let summary = if rng.gen_bool(0.5) {
        // extractive: one or two source sentences
        let k = rng.gen_range(1..=2.min(n_sent));
        sents[..k].join(" ")
    } else {
        // abstractive: source words mixed with unseen ones
        let src_words: Vec<&str> = source
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .collect();
        let novel_rate = rng.gen_range(0.05..0.8);
        let len = rng.gen_range(6..20);
        let med_density = rng.gen_range(0.0..0.5);
        let mut out: Vec<&str> = Vec::with_capacity(len);
        for _ in 0..len {
            let w = if rng.gen_bool(novel_rate) {
                if rng.gen_bool(med_density) {
                    medical.choose(rng).unwrap()
                } else {
                    general.choose(rng).unwrap()
                }
            } else {
                src_words.choose(rng).unwrap()
            };
            out.push(w);
        }
        format!("{}.", out.join(" "))
    };
    DatasetRecord::new(id, query, source, summary)
}

fn dataset(rng: &mut ChaCha8Rng, prefix: &str, n: usize, general: &[&str], medical: &[&str]) -> String {
    let records: Vec<DatasetRecord> = (0..n)
        .map(|i| record(rng, format!("{prefix}-{i:04}"), general, medical))
        .collect();
    to_jsonl(&records)
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir).expect("creating fixtures dir");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let general = words(GENERAL);
    let medical = words(MEDICAL);

    write(&dir, "over_fragmentation.json", &over_fragmentation_tokenizer().to_json_string());
    write(&dir, "iterative_addition.json", &iterative_addition_tokenizer().to_json_string());
    write(&dir, "morphology_base.json", &morphology_tokenizer().to_json_string());
    let added = AddedVocabulary::scaffix(["inhibitor", "biological", "chronic", "bacteria"]);
    write(&dir, "morphology_added.json", &added.to_json_string());

    let general_corpus = corpus(&mut rng, 3000, &general, &medical, 0.0);
    write(&dir, "general_corpus.txt", &general_corpus);
    write(&dir, "medical_corpus.txt", &corpus(&mut rng, 1500, &general, &medical, 0.35));
    write(&dir, "pac_corpus.txt", &corpus(&mut rng, 2500, &general, &medical, 0.5));

    let mut lexicon: Vec<&str> = medical.clone();
    lexicon.sort_unstable();
    lexicon.dedup();
    write(&dir, "medical_lexicon.txt", &format!("{}\n", lexicon.join("\n")));
    let mut wordlist: Vec<&str> = general.clone();
    wordlist.sort_unstable();
    wordlist.dedup();
    write(&dir, "general_wordlist.txt", &format!("{}\n", wordlist.join("\n")));

    let counts = WordCounts::from_text(&general_corpus);
    let alphabet = {
        let chars: BTreeSet<char> = counts.iter().flat_map(|(w, _)| w.chars()).collect();
        chars.len() + 1
    };
    let toy = train_bpe(&counts, 200 - alphabet, "▁").expect("general corpus is non-empty");
    assert_eq!(toy.vocab_size(), 200, "general corpus must support 200 tokens");
    write(&dir, "toy_llama.json", &toy.to_json_string());

    let dims = 8;
    let values: Vec<f64> = (0..toy.vocab_size() * dims)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let matrix = EmbeddingMatrix::new(toy.vocab_size(), dims, values).expect("finite values");
    write(&dir, "toy_llama_embeddings.txt", &matrix.to_text());

    let test = dataset(&mut rng, "test", 424, &general, &medical);
    write(&dir, "dataset_test.jsonl", &test);
    write(&dir, "dataset_train.jsonl", &dataset(&mut rng, "train", 300, &general, &medical));

    let predictions: String = test
        .lines()
        .map(|l| {
            let r: DatasetRecord = serde_json::from_str(l).expect("record round-trips");
            let lead = r.source.split_inclusive('.').next().unwrap_or(&r.source).trim();
            format!("{}\n", json!({ "id": r.id, "hypothesis": lead }))
        })
        .collect();
    write(&dir, "predictions_test.jsonl", &predictions);

    // Fragmented lexicon words spelled entirely with base symbols, each with
    // its base segmentation.
    let targets: Vec<String> = lexicon
        .iter()
        .copied()
        .filter(|w| w.chars().all(|c| toy.contains(&c.to_string())))
        .filter(|w| toy.tokenize_word(w).subword_count > 1)
        .take(100)
        .map(|w| format!("{w}\t{}\n", toy.tokenize_word(w).tokens.join(" ")))
        .collect();
    assert_eq!(targets.len(), 100, "need 100 fragmented lexicon words");
    write(&dir, "scaffold_targets.tsv", &targets.concat());

    let config = json!({
        "tokenizer_path": "toy_llama.json",
        "dataset_paths": { "train": "dataset_train.jsonl", "test": "dataset_test.jsonl" },
        "lexicon_path": "medical_lexicon.txt",
        "general_wordlist_path": "general_wordlist.txt",
        "pac_corpus_path": "pac_corpus.txt",
        "strategy": "SCAFFIX",
        "quota_grid": [10, 25, 50, 100, 150],
        "size_grid": [100, 200, 400],
        "tolerance": 0.02,
        "marker": "▁",
        "output_dir": "out"
    });
    let mut config = serde_json::to_string_pretty(&config).expect("json");
    config.push('\n');
    write(&dir, "pipeline.json", &config);
}

//! Parallel builders against the sequential core builders.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semglove::builders;
use semglove::core::dump::{DumpHeader, MlmRecord, Prediction, SanRecord};
use semglove::core::mlm::{self, MlmConfig};
use semglove::core::san::{self, SanConfig};
use semglove::core::window::{build_window_cooc, WindowConfig};
use semglove::core::{CoocMatrix, Distance, SubwordLexicon, Vocabulary};
use semglove::formats::sgdv::{self, DumpRecord};

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}

fn corpus(rng: &mut ChaCha8Rng, n: usize, vocab: u32) -> Vec<Vec<Option<u32>>> {
    (0..n)
        .map(|_| {
            (0..rng.random_range(1..25))
                .map(|_| rng.random_bool(0.92).then(|| rng.random_range(0..vocab)))
                .collect()
        })
        .collect()
}

fn assert_close(a: &CoocMatrix, b: &CoocMatrix, tol: f64) {
    assert_eq!(a.len(), b.len());
    for r in a.iter() {
        let other = b.get(r.i, r.j).unwrap_or_else(|| panic!("missing ({},{})", r.i, r.j));
        assert!(
            (r.x - other).abs() <= tol * r.x.abs(),
            "({},{}) {} vs {}",
            r.i,
            r.j,
            r.x,
            other
        );
    }
}

#[test]
fn parallel_window_counts_are_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // enough sentences for several shards
    let sentences = corpus(&mut rng, 9000, 300);
    for cfg in [
        WindowConfig {
            window: 5,
            symmetric: true,
        },
        WindowConfig {
            window: 3,
            symmetric: false,
        },
    ] {
        let seq = build_window_cooc(sentences.iter().map(Vec::as_slice), 300, &cfg).unwrap();
        let par = pool(4)
            .install(|| builders::window_cooc(&sentences, 300, &cfg))
            .unwrap();
        assert_eq!(seq.to_sorted_records(), par.to_sorted_records());
    }
}

fn san_record(rng: &mut ChaCha8Rng, words: usize) -> SanRecord {
    let counts: Vec<u32> = (0..words).map(|_| rng.random_range(1..=2)).collect();
    let l: usize = counts.iter().map(|&c| c as usize).sum();
    SanRecord {
        subword_counts: counts,
        bpe_ids: (0..l as u32).collect(),
        attn: (0..l * l).map(|_| rng.random_range(0.0f32..1.0)).collect(),
    }
}

#[test]
fn parallel_san_counts_match_sequential() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sentences = corpus(&mut rng, 1500, 120);
    let records: Vec<SanRecord> = sentences.iter().map(|s| san_record(&mut rng, s.len())).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("san.sgdv");
    let dump: Vec<DumpRecord> = records.iter().cloned().map(DumpRecord::San).collect();
    sgdv::write_dump(&path, &DumpHeader::san(24, 16), &dump).unwrap();

    let cfg = SanConfig {
        window: 4,
        select_top: 3,
        distance: Distance::Division,
    };
    let seq = san::build_san_cooc(
        records.iter().zip(&sentences).map(|(r, s)| (r, s.as_slice())),
        120,
        &cfg,
    )
    .unwrap();
    let par = pool(4)
        .install(|| builders::san_cooc(&path, &sentences, 120, &cfg))
        .unwrap();
    assert!(!seq.is_empty());
    assert_close(&seq, &par, 1e-9);
}

#[test]
fn san_dump_longer_than_corpus_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("san.sgdv");
    let dump = vec![DumpRecord::San(san_record(&mut rng, 3)); 2];
    sgdv::write_dump(&path, &DumpHeader::san(1, 1), &dump).unwrap();
    let sentences = vec![vec![Some(0), Some(1), Some(2)]];
    let cfg = SanConfig::default();
    let err = builders::san_cooc(&path, &sentences, 3, &cfg).unwrap_err();
    assert!(err.to_string().contains("record 1"), "{err}");
}

#[test]
fn parallel_mlm_counts_match_sequential_over_split_dumps() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n_words = 60;
    let vocab = Vocabulary::from_entries((0..n_words).map(|k| (format!("w{k}"), 1u64)));
    let mut lex = SubwordLexicon::new();
    let mut pieces = Vec::new();
    for k in 0..n_words {
        let p: Vec<u32> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..150)).collect();
        lex.insert(format!("w{k}"), p.clone()).unwrap();
        pieces.push(p);
    }
    let top_k = 5;
    let records: Vec<MlmRecord> = (0..400)
        .map(|_| {
            let words: Vec<usize> = (0..rng.random_range(1..10))
                .map(|_| rng.random_range(0..n_words))
                .collect();
            let bpe_ids: Vec<u32> = words.iter().flat_map(|&w| pieces[w].clone()).collect();
            let predictions = bpe_ids
                .iter()
                .flat_map(|_| {
                    let mut p: Vec<Prediction> = (0..top_k)
                        .map(|_| Prediction {
                            token: rng.random_range(0..150),
                            logit: rng.random_range(-2.0f32..12.0),
                        })
                        .collect();
                    p.sort_by(|a, b| b.logit.total_cmp(&a.logit).then(a.token.cmp(&b.token)));
                    p
                })
                .collect();
            MlmRecord {
                subword_counts: words.iter().map(|&w| pieces[w].len() as u32).collect(),
                bpe_ids,
                predictions,
            }
        })
        .collect();

    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = records
        .chunks(150)
        .enumerate()
        .map(|(k, chunk)| {
            let p = dir.path().join(format!("mlm{k}.sgdv"));
            let recs: Vec<DumpRecord> = chunk.iter().cloned().map(DumpRecord::Mlm).collect();
            sgdv::write_dump(&p, &DumpHeader::mlm(top_k as u32, 24, 16), &recs).unwrap();
            p
        })
        .collect();

    for distance in [Distance::Division, Distance::Rank] {
        let cfg = MlmConfig {
            top_tokens: 4,
            distance,
        };
        let seq = mlm::build_mlm_cooc(&records, top_k, &vocab, &lex, &cfg).unwrap();
        let par = pool(4)
            .install(|| builders::mlm_cooc(&paths, &vocab, &lex, &cfg))
            .unwrap();
        assert!(!seq.is_empty());
        assert_close(&seq, &par, 1e-9);
    }
}

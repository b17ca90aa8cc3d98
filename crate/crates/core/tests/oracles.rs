//! Brute-force oracles and algebraic invariants for the builders.

use std::collections::HashMap;

use num_rational::Ratio;
use num_traits::Zero;
use proptest::prelude::*;
use semglove_core::dump::{Prediction, SanRecord};
use semglove_core::mlm::{self, BpeCoocMatrix, MlmConfig};
use semglove_core::san::{self, Candidate, SanConfig};
use semglove_core::window::{build_window_cooc, WindowConfig};
use semglove_core::{CoocMatrix, Distance, MlmRecord, SubwordLexicon, Vocabulary};

/// All position pairs, summed in exact rational arithmetic and rounded once.
fn window_oracle(sentences: &[Vec<Option<u32>>], s: usize) -> HashMap<(u32, u32), f64> {
    let mut x: HashMap<(u32, u32), Ratio<u128>> = HashMap::new();
    for ids in sentences {
        for p in 0..ids.len() {
            for q in 0..ids.len() {
                let d = p.abs_diff(q);
                if d == 0 || d > s {
                    continue;
                }
                if let (Some(a), Some(b)) = (ids[p], ids[q]) {
                    if a != b {
                        *x.entry((a, b)).or_insert_with(Ratio::zero) += Ratio::new(1, d as u128);
                    }
                }
            }
        }
    }
    x.into_iter()
        .map(|(k, r)| (k, *r.numer() as f64 / *r.denom() as f64))
        .collect()
}

fn as_map(m: &CoocMatrix) -> HashMap<(u32, u32), f64> {
    m.iter().map(|r| ((r.i, r.j), r.x)).collect()
}

fn sentences() -> impl Strategy<Value = Vec<Vec<Option<u32>>>> {
    prop::collection::vec(
        prop::collection::vec(prop::option::weighted(0.85, 0u32..12), 0..15),
        0..12,
    )
}

fn san_record() -> impl Strategy<Value = SanRecord> {
    prop::collection::vec(1u32..4, 1..6).prop_flat_map(|counts| {
        let l: usize = counts.iter().map(|&c| c as usize).sum();
        (
            Just(counts),
            prop::collection::vec(0u32..500, l),
            prop::collection::vec(0.0f32..3.0, l * l),
        )
            .prop_map(|(subword_counts, bpe_ids, attn)| SanRecord {
                subword_counts,
                bpe_ids,
                attn,
            })
    })
}

proptest! {
    #[test]
    fn window_matches_all_pairs_oracle(lines in sentences(), s in 1usize..6) {
        let cfg = WindowConfig { window: s, symmetric: true };
        let m = build_window_cooc(lines.iter().map(Vec::as_slice), 12, &cfg).unwrap();
        prop_assert_eq!(as_map(&m), window_oracle(&lines, s));
    }

    #[test]
    fn window_is_symmetric_and_bounded_below(lines in sentences(), s in 1usize..6) {
        let cfg = WindowConfig { window: s, symmetric: true };
        let m = build_window_cooc(lines.iter().map(Vec::as_slice), 12, &cfg).unwrap();
        for r in m.iter() {
            prop_assert_eq!(m.get(r.j, r.i), Some(r.x));
            prop_assert!(r.x >= 1.0 / s as f64);
        }
    }

    #[test]
    fn doubled_corpus_doubles_window_counts(lines in sentences(), s in 1usize..6) {
        let cfg = WindowConfig { window: s, symmetric: true };
        let once = build_window_cooc(lines.iter().map(Vec::as_slice), 12, &cfg).unwrap();
        let twice = build_window_cooc(lines.iter().chain(&lines).map(Vec::as_slice), 12, &cfg).unwrap();
        prop_assert_eq!(once.len(), twice.len());
        for r in once.iter() {
            prop_assert_eq!(twice.get(r.i, r.j), Some(2.0 * r.x));
        }
    }

    #[test]
    fn word_attention_matches_quadruple_loop(rec in san_record(), window in 1usize..4) {
        let owner: Vec<usize> = rec
            .subword_counts
            .iter()
            .enumerate()
            .flat_map(|(w, &c)| std::iter::repeat_n(w, c as usize))
            .collect();
        let l = rec.n_bpe();
        let rows = san::bpe_to_word_attention(&rec, window);
        for (i, row) in rows.iter().enumerate() {
            let expected: Vec<usize> = (0..rec.n_words())
                .filter(|&j| j != i && i.abs_diff(j) <= window)
                .collect();
            prop_assert_eq!(row.iter().map(|p| p.0).collect::<Vec<_>>(), expected);
            for &(j, got) in row {
                let mut sum = 0.0;
                for k in 0..l {
                    for m in 0..l {
                        if owner[k] == i && owner[m] == j {
                            sum += f64::from(rec.attn[k * l + m]);
                        }
                    }
                }
                let m_sub = rec.subword_counts[i] as f64;
                let n_sub = rec.subword_counts[j] as f64;
                let want = sum / (m_sub * n_sub);
                prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn division_selection_is_scale_invariant(
        scores in prop::collection::vec(1e-3f64..100.0, 1..10),
        exp in -20i32..20,
        top in 1usize..10,
    ) {
        let cfg = SanConfig { window: 5, select_top: top, distance: Distance::Division };
        let cands = |c: f64| -> Vec<Candidate> {
            scores
                .iter()
                .enumerate()
                .map(|(k, &s)| Candidate { word: k as u32 + 1, offset: 1 + k % 5, score: s * c })
                .collect()
        };
        let base = san::select_and_weight(0, cands(1.0), &cfg);
        let scaled = san::select_and_weight(0, cands(2f64.powi(exp)), &cfg);
        prop_assert_eq!(&base, &scaled);
        prop_assert_eq!(base.context[0].1, 1.0);
        prop_assert!(base.context.iter().all(|&(_, w)| w > 0.0 && w <= 1.0));
    }

    #[test]
    fn mlm_division_is_ratio_invariant(
        mut logits in prop::collection::vec(0.01f32..50.0, 1..12),
        exp in -10i32..10,
        source in 0u32..15,
    ) {
        logits.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let preds = |c: f32| -> Vec<Prediction> {
            logits.iter().enumerate().map(|(k, &g)| Prediction { token: k as u32, logit: g * c }).collect()
        };
        let cfg = MlmConfig { top_tokens: logits.len(), distance: Distance::Division };
        let base = mlm::position_weights(source, &preds(1.0), &cfg);
        let scaled = mlm::position_weights(source, &preds(2f32.powi(exp)), &cfg);
        prop_assert_eq!(&base, &scaled);
        if let Some(first) = base.first() {
            prop_assert_eq!(first.1, 1.0);
        }
        prop_assert!(base.iter().all(|&(t, w)| t != source && w > 0.0 && w <= 1.0));
    }
}

#[test]
fn uniform_attention_with_full_selection_counts_unweighted() {
    let n = 7;
    let rec = SanRecord {
        subword_counts: vec![1; n],
        bpe_ids: (0..n as u32).collect(),
        attn: vec![1.0 / n as f32; n * n],
    };
    let ids: Vec<Option<u32>> = (0..n as u32).map(Some).collect();
    let cfg = SanConfig {
        window: 2,
        select_top: 4,
        distance: Distance::Division,
    };
    let m = san::build_san_cooc([(&rec, ids.as_slice())], n, &cfg).unwrap();
    for r in m.iter() {
        assert_eq!(r.x, 1.0);
        assert!(r.i.abs_diff(r.j) <= 2);
    }
    // every in-window ordered pair is present exactly once
    let expected: usize = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && i.abs_diff(j) <= 2).count())
        .sum();
    assert_eq!(m.len(), expected);
}

fn dense_word_oracle(dense: &[[f64; 20]; 20], pieces: &[Vec<u32>]) -> HashMap<(u32, u32), f64> {
    let mut out = HashMap::new();
    for (i, pi) in pieces.iter().enumerate() {
        for (j, pj) in pieces.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut sum = 0.0;
            for &a in pi {
                for &b in pj {
                    sum += dense[a as usize][b as usize];
                }
            }
            if sum > 0.0 {
                out.insert((i as u32, j as u32), sum / (pi.len() * pj.len()) as f64);
            }
        }
    }
    out
}

type BpeCase = (Vec<(u32, u32, f64)>, Vec<Vec<u32>>);

fn bpe_case() -> impl Strategy<Value = BpeCase> {
    (
        prop::collection::vec((0u32..20, 0u32..20, 0.01f64..5.0), 0..40),
        prop::collection::vec(prop::collection::vec(0u32..20, 1..4), 1..9),
    )
}

fn lexicon_for(pieces: &[Vec<u32>]) -> (Vocabulary, SubwordLexicon) {
    let vocab = Vocabulary::from_entries((0..pieces.len()).map(|k| (format!("w{k}"), 1)));
    let mut lex = SubwordLexicon::new();
    for (k, p) in pieces.iter().enumerate() {
        lex.insert(format!("w{k}"), p.clone()).unwrap();
    }
    (vocab, lex)
}

fn bpe_matrix(entries: &[(u32, u32, f64)]) -> (BpeCoocMatrix, [[f64; 20]; 20]) {
    let mut m = BpeCoocMatrix::new();
    let mut dense = [[0.0; 20]; 20];
    for &(s, t, v) in entries {
        if s != t {
            m.accumulate(s, t, v).unwrap();
            dense[s as usize][t as usize] += v;
        }
    }
    (m, dense)
}

proptest! {
    #[test]
    fn word_averaging_matches_dense_oracle((entries, pieces) in bpe_case()) {
        let (m, dense) = bpe_matrix(&entries);
        let (vocab, lex) = lexicon_for(&pieces);
        let got = as_map(&mlm::bpe_to_word_cooc(&m, &vocab, &lex).unwrap());
        let want = dense_word_oracle(&dense, &pieces);
        prop_assert_eq!(got.len(), want.len());
        for (k, w) in want {
            let g = got[&k];
            prop_assert!((g - w).abs() <= 1e-9 * w);
        }
    }

    #[test]
    fn word_averaging_is_linear((a, pieces) in bpe_case(), b in prop::collection::vec((0u32..20, 0u32..20, 0.01f64..5.0), 0..40)) {
        let (ma, _) = bpe_matrix(&a);
        let (mb, _) = bpe_matrix(&b);
        let mut sum = ma.clone();
        sum.merge(mb.clone());
        let (vocab, lex) = lexicon_for(&pieces);
        let xa = mlm::bpe_to_word_cooc(&ma, &vocab, &lex).unwrap();
        let mut xb = mlm::bpe_to_word_cooc(&mb, &vocab, &lex).unwrap();
        let xs = mlm::bpe_to_word_cooc(&sum, &vocab, &lex).unwrap();
        xb.merge(xa);
        prop_assert_eq!(xs.len(), xb.len());
        for r in xs.iter() {
            let other = xb.get(r.i, r.j).unwrap();
            prop_assert!((r.x - other).abs() <= 1e-9 * r.x);
        }
    }
}

#[test]
fn doubled_mlm_dump_doubles_both_matrices() {
    let p = |token, logit| Prediction { token, logit };
    let rec = MlmRecord {
        subword_counts: vec![2, 1],
        bpe_ids: vec![1, 2, 3],
        predictions: vec![
            p(1, 9.0),
            p(4, 6.0),
            p(3, 3.0),
            p(5, 4.0),
            p(2, 3.0),
            p(1, 1.0),
            p(4, 5.0),
            p(3, 2.5),
            p(2, 0.5),
        ],
    };
    let cfg = MlmConfig {
        top_tokens: 3,
        distance: Distance::Division,
    };
    let mut once = BpeCoocMatrix::new();
    mlm::accumulate_bpe_cooc(&rec, 3, &cfg, &mut once).unwrap();
    let mut twice = once.clone();
    mlm::accumulate_bpe_cooc(&rec, 3, &cfg, &mut twice).unwrap();
    for (s, t, v) in once.iter() {
        assert_eq!(twice.get(s, t), Some(2.0 * v));
    }

    let mut lex = SubwordLexicon::new();
    lex.insert("a", vec![1, 2]).unwrap();
    lex.insert("b", vec![3]).unwrap();
    lex.insert("c", vec![4]).unwrap();
    lex.insert("d", vec![5]).unwrap();
    let vocab = Vocabulary::from_entries([("a", 1), ("b", 1), ("c", 1), ("d", 1)]);
    let x1 = mlm::build_mlm_cooc([&rec], 3, &vocab, &lex, &cfg).unwrap();
    let x2 = mlm::build_mlm_cooc([&rec, &rec], 3, &vocab, &lex, &cfg).unwrap();
    assert!(!x1.is_empty());
    for r in x1.iter() {
        assert_eq!(x2.get(r.i, r.j), Some(2.0 * r.x));
    }
    assert!(mlm::build_mlm_cooc(std::iter::empty(), 3, &vocab, &lex, &cfg)
        .unwrap()
        .is_empty());
}

//! Acceptance suite: one test per criterion, each printing a `[PASS]` line
//! (visible with `cargo test --test acceptance -- --nocapture`). Tolerances
//! and runtime budgets are pinned in the assertions.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use rolekit_core::corpus::{
    generate_synthetic, mention_statistics, preprocess, AnnotatedCorpus, Document,
    PreprocessConfig, Stemmer, SyntheticSpec, Token,
};
use rolekit_core::embeddings::sgns::{pair_gradient, pair_loss};
use rolekit_core::embeddings::TrainConfig;
use rolekit_core::phrases::{collocation_scores, merge_phrases, PhraseConfig};
use rolekit_core::pipeline::{
    run_ingest, run_ranking_on, run_stats, run_synth, run_tagging, CorpusFormat, PipelineConfig,
    TaggingSettings,
};
use rolekit_core::ranking::{
    average_precision_at_k, group_average_similarity, map_curve, RankedList, VectorSet,
};
use rolekit_core::representations::{unit_normalize, ContextLevel};
use rolekit_core::taggers::{crf_decode, hmm_train, viterbi_decode, CrfModel, Sequence};

fn random_unit_set(rng: &mut ChaCha20Rng, n: usize, dim: usize) -> VectorSet {
    let vectors = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            unit_normalize(&v).expect("non-zero with probability 1")
        })
        .collect();
    VectorSet::new(vectors).unwrap()
}

#[test]
fn criterion_1_group_average_similarity_matches_brute_force() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACCE97);
    for _ in 0..10_000 {
        let ne = rng.gen_range(1..=20);
        let nt = rng.gen_range(1..=20);
        let e = random_unit_set(&mut rng, ne, 16);
        let t = random_unit_set(&mut rng, nt, 16);
        let fast = group_average_similarity(&e, &t);
        // Brute force: mean cosine over all distinct pairs of the union.
        let all: Vec<&Vec<f64>> = e.vectors().iter().chain(t.vectors()).collect();
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                sum += all[i].iter().zip(all[j]).map(|(a, b)| a * b).sum::<f64>();
                pairs += 1;
            }
        }
        let slow = sum / pairs as f64;
        assert!((fast - slow).abs() < 1e-9, "group-average {fast} vs brute {slow}");
    }
    // Singleton-singleton case degenerates to plain cosine.
    for _ in 0..1_000 {
        let e = random_unit_set(&mut rng, 1, 16);
        let t = random_unit_set(&mut rng, 1, 16);
        let cos: f64 = e.vectors()[0].iter().zip(&t.vectors()[0]).map(|(a, b)| a * b).sum();
        assert!((group_average_similarity(&e, &t) - cos).abs() < 1e-12);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10s");
    println!(
        "[PASS] criterion 1: group-average similarity matches brute-force pairwise mean \
         (10000 set pairs, 1e-9; singleton=cosine, 1e-12) in {elapsed:?}"
    );
}

/// Central finite differences for one scalar-valued function of a vector.
fn max_rel_err_fd(
    point: &[f64],
    analytic: &[f64],
    f: &dyn Fn(&[f64]) -> f64,
) -> f64 {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..point.len() {
        let mut plus = point.to_vec();
        let mut minus = point.to_vec();
        plus[i] += h;
        minus[i] -= h;
        let fd = (f(&plus) - f(&minus)) / (2.0 * h);
        let denom = fd.abs().max(analytic[i].abs()).max(1e-8);
        worst = worst.max(((fd - analytic[i]) / denom).abs());
    }
    worst
}

#[test]
fn criterion_2_gradients_match_finite_differences() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACCE98);
    for dim in [8usize, 16] {
        // Skip-gram pair objective: all three gradient blocks.
        for _ in 0..30 {
            let rand_vec = |rng: &mut ChaCha20Rng| -> Vec<f64> {
                (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            let center = rand_vec(&mut rng);
            let output = rand_vec(&mut rng);
            let negs: Vec<Vec<f64>> = (0..5).map(|_| rand_vec(&mut rng)).collect();
            let neg_refs: Vec<&[f64]> = negs.iter().map(|v| v.as_slice()).collect();
            let grad = pair_gradient(&center, &output, &neg_refs);
            let worst = max_rel_err_fd(&center, &grad.center, &|c| {
                pair_loss(c, &output, &neg_refs)
            })
            .max(max_rel_err_fd(&output, &grad.output, &|o| {
                pair_loss(&center, o, &neg_refs)
            }));
            assert!(worst < 1e-4, "skip-gram gradient rel err {worst} at D={dim}");
            for (k, gneg) in grad.negatives.iter().enumerate() {
                let worst = max_rel_err_fd(&negs[k], gneg, &|n| {
                    let mut swapped = neg_refs.clone();
                    swapped[k] = n;
                    pair_loss(&center, &output, &swapped)
                });
                assert!(worst < 1e-4, "negative gradient rel err {worst} at D={dim}");
            }
        }
        // Document-vector inference objective: gradient w.r.t. the doc
        // vector with word tables frozen, exactly what inference applies.
        for _ in 0..10 {
            let rand_vec = |rng: &mut ChaCha20Rng| -> Vec<f64> {
                (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            let doc = rand_vec(&mut rng);
            let targets: Vec<Vec<f64>> = (0..4).map(|_| rand_vec(&mut rng)).collect();
            let negs: Vec<Vec<Vec<f64>>> = (0..4)
                .map(|_| (0..5).map(|_| rand_vec(&mut rng)).collect())
                .collect();
            let loss = |d: &[f64]| -> f64 {
                targets
                    .iter()
                    .zip(&negs)
                    .map(|(t, ns)| {
                        let refs: Vec<&[f64]> = ns.iter().map(|v| v.as_slice()).collect();
                        pair_loss(d, t, &refs)
                    })
                    .sum()
            };
            let mut analytic = vec![0.0; dim];
            for (t, ns) in targets.iter().zip(&negs) {
                let refs: Vec<&[f64]> = ns.iter().map(|v| v.as_slice()).collect();
                let g = pair_gradient(&doc, t, &refs);
                for (a, gi) in analytic.iter_mut().zip(&g.center) {
                    *a += gi;
                }
            }
            let worst = max_rel_err_fd(&doc, &analytic, &loss);
            assert!(worst < 1e-4, "doc-vector gradient rel err {worst} at D={dim}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30s");
    println!(
        "[PASS] criterion 2: skip-gram and doc-vector inference gradients match central \
         finite differences (h=1e-5, rel err < 1e-4, D in {{8,16}}) in {elapsed:?}"
    );
}

fn random_tagged_sequences(
    rng: &mut ChaCha20Rng,
    n_tags: usize,
    count: usize,
    max_len: usize,
) -> Vec<Sequence> {
    let tags = ["A", "B", "C", "D"];
    let words = ["Blast", "police", "ISRO", "at", "Mr"];
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            let mut tokens = Vec::with_capacity(len);
            let mut ts = Vec::with_capacity(len);
            for _ in 0..len {
                tokens.push(words[rng.gen_range(0..words.len())].to_string());
                ts.push(tags[rng.gen_range(0..n_tags)].to_string());
            }
            Sequence { tokens, tags: ts }
        })
        .collect()
}

/// Odometer over all tag assignments of the given length.
fn for_each_assignment(len: usize, n_tags: usize, mut f: impl FnMut(&[usize])) {
    let mut assignment = vec![0usize; len];
    loop {
        f(&assignment);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < n_tags {
                break;
            }
            assignment[pos] = 0;
        }
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[test]
fn criterion_3_crf_against_exhaustive_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACCE99);
    for round in 0..200 {
        let n_tags = rng.gen_range(2..=4);
        let data = random_tagged_sequences(&mut rng, n_tags, 6, 6);
        let mut model = CrfModel::build_untrained(&data, 0.0).unwrap();
        let weights: Vec<f64> = (0..model.n_parameters())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        model.set_weights(weights);
        let len = rng.gen_range(1..=6);
        let tokens: Vec<String> = (0..len)
            .map(|_| ["Blast", "police", "at"][rng.gen_range(0..3)].to_string())
            .collect();
        let features = model.featurize(&tokens);
        let t = model.tags().len();

        // Forward log-normalizer vs exhaustive log-sum.
        let mut scores = Vec::new();
        for_each_assignment(len, t, |a| scores.push(model.sequence_score(&features, a)));
        let brute_z = log_sum_exp(&scores);
        let fast_z = model.log_normalizer(&features);
        assert!(
            (brute_z - fast_z).abs() < 1e-8,
            "round {round}: logZ {fast_z} vs exhaustive {brute_z}"
        );

        // Viterbi vs exhaustive argmax (tie set within 1e-9).
        let decoded = crf_decode(&model, &tokens);
        let decoded_ids: Vec<usize> = decoded
            .iter()
            .map(|x| model.tags().iter().position(|y| y == x).unwrap())
            .collect();
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let decoded_score = model.sequence_score(&features, &decoded_ids);
        assert!(
            decoded_score >= best - 1e-9,
            "round {round}: decoded score {decoded_score} below exhaustive max {best}"
        );
    }
    // Gradient vs central finite differences on 3-token, 3-tag instances.
    for _ in 0..5 {
        use rand::seq::SliceRandom;
        let mut tags = ["A", "B", "C"];
        tags.shuffle(&mut rng);
        let data = vec![Sequence {
            tokens: vec!["Blast".into(), "at".into(), "ISRO".into()],
            tags: tags.iter().map(|s| s.to_string()).collect(),
        }];
        let mut model = CrfModel::build_untrained(&data, 0.1).unwrap();
        let weights: Vec<f64> = (0..model.n_parameters())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        model.set_weights(weights);
        let instances: Vec<_> = data.iter().map(|s| model.instance(s).unwrap()).collect();
        let (_, grad) = model.objective_and_gradient(&instances);
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for p in 0..model.n_parameters() {
            let eval = |delta: f64| -> f64 {
                let mut m = model.clone();
                let mut w = m.weights().to_vec();
                w[p] += delta;
                m.set_weights(w);
                m.objective_and_gradient(&instances).0
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let denom = fd.abs().max(grad[p].abs()).max(1e-8);
            worst = worst.max(((fd - grad[p]) / denom).abs());
        }
        assert!(worst < 1e-4, "crf gradient rel err {worst}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60s");
    println!(
        "[PASS] criterion 3: CRF log-normalizer matches exhaustive enumeration (1e-8), \
         Viterbi matches exhaustive argmax, gradient FD < 1e-4 (200 random models) in {elapsed:?}"
    );
}

#[test]
fn criterion_4_hmm_against_exhaustive_argmax() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACCE9A);
    for round in 0..200 {
        let n_tags = rng.gen_range(2..=4);
        let data = random_tagged_sequences(&mut rng, n_tags, 10, 6);
        let model = hmm_train(&data, 0.2, 0.2).unwrap();
        let t = model.tags().len();

        // Smoothed conditionals normalize.
        let sum_init: f64 = (0..t).map(|i| model.log_initial(i).exp()).sum();
        assert!((sum_init - 1.0).abs() < 1e-9);
        for from in 0..t {
            let sum: f64 = (0..t).map(|to| model.log_transition(from, to).exp()).sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }

        let len = rng.gen_range(1..=6);
        let tokens: Vec<String> = (0..len)
            .map(|_| ["Blast", "police", "ISRO", "at", "Mr"][rng.gen_range(0..5)].to_string())
            .collect();
        let decoded = viterbi_decode(&model, &tokens);
        let decoded_ids: Vec<usize> = decoded
            .iter()
            .map(|x| model.tags().iter().position(|y| y == x).unwrap())
            .collect();
        let mut best = f64::NEG_INFINITY;
        for_each_assignment(len, t, |a| {
            best = best.max(model.sequence_log_prob(&tokens, a));
        });
        let decoded_score = model.sequence_log_prob(&tokens, &decoded_ids);
        assert!(
            decoded_score >= best - 1e-9,
            "round {round}: viterbi {decoded_score} below exhaustive max {best}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 4: HMM Viterbi matches exhaustive argmax and smoothed \
         distributions normalize within 1e-9 (200 random models) in {elapsed:?}"
    );
}

/// Independent mean-average-precision implementation, written with explicit
/// per-rank recounting rather than running sums.
mod naive_metric {
    pub fn precision_at(relevance: &[bool], i: usize) -> f64 {
        let hits = relevance.iter().take(i).filter(|x| **x).count();
        hits as f64 / i as f64
    }

    pub fn ap_at_k(relevance: &[bool], k: usize) -> Option<f64> {
        let total: usize = relevance.iter().filter(|x| **x).count();
        if total == 0 {
            return None;
        }
        let mut sum = 0.0;
        for i in 1..=k {
            if i <= relevance.len() && relevance[i - 1] {
                sum += precision_at(relevance, i);
            }
        }
        Some(sum / std::cmp::min(k, total) as f64)
    }

    pub fn map_at_k(queries: &[Vec<bool>], k: usize) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for q in queries {
            if let Some(ap) = ap_at_k(q, k) {
                sum += ap;
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }
}

fn list_from_relevance(relevance: &[bool]) -> RankedList {
    use rolekit_core::ranking::RankedItem;
    RankedList {
        document_id: "d".into(),
        role: rolekit_core::RoleLabel::PerVictim,
        items: relevance
            .iter()
            .enumerate()
            .map(|(i, &relevant)| RankedItem {
                entity_key: format!("e{i}"),
                mention_index: i,
                score: -(i as f64),
                rankable: true,
                relevant,
            })
            .collect(),
    }
}

#[test]
fn criterion_5_map_matches_naive_implementation_and_curve_shape() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACCE9B);

    // Exact agreement with the independent implementation on 1000 fixtures.
    for _ in 0..1000 {
        let n_queries = rng.gen_range(1..6);
        let fixtures: Vec<Vec<bool>> = (0..n_queries)
            .map(|_| {
                let len = rng.gen_range(1..20);
                (0..len).map(|_| rng.gen_bool(0.35)).collect()
            })
            .collect();
        let k = rng.gen_range(1..=10);
        let lists: Vec<RankedList> = fixtures
            .iter()
            .map(|f| list_from_relevance(f))
            .collect();
        let ours = map_curve(&lists, k).ok().map(|c| *c.points.last().unwrap());
        let naive = naive_metric::map_at_k(&fixtures, k);
        assert_eq!(ours, naive, "mAP@{k} disagrees on {fixtures:?}");
        for f in &fixtures {
            assert_eq!(
                average_precision_at_k(f, k),
                naive_metric::ap_at_k(f, k),
                "AP@{k} disagrees on {f:?}"
            );
        }
    }

    // Provable saturation: past the last relevant rank the curve is flat.
    for _ in 0..200 {
        let len = rng.gen_range(1..12);
        let rel: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.4)).collect();
        if !rel.iter().any(|x| *x) {
            continue;
        }
        let last_rel = rel.iter().rposition(|x| *x).unwrap() + 1;
        let curve = map_curve(&[list_from_relevance(&rel)], len + 4).unwrap();
        for k in last_rel..curve.points.len() {
            assert_eq!(curve.points[k], curve.points[last_rel - 1]);
        }
    }

    // Fig-1 shape on planted ground truth: with zero noise and fully
    // informative windows the ranker is perfect, so the curve is
    // non-decreasing and already saturated at K >= max relevant count.
    let spec = SyntheticSpec {
        documents: 100,
        cue_noise_rate: 0.0,
        multi_mention_rate: 0.0,
        majority_share_rate: 1.0,
        first_mention_majority_rate: 1.0,
        filler_per_side: 0,
        ..SyntheticSpec::default()
    };
    let (corpus, _) = generate_synthetic(45, &spec).unwrap();
    let mut cfg = e2e_config(7);
    cfg.embedding.epochs = 12;
    let outcome = run_ranking_on(&corpus, &cfg, None).unwrap();
    let curve = &outcome.report.map;
    assert!(
        (curve[0] - 1.0).abs() < 1e-12,
        "zero-noise planted corpus must give mAP@1 = 1.0, got {}",
        curve[0]
    );
    for w in curve.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "curve decreased: {curve:?}");
    }
    let max_relevant = outcome
        .report
        .per_query
        .iter()
        .map(|q| q.relevant)
        .max()
        .unwrap();
    for k in max_relevant..curve.len() {
        assert!(
            (curve[k] - curve[max_relevant - 1]).abs() < 1e-12,
            "curve not saturated past K={max_relevant}: {curve:?}"
        );
    }

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 5: mAP@K equals the independent naive implementation exactly \
         (1000 fixtures); K-curve non-decreasing and saturated at K >= max relevant count \
         on planted ground truth in {elapsed:?}"
    );
}

#[test]
fn criterion_6_planted_collocations_and_merge_round_trip() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACCE9C);

    // 5000 background bigrams over a 60-token pool plus 20 planted pairs
    // whose components only ever occur together.
    let mut sentences: Vec<Vec<String>> = Vec::new();
    for _ in 0..5000 {
        sentences.push(vec![
            format!("bg{}", rng.gen_range(0..60)),
            format!("bg{}", rng.gen_range(0..60)),
        ]);
    }
    let planted: Vec<(String, String)> = (0..20)
        .map(|i| (format!("left{i}"), format!("right{i}")))
        .collect();
    for (a, b) in &planted {
        for _ in 0..40 {
            sentences.push(vec![a.clone(), b.clone()]);
        }
    }
    let cfg = PhraseConfig {
        delta: 1.0,
        threshold: 0.0,
        ..PhraseConfig::default()
    };
    let table = collocation_scores(&sentences, &cfg).unwrap();
    let min_planted = planted
        .iter()
        .map(|(a, b)| table.get(a, b).expect("planted pair missing").score)
        .fold(f64::INFINITY, f64::min);
    let mut max_background = f64::NEG_INFINITY;
    for ((a, b), entry) in table.iter() {
        if !planted.iter().any(|(x, y)| x == a && y == b) {
            max_background = max_background.max(entry.score);
        }
    }
    assert!(
        min_planted > max_background,
        "planted min {min_planted} does not beat background max {max_background}"
    );

    // Merge round trip: underscore-splitting the rewritten corpus restores
    // the original token sequence.
    let doc = Document {
        id: "d".into(),
        sentences: sentences
            .iter()
            .map(|s| s.iter().map(Token::new).collect())
            .collect(),
        mentions: vec![],
    };
    let corpus = AnnotatedCorpus::new(vec![doc]).unwrap();
    let corpus = preprocess(
        &corpus,
        &PreprocessConfig::new(Vec::<String>::new(), Stemmer::None, false),
    );
    let merged = merge_phrases(&corpus, &table, 1);
    let mut merged_any = false;
    for (orig, new) in corpus.documents()[0]
        .sentences
        .iter()
        .zip(&merged.documents()[0].sentences)
    {
        merged_any |= new.len() < orig.len();
        let split: Vec<&str> = new.iter().flat_map(|t| t.surface.split('_')).collect();
        let original: Vec<&str> = orig.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(split, original);
    }
    assert!(merged_any, "no merges happened at all");

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 6: all 20 planted collocations outscore every background bigram; \
         merged corpus splits back to the original tokens in {elapsed:?}"
    );
}

fn e2e_config(seed: u64) -> PipelineConfig {
    PipelineConfig {
        embedding: TrainConfig {
            dim: 48,
            window_radius: 5,
            negative_samples: 5,
            epochs: 8,
            learning_rate: 0.05,
            subsample_threshold: 0.0,
            min_count: 1,
            seed,
            threads: 1,
            ..TrainConfig::default()
        },
        ..PipelineConfig::default()
    }
    .with_seed(seed)
}

#[test]
fn criterion_7_end_to_end_synthetic_ranking() {
    let start = Instant::now();
    let spec = SyntheticSpec {
        documents: 200,
        entities_per_document: 6,
        multi_mention_rate: 0.23,
        cue_noise_rate: 0.10,
        ..SyntheticSpec::default()
    };
    let (corpus, _) = generate_synthetic(42, &spec).unwrap();
    let outcome = run_ranking_on(&corpus, &e2e_config(7), None).unwrap();
    let map1 = outcome.report.map[0];
    assert!(map1 >= 0.9, "centroid+TV mAP@1 = {map1}, need >= 0.9");

    // Random-ranking baseline: the chance the top entity is relevant is
    // R/n per query.
    let baseline: f64 = {
        let included: Vec<&rolekit_core::ranking::QueryResult> = outcome
            .report
            .per_query
            .iter()
            .filter(|q| q.ap.is_some())
            .collect();
        included
            .iter()
            .map(|q| q.relevant as f64 / q.entities as f64)
            .sum::<f64>()
            / included.len() as f64
    };
    assert!(
        map1 >= 3.0 * baseline,
        "mAP@1 {map1} does not exceed 3x random baseline {baseline}"
    );

    // Document-level context must not trail sentence-level when only first
    // mentions carry cues.
    let spec_first_only = SyntheticSpec {
        cue_on_first_mention_only: true,
        ..spec
    };
    let (corpus_b, _) = generate_synthetic(43, &spec_first_only).unwrap();
    let mut cfg = e2e_config(7);
    cfg.compare_contexts = vec![ContextLevel::Sentence, ContextLevel::Document];
    let outcome_b = run_ranking_on(&corpus_b, &cfg, None).unwrap();
    let get = |name: &str| -> f64 {
        outcome_b
            .comparisons
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, curve)| curve[0])
            .expect("comparison row")
    };
    let sent = get("sentence");
    let doc = get("document");
    assert!(
        doc >= sent,
        "document-level mAP@1 {doc} trails sentence-level {sent}"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, budget 120s");
    println!(
        "[PASS] criterion 7: end-to-end centroid+TV mAP@1 = {map1:.4} (>= 0.9, \
         baseline {baseline:.4}); document-level mAP@1 {doc:.4} >= sentence-level \
         {sent:.4} in {elapsed:?}"
    );
}

#[test]
fn criterion_8_statistics_recover_planted_rates() {
    let start = Instant::now();
    // 3600 entities at the planted rates; the tolerances are stated for
    // corpora of at least 1000 entities.
    let spec = SyntheticSpec {
        documents: 600,
        entities_per_document: 6,
        multi_mention_rate: 0.23,
        majority_share_rate: 0.8367,
        first_mention_majority_rate: 0.98,
        ..SyntheticSpec::default()
    };
    let (corpus, truth) = generate_synthetic(11, &spec).unwrap();
    assert!(truth.entity_count >= 1000);
    let report = mention_statistics(&corpus);
    let multi = report.multi_mention_fraction;
    assert!((multi - 0.23).abs() <= 0.02, "multi-mention {multi} vs 0.23 +- 0.02");
    let share = report.majority_share_multi.unwrap();
    assert!((share - 0.8367).abs() <= 0.01, "majority share {share} vs 0.8367 +- 0.01");
    let first = report.first_mention_majority_multi.unwrap();
    assert!((first - 0.98).abs() <= 0.01, "first-mention {first} vs 0.98 +- 0.01");

    // The report must agree exactly with the generator's own bookkeeping.
    assert!((multi - truth.multi_mention_fraction).abs() < 1e-12);
    assert!((share - truth.majority_share_multi.unwrap()).abs() < 1e-12);
    assert!((first - truth.first_mention_majority_multi.unwrap()).abs() < 1e-12);

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 8: mention statistics recover planted rates \
         (multi {multi:.4}~0.23, majority {share:.4}~0.8367, first {first:.4}~0.98) in {elapsed:?}"
    );
}

fn dir_snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

fn assert_dirs_identical(a: &std::path::Path, b: &std::path::Path, what: &str) {
    let fa = dir_snapshot(a);
    let fb = dir_snapshot(b);
    let names_a: Vec<&String> = fa.iter().map(|(n, _)| n).collect();
    let names_b: Vec<&String> = fb.iter().map(|(n, _)| n).collect();
    assert_eq!(names_a, names_b, "{what}: file sets differ");
    for ((name, bytes_a), (_, bytes_b)) in fa.iter().zip(&fb) {
        assert_eq!(bytes_a, bytes_b, "{what}: {name} differs between reruns");
    }
    assert!(!fa.is_empty(), "{what}: no outputs written");
}

#[test]
fn criterion_9_deterministic_reruns_are_byte_identical() {
    let start = Instant::now();
    let root = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        documents: 40,
        ..SyntheticSpec::default()
    };

    // synth
    let synth_a = root.path().join("synth_a");
    let synth_b = root.path().join("synth_b");
    run_synth(&spec, 5, &synth_a).unwrap();
    run_synth(&spec, 5, &synth_b).unwrap();
    assert_dirs_identical(&synth_a, &synth_b, "synth");
    let corpus_path = synth_a.join("corpus.jsonl");

    // ingest (including jsonl -> column conversion)
    let ingest_a = root.path().join("ingest_a");
    let ingest_b = root.path().join("ingest_b");
    run_ingest(&corpus_path, CorpusFormat::Jsonl, CorpusFormat::Column, &ingest_a).unwrap();
    run_ingest(&corpus_path, CorpusFormat::Jsonl, CorpusFormat::Column, &ingest_b).unwrap();
    assert_dirs_identical(&ingest_a, &ingest_b, "ingest");

    // stats
    let stats_a = root.path().join("stats_a");
    let stats_b = root.path().join("stats_b");
    run_stats(&corpus_path, CorpusFormat::Jsonl, &stats_a).unwrap();
    run_stats(&corpus_path, CorpusFormat::Jsonl, &stats_b).unwrap();
    assert_dirs_identical(&stats_a, &stats_b, "stats");

    // full ranking pipeline (embed, phrases, role vectors, represent, rank)
    let mut cfg = e2e_config(3);
    cfg.corpus = corpus_path.clone();
    cfg.embedding.epochs = 3;
    cfg.embedding.dim = 24;
    cfg.phrases.mode = rolekit_core::pipeline::PhraseMode::Collocation;
    cfg.phrases.delta = 1.0;
    cfg.phrases.threshold = 0.0;
    cfg.compare_representations = vec![
        rolekit_core::representations::ReprKind::Cluster,
        rolekit_core::representations::ReprKind::Centroid,
        rolekit_core::representations::ReprKind::Docvec,
    ];
    let (corpus, _) = generate_synthetic(5, &spec).unwrap();
    let rank_a = root.path().join("rank_a");
    let rank_b = root.path().join("rank_b");
    run_ranking_on(&corpus, &cfg, Some(&rank_a)).unwrap();
    run_ranking_on(&corpus, &cfg, Some(&rank_b)).unwrap();
    assert_dirs_identical(&rank_a, &rank_b, "ranking");
    // Method enumeration yields one comparison row per representation kind.
    let comparison =
        std::fs::read_to_string(rank_a.join("representation_comparison.csv")).unwrap();
    let lines: Vec<&str> = comparison.lines().collect();
    assert_eq!(lines.len(), 4, "header + 3 method rows: {comparison}");
    assert!(lines[1].starts_with("cluster-d5,"));
    assert!(lines[2].starts_with("centroid-d5,"));
    assert!(lines[3].starts_with("docvec-d5,"));

    // tagging
    let (train, _) = generate_synthetic(6, &spec).unwrap();
    let (test, _) = generate_synthetic(
        7,
        &SyntheticSpec {
            documents: 10,
            ..spec
        },
    )
    .unwrap();
    let train_path = root.path().join("train.column");
    let test_path = root.path().join("test.column");
    rolekit_core::corpus::save_column(&train, &train_path).unwrap();
    rolekit_core::corpus::save_column(&test, &test_path).unwrap();
    let tag_cfg = PipelineConfig {
        tagging: TaggingSettings {
            train: Some(train_path),
            test: Some(test_path),
            crf: rolekit_core::taggers::CrfTrainConfig {
                epochs: 8,
                ..Default::default()
            },
            ..TaggingSettings::default()
        },
        ..PipelineConfig::default()
    };
    let tag_a = root.path().join("tag_a");
    let tag_b = root.path().join("tag_b");
    run_tagging(&tag_cfg, Some(&tag_a)).unwrap();
    run_tagging(&tag_cfg, Some(&tag_b)).unwrap();
    assert_dirs_identical(&tag_a, &tag_b, "tagging");

    let elapsed = start.elapsed();
    println!(
        "[PASS] criterion 9: synth, ingest, stats, ranking and tagging reruns are \
         byte-identical in deterministic mode in {elapsed:?}"
    );
}

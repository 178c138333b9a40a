use kgexplain_core::rouge::{rouge_l, rouge_lsum, rouge_n, score_all, RougeError, RougeScore};
use kgexplain_oracles::fixtures::{rouge_score_pairs, FrozenScore};
use kgexplain_oracles::rouge as brute;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn close(ours: RougeScore, recall: f64, precision: f64, f1: f64) -> bool {
    (ours.recall - recall).abs() <= TOL && (ours.precision - precision).abs() <= TOL && (ours.f1 - f1).abs() <= TOL
}

fn against_brute(ours: RougeScore, o: brute::Prf) -> bool {
    close(ours, o.recall, o.precision, o.f1)
}

fn against_frozen(ours: RougeScore, o: FrozenScore) -> bool {
    close(ours, o.recall, o.precision, o.f1)
}

fn random_text(rng: &mut ChaCha8Rng, min_tokens: usize) -> String {
    const VOCAB: [&str; 8] = ["the", "cat", "sat", "on", "mat", "dog", "ran", "far"];
    loop {
        let sentences: Vec<String> = (0..rng.random_range(1..=3))
            .map(|_| {
                (0..rng.random_range(1..=5))
                    .map(|_| VOCAB[rng.random_range(0..VOCAB.len())])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let text = sentences.join("\n");
        if text.split_whitespace().count() >= min_tokens {
            return text;
        }
    }
}

#[test]
fn pinned_examples() {
    let r1 = rouge_n("the cat sat on the mat", "the cat sat", 1).unwrap();
    assert!(close(r1, 0.5, 1.0, 2.0 / 3.0));
    let r2 = rouge_n("the cat sat on the mat", "the cat sat", 2).unwrap();
    assert!(close(r2, 0.4, 1.0, 0.5714285714285715));
    let l = rouge_l("alpha beta gamma delta", "alpha gamma beta delta").unwrap();
    assert!(close(l, 0.75, 0.75, 0.75));
    let reference = "the quick brown fox jumps high\nthe lazy dog sleeps all day";
    let candidate = "the lazy dog sleeps in the sun\na quick brown fox jumps";
    let all = score_all(reference, candidate).unwrap();
    assert!(close(all.rouge_lsum, 0.75, 0.75, 0.75));
    assert!((all.rouge_l.f1 - 0.4166666666666667).abs() <= TOL);
    assert!((all.rouge2.f1 - 0.5454545454545454).abs() <= TOL);
    assert!((all.rouge1.f1 - 0.75).abs() <= TOL);
}

#[test]
fn fifty_frozen_pairs_agree_with_both_references() {
    let cases = rouge_score_pairs();
    assert_eq!(cases.len(), 50);
    for c in &cases {
        let (r, k) = (c.reference.as_str(), c.candidate.as_str());
        let ours = score_all(r, k).unwrap();
        // route 1: the Python rouge-score package
        assert!(against_frozen(ours.rouge1, c.scores.rouge1), "rouge1 {r:?} {k:?}");
        assert!(against_frozen(ours.rouge2, c.scores.rouge2), "rouge2 {r:?} {k:?}");
        assert!(against_frozen(ours.rouge_l, c.scores.rouge_l), "rougeL {r:?} {k:?}");
        assert!(against_frozen(ours.rouge_lsum, c.scores.rouge_lsum), "rougeLsum {r:?} {k:?}");
        // route 2: the brute-force oracle
        assert!(against_brute(ours.rouge1, brute::rouge_n(r, k, 1)));
        assert!(against_brute(ours.rouge2, brute::rouge_n(r, k, 2)));
        assert!(against_brute(ours.rouge_l, brute::rouge_l(r, k)));
        assert!(against_brute(ours.rouge_lsum, brute::rouge_lsum(r, k)));
    }
}

#[test]
fn seeded_random_pairs_agree_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let r = random_text(&mut rng, 3);
        let k = random_text(&mut rng, 1);
        for n in 1..=3 {
            assert!(against_brute(rouge_n(&r, &k, n).unwrap(), brute::rouge_n(&r, &k, n)), "n={n} {r:?} {k:?}");
        }
        assert!(against_brute(rouge_l(&r, &k).unwrap(), brute::rouge_l(&r, &k)), "{r:?} {k:?}");
        assert!(against_brute(rouge_lsum(&r, &k).unwrap(), brute::rouge_lsum(&r, &k)), "{r:?} {k:?}");
    }
}

#[test]
fn short_references_are_rejected() {
    assert_eq!(rouge_n("", "x", 1), Err(RougeError::EmptyReference { found: 0, needed: 1 }));
    assert_eq!(rouge_n("one", "one", 2), Err(RougeError::EmptyReference { found: 1, needed: 2 }));
    assert!(rouge_l("  ", "x").is_err());
    assert!(rouge_lsum("...", "x").is_err());
}

fn text_strategy(min_words: usize) -> impl Strategy<Value = String> {
    let word = prop::sample::select(vec!["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta"]);
    let sep = prop::sample::select(vec![" ", " ", " ", ". ", "\n", ", "]);
    prop::collection::vec((word, sep), min_words..14).prop_map(|parts| {
        parts.into_iter().map(|(w, s)| format!("{w}{s}")).collect::<String>()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn identical_texts_score_one(x in text_strategy(2)) {
        let all = score_all(&x, &x).unwrap();
        for s in [all.rouge1, all.rouge2, all.rouge_l, all.rouge_lsum] {
            prop_assert_eq!(s, RougeScore { recall: 1.0, precision: 1.0, f1: 1.0 });
        }
    }

    #[test]
    fn scores_are_bounded(r in text_strategy(2), k in text_strategy(0)) {
        let all = score_all(&r, &k).unwrap();
        for s in [all.rouge1, all.rouge2, all.rouge_l, all.rouge_lsum] {
            for v in [s.recall, s.precision, s.f1] {
                prop_assert!((0.0..=1.0).contains(&v), "{v}");
            }
        }
    }
}

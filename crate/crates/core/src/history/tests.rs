use std::collections::HashMap;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::engine::reduce_traced;
use crate::expanding::integer_system;
use crate::groups::{f2_times_z, random_word, GroupOracle};
use crate::letter::parse_word;
use crate::system::{Flavor, RewritingSystem, Rule};

fn w(s: &str) -> Word {
    parse_word(s).unwrap()
}

fn cancellation(flavor: Flavor) -> RewritingSystem {
    let a = w("a.A.b.B");
    let rules = ["a.A", "A.a", "b.B", "B.b"]
        .iter()
        .map(|l| Rule::new(w(l), vec![]))
        .collect();
    RewritingSystem::new(flavor, a.clone(), a, rules)
}

// Length-reducing but not a group: a.a -> b, b.b -> a, a.b.a -> "".
fn toy(flavor: Flavor) -> RewritingSystem {
    let a = w("a.b");
    let rules = vec![
        Rule::new(w("a.a"), w("b")),
        Rule::new(w("b.b"), w("a")),
        Rule::new(w("a.b.a"), vec![]),
    ];
    RewritingSystem::new(flavor, a.clone(), a, rules)
}

fn decimal() -> RewritingSystem {
    integer_system(10, 5, None)
        .unwrap()
        .to_system(1_000_000)
        .unwrap()
}

#[test]
fn boundaries_follow_the_convention() {
    let conv = DeletionConvention::keep_prefix();
    // Deleting a.A across the boundary at 2 in x.a|A.y pulls it to 1.
    assert_eq!(move_boundaries(&[2], 1, &w("a.A"), &[], &conv), vec![1]);
    assert_eq!(move_boundaries(&[4], 1, &w("a.A"), &[], &conv), vec![2]);
    assert_eq!(move_boundaries(&[1], 1, &w("a.A"), &[], &conv), vec![1]);
    let mut custom = DeletionConvention::keep_prefix();
    custom.set(w("a.a.a"), w("b.b"), vec![1, 2]).unwrap();
    assert_eq!(
        move_boundaries(&[1, 2], 0, &w("a.a.a"), &w("b.b"), &custom),
        vec![0, 1]
    );
    assert!(custom.set(w("a.a.a"), w("b.b"), vec![0, 2, 2]).is_err());
    assert!(custom.set(w("a.a"), w("b"), vec![1, 0]).is_err());
}

#[test]
fn hand_diagram() {
    let sys = cancellation(Flavor::Incremental);
    let h = reduce_traced(&sys, &w("b.a.A.b")).unwrap();
    let d = build_diagram(&h, 2, &[], &DeletionConvention::keep_prefix()).unwrap();
    assert_eq!(d.rows().len(), 2);
    assert_eq!(d.word(1), w("b.b"));
    let row = &d.rows()[1];
    assert_eq!(row.len(), 3);
    assert!(row[1].letter.is_none());
    assert_eq!(row[1].width, int(2));
    assert_eq!(d.lines()[0].x0, int(1));
    assert_eq!(d.lines()[0].x1, int(3));
    assert!(d.check_width_lemmas().ok());
    let art = render_ascii(&d, 4);
    assert!(art.contains('#') && art.contains('-'));
    assert!(render_svg(&d, None).starts_with("<svg"));
}

#[test]
fn widths_split_evenly() {
    let sys = toy(Flavor::NonIncremental);
    let h = reduce_traced(&sys, &w("a.a.a")).unwrap();
    let d = build_diagram(&h, 3, &[], &DeletionConvention::keep_prefix()).unwrap();
    assert_eq!(d.word(1), w("b.a"));
    assert_eq!(d.rows()[1][0].width, int(2));
    assert_eq!(d.rows()[1][0].generation, Some(1));
    assert!(d.check_width_lemmas().ok());
}

fn random_boundaries(rng: &mut ChaCha8Rng, len: usize) -> Vec<usize> {
    let k = rng.gen_range(0..=3);
    let mut b: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=len)).collect();
    b.sort_unstable();
    b
}

#[test]
fn width_lemmas_on_random_histories() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let conv = DeletionConvention::keep_prefix();
    let systems = [
        cancellation(Flavor::Incremental),
        cancellation(Flavor::NonIncremental),
        toy(Flavor::Incremental),
        toy(Flavor::NonIncremental),
        decimal(),
    ];
    for sys in &systems {
        let gens = sys.input_alphabet().to_vec();
        let mut generations = 0;
        for _ in 0..300 {
            let n = rng.gen_range(0..40);
            let word = random_word(&mut rng, &gens, n);
            let h = reduce_traced(sys, &word).unwrap();
            let bounds = random_boundaries(&mut rng, word.len());
            let d = build_diagram(&h, sys.window(), &bounds, &conv).unwrap();
            let report = d.check_width_lemmas();
            assert!(
                report.ok(),
                "{:?} on {}",
                report.violations,
                format_word(&word)
            );
            generations = generations.max(report.max_generation);
        }
        // Cancellation only deletes, so it never makes a new letter.
        let deletes_only = sys.rules().iter().all(|r| r.rhs.is_empty());
        assert!(deletes_only || generations >= 2);
    }
}

#[test]
fn extracted_paths_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let conv = DeletionConvention::keep_prefix();
    for sys in [
        toy(Flavor::Incremental),
        toy(Flavor::NonIncremental),
        decimal(),
    ] {
        let gens = sys.input_alphabet().to_vec();
        let mut checked = 0;
        for _ in 0..300 {
            let n = rng.gen_range(1..30);
            let word = random_word(&mut rng, &gens, n);
            let h = reduce_traced(&sys, &word).unwrap();
            let d = build_diagram(&h, sys.window(), &[], &conv).unwrap();
            for target in 0..h.result().len() {
                for side in [Side::Left, Side::Right] {
                    let (path, details) = extract_splitting_path(&d, target, side).unwrap();
                    path.check(&d).unwrap();
                    assert_eq!(details, path.details(&d));
                    let end = path.end_position(&d);
                    assert_eq!(end, target + (side == Side::Right) as usize);
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }
}

#[test]
fn class_bound() {
    assert_eq!(class_count_bound(1, 1, 0), 8u32.into());
    assert_eq!(
        class_count_bound(2, 2, 1),
        BigUint::from(2u32 * 9 * 32).pow(2)
    );
}

/// Splices every pair of paths from the same class and counts the splices
/// whose run passes through the predicted word.
fn splice_stats(sys: &RewritingSystem, seed: u64, words: usize, len: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let conv = DeletionConvention::keep_prefix();
    let gens = sys.input_alphabet().to_vec();
    let mut diagrams = Vec::new();
    let mut buckets: HashMap<PathDetails, Vec<(usize, SplittingPath)>> = HashMap::new();
    for _ in 0..words {
        let n = rng.gen_range(len / 2..=len);
        let word = random_word(&mut rng, &gens, n);
        let h = reduce_traced(sys, &word).unwrap();
        if h.result().is_empty() {
            continue;
        }
        let d = build_diagram(&h, sys.window(), &[], &conv).unwrap();
        let target = rng.gen_range(0..h.result().len());
        let (path, details) = extract_splitting_path(&d, target, Side::Left).unwrap();
        buckets
            .entry(details)
            .or_default()
            .push((diagrams.len(), path));
        diagrams.push(d);
    }
    let (mut tried, mut verified) = (0, 0);
    let mut keys: Vec<_> = buckets.keys().cloned().collect();
    keys.sort_by_key(|k| format!("{k:?}"));
    for k in keys {
        let bucket = &buckets[&k];
        for (i, (dv, pv)) in bucket.iter().enumerate().take(8) {
            for (dw, pw) in bucket.iter().skip(i + 1).take(8) {
                let s = splice(&diagrams[*dv], pv, &diagrams[*dw], pw).unwrap();
                tried += 1;
                verified += s.verify(sys).unwrap().is_some() as usize;
            }
        }
    }
    (tried, verified)
}

#[test]
fn splices_reach_the_predicted_word() {
    for sys in [toy(Flavor::Incremental), toy(Flavor::NonIncremental)] {
        let (tried, verified) = splice_stats(&sys, 3, 400, 16);
        assert!(tried >= 50, "only {tried} splices");
        assert_eq!(verified, tried, "{:?}", sys.flavor());
    }
}

#[test]
fn inequivalent_paths_do_not_splice() {
    let sys = toy(Flavor::Incremental);
    let conv = DeletionConvention::keep_prefix();
    let h1 = reduce_traced(&sys, &w("a.a.a.b")).unwrap();
    let h2 = reduce_traced(&sys, &w("b")).unwrap();
    let d1 = build_diagram(&h1, 3, &[], &conv).unwrap();
    let d2 = build_diagram(&h2, 3, &[], &conv).unwrap();
    let (p1, _) = extract_splitting_path(&d1, 0, Side::Left).unwrap();
    let (p2, _) = extract_splitting_path(&d2, 0, Side::Right).unwrap();
    assert!(splice(&d1, &p1, &d2, &p2).is_err());
}

#[test]
fn test_sets() {
    let s = F2xzSets { n1: 3, n2: 4 };
    assert_eq!(s.t1().len(), 36);
    let t2 = s.t2();
    assert_eq!(t2.len(), 5);
    assert!(t2.iter().all(|x| x.len() == 4));
    assert_eq!(t2[0], w("Z.Z.Z.Z"));
    assert_eq!(t2[1], w("Z.Z.Z.z"));
}

#[test]
fn naive_candidate_rejects_a_commutator() {
    let cand = naive_f2xz_candidate(2);
    assert!(cand.validate().is_empty());
    let s = F2xzSets { n1: 4, n2: 6 };
    let report = find_breaker(&cand, &f2_times_z(), &s.t1(), &s.t2(), 100_000).unwrap();
    match &report.outcome {
        BreakerOutcome::RejectedCommutator {
            commutator,
            reduced,
            ..
        } => {
            assert!(f2_times_z().is_trivial(commutator).unwrap());
            assert!(!reduced.is_empty());
        }
        other => panic!("{other:?}"),
    }
    assert!(report.to_json().contains("rejected-commutator"));
}

#[test]
fn a_candidate_that_forgets_z_is_broken() {
    let alpha = w("a.A.b.B.z.Z");
    let mut rules: Vec<Rule> = ["a.A", "A.a", "b.B", "B.b"]
        .iter()
        .map(|l| Rule::new(w(l), vec![]))
        .collect();
    rules.push(Rule::new(w("z"), vec![]));
    rules.push(Rule::new(w("Z"), vec![]));
    let cand = RewritingSystem::new(Flavor::Incremental, alpha.clone(), alpha, rules);
    let oracle = f2_times_z();
    let s = F2xzSets { n1: 6, n2: 8 };
    let report = find_breaker(&cand, &oracle, &s.t1()[..20], &s.t2(), 1000).unwrap();
    match &report.outcome {
        BreakerOutcome::Breaker { word, .. } => {
            assert!(!oracle.is_trivial(word).unwrap());
            assert!(cand.accepts(word).unwrap());
        }
        other => panic!("{other:?}\n{}", report.to_json()),
    }
}

#[test]
fn budget_is_enforced() {
    let cand = naive_f2xz_candidate(1);
    let s = F2xzSets { n1: 2, n2: 2 };
    let err = find_breaker(&cand, &f2_times_z(), &s.t1(), &s.t2(), 5).unwrap_err();
    assert!(matches!(err, Error::Budget(_)));
}

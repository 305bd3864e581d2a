use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cannon::engine::reference;
use cannon::expanding::integer_system;
use cannon::groups::{FreeGroup, GroupOracle, Integers};
use cannon::history::{build_diagram, extract_splitting_path, DeletionConvention, Side};
use cannon::random::{random_system, RandomShape};
use cannon::{parse_word, reduce, reduce_traced, Flavor, RewritingSystem, TieBreak, Word};

fn alphabet() -> Word {
    parse_word("a.b.c").unwrap()
}

fn system(seed: u64, flavor: Flavor) -> RewritingSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_system(
        &mut rng,
        flavor,
        &alphabet(),
        RandomShape {
            rules: (1, 8),
            max_lhs: 4,
            anchor: 0.2,
        },
    )
}

fn flavor() -> impl Strategy<Value = Flavor> {
    prop_oneof![Just(Flavor::Incremental), Just(Flavor::NonIncremental)]
}

fn word_over(alpha: Word, max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(prop::sample::select(alpha), 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scanner_matches_reference(seed in any::<u64>(), f in flavor(), x in word_over(alphabet(), 30)) {
        let sys = system(seed, f);
        let ours = reduce_traced(&sys, &x).unwrap();
        let naive = reference::reduce_traced(f, sys.rules(), &x, TieBreak::default());
        prop_assert_eq!(ours.words, naive.words);
    }

    #[test]
    fn histories_are_consistent_and_shrink(seed in any::<u64>(), f in flavor(), x in word_over(alphabet(), 30)) {
        let sys = system(seed, f);
        let h = reduce_traced(&sys, &x).unwrap();
        prop_assert!(h.is_consistent());
        prop_assert!(h.words.windows(2).all(|p| p[1].len() < p[0].len()));
        prop_assert_eq!(reduce(&sys, h.result()).unwrap(), h.result().to_vec());
    }

    #[test]
    fn incremental_lemma(seed in any::<u64>(), u in word_over(alphabet(), 20), v in word_over(alphabet(), 20)) {
        let sys = system(seed, Flavor::Incremental);
        let ru = reduce(&sys, &u).unwrap();
        prop_assert_eq!(
            reduce(&sys, &[&u[..], &v].concat()).unwrap(),
            reduce(&sys, &[&ru[..], &v].concat()).unwrap()
        );
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), f in flavor()) {
        let sys = system(seed, f);
        prop_assert_eq!(RewritingSystem::from_json(&sys.to_json()).unwrap(), sys);
    }

    #[test]
    fn diagrams_keep_the_width_lemmas(
        seed in any::<u64>(),
        f in flavor(),
        x in word_over(alphabet(), 30),
        cuts in prop::collection::vec(0usize..=30, 0..3),
    ) {
        let sys = system(seed, f);
        let h = reduce_traced(&sys, &x).unwrap();
        let mut bounds: Vec<usize> = cuts.into_iter().map(|c| c.min(x.len())).collect();
        bounds.sort_unstable();
        let d = build_diagram(&h, sys.window(), &bounds, &DeletionConvention::keep_prefix()).unwrap();
        let report = d.check_width_lemmas();
        prop_assert!(report.ok(), "{:?}", report.violations);
        if bounds.is_empty() {
            for p in 0..h.result().len() {
                let (path, _) = extract_splitting_path(&d, p, Side::Right).unwrap();
                prop_assert!(path.check(&d).is_ok());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decimal_normal_forms(x in word_over(parse_word("1.-1").unwrap(), 300)) {
        let sys = integer_system(10, 5, None).unwrap();
        let out = sys.reduce(&x).unwrap();
        let n = Integers::decimal().eval(&x).unwrap();
        prop_assert_eq!(sys.value(&out).unwrap(), n);
        prop_assert_eq!(out.is_empty(), n == 0);
        let nf = sys.parse_normal_form(&out).unwrap();
        prop_assert!(nf.digits.iter().all(|d| d.len() <= 9));
    }

    #[test]
    fn free_product_of_cyclic_factors(x in word_over(parse_word("a.A.b.B").unwrap(), 30)) {
        let sys = |a: &str, b: &str| {
            let w = parse_word(&format!("{a}.{b}")).unwrap();
            let rules = vec![
                cannon::Rule::new(vec![w[0], w[1]], vec![]),
                cannon::Rule::new(vec![w[1], w[0]], vec![]),
            ];
            RewritingSystem::new(Flavor::Incremental, w.clone(), w, rules)
        };
        let p = cannon::constructions::free_product(&sys("a", "A"), &sys("b", "B")).unwrap();
        let f2 = FreeGroup::rank2();
        prop_assert_eq!(reduce(&p, &x).unwrap(), f2.eval(&x).unwrap());
    }
}

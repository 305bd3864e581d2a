//! The acceptance suite: fourteen end-to-end checks with fixed seeds, shared
//! by the `acceptance` test target and `cannon selftest`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constructions::{
    free_product, infinite_dihedral, to_non_incremental, Compressed, StrictCompressed,
};
use crate::engine::{reduce, reduce_traced};
use crate::expanding::{heisenberg_system, integer_system};
use crate::groups::{
    f2_times_z, random_word, Dihedral, FreeGroup, GroupOracle, Integers, Unitriangular,
};
use crate::history::{
    build_diagram, class_count_bound, extract_splitting_path, find_breaker, naive_f2xz_candidate,
    splice, BreakerOutcome, DeletionConvention, Diagram, F2xzSets, PathDetails, Side,
    SplittingPath,
};
use crate::letter::{format_word, parse_word, write_out, Letter, Word};
use crate::machines::{mimic, mimic_colors, run_machine, DehnMachine};
use crate::random::{random_system, RandomShape};
use crate::system::{Flavor, RewritingSystem, Rule};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn w(s: &str) -> Word {
    parse_word(s).unwrap()
}

fn decimal() -> RewritingSystem {
    integer_system(10, 5, None)
        .unwrap()
        .to_system(1_000_000)
        .unwrap()
}

fn free_group() -> RewritingSystem {
    let a = w("a.A.b.B");
    let rules = ["a.A", "A.a", "b.B", "B.b"]
        .iter()
        .map(|l| Rule::new(w(l), vec![]))
        .collect();
    RewritingSystem::new(Flavor::Incremental, a.clone(), a, rules)
}

fn toy(flavor: Flavor) -> RewritingSystem {
    let a = w("a.b");
    let rules = vec![
        Rule::new(w("a.a"), w("b")),
        Rule::new(w("b.b"), w("a")),
        Rule::new(w("a.b.a"), vec![]),
    ];
    RewritingSystem::new(flavor, a.clone(), a, rules)
}

fn seeded_random(seed: u64, flavor: Flavor) -> RewritingSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_system(&mut rng, flavor, &w("a.b.c"), RandomShape::default())
}

fn ones(n: usize) -> Word {
    vec![Letter::new("1"); n]
}

/// A word of length at most `max`; every other one is made trivial by
/// appending its inverse and rotating.
fn sample<G: GroupOracle, R: Rng>(rng: &mut R, g: &G, max: usize, i: usize) -> Word {
    if i.is_multiple_of(2) {
        let n = rng.gen_range(0..=max / 2);
        let u = random_word(rng, g.generators(), n);
        let mut x = u.clone();
        x.extend(g.invert_word(&u));
        let k = if x.is_empty() {
            0
        } else {
            rng.gen_range(0..x.len())
        };
        x.rotate_left(k);
        x
    } else {
        let n = rng.gen_range(0..=max);
        random_word(rng, g.generators(), n)
    }
}

fn c1() -> Verdict {
    let sys = integer_system(10, 5, None).unwrap();
    let out = format_word(&sys.reduce(&ones(572)).unwrap());
    let want = "t.t.1.1.1.1.1.t-.1.1.1.1.1.1.1.t-.1.1";
    verdict(out == want, out)
}

fn c2() -> Verdict {
    let sys = integer_system(10, 5, None).unwrap();
    let mut word = ones(1_000_000);
    word.extend(vec![Letter::new("-1"); 999_999]);
    let out = sys.reduce(&word).unwrap();
    let mut want = vec![Letter::new("t"); 6];
    want.push(Letter::new("1"));
    for _ in 0..6 {
        want.push(Letter::new("t-"));
        want.extend(vec![Letter::new("-1"); 9]);
    }
    verdict(out == want, format_word(&out))
}

fn c3() -> Verdict {
    let sys = heisenberg_system(6, Some(12), None).unwrap();
    let g = Unitriangular::heisenberg();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut bad, mut trivial) = (0, 0);
    for i in 0..10_000 {
        let x = sample(&mut rng, &g, 30, i);
        let out = sys.reduce(&x).unwrap();
        let t = g.is_trivial(&x).unwrap();
        trivial += t as usize;
        if out.is_empty() != t || sys.value(&out).unwrap() != g.eval(&x).unwrap() {
            bad += 1;
        }
    }
    verdict(
        bad == 0,
        format!("10000 words, {trivial} trivial, {bad} disagreements"),
    )
}

fn c4() -> Verdict {
    let systems = [
        free_group(),
        decimal(),
        toy(Flavor::Incremental),
        naive_f2xz_candidate(2),
        seeded_random(4, Flavor::Incremental),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = 0;
    for sys in &systems {
        let gens = sys.input_alphabet().to_vec();
        for _ in 0..2000 {
            let n = rng.gen_range(0..=20);
            let u = random_word(&mut rng, &gens, n);
            let n = rng.gen_range(0..=20);
            let v = random_word(&mut rng, &gens, n);
            let whole = reduce(sys, &[&u[..], &v].concat()).unwrap();
            let ru = reduce(sys, &u).unwrap();
            if whole != reduce(sys, &[&ru[..], &v].concat()).unwrap() {
                bad += 1;
            }
        }
    }
    verdict(
        bad == 0,
        format!("10000 triples over 5 systems, {bad} violations"),
    )
}

fn remembers<G: GroupOracle, R: Rng>(
    rng: &mut R,
    g: &G,
    red: impl Fn(&[Letter]) -> Word,
    pairs: usize,
) -> (usize, usize) {
    let (mut equal, mut bad) = (0, 0);
    for i in 0..pairs {
        let x = sample(rng, g, 24, i);
        let y = if i % 3 == 0 {
            random_word(rng, g.generators(), x.len())
        } else {
            // Same element: insert a cancelling pair somewhere.
            let gen = g.generators()[rng.gen_range(0..g.generators().len())];
            let k = rng.gen_range(0..=x.len());
            [&x[..k], &[gen, g.inverse_letter(gen)], &x[k..]].concat()
        };
        if red(&x) == red(&y) {
            equal += 1;
            if g.eval(&x).unwrap() != g.eval(&y).unwrap() {
                bad += 1;
            }
        }
    }
    (equal, bad)
}

fn c5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = integer_system(10, 5, None).unwrap();
    let (e1, b1) = remembers(
        &mut rng,
        &Integers::decimal(),
        |x| z.reduce(x).unwrap(),
        5000,
    );
    let h = heisenberg_system(6, Some(12), None).unwrap();
    let (e2, b2) = remembers(
        &mut rng,
        &Unitriangular::heisenberg(),
        |x| h.reduce(x).unwrap(),
        5000,
    );
    verdict(
        b1 + b2 == 0 && e1 > 0 && e2 > 0,
        format!(
            "10000 pairs, {} equal reductions, {} violations",
            e1 + e2,
            b1 + b2
        ),
    )
}

fn c6() -> Verdict {
    let systems = [
        free_group(),
        decimal(),
        toy(Flavor::Incremental),
        naive_f2xz_candidate(2),
        seeded_random(6, Flavor::Incremental),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = 0;
    for sys in &systems {
        let other = to_non_incremental(sys);
        let gens = sys.input_alphabet().to_vec();
        for _ in 0..10_000 {
            let n = rng.gen_range(0..=40);
            let x = random_word(&mut rng, &gens, n);
            let a = reduce_traced(sys, &x).unwrap();
            let b = reduce_traced(&other, &x).unwrap();
            if a.words != b.words {
                bad += 1;
            }
        }
    }
    verdict(
        bad == 0,
        format!("5 systems x 10000 words, {bad} differing histories"),
    )
}

fn rename(sys: &RewritingSystem, names: &[(&str, &str)]) -> RewritingSystem {
    let map: HashMap<Letter, Letter> = names
        .iter()
        .map(|(a, b)| (Letter::new(a), Letter::new(b)))
        .collect();
    let m = |x: &[Letter]| -> Word { x.iter().map(|l| map[l]).collect() };
    let rules = sys
        .rules()
        .iter()
        .map(|r| Rule::new(m(&r.lhs), m(&r.rhs)).with_anchors(r.anchor_start, r.anchor_end))
        .collect();
    RewritingSystem::new(
        sys.flavor(),
        m(sys.input_alphabet()),
        m(sys.working_alphabet()),
        rules,
    )
}

fn c7() -> Verdict {
    let ints = decimal();
    let za = rename(&ints, &[("1", "a"), ("-1", "A"), ("t", "s"), ("t-", "S")]);
    let zb = rename(&ints, &[("1", "b"), ("-1", "B"), ("t", "u"), ("t-", "U")]);
    let p = free_product(&za, &zb).unwrap();
    let f2 = FreeGroup::rank2();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    for i in 0..10_000 {
        let x = sample(&mut rng, &f2, 40, i);
        if p.accepts(&x).unwrap() != f2.is_trivial(&x).unwrap() {
            bad += 1;
        }
    }
    // Alternating words of non-trivial syllables reduce syllable by syllable.
    let factors = [(&za, w("a.A")), (&zb, w("b.B"))];
    let mut syl_bad = 0;
    for i in 0..1000 {
        let mut word = Vec::new();
        let mut want = Vec::new();
        let first = i % 2;
        for k in 0..rng.gen_range(1..=6) {
            let (sys, gens) = &factors[(first + k) % 2];
            let s = loop {
                let n = rng.gen_range(1..=8);
                let s = random_word(&mut rng, gens, n);
                if !reduce(*sys, &s).unwrap().is_empty() {
                    break s;
                }
            };
            want.extend(reduce(*sys, &s).unwrap());
            word.extend(s);
        }
        if reduce(&p, &word).unwrap() != want {
            syl_bad += 1;
        }
    }
    verdict(bad + syl_bad == 0, format!("10000 words: {bad} disagreements; 1000 alternating words: {syl_bad} bad factorizations"))
}

fn c8() -> Verdict {
    let d = infinite_dihedral(&decimal()).unwrap();
    let oracle = Dihedral::new("r", "R", "s");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad = 0;
    for i in 0..10_000 {
        let x = sample(&mut rng, &oracle, 40, i);
        if d.accepts(&x).unwrap() != oracle.is_trivial(&x).unwrap() {
            bad += 1;
        }
    }
    verdict(bad == 0, format!("10000 words, {bad} disagreements"))
}

fn c9() -> Verdict {
    let bases = [free_group(), decimal(), toy(Flavor::NonIncremental)];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut basic_bad, mut strict_bad, mut words) = (0, 0, 0);
    for base in &bases {
        let alpha = base.working_alphabet().to_vec();
        for n in [2, 3] {
            let c = Compressed::new(base, n).unwrap();
            let s = StrictCompressed::new(base, n).unwrap();
            for _ in 0..1000 {
                words += 1;
                let len = rng.gen_range(0..=15);
                let x: Word = (0..len)
                    .map(|_| {
                        let k = rng.gen_range(1..=n);
                        Letter::compressed(&random_word(&mut rng, &alpha, k))
                    })
                    .collect();
                if write_out(&reduce(&c, &x).unwrap()) != reduce(base, &write_out(&x)).unwrap() {
                    basic_bad += 1;
                }
                let len = rng.gen_range(0..=40);
                let flat = random_word(&mut rng, base.input_alphabet(), len);
                let out = reduce(&s, &s.encode(&flat)).unwrap();
                let hist = reduce_traced(base, &flat).unwrap();
                if !hist.words.contains(&write_out(&out))
                    || out.is_empty() != hist.result().is_empty()
                {
                    strict_bad += 1;
                }
            }
        }
    }
    verdict(
        basic_bad + strict_bad == 0,
        format!("{words} words per contract: {basic_bad} basic, {strict_bad} strict violations"),
    )
}

struct DiagramStats {
    reductions: usize,
    width_violations: usize,
    max_generation: u32,
    paths: usize,
    long_paths: usize,
    extraction_errors: usize,
    class_excess: usize,
    endpoint_contacts: usize,
}

/// Criteria 10 and 11 share their random histories.
fn diagram_stats() -> DiagramStats {
    let systems = [
        toy(Flavor::Incremental),
        toy(Flavor::NonIncremental),
        decimal(),
        free_group(),
        naive_f2xz_candidate(2),
    ];
    let conv = DeletionConvention::keep_prefix();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut st = DiagramStats {
        reductions: 0,
        width_violations: 0,
        max_generation: 0,
        paths: 0,
        long_paths: 0,
        extraction_errors: 0,
        class_excess: 0,
        endpoint_contacts: 0,
    };
    for sys in &systems {
        let gens = sys.input_alphabet().to_vec();
        let mut classes: HashMap<usize, HashSet<PathDetails>> = HashMap::new();
        for _ in 0..2000 {
            let n = rng.gen_range(0..=40);
            let x = random_word(&mut rng, &gens, n);
            let h = reduce_traced(sys, &x).unwrap();
            let k = rng.gen_range(0..=3);
            let mut bounds: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=x.len())).collect();
            bounds.sort_unstable();
            let d = build_diagram(&h, sys.window(), &bounds, &conv).unwrap();
            let report = d.check_width_lemmas();
            st.reductions += 1;
            st.width_violations += report.violations.len();
            st.max_generation = st.max_generation.max(report.max_generation);
            let t = d.last_row();
            let targets: Vec<usize> = (0..h.result().len())
                .filter(|&p| !d.rows()[t][d.letter_cell(t, p).unwrap()].border)
                .collect();
            for _ in 0..targets.len().min(2) {
                let p = targets[rng.gen_range(0..targets.len())];
                let g = d.rows()[t][d.letter_cell(t, p).unwrap()]
                    .generation
                    .unwrap() as usize;
                for side in [Side::Left, Side::Right] {
                    match extract_splitting_path(&d, p, side) {
                        Ok((path, details)) => {
                            st.paths += 1;
                            st.endpoint_contacts += path.endpoint_contacts(&d);
                            if path.len() > 2 * g + 2 {
                                st.long_paths += 1;
                            }
                            classes.entry(path.len()).or_default().insert(details);
                        }
                        Err(_) => st.extraction_errors += 1,
                    }
                }
            }
        }
        let mut total = 0usize;
        let lengths: Vec<usize> = {
            let mut l: Vec<usize> = classes.keys().copied().collect();
            l.sort_unstable();
            l
        };
        for n in lengths {
            total += classes[&n].len();
            if class_count_bound(sys.working_alphabet().len(), sys.window(), n) < total.into() {
                st.class_excess += 1;
            }
        }
    }
    st
}

fn c10(st: &DiagramStats) -> Verdict {
    verdict(
        st.width_violations == 0 && st.max_generation >= 2,
        format!(
            "{} reductions, {} violations, max generation {}",
            st.reductions, st.width_violations, st.max_generation
        ),
    )
}

fn c11(st: &DiagramStats) -> Verdict {
    verdict(
        st.long_paths == 0 && st.extraction_errors == 0 && st.class_excess == 0 && st.paths > 0,
        format!(
            "{} paths, {} longer than 2g+2, {} extraction errors, {} class counts over the bound, {} line-end contacts",
            st.paths, st.long_paths, st.extraction_errors, st.class_excess, st.endpoint_contacts
        ),
    )
}

fn c12() -> Verdict {
    let conv = DeletionConvention::keep_prefix();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut tried, mut verified) = (0, 0);
    for sys in [toy(Flavor::Incremental), toy(Flavor::NonIncremental)] {
        let mut diagrams: Vec<Diagram> = Vec::new();
        let mut buckets: HashMap<PathDetails, Vec<(usize, SplittingPath)>> = HashMap::new();
        for _ in 0..400 {
            let n = rng.gen_range(8..=16);
            let x = random_word(&mut rng, sys.input_alphabet(), n);
            let h = reduce_traced(&sys, &x).unwrap();
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
        let mut keys: Vec<&PathDetails> = buckets.keys().collect();
        keys.sort_by_key(|k| format!("{k:?}"));
        for k in keys {
            let bucket = &buckets[k];
            for (i, (a, pa)) in bucket.iter().enumerate().take(6) {
                for (b, pb) in bucket.iter().skip(i + 1).take(6) {
                    let s = splice(&diagrams[*a], pa, &diagrams[*b], pb).unwrap();
                    tried += 1;
                    verified += s.verify(&sys).unwrap().is_some() as usize;
                }
            }
        }
    }
    verdict(
        tried >= 50 && verified == tried,
        format!("{verified} of {tried} splices reach the predicted word"),
    )
}

fn c13() -> Verdict {
    let cand = naive_f2xz_candidate(2);
    let oracle = f2_times_z();
    let sets = F2xzSets { n1: 6, n2: 12 };
    let report = find_breaker(&cand, &oracle, &sets.t1(), &sets.t2(), 100_000).unwrap();
    let (ok, what) = match &report.outcome {
        BreakerOutcome::Breaker { word, .. } => (
            !oracle.is_trivial(word).unwrap() && cand.accepts(word).unwrap(),
            format!("breaker {}", format_word(word)),
        ),
        BreakerOutcome::RejectedCommutator { commutator, .. } => (
            oracle.is_trivial(commutator).unwrap() && !cand.accepts(commutator).unwrap(),
            format!("rejected commutator {}", format_word(commutator)),
        ),
        BreakerOutcome::Exhausted => (false, "no verdict".to_string()),
    };
    verdict(
        ok,
        format!(
            "{what}, {} of {} pairs examined",
            report.pairs_examined, report.pairs_total
        ),
    )
}

fn two_state(flavor: Flavor) -> DehnMachine {
    let a = w("a.b");
    DehnMachine::tabulated(
        flavor,
        a.clone(),
        a,
        vec!["p".into(), "q".into()],
        vec![
            vec![Rule::new(w("a.b"), vec![])],
            vec![Rule::new(w("b.a"), vec![]), Rule::new(w("b.b.b"), w("b"))],
        ],
        |q, win| {
            let body: Vec<&str> = win
                .iter()
                .map(|l| l.name())
                .filter(|n| *n != "^" && *n != "$")
                .collect();
            match (q, &body[..]) {
                (0, ["b", "b", ..]) => 1,
                (1, ["a", "a", ..]) => 0,
                _ => q,
            }
        },
    )
    .unwrap()
}

fn c14() -> Verdict {
    let alpha = w("a.b");
    let (mut words, mut bad) = (0, 0);
    for flavor in [Flavor::NonIncremental, Flavor::Incremental] {
        let m = two_state(flavor);
        let sys = mimic(&m);
        let colors = mimic_colors(&m);
        let mut layer: Vec<Word> = vec![vec![]];
        for _ in 0..=8 {
            for x in &layer {
                words += 1;
                let out = run_machine(&m, x).unwrap();
                let r = colors.erase(&reduce(&sys, x).unwrap());
                if r.is_empty() != out.word.is_empty() || r != out.word {
                    bad += 1;
                }
            }
            layer = layer
                .iter()
                .flat_map(|p| alpha.iter().map(move |&l| [&p[..], &[l]].concat()))
                .collect();
        }
    }
    verdict(
        bad == 0,
        format!("2 machines, {words} words, {bad} disagreements"),
    )
}

pub const NAMES: [&str; 14] = [
    "decimal 572",
    "count up and down",
    "Heisenberg agreement",
    "incremental lemma",
    "reductions remember the element",
    "non-incremental conversion",
    "free product",
    "finite index",
    "compression",
    "width and generation",
    "splitting-path length",
    "splicing",
    "breaker search",
    "machine mimicry",
];

/// Time limits in seconds.
pub const LIMITS: [u64; 14] = [
    1, 60, 300, 600, 600, 600, 600, 600, 600, 600, 600, 600, 600, 600,
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub number: usize,
    pub name: &'static str,
    pub pass: bool,
    pub seconds: f64,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<34} {} ({:.2}s) {}",
            self.number,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

/// Runs the criteria in `only` (all of them if empty), calling `report` as
/// each one finishes. A criterion that panics or overruns its limit fails.
pub fn run(only: &[usize], mut report: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let mut stats: Option<DiagramStats> = None;
    let mut out = Vec::new();
    for n in 1..=14 {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let run = catch_unwind(AssertUnwindSafe(|| match n {
            1 => c1(),
            2 => c2(),
            3 => c3(),
            4 => c4(),
            5 => c5(),
            6 => c6(),
            7 => c7(),
            8 => c8(),
            9 => c9(),
            10 | 11 => {
                let st = stats.get_or_insert_with(diagram_stats);
                if n == 10 {
                    c10(st)
                } else {
                    c11(st)
                }
            }
            12 => c12(),
            13 => c13(),
            _ => c14(),
        }));
        let took = start.elapsed();
        let mut v = run.unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if took > Duration::from_secs(LIMITS[n - 1]) {
            v.pass = false;
            v.detail = format!("over the {}s limit; {}", LIMITS[n - 1], v.detail);
        }
        let r = CriterionResult {
            number: n,
            name: NAMES[n - 1],
            pass: v.pass,
            seconds: took.as_secs_f64(),
            detail: v.detail,
        };
        report(&r);
        out.push(r);
    }
    out
}

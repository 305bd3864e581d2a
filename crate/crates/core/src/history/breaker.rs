//! Search for a breaker of a candidate system: a word that is not the
//! identity but reduces to the empty word.
//!
//! Each pair `(u, v)` gives the commutator `u v U V`, where `U`, `V` are the
//! formal inverses. The candidate must accept it; its history is followed
//! until both middle subwords are short, and a splitting path is taken
//! through whichever of them was longer. Pairs whose paths land in the same
//! class are spliced, and the spliced word is checked by running the
//! candidate and asking the oracle.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::path::{extract_splitting_path, PathDetails, Side};
use super::{build_diagram, move_boundaries, DeletionConvention};
use crate::engine::{reduce, reduce_traced, ReductionHistory, RuleSource};
use crate::error::{Error, Result};
use crate::groups::GroupOracle;
use crate::letter::{format_word, letters, Letter, Word};
use crate::system::{Flavor, RewritingSystem, Rule};

fn ser_word<S: serde::Serializer>(w: &Word, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_word(w))
}

/// Test sets for F₂ × ℤ: all freely reduced words of length `n1` over
/// `a, A, b, B`, and the words `z^k (zZ)^m` or `Z^k (Zz)^m` of length `n2`.
#[derive(Clone, Copy, Debug)]
pub struct F2xzSets {
    pub n1: usize,
    pub n2: usize,
}

impl F2xzSets {
    pub fn t1(&self) -> Vec<Word> {
        let gens = letters(&["a", "A", "b", "B"]);
        let inv = |l: Letter| gens[[1, 0, 3, 2][gens.iter().position(|&g| g == l).unwrap()]];
        let mut out: Vec<Word> = vec![Vec::new()];
        for _ in 0..self.n1 {
            out = out
                .into_iter()
                .flat_map(|w| {
                    gens.iter()
                        .filter(|&&g| w.last().is_none_or(|&l| inv(l) != g))
                        .map(|&g| {
                            let mut w = w.clone();
                            w.push(g);
                            w
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        out
    }

    pub fn t2(&self) -> Vec<Word> {
        let (z, zi) = (Letter::new("z"), Letter::new("Z"));
        let n = self.n2 as i64;
        (-n..=n)
            .filter(|k| (n - k) % 2 == 0)
            .map(|k| {
                let (x, y) = if k >= 0 { (z, zi) } else { (zi, z) };
                let mut w = vec![x; k.unsigned_abs() as usize];
                while w.len() < self.n2 {
                    w.extend([x, y]);
                }
                w
            })
            .collect()
    }
}

/// Free cancellation on `a, b, z`, plus `z w Z -> w` and `Z w z -> w` for
/// every freely reduced `w` over `a, A, b, B` with `1 <= |w| <= max_shuffle`.
pub fn naive_f2xz_candidate(max_shuffle: usize) -> RewritingSystem {
    let alpha = letters(&["a", "A", "b", "B", "z", "Z"]);
    let pairs = [
        (alpha[0], alpha[1]),
        (alpha[2], alpha[3]),
        (alpha[4], alpha[5]),
    ];
    let mut rules = Vec::new();
    for &(x, y) in &pairs {
        rules.push(Rule::new(vec![x, y], vec![]));
        rules.push(Rule::new(vec![y, x], vec![]));
    }
    let sets = (1..=max_shuffle).flat_map(|n| F2xzSets { n1: n, n2: 0 }.t1());
    let (z, zi) = pairs[2];
    for w in sets {
        rules.push(Rule::new([&[z][..], &w, &[zi]].concat(), w.clone()));
        rules.push(Rule::new([&[zi][..], &w, &[z]].concat(), w));
    }
    RewritingSystem::new(Flavor::Incremental, alpha.clone(), alpha, rules)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BreakerOutcome {
    /// A word the oracle says is not the identity but the candidate accepts.
    Breaker {
        #[serde(serialize_with = "ser_word")]
        word: Word,
        /// Which middle subword the two paths went through, `v` or `x`.
        split: char,
        #[serde(serialize_with = "ser_word")]
        u1: Word,
        #[serde(serialize_with = "ser_word")]
        v1: Word,
        #[serde(serialize_with = "ser_word")]
        u2: Word,
        #[serde(serialize_with = "ser_word")]
        v2: Word,
        #[serde(serialize_with = "ser_word")]
        predicted: Word,
        /// Whether the run on `word` passed through `predicted`.
        predicted_reached: bool,
    },
    /// A commutator, trivial in the group, that the candidate does not accept.
    RejectedCommutator {
        #[serde(serialize_with = "ser_word")]
        u: Word,
        #[serde(serialize_with = "ser_word")]
        v: Word,
        #[serde(serialize_with = "ser_word")]
        commutator: Word,
        #[serde(serialize_with = "ser_word")]
        reduced: Word,
    },
    Exhausted,
}

#[derive(Clone, Debug, Serialize)]
pub struct BreakerReport {
    pub outcome: BreakerOutcome,
    pub pairs_total: usize,
    pub pairs_examined: usize,
    pub pairs_split: usize,
    /// Pairs with no usable path, by reason.
    pub skipped: Vec<(String, usize)>,
    pub classes: usize,
    pub largest_class: usize,
    pub splices_tried: usize,
    /// How the outcome was checked.
    pub verification: Vec<String>,
}

impl BreakerReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Key {
    split: char,
    original: Word,
    details: PathDetails,
    start: usize,
    end: usize,
    fixed: [Word; 3],
}

struct Half {
    left0: Word,
    right0: Word,
    left_t: Word,
    right_t: Word,
}

enum PairResult {
    Rejected(Word, Word),
    Skipped(&'static str),
    Split(Key, Half),
}

fn analyse<S: RuleSource + ?Sized>(
    src: &S,
    u: &[Letter],
    v: &[Letter],
    word: &[Letter],
) -> Result<PairResult> {
    let h = reduce_traced(src, word)?;
    if !h.result().is_empty() {
        return Ok(PairResult::Rejected(word.to_vec(), h.result().to_vec()));
    }
    let w = src.window();
    let conv = DeletionConvention::keep_prefix();
    let b0 = vec![u.len(), u.len() + v.len(), 2 * u.len() + v.len()];
    let mut bounds = vec![b0.clone()];
    for s in &h.steps {
        let next = move_boundaries(bounds.last().unwrap(), s.start, &s.lhs, &s.rhs, &conv);
        bounds.push(next);
    }
    let short = |i: usize| {
        let b = &bounds[i];
        (b[1] - b[0]).max(b[2] - b[1]) < 3 * w
    };
    let t = (0..bounds.len())
        .find(|&i| short(i))
        .expect("the empty word is short");
    if t == 0 {
        return Ok(PairResult::Skipped("middle subwords short from the start"));
    }
    let prefix = ReductionHistory {
        words: h.words[..=t].to_vec(),
        steps: h.steps[..t].to_vec(),
    };
    let d = build_diagram(&prefix, w, &b0, &conv)?;
    let bt = &bounds[t];
    let wt = &h.words[t];
    let sub = |i: usize, j: usize| wt[i..j].to_vec();
    let (split, lo, hi, orig, orig_lo, fixed) = if bt[1] - bt[0] >= bt[2] - bt[1] {
        (
            'v',
            bt[0],
            bt[1],
            v.to_vec(),
            b0[0],
            [sub(bt[0], bt[1]), sub(bt[1], bt[2]), sub(bt[2], wt.len())],
        )
    } else {
        (
            'x',
            bt[1],
            bt[2],
            u.to_vec(),
            b0[1],
            [sub(0, bt[0]), sub(bt[0], bt[1]), sub(bt[1], bt[2])],
        )
    };
    let target = lo + w - 1;
    if target + w > hi {
        return Ok(PairResult::Skipped(
            "no non-border letter in the split subword",
        ));
    }
    let cell = d.letter_cell(t, target).expect("target is in range");
    if d.rows()[t][cell].border {
        return Ok(PairResult::Skipped(
            "no non-border letter in the split subword",
        ));
    }
    let (path, details) = match extract_splitting_path(&d, target, Side::Left) {
        Ok(p) => p,
        Err(_) => return Ok(PairResult::Skipped("path extraction failed")),
    };
    if path.check(&d).is_err() {
        return Ok(PairResult::Skipped("path context crosses a boundary"));
    }
    let start = path.start_position(&d);
    let end = path.end_position(&d);
    // Both ends must lie inside the subword being split.
    let orig_hi = if split == 'v' { b0[1] } else { b0[2] };
    if start < orig_lo || start > orig_hi || end < lo || end > hi {
        return Ok(PairResult::Skipped("path leaves the split subword"));
    }
    let x0 = &path.segments[0].x;
    let xt = &path.segments.last().unwrap().x;
    let (left0, right0) = d.split_at(0, x0);
    let (left_t, right_t) = d.split_at(t, xt);
    let key = Key {
        split,
        original: orig,
        details,
        start: start - orig_lo,
        end: end - lo,
        fixed,
    };
    Ok(PairResult::Split(
        key,
        Half {
            left0,
            right0,
            left_t,
            right_t,
        },
    ))
}

/// Runs the search over `t1 × t2` in order. `budget` caps the number of
/// pairs; a larger product is an error rather than a silent truncation.
pub fn find_breaker<S, G>(
    src: &S,
    oracle: &G,
    t1: &[Word],
    t2: &[Word],
    budget: usize,
) -> Result<BreakerReport>
where
    S: RuleSource + Sync + ?Sized,
    G: GroupOracle,
{
    let total = t1.len() * t2.len();
    if total > budget {
        return Err(Error::Budget(format!(
            "{total} pairs exceed the budget of {budget}"
        )));
    }
    let pairs: Vec<(&Word, &Word)> = t1
        .iter()
        .flat_map(|u| t2.iter().map(move |v| (u, v)))
        .collect();
    let results: Vec<Result<PairResult>> = pairs
        .par_iter()
        .map(|&(u, v)| {
            let word = [&u[..], v, &oracle.invert_word(u), &oracle.invert_word(v)].concat();
            if !oracle.is_trivial(&word)? {
                return Err(Error::Precondition(format!(
                    "[{}, {}] is not trivial",
                    format_word(u),
                    format_word(v)
                )));
            }
            analyse(src, u, v, &word)
        })
        .collect();

    let mut report = BreakerReport {
        outcome: BreakerOutcome::Exhausted,
        pairs_total: total,
        pairs_examined: 0,
        pairs_split: 0,
        skipped: Vec::new(),
        classes: 0,
        largest_class: 0,
        splices_tried: 0,
        verification: Vec::new(),
    };
    let mut skipped: Vec<(String, usize)> = Vec::new();
    let mut buckets: HashMap<Key, Vec<usize>> = HashMap::new();
    let mut halves: Vec<Option<Half>> = Vec::with_capacity(pairs.len());

    for (i, r) in results.into_iter().enumerate() {
        report.pairs_examined += 1;
        let (u, v) = pairs[i];
        match r? {
            PairResult::Rejected(commutator, reduced) => {
                // Re-check independently before reporting.
                let trivial = oracle.is_trivial(&commutator)?;
                let again = reduce(src, &commutator)?;
                assert!(
                    trivial && !again.is_empty(),
                    "rejected commutator failed re-verification"
                );
                report.verification.push(format!(
                    "oracle: [{}, {}] is the identity",
                    format_word(u),
                    format_word(v)
                ));
                report
                    .verification
                    .push(format!("candidate: reduces to {}", format_word(&again)));
                report.outcome = BreakerOutcome::RejectedCommutator {
                    u: u.clone(),
                    v: v.clone(),
                    commutator,
                    reduced,
                };
                break;
            }
            PairResult::Skipped(why) => {
                match skipped.iter_mut().find(|(w, _)| w == why) {
                    Some(e) => e.1 += 1,
                    None => skipped.push((why.to_string(), 1)),
                }
                halves.push(None);
            }
            PairResult::Split(key, half) => {
                report.pairs_split += 1;
                halves.push(Some(half));
                let bucket = buckets.entry(key.clone()).or_default();
                let mut found = None;
                for &j in bucket.iter() {
                    let (a, b) = (halves[j].as_ref().unwrap(), halves[i].as_ref().unwrap());
                    for (l, r, first, second) in [(a, b, j, i), (b, a, i, j)] {
                        report.splices_tried += 1;
                        let word = [&l.left0[..], &r.right0].concat();
                        if oracle.is_trivial(&word)? || !reduce(src, &word)?.is_empty() {
                            continue;
                        }
                        let predicted = [&l.left_t[..], &r.right_t].concat();
                        found = Some((word, predicted, first, second));
                        break;
                    }
                    if found.is_some() {
                        break;
                    }
                }
                bucket.push(i);
                if let Some((word, predicted, first, second)) = found {
                    let h = reduce_traced(src, &word)?;
                    let reached = h.words.contains(&predicted);
                    let not_identity = !oracle.is_trivial(&word)?;
                    let accepted = h.result().is_empty();
                    assert!(not_identity && accepted, "breaker failed re-verification");
                    report.verification.push(format!(
                        "oracle: {} is not the identity",
                        format_word(&word)
                    ));
                    report
                        .verification
                        .push(format!("candidate: accepts after {} steps", h.steps.len()));
                    report
                        .verification
                        .push(format!("predicted word reached: {reached}"));
                    let (u1, v1) = pairs[first];
                    let (u2, v2) = pairs[second];
                    report.outcome = BreakerOutcome::Breaker {
                        word,
                        split: key.split,
                        u1: u1.clone(),
                        v1: v1.clone(),
                        u2: u2.clone(),
                        v2: v2.clone(),
                        predicted,
                        predicted_reached: reached,
                    };
                    break;
                }
            }
        }
    }
    report.skipped = skipped;
    report.classes = buckets.len();
    report.largest_class = buckets.values().map(Vec::len).max().unwrap_or(0);
    Ok(report)
}

//! The deterministic rewriting engine.
//!
//! The current word lives in a gap buffer: `left` holds the letters already
//! scanned and `right` holds the rest in reverse, so moving the cursor and
//! splicing in a right-hand side are both stack operations. Rule lookup goes
//! through [`RuleSource`], implemented by explicit rule tables (a trie over
//! the left-hand sides) and by implicit rule oracles elsewhere in the crate.

use std::borrow::Cow;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::letter::{Letter, Word};
use crate::system::{Flavor, Potential, RewritingSystem, Rule};

/// How to choose between candidates at the same end (incremental) or start
/// (non-incremental) position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Longest first, then anchored over unanchored.
    #[default]
    LengthThenAnchor,
    /// Any anchored candidate beats every unanchored one, then longest.
    AnchorThenLength,
}

/// A rule occurrence chosen by a [`RuleSource`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match<'a> {
    pub len: usize,
    /// Index into the explicit rule table, if there is one.
    pub rule: Option<usize>,
    pub rhs: Cow<'a, [Letter]>,
    pub anchor_start: bool,
    pub anchor_end: bool,
}

pub trait RuleSource: Sync {
    fn flavor(&self) -> Flavor;

    /// Length of the longest left-hand side.
    fn window(&self) -> usize;

    /// `None` for strictly length-decreasing rule sets.
    fn potential(&self) -> Option<Potential> {
        None
    }

    /// Incremental flavor: the preferred lhs ending at the end of `prefix`
    /// (which starts at the beginning of the word).
    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>>;

    /// Non-incremental flavor: the preferred lhs starting at the current
    /// position. `rest_rev` is the remainder of the word in reverse order,
    /// so its last element is the letter at the current position.
    fn match_starting(&self, rest_rev: &[Letter], at_start: bool) -> Option<Match<'_>>;
}

fn anchor_rank(start: bool, end: bool) -> u8 {
    match (start, end) {
        (true, true) => 3,
        (true, false) => 2,
        (false, true) => 1,
        (false, false) => 0,
    }
}

fn slot(start: bool, end: bool) -> usize {
    start as usize | (end as usize) << 1
}

/// Preference key: larger is better.
fn preference(tie: TieBreak, len: usize, start: bool, end: bool) -> (u8, usize, u8) {
    let rank = anchor_rank(start, end);
    match tie {
        TieBreak::LengthThenAnchor => (0, len, rank),
        TieBreak::AnchorThenLength => ((rank > 0) as u8, len, rank),
    }
}

#[derive(Clone, Debug, Default)]
struct Node {
    rules: [Option<u32>; 4],
}

/// Trie over left-hand sides: reversed for the incremental flavor, forward
/// for the non-incremental one.
#[derive(Clone, Debug)]
pub struct Matcher {
    flavor: Flavor,
    tie: TieBreak,
    window: usize,
    nodes: Vec<Node>,
    edges: HashMap<(u32, Letter), u32>,
    rules: Vec<Rule>,
}

impl Matcher {
    pub fn build(flavor: Flavor, rules: &[Rule]) -> Matcher {
        Matcher::with_tie_break(flavor, rules, TieBreak::default())
    }

    pub fn with_tie_break(flavor: Flavor, rules: &[Rule], tie: TieBreak) -> Matcher {
        let mut m = Matcher {
            flavor,
            tie,
            window: rules.iter().map(|r| r.lhs.len()).max().unwrap_or(0),
            nodes: vec![Node::default()],
            edges: HashMap::new(),
            rules: rules.to_vec(),
        };
        for (i, r) in rules.iter().enumerate() {
            let mut node = 0u32;
            let letters: Box<dyn Iterator<Item = &Letter>> = match flavor {
                Flavor::Incremental => Box::new(r.lhs.iter().rev()),
                Flavor::NonIncremental => Box::new(r.lhs.iter()),
            };
            for &l in letters {
                node = match m.edges.get(&(node, l)) {
                    Some(&n) => n,
                    None => {
                        let n = m.nodes.len() as u32;
                        m.nodes.push(Node::default());
                        m.edges.insert((node, l), n);
                        n
                    }
                };
            }
            // First rule wins on duplicates; validation reports them.
            let s = &mut m.nodes[node as usize].rules[slot(r.anchor_start, r.anchor_end)];
            if s.is_none() {
                *s = Some(i as u32);
            }
        }
        m
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    fn make_match(&self, idx: u32) -> Match<'_> {
        let r = &self.rules[idx as usize];
        Match {
            len: r.lhs.len(),
            rule: Some(idx as usize),
            rhs: Cow::Borrowed(&r.rhs),
            anchor_start: r.anchor_start,
            anchor_end: r.anchor_end,
        }
    }

    fn walk<'a>(
        &self,
        letters: impl Iterator<Item = &'a Letter>,
        eligible: impl Fn(usize, bool, bool) -> bool,
    ) -> Option<Match<'_>> {
        let mut best: Option<((u8, usize, u8), u32)> = None;
        let mut node = 0u32;
        for (depth, &l) in letters.enumerate().take(self.window) {
            node = match self.edges.get(&(node, l)) {
                Some(&n) => n,
                None => break,
            };
            let len = depth + 1;
            for (s, rule) in self.nodes[node as usize].rules.iter().enumerate() {
                let (start, end) = (s & 1 == 1, s & 2 == 2);
                if let Some(idx) = rule {
                    if eligible(len, start, end) {
                        let key = preference(self.tie, len, start, end);
                        if best.is_none_or(|(k, _)| key > k) {
                            best = Some((key, *idx));
                        }
                    }
                }
            }
        }
        best.map(|(_, idx)| self.make_match(idx))
    }
}

impl RuleSource for Matcher {
    fn flavor(&self) -> Flavor {
        self.flavor
    }

    fn window(&self) -> usize {
        self.window
    }

    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        let n = prefix.len();
        self.walk(prefix.iter().rev(), |len, start, end| {
            !end && (!start || len == n)
        })
    }

    fn match_starting(&self, rest_rev: &[Letter], at_start: bool) -> Option<Match<'_>> {
        let n = rest_rev.len();
        self.walk(rest_rev.iter().rev(), |len, start, end| {
            (!start || at_start) && (!end || len == n)
        })
    }
}

impl<T: RuleSource + ?Sized> RuleSource for &T {
    fn flavor(&self) -> Flavor {
        (**self).flavor()
    }

    fn window(&self) -> usize {
        (**self).window()
    }

    fn potential(&self) -> Option<Potential> {
        (**self).potential()
    }

    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        (**self).match_ending(prefix)
    }

    fn match_starting(&self, rest_rev: &[Letter], at_start: bool) -> Option<Match<'_>> {
        (**self).match_starting(rest_rev, at_start)
    }
}

impl RuleSource for RewritingSystem {
    fn flavor(&self) -> Flavor {
        RewritingSystem::flavor(self)
    }

    fn window(&self) -> usize {
        RewritingSystem::window(self)
    }

    fn potential(&self) -> Option<Potential> {
        RewritingSystem::potential(self)
    }

    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        self.matcher().match_ending(prefix)
    }

    fn match_starting(&self, rest_rev: &[Letter], at_start: bool) -> Option<Match<'_>> {
        self.matcher().match_starting(rest_rev, at_start)
    }
}

/// Several rule sources of one flavor acting as a single rule set. Each
/// position takes the best candidate over all members, with the default
/// preference; left-hand sides are assumed pairwise distinct.
pub struct Union<'a> {
    flavor: Flavor,
    members: Vec<&'a dyn RuleSource>,
}

impl<'a> Union<'a> {
    pub fn new(members: Vec<&'a dyn RuleSource>) -> Result<Union<'a>> {
        let flavor = members
            .first()
            .map(|m| m.flavor())
            .ok_or_else(|| Error::Precondition("empty union".into()))?;
        if members.iter().any(|m| m.flavor() != flavor) {
            return Err(Error::Precondition(
                "union of rule sources of different flavors".into(),
            ));
        }
        if members.iter().any(|m| m.potential().is_some()) {
            return Err(Error::Precondition("union members must be strict".into()));
        }
        Ok(Union { flavor, members })
    }

    pub(crate) fn best<'b>(cands: impl Iterator<Item = Match<'b>>) -> Option<Match<'b>> {
        let key = |m: &Match| preference(TieBreak::default(), m.len, m.anchor_start, m.anchor_end);
        cands.fold(None, |best: Option<Match<'b>>, m| match best {
            Some(b) if key(&b) >= key(&m) => Some(b),
            _ => Some(m),
        })
    }
}

impl RuleSource for Union<'_> {
    fn flavor(&self) -> Flavor {
        self.flavor
    }

    fn window(&self) -> usize {
        self.members.iter().map(|m| m.window()).max().unwrap_or(0)
    }

    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        Union::best(self.members.iter().filter_map(|m| m.match_ending(prefix)))
    }

    fn match_starting(&self, rest_rev: &[Letter], at_start: bool) -> Option<Match<'_>> {
        Union::best(
            self.members
                .iter()
                .filter_map(|m| m.match_starting(rest_rev, at_start)),
        )
    }
}

/// One substitution: `lhs` at `start` in the previous word became `rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub rule: Option<usize>,
    pub start: usize,
    pub lhs: Word,
    pub rhs: Word,
    pub anchor_start: bool,
    pub anchor_end: bool,
}

impl Step {
    pub fn end(&self) -> usize {
        self.start + self.lhs.len()
    }

    /// Applies the step to the word it was recorded on.
    pub fn apply(&self, w: &[Letter]) -> Word {
        let mut out = Vec::with_capacity(w.len() + self.rhs.len() - self.lhs.len().min(w.len()));
        out.extend_from_slice(&w[..self.start]);
        out.extend_from_slice(&self.rhs);
        out.extend_from_slice(&w[self.end()..]);
        out
    }
}

/// The words w_0 ... w_t of a run and the step taken between each pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionHistory {
    pub words: Vec<Word>,
    pub steps: Vec<Step>,
}

impl ReductionHistory {
    pub fn start(&self) -> &[Letter] {
        &self.words[0]
    }

    pub fn result(&self) -> &[Letter] {
        self.words.last().expect("history has at least one word")
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks that each step turns its word into the next one.
    pub fn is_consistent(&self) -> bool {
        self.words.len() == self.steps.len() + 1
            && self.steps.iter().enumerate().all(|(i, s)| {
                let w = &self.words[i];
                s.end() <= w.len()
                    && w[s.start..s.end()] == s.lhs[..]
                    && s.apply(w) == self.words[i + 1]
            })
    }
}

fn check_step(steps: usize, limit: usize, strict: bool, m: &Match<'_>) -> Result<()> {
    if strict && m.rhs.len() >= m.len {
        return Err(Error::InvalidSystem(format!(
            "rule of length {} -> {} applied in a strict system",
            m.len,
            m.rhs.len()
        )));
    }
    if steps > limit {
        return Err(Error::StepBudget(limit));
    }
    Ok(())
}

fn budget<S: RuleSource + ?Sized>(src: &S, w: &[Letter]) -> usize {
    match src.potential() {
        None => w.len(),
        Some(p) => p.step_budget(w),
    }
}

/// Runs the engine, calling `on_step(step, left, right_rev)` after each
/// substitution with the buffer holding the new word. Stops early when
/// `on_step` returns false.
pub fn run<S, F>(src: &S, w: &[Letter], mut on_step: F) -> Result<Word>
where
    S: RuleSource + ?Sized,
    F: FnMut(&Step, &[Letter], &[Letter]) -> bool,
{
    let limit = budget(src, w);
    let strict = src.potential().is_none();
    let mut left: Vec<Letter> = Vec::with_capacity(w.len());
    let mut right: Vec<Letter> = w.iter().rev().copied().collect();
    let mut steps = 0usize;
    let back_up = src.window();

    match src.flavor() {
        Flavor::Incremental => {
            while let Some(l) = right.pop() {
                left.push(l);
                let Some(m) = src.match_ending(&left) else {
                    continue;
                };
                let start = left.len() - m.len;
                steps += 1;
                check_step(steps, limit, strict, &m)?;
                let step = Step {
                    rule: m.rule,
                    start,
                    lhs: left[start..].to_vec(),
                    rhs: m.rhs.to_vec(),
                    anchor_start: m.anchor_start,
                    anchor_end: m.anchor_end,
                };
                left.truncate(start);
                right.extend(step.rhs.iter().rev());
                if !on_step(&step, &left, &right) {
                    break;
                }
            }
        }
        Flavor::NonIncremental => {
            while !right.is_empty() {
                let Some(m) = src.match_starting(&right, left.is_empty()) else {
                    left.push(right.pop().unwrap());
                    continue;
                };
                steps += 1;
                check_step(steps, limit, strict, &m)?;
                let cut = right.len() - m.len;
                let step = Step {
                    rule: m.rule,
                    start: left.len(),
                    lhs: right[cut..].iter().rev().copied().collect(),
                    rhs: m.rhs.to_vec(),
                    anchor_start: m.anchor_start,
                    anchor_end: m.anchor_end,
                };
                right.truncate(cut);
                right.extend(step.rhs.iter().rev());
                for _ in 0..back_up.min(left.len()) {
                    right.push(left.pop().unwrap());
                }
                if !on_step(&step, &left, &right) {
                    break;
                }
            }
        }
    }
    left.extend(right.iter().rev());
    Ok(left)
}

/// R(w): rewrites to a fixed point.
pub fn reduce<S: RuleSource + ?Sized>(src: &S, w: &[Letter]) -> Result<Word> {
    run(src, w, |_, _, _| true)
}

pub fn reduce_traced<S: RuleSource + ?Sized>(src: &S, w: &[Letter]) -> Result<ReductionHistory> {
    let mut steps = Vec::new();
    let mut words = vec![w.to_vec()];
    run(src, w, |step, left, right| {
        steps.push(step.clone());
        let mut cur = left.to_vec();
        cur.extend(right.iter().rev());
        words.push(cur);
        true
    })?;
    Ok(ReductionHistory { words, steps })
}

/// Number of substitutions R performs on `w`.
pub fn count_steps<S: RuleSource + ?Sized>(src: &S, w: &[Letter]) -> Result<usize> {
    let mut n = 0;
    run(src, w, |_, _, _| {
        n += 1;
        true
    })?;
    Ok(n)
}

/// Position of the next redex in `w`, as the engine would choose it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redex {
    pub rule: Option<usize>,
    pub start: usize,
    pub len: usize,
    pub rhs: Word,
}

pub fn find_redex<S: RuleSource + ?Sized>(src: &S, w: &[Letter]) -> Option<Redex> {
    match src.flavor() {
        Flavor::Incremental => (1..=w.len()).find_map(|e| {
            src.match_ending(&w[..e]).map(|m| Redex {
                rule: m.rule,
                start: e - m.len,
                len: m.len,
                rhs: m.rhs.into_owned(),
            })
        }),
        Flavor::NonIncremental => {
            let rev: Vec<Letter> = w.iter().rev().copied().collect();
            (0..w.len()).find_map(|s| {
                src.match_starting(&rev[..w.len() - s], s == 0)
                    .map(|m| Redex {
                        rule: m.rule,
                        start: s,
                        len: m.len,
                        rhs: m.rhs.into_owned(),
                    })
            })
        }
    }
}

impl RewritingSystem {
    pub fn find_redex(&self, w: &[Letter]) -> Result<Option<Redex>> {
        self.check_working(w)?;
        Ok(find_redex(self, w))
    }

    pub fn reduce(&self, w: &[Letter]) -> Result<Word> {
        self.check_working(w)?;
        reduce(self, w)
    }

    pub fn reduce_traced(&self, w: &[Letter]) -> Result<ReductionHistory> {
        self.check_working(w)?;
        reduce_traced(self, w)
    }

    /// True iff `w`, a word over the input alphabet, reduces to the empty word.
    pub fn accepts(&self, w: &[Letter]) -> Result<bool> {
        self.check_input(w)?;
        Ok(reduce(self, w)?.is_empty())
    }
}

/// Naive reference semantics: enumerate every occurrence of every rule.
/// Kept deliberately simple for differential tests of the scanner.
pub mod reference {
    use super::*;

    pub fn find_redex(
        flavor: Flavor,
        rules: &[Rule],
        w: &[Letter],
        tie: TieBreak,
    ) -> Option<(usize, usize)> {
        let mut best: Option<((usize, (u8, usize, u8)), usize, usize)> = None;
        for (i, r) in rules.iter().enumerate() {
            let k = r.lhs.len();
            if k == 0 || k > w.len() {
                continue;
            }
            for s in 0..=w.len() - k {
                if w[s..s + k] != r.lhs[..]
                    || (r.anchor_start && s != 0)
                    || (r.anchor_end && s + k != w.len())
                {
                    continue;
                }
                // Smaller position is better, so negate it into the key.
                let pos = match flavor {
                    Flavor::Incremental => usize::MAX - (s + k),
                    Flavor::NonIncremental => usize::MAX - s,
                };
                let key = (pos, preference(tie, k, r.anchor_start, r.anchor_end));
                if best.as_ref().is_none_or(|(b, _, _)| key > *b) {
                    best = Some((key, i, s));
                }
            }
        }
        best.map(|(_, i, s)| (i, s))
    }

    pub fn reduce_traced(
        flavor: Flavor,
        rules: &[Rule],
        w: &[Letter],
        tie: TieBreak,
    ) -> ReductionHistory {
        let mut words = vec![w.to_vec()];
        let mut steps = Vec::new();
        let mut cur = w.to_vec();
        while let Some((i, s)) = find_redex(flavor, rules, &cur, tie) {
            let r = &rules[i];
            let step = Step {
                rule: Some(i),
                start: s,
                lhs: r.lhs.clone(),
                rhs: r.rhs.clone(),
                anchor_start: r.anchor_start,
                anchor_end: r.anchor_end,
            };
            cur = step.apply(&cur);
            steps.push(step);
            words.push(cur.clone());
            if steps.len() > 4 * (w.len() + 1) * (w.len() + 1) {
                break;
            }
        }
        ReductionHistory { words, steps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::letter::{letters, parse_word};

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    fn sys(flavor: Flavor, rules: Vec<Rule>) -> RewritingSystem {
        let mut alphabet: Vec<Letter> = Vec::new();
        for r in &rules {
            for l in r.lhs.iter().chain(&r.rhs) {
                if !alphabet.contains(l) {
                    alphabet.push(*l);
                }
            }
        }
        RewritingSystem::new(flavor, alphabet.clone(), alphabet, rules)
    }

    fn free_group() -> RewritingSystem {
        let rule = |x: &str| Rule::new(w(x), vec![]);
        sys(
            Flavor::Incremental,
            vec![rule("a.A"), rule("A.a"), rule("b.B"), rule("B.b")],
        )
    }

    #[test]
    fn only_occurrence_is_found() {
        let s = sys(
            Flavor::Incremental,
            vec![Rule::new(w("a.b"), w("x")), Rule::new(w("c.b"), w("y"))],
        );
        let r = find_redex(&s, &w("a.c.b")).unwrap();
        assert_eq!((r.rule, r.start), (Some(1), 1));
    }

    #[test]
    fn longest_wins_at_equal_end() {
        let s = sys(
            Flavor::Incremental,
            vec![Rule::new(w("a.b"), w("x")), Rule::new(w("b"), vec![])],
        );
        let r = find_redex(&s, &w("a.b")).unwrap();
        assert_eq!((r.rule, r.start), (Some(0), 0));
    }

    #[test]
    fn anchored_rule_only_at_start() {
        let ab = w("a.b");
        let s = RewritingSystem::new(
            Flavor::Incremental,
            ab.clone(),
            ab,
            vec![Rule::anchored(w("a"), vec![])],
        );
        assert_eq!(find_redex(&s, &w("b.a")), None);
        assert!(find_redex(&s, &w("a.b")).is_some());
    }

    #[test]
    fn anchored_deletion_chain() {
        let s = sys(
            Flavor::Incremental,
            vec![Rule::new(w("a.a"), w("b")), Rule::anchored(w("b"), vec![])],
        );
        let h = s.reduce_traced(&w("a.a.b")).unwrap();
        let names: Vec<String> = h
            .words
            .iter()
            .map(|x| crate::letter::format_word(x))
            .collect();
        assert_eq!(names, vec!["a.a.b", "b.b", "b", ""]);
    }

    #[test]
    fn free_group_examples() {
        let s = free_group();
        assert_eq!(s.reduce(&w("a.A.b")).unwrap(), w("b"));
        let h = s.reduce_traced(&w("a.A")).unwrap();
        assert_eq!(h.words, vec![w("a.A"), vec![]]);
        assert_eq!(h.steps.len(), 1);
        let h = s.reduce_traced(&w("a.b")).unwrap();
        assert_eq!(h.words.len(), 1);
        assert!(s.accepts(&w("a.b.B.A")).unwrap());
        assert!(!s.accepts(&w("a.b")).unwrap());
    }

    #[test]
    fn unknown_letters_are_rejected() {
        let s = free_group();
        assert!(matches!(
            s.reduce(&w("a.q")),
            Err(Error::UnknownLetter { .. })
        ));
    }

    #[test]
    fn non_incremental_prefers_earliest_start() {
        // Incremental picks "b.c" (ends first); non-incremental picks "a.b.c.d" (starts first).
        let rules = vec![Rule::new(w("a.b.c.d"), w("x")), Rule::new(w("b.c"), w("y"))];
        let inc = sys(Flavor::Incremental, rules.clone());
        let non = sys(Flavor::NonIncremental, rules);
        assert_eq!(inc.reduce(&w("a.b.c.d")).unwrap(), w("a.y.d"));
        assert_eq!(non.reduce(&w("a.b.c.d")).unwrap(), w("x"));
    }

    #[test]
    fn end_anchor_matches_only_at_end() {
        let rules = vec![Rule::new(w("a.b"), vec![]).with_anchors(false, true)];
        let s = sys(Flavor::NonIncremental, rules);
        assert_eq!(s.reduce(&w("a.b.a")).unwrap(), w("a.b.a"));
        assert_eq!(s.reduce(&w("a.a.b.b")).unwrap(), w("a.a.b.b"));
        assert_eq!(s.reduce(&w("a.a.b")).unwrap(), w("a"));
    }

    #[test]
    fn end_anchor_needs_full_back_up() {
        // Deleting "c.d" at the end exposes the end-anchored "x.y.z" starting W letters back.
        let rules = vec![
            Rule::new(w("x.y.z"), vec![]).with_anchors(false, true),
            Rule::new(w("c.d"), vec![]),
        ];
        let s = sys(Flavor::NonIncremental, rules.clone());
        let word = w("x.y.z.c.d");
        assert_eq!(s.reduce(&word).unwrap(), Vec::<Letter>::new());
        let naive =
            reference::reduce_traced(Flavor::NonIncremental, &rules, &word, TieBreak::default());
        assert_eq!(s.reduce_traced(&word).unwrap(), naive);
    }

    #[test]
    fn tie_break_modes_differ_only_non_incrementally() {
        let rules = vec![
            Rule::new(w("a.b.c"), w("x")),
            Rule::anchored(w("a.b"), w("y")),
        ];
        let m1 =
            Matcher::with_tie_break(Flavor::NonIncremental, &rules, TieBreak::LengthThenAnchor);
        let m2 =
            Matcher::with_tie_break(Flavor::NonIncremental, &rules, TieBreak::AnchorThenLength);
        assert_eq!(reduce(&m1, &w("a.b.c")).unwrap(), w("x"));
        assert_eq!(reduce(&m2, &w("a.b.c")).unwrap(), w("y.c"));
        let i1 = Matcher::with_tie_break(Flavor::Incremental, &rules, TieBreak::LengthThenAnchor);
        let i2 = Matcher::with_tie_break(Flavor::Incremental, &rules, TieBreak::AnchorThenLength);
        assert_eq!(
            reduce(&i1, &w("a.b.c")).unwrap(),
            reduce(&i2, &w("a.b.c")).unwrap()
        );
    }

    #[test]
    fn history_is_consistent() {
        let s = free_group();
        let h = s.reduce_traced(&w("a.b.B.a.A.A.b")).unwrap();
        assert!(h.is_consistent());
        assert_eq!(h.result(), &w("b")[..]);
        assert_eq!(letters(&["b"]), h.result().to_vec());
    }
}

//! Finite-state Dehn machines, their mimics, and pipelines of reducers.
//!
//! A machine keeps a current position, which is the index of a letter. A
//! non-incremental machine looks at the window of `W` letters starting there,
//! an incremental one at the window ending there. Windows cut short by the
//! word carry a boundary letter, `$` after the last letter or `^` before the
//! first, so that transitions can see the ends of the word.
//!
//! One step: pick the new state from the current state and window, then
//! either substitute the longest lhs of the current state found at the
//! position and move `W` letters left, or move one letter right. The machine
//! stops when the word is empty, or when it is on the last letter and has
//! nothing to substitute.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::engine::{reduce, RuleSource};
use crate::error::{Error, Result};
use crate::letter::{check_base_name, check_name, format_word, Letter, Word};
use crate::system::{check_membership, Flavor, Potential, RewritingSystem, Rule, RuleFile};

pub const END_MARK: &str = "$";
pub const START_MARK: &str = "^";

#[derive(Clone, Debug, PartialEq)]
pub struct DehnMachine {
    flavor: Flavor,
    input: Word,
    working: Word,
    states: Vec<String>,
    rules: Vec<Vec<Rule>>,
    transitions: HashMap<(usize, Word), usize>,
    defaults: Vec<usize>,
    window: usize,
}

/// One configuration: state, word, position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub state: usize,
    pub word: Word,
    pub pos: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MachineRun {
    pub configs: Vec<Config>,
    pub substitutions: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineResult {
    pub word: Word,
    pub state: usize,
    pub run: MachineRun,
}

impl DehnMachine {
    /// State 0 is the start state. `defaults[q]` is the next state for windows
    /// not listed in `transitions`.
    pub fn new(
        flavor: Flavor,
        input: Word,
        working: Word,
        states: Vec<String>,
        rules: Vec<Vec<Rule>>,
        transitions: Vec<(usize, Word, usize)>,
        defaults: Vec<usize>,
    ) -> Result<DehnMachine> {
        let bad = |m: String| Err(Error::InvalidSystem(m));
        if states.is_empty() {
            return bad("a machine needs at least one state".into());
        }
        if rules.len() != states.len() || defaults.len() != states.len() {
            return bad("one rule set and one default transition per state".into());
        }
        let mut names = HashSet::new();
        for s in &states {
            check_base_name(s).map_err(Error::InvalidSystem)?;
            if s.contains('@') || !names.insert(s) {
                return bad(format!("bad or repeated state name {s:?}"));
            }
        }
        check_membership(&input, &working, "working")?;
        if let Some(l) = working
            .iter()
            .find(|l| [END_MARK, START_MARK].contains(&l.name()) || l.name().contains('@'))
        {
            return bad(format!("letter {l} is reserved"));
        }
        for (q, rs) in rules.iter().enumerate() {
            for r in rs {
                if r.anchor_start || r.anchor_end {
                    return bad(format!("state {}: machine rules are unanchored", states[q]));
                }
                if r.lhs.len() <= r.rhs.len() {
                    return bad(format!(
                        "state {}: rule {r} is not length reducing",
                        states[q]
                    ));
                }
                check_membership(&r.lhs, &working, "working")?;
                check_membership(&r.rhs, &working, "working")?;
            }
        }
        let n = states.len();
        if let Some(&d) = defaults.iter().find(|&&d| d >= n) {
            return bad(format!("no state {d}"));
        }
        let window = rules
            .iter()
            .flatten()
            .map(|r| r.lhs.len())
            .max()
            .unwrap_or(0)
            .max(2);
        let mut table = HashMap::new();
        for (q, win, next) in transitions {
            if q >= n || next >= n {
                return bad("transition to or from a missing state".into());
            }
            if !DehnMachine::window_shape_ok(flavor, window, &win, &working) {
                return bad(format!("{} is not a window", format_word(&win)));
            }
            if table.insert((q, win.clone()), next).is_some() {
                return bad(format!(
                    "transition from {} on {} given twice",
                    states[q],
                    format_word(&win)
                ));
            }
        }
        Ok(DehnMachine {
            flavor,
            input,
            working,
            states,
            rules,
            transitions: table,
            defaults,
            window,
        })
    }

    /// Every window a machine of this flavor and width can see.
    pub fn all_windows(flavor: Flavor, w: usize, alphabet: &[Letter]) -> Vec<Word> {
        let mut out = Vec::new();
        let mut layer: Vec<Word> = vec![vec![]];
        for k in 1..=w {
            layer = layer
                .iter()
                .flat_map(|p| alphabet.iter().map(move |&l| [&p[..], &[l]].concat()))
                .collect();
            for x in &layer {
                let mut win = x.clone();
                match flavor {
                    Flavor::NonIncremental if k < w => win.push(Letter::new(END_MARK)),
                    Flavor::Incremental if k < w => win.insert(0, Letter::new(START_MARK)),
                    _ => {}
                }
                out.push(win);
            }
        }
        out
    }

    /// Builds the transition table by evaluating `next` on every window.
    pub fn tabulated(
        flavor: Flavor,
        input: Word,
        working: Word,
        states: Vec<String>,
        rules: Vec<Vec<Rule>>,
        next: impl Fn(usize, &[Letter]) -> usize,
    ) -> Result<DehnMachine> {
        let n = states.len();
        let w = rules
            .iter()
            .flatten()
            .map(|r| r.lhs.len())
            .max()
            .unwrap_or(0)
            .max(2);
        let mut transitions = Vec::new();
        for win in DehnMachine::all_windows(flavor, w, &working) {
            for q in 0..n {
                let t = next(q, &win);
                if t != q {
                    transitions.push((q, win.clone(), t));
                }
            }
        }
        DehnMachine::new(
            flavor,
            input,
            working,
            states,
            rules,
            transitions,
            (0..n).collect(),
        )
    }

    /// A machine with one state, which behaves as the rewriting algorithm of `sys`.
    pub fn single_state(sys: &RewritingSystem) -> Result<DehnMachine> {
        DehnMachine::new(
            sys.flavor(),
            sys.input_alphabet().to_vec(),
            sys.working_alphabet().to_vec(),
            vec!["q0".into()],
            vec![sys.rules().to_vec()],
            vec![],
            vec![0],
        )
    }

    fn window_shape_ok(flavor: Flavor, w: usize, win: &[Letter], working: &[Letter]) -> bool {
        let (mark, body) = match flavor {
            Flavor::NonIncremental => match win.split_last() {
                Some((l, body)) if l.name() == END_MARK => (true, body),
                _ => (false, win),
            },
            Flavor::Incremental => match win.split_first() {
                Some((l, body)) if l.name() == START_MARK => (true, body),
                _ => (false, win),
            },
        };
        !body.is_empty()
            && (if mark {
                body.len() < w
            } else {
                body.len() == w
            })
            && body.iter().all(|l| working.contains(l))
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn input_alphabet(&self) -> &[Letter] {
        &self.input
    }

    pub fn working_alphabet(&self) -> &[Letter] {
        &self.working
    }

    pub fn rules(&self, state: usize) -> &[Rule] {
        &self.rules[state]
    }

    pub fn next_state(&self, state: usize, window: &[Letter]) -> usize {
        self.transitions
            .get(&(state, window.to_vec()))
            .copied()
            .unwrap_or(self.defaults[state])
    }

    /// The window seen at `pos`, boundary letter included.
    pub fn window_at(&self, w: &[Letter], pos: usize) -> Word {
        let k = self.window;
        match self.flavor {
            Flavor::NonIncremental => {
                let end = (pos + k).min(w.len());
                let mut win = w[pos..end].to_vec();
                if w.len() - pos < k {
                    win.push(Letter::new(END_MARK));
                }
                win
            }
            Flavor::Incremental => {
                let start = (pos + 1).saturating_sub(k);
                let mut win = Vec::with_capacity(k + 1);
                if pos + 1 < k {
                    win.push(Letter::new(START_MARK));
                }
                win.extend_from_slice(&w[start..=pos]);
                win
            }
        }
    }

    /// Longest lhs of `state` at `pos` (starting there or ending there,
    /// according to flavor), as (start, rule).
    fn redex(&self, state: usize, w: &[Letter], pos: usize) -> Option<(usize, &Rule)> {
        let fits = |r: &Rule| match self.flavor {
            Flavor::NonIncremental => w[pos..].starts_with(&r.lhs),
            Flavor::Incremental => w[..=pos].ends_with(&r.lhs),
        };
        let r = self.rules[state]
            .iter()
            .filter(|r| fits(r))
            .max_by_key(|r| r.lhs.len())?;
        let start = match self.flavor {
            Flavor::NonIncremental => pos,
            Flavor::Incremental => pos + 1 - r.lhs.len(),
        };
        Some((start, r))
    }

    pub fn to_json(&self) -> String {
        let names = |w: &[Letter]| w.iter().map(|l| l.name().to_string()).collect::<Vec<_>>();
        let mut transitions: Vec<(String, Vec<String>, String)> = self
            .transitions
            .iter()
            .map(|((q, win), n)| (self.states[*q].clone(), names(win), self.states[*n].clone()))
            .collect();
        transitions.sort();
        let file = MachineFile {
            flavor: self.flavor,
            input_alphabet: names(&self.input),
            working_alphabet: names(&self.working),
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(q, name)| StateFile {
                    name: name.clone(),
                    rules: self.rules[q]
                        .iter()
                        .map(|r| RuleFile {
                            lhs: names(&r.lhs),
                            rhs: names(&r.rhs),
                            anchor_start: false,
                            anchor_end: false,
                        })
                        .collect(),
                    default: self.states[self.defaults[q]].clone(),
                })
                .collect(),
            transitions,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("machine serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<DehnMachine> {
        let file: MachineFile = serde_json::from_str(text)?;
        let letter = |n: &String| -> Result<Letter> {
            if n != END_MARK && n != START_MARK {
                check_name(n).map_err(Error::Parse)?;
            }
            Ok(Letter::new(n))
        };
        let word = |v: &[String]| -> Result<Word> { v.iter().map(letter).collect() };
        let names: Vec<String> = file.states.iter().map(|s| s.name.clone()).collect();
        let index = |n: &String| -> Result<usize> {
            names
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| Error::Parse(format!("unknown state {n:?}")))
        };
        let mut rules = Vec::new();
        let mut defaults = Vec::new();
        for s in &file.states {
            let mut rs = Vec::new();
            for r in &s.rules {
                rs.push(
                    Rule::new(word(&r.lhs)?, word(&r.rhs)?)
                        .with_anchors(r.anchor_start, r.anchor_end),
                );
            }
            rules.push(rs);
            defaults.push(index(&s.default)?);
        }
        let mut transitions = Vec::new();
        for (from, win, to) in &file.transitions {
            transitions.push((index(from)?, word(win)?, index(to)?));
        }
        DehnMachine::new(
            file.flavor,
            word(&file.input_alphabet)?,
            word(&file.working_alphabet)?,
            names,
            rules,
            transitions,
            defaults,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct MachineFile {
    flavor: Flavor,
    input_alphabet: Vec<String>,
    working_alphabet: Vec<String>,
    states: Vec<StateFile>,
    #[serde(default)]
    transitions: Vec<(String, Vec<String>, String)>,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    name: String,
    #[serde(default)]
    rules: Vec<RuleFile>,
    default: String,
}

/// Runs `m` on `w`, recording every configuration.
pub fn run_machine(m: &DehnMachine, w: &[Letter]) -> Result<MachineResult> {
    m.check_working(w)?;
    let mut word = w.to_vec();
    let mut state = 0;
    let mut pos = 0;
    let mut run = MachineRun::default();
    loop {
        run.configs.push(Config {
            state,
            word: word.clone(),
            pos,
        });
        if word.is_empty() {
            break;
        }
        let next = m.next_state(state, &m.window_at(&word, pos));
        match m.redex(state, &word, pos) {
            Some((start, r)) => {
                let end = start + r.lhs.len();
                word.splice(start..end, r.rhs.iter().copied());
                pos = pos
                    .saturating_sub(m.window)
                    .min(word.len().saturating_sub(1));
                run.substitutions += 1;
            }
            None if pos + 1 == word.len() => break,
            None => pos += 1,
        }
        state = next;
    }
    Ok(MachineResult { word, state, run })
}

impl DehnMachine {
    fn check_working(&self, w: &[Letter]) -> Result<()> {
        check_membership(w, &self.working, "working")
    }
}

/// Letters of the mimic: each working letter in white and in one color per
/// state other than the start state, whose color is the plain letter, plus a
/// colored blank per such state.
pub struct Colors {
    states: Vec<String>,
}

impl Colors {
    pub fn white(&self, a: Letter) -> Letter {
        Letter::new(&format!("{a}@"))
    }

    pub fn colored(&self, a: Letter, state: usize) -> Letter {
        if state == 0 {
            a
        } else {
            Letter::new(&format!("{a}@{}", self.states[state]))
        }
    }

    pub fn blank(&self, state: usize) -> Letter {
        assert!(state > 0, "the start state has no blank");
        Letter::new(&format!("@{}", self.states[state]))
    }

    /// Splits a mimic letter into (plain letter, color); white is `None`,
    /// a blank has no letter.
    pub fn decode(&self, l: Letter) -> (Option<Letter>, Option<usize>) {
        let name = l.name();
        match name.rfind('@') {
            None => (Some(l), Some(0)),
            Some(i) => {
                let (a, c) = (&name[..i], &name[i + 1..]);
                let letter = (!a.is_empty()).then(|| Letter::new(a));
                if c.is_empty() {
                    (letter, None)
                } else {
                    (letter, self.states.iter().position(|s| s == c))
                }
            }
        }
    }

    /// The word with colors and blanks erased.
    pub fn erase(&self, w: &[Letter]) -> Word {
        w.iter().filter_map(|&l| self.decode(l).0).collect()
    }
}

/// A weakly decreasing rewriting system following `m`: the first letter that
/// is not white carries the machine's state and position, and every rule
/// performs one machine step there.
pub fn mimic(m: &DehnMachine) -> RewritingSystem {
    let colors = Colors {
        states: m.states.clone(),
    };
    let alpha = &m.working;
    let w = m.window;
    let words_of = |len: usize| -> Vec<Word> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .iter()
                .flat_map(|p| alpha.iter().map(move |&l| [&p[..], &[l]].concat()))
                .collect();
        }
        out
    };
    let whites = |y: &[Letter]| -> Word { y.iter().map(|&l| colors.white(l)).collect() };
    // Recolors the first letter of a plain word with `next`; with nothing to
    // color, a blank holds the state.
    let lead = |mut plain: Word, next: usize| -> Word {
        if let Some(f) = plain.first_mut() {
            *f = colors.colored(*f, next);
        } else if next != 0 {
            plain.push(colors.blank(next));
        }
        plain
    };
    let mut rules = Vec::new();

    for q in 0..m.states.len() {
        // `x` is the window without boundary letter; `short` says the word
        // ends (starts, for incremental machines) at its edge.
        for x in (1..=w).flat_map(words_of) {
            let short = x.len() < w;
            let k = x.len();
            let mut marked = x.clone();
            match m.flavor {
                Flavor::NonIncremental if short => marked.push(Letter::new(END_MARK)),
                Flavor::Incremental if short => marked.insert(0, Letter::new(START_MARK)),
                _ => {}
            }
            let next = m.next_state(q, &marked);
            match m.flavor {
                Flavor::NonIncremental => {
                    let mut cx = x.clone();
                    cx[0] = colors.colored(x[0], q);
                    match m.redex(q, &x, 0) {
                        Some((_, r)) => {
                            // Up to `W` whites before: the machine backs up there.
                            for ys in (0..=w).flat_map(words_of) {
                                let lhs = [whites(&ys), cx.clone()].concat();
                                let plain = [&ys[..], &r.rhs, &x[r.lhs.len()..]].concat();
                                rules.push(
                                    Rule::new(lhs, lead(plain, next))
                                        .with_anchors(ys.len() < w, short),
                                );
                            }
                        }
                        None if k == 1 => {}
                        None => {
                            let mut rhs = cx.clone();
                            rhs[0] = colors.white(x[0]);
                            rhs[1] = colors.colored(x[1], next);
                            rules.push(Rule::new(cx, rhs).with_anchors(false, short));
                        }
                    }
                }
                Flavor::Incremental => {
                    let cx = [whites(&x[..k - 1]), vec![colors.colored(x[k - 1], q)]].concat();
                    match m.redex(q, &x, k - 1) {
                        Some((start, r)) => {
                            let plain = [&x[..start], &r.rhs[..]].concat();
                            // The machine backs up to the letter before the
                            // window, or to the start of the word.
                            rules.push(
                                Rule::new(cx.clone(), lead(plain.clone(), next))
                                    .with_anchors(true, false),
                            );
                            if !short {
                                for &y in alpha {
                                    let lhs = [vec![colors.white(y)], cx.clone()].concat();
                                    rules.push(Rule::new(
                                        lhs,
                                        lead([&[y][..], &plain].concat(), next),
                                    ));
                                }
                            }
                        }
                        None => {
                            for &b in alpha {
                                let lhs = [cx.clone(), vec![b]].concat();
                                let rhs = [whites(&x), vec![colors.colored(b, next)]].concat();
                                rules.push(Rule::new(lhs, rhs).with_anchors(short, false));
                            }
                        }
                    }
                }
            }
        }
        if q > 0 {
            for &b in alpha {
                rules.push(Rule::new(
                    vec![colors.blank(q), b],
                    vec![colors.colored(b, q)],
                ));
            }
        }
    }

    let mut working = m.working.clone();
    for q in 1..m.states.len() {
        working.extend(m.working.iter().map(|&l| colors.colored(l, q)));
        working.push(colors.blank(q));
    }
    working.extend(m.working.iter().map(|&l| colors.white(l)));
    RewritingSystem::new(m.flavor, m.input.clone(), working, rules)
        .with_potential(Potential::ColoredPosition)
}

/// The colors used by the mimic of `m`.
pub fn mimic_colors(m: &DehnMachine) -> Colors {
    Colors {
        states: m.states.clone(),
    }
}

/// Reducers applied one after the other. Each stage lists the letters it
/// accepts; a word that leaves one stage with other letters is an error.
pub struct Pipeline<'a> {
    stages: Vec<(&'a dyn RuleSource, Word)>,
}

impl<'a> Pipeline<'a> {
    pub fn new() -> Pipeline<'a> {
        Pipeline { stages: Vec::new() }
    }

    pub fn stage(mut self, src: &'a dyn RuleSource, accepts: Word) -> Pipeline<'a> {
        self.stages.push((src, accepts));
        self
    }

    /// A stage accepting the system's working alphabet.
    pub fn system(self, sys: &'a RewritingSystem) -> Pipeline<'a> {
        let a = sys.working_alphabet().to_vec();
        self.stage(sys, a)
    }

    pub fn of_systems(systems: &[&'a RewritingSystem]) -> Pipeline<'a> {
        systems.iter().fold(Pipeline::new(), |p, s| p.system(s))
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn reduce(&self, w: &[Letter]) -> Result<Word> {
        let mut cur = w.to_vec();
        for (i, (src, accepts)) in self.stages.iter().enumerate() {
            check_membership(&cur, accepts, "working").map_err(|e| match e {
                Error::UnknownLetter { letter, .. } if i > 0 => Error::Precondition(format!(
                    "stage {} produced {letter}, which stage {} does not accept",
                    i,
                    i + 1
                )),
                e => e,
            })?;
            cur = reduce(*src, &cur)?;
        }
        Ok(cur)
    }
}

impl Default for Pipeline<'_> {
    fn default() -> Self {
        Pipeline::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::random_word;
    use crate::letter::parse_word;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    fn rule(l: &str, r: &str) -> Rule {
        Rule::new(w(l), w(r))
    }

    fn cancellation(flavor: Flavor) -> RewritingSystem {
        let a = w("a.A.b.B");
        let rules = vec![
            rule("a.A", ""),
            rule("A.a", ""),
            rule("b.B", ""),
            rule("B.b", ""),
        ];
        RewritingSystem::new(flavor, a.clone(), a, rules)
    }

    // State 0 rewrites a-blocks; a window starting at # switches to state 1,
    // which rewrites b-blocks.
    fn hash_machine() -> DehnMachine {
        let a = w("a.b.#");
        DehnMachine::tabulated(
            Flavor::NonIncremental,
            a.clone(),
            a,
            vec!["blocks".into(), "hash".into()],
            vec![vec![rule("a.a", "b")], vec![rule("b.b", "a")]],
            |q, win| if q == 0 && win[0].name() == "#" { 1 } else { q },
        )
        .unwrap()
    }

    // Two states over a, b that can finish empty in either state.
    fn two_state(flavor: Flavor) -> DehnMachine {
        let a = w("a.b");
        DehnMachine::tabulated(
            flavor,
            a.clone(),
            a,
            vec!["p".into(), "q".into()],
            vec![
                vec![rule("a.b", "")],
                vec![rule("b.a", ""), rule("b.b.b", "b")],
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

    #[test]
    fn one_state_is_the_rewriting_algorithm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for flavor in [Flavor::Incremental, Flavor::NonIncremental] {
            let sys = cancellation(flavor);
            let m = DehnMachine::single_state(&sys).unwrap();
            for i in 0..500 {
                let x = random_word(&mut rng, sys.working_alphabet(), i % 30);
                let out = run_machine(&m, &x).unwrap();
                assert_eq!(out.word, reduce(&sys, &x).unwrap(), "{}", format_word(&x));
                assert!(out.run.substitutions <= x.len());
            }
        }
    }

    #[test]
    fn one_state_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alpha = w("a.b.c");
        for round in 0..200 {
            let flavor = if round % 2 == 0 {
                Flavor::Incremental
            } else {
                Flavor::NonIncremental
            };
            let mut rules: Vec<Rule> = Vec::new();
            for _ in 0..rng.gen_range(1..6) {
                let k = rng.gen_range(1..=4);
                let lhs: Word = (0..k).map(|_| alpha[rng.gen_range(0..3)]).collect();
                let rhs: Word = (0..rng.gen_range(0..k))
                    .map(|_| alpha[rng.gen_range(0..3)])
                    .collect();
                if rules.iter().all(|r| r.lhs != lhs) {
                    rules.push(Rule::new(lhs, rhs));
                }
            }
            let sys = RewritingSystem::new(flavor, alpha.clone(), alpha.clone(), rules);
            let m = DehnMachine::single_state(&sys).unwrap();
            for _ in 0..20 {
                let n = rng.gen_range(0..16);
                let x = random_word(&mut rng, &alpha, n);
                assert_eq!(run_machine(&m, &x).unwrap().word, reduce(&sys, &x).unwrap());
            }
        }
    }

    #[test]
    fn hash_machine_by_hand() {
        let m = hash_machine();
        let cases = [
            ("", "", 0),
            ("a.a.a.a", "b.b", 0),
            ("#.a.a.a.a", "#.a.a.a.a", 1),
            ("a.a.#.b.b", "b.#.a", 1),
            ("a.a.a.#", "b.a.#", 0),
            ("b.b.a.a.#.b.b", "b.b.b.#.a", 1),
        ];
        for (input, word, state) in cases {
            let out = run_machine(&m, &w(input)).unwrap();
            assert_eq!(
                (format_word(&out.word), out.state),
                (word.to_string(), state),
                "{input}"
            );
        }
    }

    #[test]
    fn runs_are_single_steps() {
        let m = hash_machine();
        let out = run_machine(&m, &w("b.b.a.a.#.b.b")).unwrap();
        let c = &out.run.configs;
        assert_eq!(
            c[0],
            Config {
                state: 0,
                word: w("b.b.a.a.#.b.b"),
                pos: 0
            }
        );
        for pair in c.windows(2) {
            let (x, y) = (&pair[0], &pair[1]);
            let moved_right = y.word == x.word && y.pos == x.pos + 1;
            let substituted =
                y.word.len() < x.word.len() && y.pos == x.pos.saturating_sub(m.window());
            assert!(moved_right || substituted, "{x:?} -> {y:?}");
        }
        assert_eq!(out.run.substitutions, 2);
    }

    fn check_mimic(m: &DehnMachine, x: &[Letter]) {
        let sys = mimic(m);
        let colors = mimic_colors(m);
        let out = run_machine(m, x).unwrap();
        let trace = crate::engine::reduce_traced(&sys, x).unwrap();
        for word in &trace.words {
            // White, then at most one colored letter or blank, then plain.
            let first = word
                .iter()
                .position(|&l| colors.decode(l).1.is_some())
                .unwrap_or(word.len());
            assert!(word[..first].iter().all(|&l| colors.decode(l).1.is_none()));
            assert!(
                word.iter()
                    .skip(first + 1)
                    .all(|&l| colors.decode(l) == (Some(l), Some(0))),
                "{}",
                format_word(word)
            );
        }
        let r = trace.result();
        assert_eq!(colors.erase(r), out.word, "{}", format_word(x));
        assert_eq!(r.is_empty(), out.word.is_empty() && out.state == 0);
        if out.word.is_empty() && out.state != 0 {
            assert_eq!(r[..], [colors.blank(out.state)]);
        }
        if let Some(&last) = r.last() {
            if !out.word.is_empty() {
                assert_eq!(colors.decode(last).1, Some(out.state), "{}", format_word(x));
            }
        }
    }

    #[test]
    fn mimic_exhaustive() {
        for flavor in [Flavor::NonIncremental, Flavor::Incremental] {
            let m = two_state(flavor);
            let alpha = w("a.b");
            let mut layer: Vec<Word> = vec![vec![]];
            for _ in 0..=8 {
                for x in &layer {
                    check_mimic(&m, x);
                }
                layer = layer
                    .iter()
                    .flat_map(|p| alpha.iter().map(move |&l| [&p[..], &[l]].concat()))
                    .collect();
            }
        }
    }

    #[test]
    fn mimic_ends_in_a_blank() {
        let m = two_state(Flavor::NonIncremental);
        let sys = mimic(&m);
        let alpha = w("a.b");
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut found = false;
        for n in 1..10 {
            for _ in 0..200 {
                let x = random_word(&mut rng, &alpha, n);
                let out = run_machine(&m, &x).unwrap();
                if out.word.is_empty() && out.state != 0 {
                    let r = reduce(&sys, &x).unwrap();
                    assert_eq!(r, [mimic_colors(&m).blank(out.state)]);
                    found = true;
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn mimic_of_cancellation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for flavor in [Flavor::NonIncremental, Flavor::Incremental] {
            let m = DehnMachine::single_state(&cancellation(flavor)).unwrap();
            let sys = mimic(&m);
            for i in 0..5000 {
                let x = random_word(&mut rng, m.input_alphabet(), 2 * (i % 12));
                let machine = run_machine(&m, &x).unwrap();
                assert_eq!(sys.accepts(&x).unwrap(), machine.word.is_empty());
            }
        }
    }

    #[test]
    fn mimic_of_a_machine_that_deletes_nothing() {
        let a = w("a.b");
        let m = DehnMachine::new(
            Flavor::NonIncremental,
            a.clone(),
            a.clone(),
            vec!["q".into()],
            vec![vec![]],
            vec![],
            vec![0],
        )
        .unwrap();
        let sys = mimic(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..30 {
            let x = random_word(&mut rng, &a, n);
            let r = reduce(&sys, &x).unwrap();
            assert_eq!(r.len(), x.len());
            assert_eq!(mimic_colors(&m).erase(&r), x);
        }
    }

    #[test]
    fn json_round_trip() {
        let m = two_state(Flavor::Incremental);
        let back = DehnMachine::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(DehnMachine::from_json("{}").is_err());
    }

    #[test]
    fn rejects_bad_machines() {
        let a = w("a.b");
        let grow = DehnMachine::new(
            Flavor::Incremental,
            a.clone(),
            a.clone(),
            vec!["q".into()],
            vec![vec![rule("a", "b")]],
            vec![],
            vec![0],
        );
        assert!(grow.is_err());
        let missing = DehnMachine::new(
            Flavor::Incremental,
            a.clone(),
            a.clone(),
            vec!["q".into()],
            vec![vec![]],
            vec![],
            vec![3],
        );
        assert!(missing.is_err());
    }

    #[test]
    fn pipelines() {
        let f = cancellation(Flavor::Incremental);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let one = Pipeline::of_systems(&[&f]);
        let two = Pipeline::of_systems(&[&f, &f]);
        for i in 0..300 {
            let x = random_word(&mut rng, f.working_alphabet(), i % 20);
            let r = reduce(&f, &x).unwrap();
            assert_eq!(one.reduce(&x).unwrap(), r);
            assert_eq!(two.reduce(&x).unwrap(), r);
        }
        let other = RewritingSystem::new(Flavor::Incremental, w("c"), w("c"), vec![]);
        let bad = Pipeline::of_systems(&[&f, &other]);
        assert!(bad.reduce(&w("a")).is_err());
        assert!(bad.reduce(&w("a.A")).is_ok());
    }

    #[test]
    fn dihedral_pipeline() {
        use crate::constructions::infinite_dihedral;
        use crate::expanding::integer_system;
        use crate::groups::{Dihedral, GroupOracle};
        let ints = integer_system(10, 5, None)
            .unwrap()
            .to_system(1_000_000)
            .unwrap();
        let d = infinite_dihedral(&ints).unwrap();
        let pipe = Pipeline::new()
            .system(d.translation_rules())
            .stage(d.subgroup_system(), d.subgroup_system().input_alphabet());
        let oracle = Dihedral::new("r", "R", "s");
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut tried = 0;
        while tried < 1000 {
            let n = rng.gen_range(0..30);
            let x = random_word(&mut rng, oracle.generators(), n);
            if x.iter().filter(|l| l.name() == "s").count() % 2 == 1 {
                continue;
            }
            tried += 1;
            let piped = pipe.reduce(&x).unwrap();
            assert_eq!(
                piped.is_empty(),
                oracle.is_trivial(&x).unwrap(),
                "{}",
                format_word(&x)
            );
            assert_eq!(piped.is_empty(), d.reduce(&x).unwrap().is_empty());
        }
    }
}

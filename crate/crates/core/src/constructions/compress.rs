//! Letters that stand for short words, and the weakly decreasing system that
//! reads them.

use std::borrow::Cow;
use std::collections::HashSet;

use crate::engine::{find_redex, Match, Matcher, Redex, RuleSource};
use crate::error::{Error, Result};
use crate::letter::{write_out, Letter, Word};
use crate::system::{merge_rules_with, Flavor, Potential, RewritingSystem, Rule};

/// All compressed letters with payloads of length `lo..=hi` over `alphabet`,
/// shortest first and lexicographic in the order of `alphabet` within a length.
pub fn compressed_alphabet(alphabet: &[Letter], lo: usize, hi: usize) -> Word {
    let mut out = Vec::new();
    let mut layer: Vec<Word> = vec![Vec::new()];
    for len in 1..=hi {
        layer = layer
            .iter()
            .flat_map(|w| alphabet.iter().map(move |&a| [w.as_slice(), &[a]].concat()))
            .collect();
        if len >= lo {
            out.extend(layer.iter().map(|w| Letter::compressed(w)));
        }
    }
    out
}

/// Splits `x` into letters of `n` base letters each (the last may be shorter).
pub fn chunk(x: &[Letter], n: usize) -> Word {
    x.chunks(n).map(Letter::compressed).collect()
}

/// The base system seen through filters on its anchored rules, so that a
/// subword can be treated as touching or not touching the ends of the word.
pub(crate) struct BaseView {
    pub flavor: Flavor,
    pub window: usize,
    pub input: Word,
    pub working: Word,
    alphabet: HashSet<Letter>,
    // Indexed by `start as usize | (end as usize) << 1`.
    views: [Matcher; 4],
}

impl BaseView {
    pub fn new(sys: &RewritingSystem) -> BaseView {
        let view = |start: bool, end: bool| {
            let rules: Vec<Rule> = sys
                .rules()
                .iter()
                .filter(|r| (start || !r.anchor_start) && (end || !r.anchor_end))
                .cloned()
                .collect();
            Matcher::build(sys.flavor(), &rules)
        };
        BaseView {
            flavor: sys.flavor(),
            window: sys.window(),
            input: sys.input_alphabet().to_vec(),
            working: sys.working_alphabet().to_vec(),
            alphabet: sys.working_alphabet().iter().copied().collect(),
            views: [
                view(false, false),
                view(true, false),
                view(false, true),
                view(true, true),
            ],
        }
    }

    pub fn matcher(&self, at_start: bool, at_end: bool) -> &Matcher {
        &self.views[at_start as usize | (at_end as usize) << 1]
    }

    /// The substitution the base system makes first in `x`, where `x` is a
    /// subword that may or may not reach either end of the word.
    pub fn first(&self, x: &[Letter], at_start: bool, at_end: bool) -> Option<Redex> {
        find_redex(self.matcher(at_start, at_end), x)
    }

    /// Payload of `l` if it is a compressed letter over the base working
    /// alphabet with at most `max` letters.
    pub fn payload(&self, l: Letter, max: usize) -> Option<&'static [Letter]> {
        l.payload()
            .filter(|p| p.len() <= max && p.iter().all(|a| self.alphabet.contains(a)))
    }
}

/// Rewrites the letters of `u` that overlap the base substitution `r` (made
/// in the write-out of `u`) and leaves the others alone.
pub(crate) fn splice(u: &[Letter], r: &Redex, n: usize) -> Word {
    let mut out = Vec::with_capacity(u.len());
    let mut middle = Vec::new();
    let mut pos = 0;
    let mut in_middle = false;
    let end = r.start + r.len;
    for &l in u {
        let p = l.payload().unwrap();
        let (a, b) = (pos, pos + p.len());
        pos = b;
        if b <= r.start || (a >= end && !in_middle) {
            out.push(l);
            continue;
        }
        if a >= end {
            out.extend(chunk(&middle, n));
            middle.clear();
            in_middle = false;
            out.push(l);
            continue;
        }
        if !in_middle {
            in_middle = true;
            let keep = r.start - a;
            middle.extend_from_slice(&p[..keep]);
            middle.extend_from_slice(&r.rhs);
        }
        if b > end {
            middle.extend_from_slice(&p[end - a..]);
        }
    }
    out.extend(chunk(&middle, n));
    out
}

/// The weakly decreasing system over compressed letters of length at most
/// `n` that mirrors `base` one substitution at a time. Rules are computed on
/// demand.
pub struct Compressed {
    view: BaseView,
    n: usize,
}

impl Compressed {
    pub fn new(base: &RewritingSystem, n: usize) -> Result<Compressed> {
        if n == 0 {
            return Err(Error::Precondition("compression needs n >= 1".into()));
        }
        Ok(Compressed {
            view: BaseView::new(base),
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn input_alphabet(&self) -> Word {
        compressed_alphabet(&self.view.input, 1, self.n)
    }

    pub fn working_alphabet(&self) -> Word {
        compressed_alphabet(&self.view.working, 1, self.n)
    }

    /// Compressed input word for a base input word, in blocks of `n`.
    pub fn encode(&self, w: &[Letter]) -> Word {
        chunk(w, self.n)
    }

    /// The rule with left-hand side `u` and the given anchors, if there is one.
    pub fn rule_for(&self, u: &[Letter], anchor_start: bool, anchor_end: bool) -> Option<Word> {
        let x = write_out(u);
        let r = self.view.first(&x, anchor_start, anchor_end)?;
        if self.view.flavor == Flavor::NonIncremental
            && !anchor_end
            && x.len() - r.start < self.view.window
        {
            return None;
        }
        Some(splice(u, &r, self.n))
    }

    fn run_of_letters<'w>(&self, w: impl Iterator<Item = &'w Letter>) -> usize {
        w.take(self.view.window)
            .take_while(|l| self.view.payload(**l, self.n).is_some())
            .count()
    }

    /// Every rule, enumerated; fails past `max_rules`.
    pub fn to_system(&self, max_rules: usize) -> Result<RewritingSystem> {
        let alpha = self.working_alphabet();
        let w = self.view.window;
        let total: f64 = (1..=w).map(|k| (alpha.len() as f64).powi(k as i32)).sum();
        if total > max_rules as f64 {
            return Err(Error::Budget(format!(
                "about {total:.0} candidate left-hand sides"
            )));
        }
        let anchors: &[(bool, bool)] = match self.view.flavor {
            Flavor::Incremental => &[(false, false), (true, false)],
            Flavor::NonIncremental => &[(false, false), (true, false), (false, true), (true, true)],
        };
        let mut rules = Vec::new();
        let mut layer: Vec<Word> = vec![Vec::new()];
        for _ in 0..w {
            layer = layer
                .iter()
                .flat_map(|u| alpha.iter().map(move |&a| [u.as_slice(), &[a]].concat()))
                .collect();
            for u in &layer {
                for &(s, e) in anchors {
                    if let Some(rhs) = self.rule_for(u, s, e) {
                        rules.push(Rule::new(u.clone(), rhs).with_anchors(s, e));
                        if rules.len() > max_rules {
                            return Err(Error::Budget(format!("more than {max_rules} rules")));
                        }
                    }
                }
            }
        }
        merge_rules_with(
            self.view.flavor,
            self.input_alphabet(),
            alpha,
            rules,
            Some(Potential::WrittenOutLength),
        )
    }
}

impl RuleSource for Compressed {
    fn flavor(&self) -> Flavor {
        self.view.flavor
    }

    fn window(&self) -> usize {
        self.view.window
    }

    fn potential(&self) -> Option<Potential> {
        Some(Potential::WrittenOutLength)
    }

    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        // Containing a base lhs is inherited by longer words, so only the
        // longest candidate needs checking.
        let len = self.run_of_letters(prefix.iter().rev());
        let anchored = len == prefix.len();
        let u = &prefix[prefix.len() - len..];
        let rhs = self.rule_for(u, anchored, false)?;
        Some(Match {
            len,
            rule: None,
            rhs: Cow::Owned(rhs),
            anchor_start: anchored,
            anchor_end: false,
        })
    }

    fn match_starting(&self, rest_rev: &[Letter], at_start: bool) -> Option<Match<'_>> {
        let max = self.run_of_letters(rest_rev.iter().rev());
        let u: Word = rest_rev.iter().rev().take(max).copied().collect();
        (1..=max).rev().find_map(|len| {
            let end = len == rest_rev.len();
            let rhs = self.rule_for(&u[..len], at_start, end)?;
            Some(Match {
                len,
                rule: None,
                rhs: Cow::Owned(rhs),
                anchor_start: at_start,
                anchor_end: end,
            })
        })
    }
}

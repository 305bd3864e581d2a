//! Rewriting systems, their validation, and the JSON file format.

use std::collections::{HashMap, HashSet};
use std::fmt;

use once_cell::sync::OnceCell;
use serde::{Deserialize, Serialize};

use crate::engine::Matcher;
use crate::error::{Error, Result};
use crate::letter::{check_name, format_word, write_out, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Incremental,
    NonIncremental,
}

/// Termination measure of a weakly decreasing system. Strict systems have none.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Potential {
    /// Every rule shortens the written-out word (basic compression).
    WrittenOutLength,
    /// Lexicographic (length, distance of the first colored letter from the end),
    /// used by machine mimics.
    ColoredPosition,
}

impl Potential {
    pub fn step_budget(self, w: &[Letter]) -> usize {
        match self {
            Potential::WrittenOutLength => write_out(w).len(),
            Potential::ColoredPosition => 3 * (w.len() + 1) * (w.len() + 1) + 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: Word,
    pub rhs: Word,
    pub anchor_start: bool,
    pub anchor_end: bool,
}

impl Rule {
    pub fn new(lhs: Word, rhs: Word) -> Rule {
        Rule {
            lhs,
            rhs,
            anchor_start: false,
            anchor_end: false,
        }
    }

    pub fn anchored(lhs: Word, rhs: Word) -> Rule {
        Rule {
            lhs,
            rhs,
            anchor_start: true,
            anchor_end: false,
        }
    }

    pub fn with_anchors(mut self, start: bool, end: bool) -> Rule {
        self.anchor_start = start;
        self.anchor_end = end;
        self
    }

    /// The decorated lhs, e.g. `^a.b$`.
    pub fn decorated_lhs(&self) -> String {
        format!(
            "{}{}{}",
            if self.anchor_start { "^" } else { "" },
            format_word(&self.lhs),
            if self.anchor_end { "$" } else { "" }
        )
    }

    pub fn key(&self) -> (Word, bool, bool) {
        (self.lhs.clone(), self.anchor_start, self.anchor_end)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rhs = if self.rhs.is_empty() {
            "ε".to_string()
        } else {
            format_word(&self.rhs)
        };
        write!(f, "{} -> {}", self.decorated_lhs(), rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Option<usize>,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Some(i) => write!(f, "rule {i}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

/// The triple (input alphabet, working alphabet, rules) plus a flavor.
#[derive(Clone, Debug)]
pub struct RewritingSystem {
    flavor: Flavor,
    input: Word,
    working: Word,
    rules: Vec<Rule>,
    potential: Option<Potential>,
    matcher: OnceCell<Matcher>,
}

impl PartialEq for RewritingSystem {
    fn eq(&self, other: &Self) -> bool {
        self.flavor == other.flavor
            && self.input == other.input
            && self.working == other.working
            && self.rules == other.rules
            && self.potential == other.potential
    }
}

impl RewritingSystem {
    pub fn new(flavor: Flavor, input: Word, working: Word, rules: Vec<Rule>) -> RewritingSystem {
        RewritingSystem {
            flavor,
            input,
            working,
            rules,
            potential: None,
            matcher: OnceCell::new(),
        }
    }

    /// Marks the system weakly decreasing with the given termination measure.
    pub fn with_potential(mut self, potential: Potential) -> RewritingSystem {
        self.potential = Some(potential);
        self
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn input_alphabet(&self) -> &[Letter] {
        &self.input
    }

    pub fn working_alphabet(&self) -> &[Letter] {
        &self.working
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn potential(&self) -> Option<Potential> {
        self.potential
    }

    pub fn is_strict(&self) -> bool {
        self.potential.is_none()
    }

    /// W, the length of the longest lhs.
    pub fn window(&self) -> usize {
        self.rules.iter().map(|r| r.lhs.len()).max().unwrap_or(0)
    }

    pub fn matcher(&self) -> &Matcher {
        self.matcher
            .get_or_init(|| Matcher::build(self.flavor, &self.rules))
    }

    pub fn into_parts(self) -> (Flavor, Word, Word, Vec<Rule>) {
        (self.flavor, self.input, self.working, self.rules)
    }

    /// Same rules and alphabets with a different input alphabet.
    pub fn with_input_alphabet(&self, input: Word) -> RewritingSystem {
        let mut out =
            RewritingSystem::new(self.flavor, input, self.working.clone(), self.rules.clone());
        out.potential = self.potential;
        out
    }

    /// Every invariant violation, each tagged with its rule index where relevant.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |rule: Option<usize>, reason: String| out.push(Violation { rule, reason });

        for (label, alphabet) in [("input", &self.input), ("working", &self.working)] {
            let mut seen = HashSet::new();
            for l in alphabet.iter() {
                if let Err(e) = check_name(l.name()) {
                    push(None, format!("{label} alphabet: {e}"));
                }
                if !seen.insert(*l) {
                    push(None, format!("{label} alphabet lists {:?} twice", l.name()));
                }
            }
        }
        let working: HashSet<Letter> = self.working.iter().copied().collect();
        for l in &self.input {
            if !working.contains(l) {
                push(
                    None,
                    format!("input letter {:?} is not in the working alphabet", l.name()),
                );
            }
        }

        let mut seen: HashMap<(Word, bool, bool), usize> = HashMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            if r.lhs.is_empty() {
                push(Some(i), "empty left-hand side".into());
            }
            if let Some(l) = r.lhs.iter().chain(&r.rhs).find(|l| !working.contains(l)) {
                push(
                    Some(i),
                    format!("letter {:?} is not in the working alphabet", l.name()),
                );
            }
            if self.is_strict() && r.lhs.len() <= r.rhs.len() {
                push(Some(i), "non-length-decreasing".into());
            }
            if !self.is_strict() && r.lhs.len() < r.rhs.len() {
                push(Some(i), "length-increasing".into());
            }
            if self.flavor == Flavor::Incremental && r.anchor_end {
                push(Some(i), "end anchor in an incremental system".into());
            }
            if let Some(&j) = seen.get(&r.key()) {
                push(
                    Some(i),
                    format!(
                        "duplicate left-hand side {} (also rule {j})",
                        r.decorated_lhs()
                    ),
                );
            } else {
                seen.insert(r.key(), i);
            }
        }
        out
    }

    /// Builds a system from rules that may repeat; identical duplicates
    /// collapse and differing right-hand sides for one lhs are an error.
    pub fn merged(
        flavor: Flavor,
        input: Word,
        working: Word,
        rules: Vec<Rule>,
    ) -> Result<RewritingSystem> {
        merge_rules(flavor, input, working, rules)
    }

    pub fn check_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let text: Vec<String> = v.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidSystem(text.join("; ")))
        }
    }

    pub fn check_working(&self, w: &[Letter]) -> Result<()> {
        check_membership(w, &self.working, "working")
    }

    pub fn check_input(&self, w: &[Letter]) -> Result<()> {
        check_membership(w, &self.input, "input")
    }

    pub fn to_json(&self) -> String {
        let file = SystemFile {
            flavor: self.flavor,
            input_alphabet: names(&self.input),
            working_alphabet: names(&self.working),
            rules: self
                .rules
                .iter()
                .map(|r| RuleFile {
                    lhs: names(&r.lhs),
                    rhs: names(&r.rhs),
                    anchor_start: r.anchor_start,
                    anchor_end: r.anchor_end,
                })
                .collect(),
            potential: self.potential,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("system serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<RewritingSystem> {
        let file: SystemFile = serde_json::from_str(text)?;
        for name in file.input_alphabet.iter().chain(&file.working_alphabet) {
            check_name(name).map_err(Error::Parse)?;
        }
        let to_word = |v: &[String]| -> Word { v.iter().map(|n| Letter::new(n)).collect() };
        let rules = file
            .rules
            .iter()
            .map(|r| Rule {
                lhs: to_word(&r.lhs),
                rhs: to_word(&r.rhs),
                anchor_start: r.anchor_start,
                anchor_end: r.anchor_end,
            })
            .collect();
        let mut sys = RewritingSystem::new(
            file.flavor,
            to_word(&file.input_alphabet),
            to_word(&file.working_alphabet),
            rules,
        );
        sys.potential = file.potential;
        Ok(sys)
    }
}

pub(crate) fn check_membership(
    w: &[Letter],
    alphabet: &[Letter],
    label: &'static str,
) -> Result<()> {
    if alphabet.len() > 16 {
        let set: HashSet<Letter> = alphabet.iter().copied().collect();
        if let Some(l) = w.iter().find(|l| !set.contains(l)) {
            return Err(Error::UnknownLetter {
                letter: l.name().into(),
                alphabet: label,
            });
        }
    } else if let Some(l) = w.iter().find(|l| !alphabet.contains(l)) {
        return Err(Error::UnknownLetter {
            letter: l.name().into(),
            alphabet: label,
        });
    }
    Ok(())
}

fn names(w: &[Letter]) -> Vec<String> {
    w.iter().map(|l| l.name().to_string()).collect()
}

#[derive(Serialize, Deserialize)]
struct SystemFile {
    flavor: Flavor,
    input_alphabet: Vec<String>,
    working_alphabet: Vec<String>,
    rules: Vec<RuleFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    potential: Option<Potential>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct RuleFile {
    pub(crate) lhs: Vec<String>,
    pub(crate) rhs: Vec<String>,
    #[serde(default)]
    pub(crate) anchor_start: bool,
    #[serde(default)]
    pub(crate) anchor_end: bool,
}

/// See [`RewritingSystem::merged`].
pub fn merge_rules(
    flavor: Flavor,
    input: Word,
    working: Word,
    rules: Vec<Rule>,
) -> Result<RewritingSystem> {
    merge_rules_with(flavor, input, working, rules, None)
}

/// As [`merge_rules`], for a weakly decreasing system with the given potential.
pub fn merge_rules_with(
    flavor: Flavor,
    input: Word,
    working: Word,
    rules: Vec<Rule>,
    potential: Option<Potential>,
) -> Result<RewritingSystem> {
    let mut seen: HashMap<(Word, bool, bool), usize> = HashMap::new();
    let mut out: Vec<Rule> = Vec::with_capacity(rules.len());
    for r in rules {
        match seen.get(&r.key()) {
            Some(&j) if out[j].rhs == r.rhs => {}
            Some(&j) => {
                return Err(Error::Conflict {
                    lhs: r.decorated_lhs(),
                    first: format_word(&out[j].rhs),
                    second: format_word(&r.rhs),
                })
            }
            None => {
                seen.insert(r.key(), out.len());
                out.push(r);
            }
        }
    }
    let mut sys = RewritingSystem::new(flavor, input, working, out);
    sys.potential = potential;
    sys.check_valid()?;
    Ok(sys)
}

//! New generators as compressed letters.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};

use crate::constructions::strict::StrictCompressed;
use crate::engine::{reduce, Match, RuleSource};
use crate::error::{Error, Result};
use crate::letter::{check_base_name, format_word, Letter, Word};
use crate::system::{Flavor, Potential, RewritingSystem};

/// Each new generator spelled as a word in the old ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorTranslation {
    entries: Vec<(Letter, Word)>,
    n: usize,
}

impl GeneratorTranslation {
    /// `n` is the declared block size; every spelling must fit in it.
    pub fn new(entries: Vec<(Letter, Word)>, n: usize) -> Result<GeneratorTranslation> {
        let mut seen = HashSet::new();
        for (g, w) in &entries {
            check_base_name(g.name()).map_err(Error::Precondition)?;
            if !seen.insert(*g) {
                return Err(Error::Precondition(format!(
                    "generator {g} translated twice"
                )));
            }
            if w.is_empty() {
                return Err(Error::Precondition(format!(
                    "generator {g} translates to the empty word"
                )));
            }
            if w.len() > n {
                return Err(Error::Precondition(format!(
                    "translation {} of {g} is longer than n = {n}",
                    format_word(w)
                )));
            }
        }
        Ok(GeneratorTranslation { entries, n })
    }

    /// Block size set to the longest spelling.
    pub fn tight(entries: Vec<(Letter, Word)>) -> Result<GeneratorTranslation> {
        let n = entries
            .iter()
            .map(|(_, w)| w.len())
            .max()
            .unwrap_or(1)
            .max(1);
        GeneratorTranslation::new(entries, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> Word {
        self.entries.iter().map(|(g, _)| *g).collect()
    }

    pub fn entries(&self) -> &[(Letter, Word)] {
        &self.entries
    }

    /// The word in old generators that `w` stands for.
    pub fn translate(&self, w: &[Letter]) -> Result<Word> {
        let map: HashMap<Letter, &Word> = self.entries.iter().map(|(g, w)| (*g, w)).collect();
        let mut out = Vec::new();
        for l in w {
            let t = map.get(l).ok_or_else(|| Error::UnknownLetter {
                letter: l.name().into(),
                alphabet: "input",
            })?;
            out.extend_from_slice(t);
        }
        Ok(out)
    }
}

/// A rule source read through a renaming of some letters: each renamed
/// letter behaves exactly like its image.
pub struct Renamed<S> {
    inner: S,
    map: HashMap<Letter, Letter>,
}

impl<S: RuleSource> Renamed<S> {
    pub fn new(inner: S, map: HashMap<Letter, Letter>) -> Renamed<S> {
        Renamed { inner, map }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    fn image(&self, l: &Letter) -> Letter {
        self.map.get(l).copied().unwrap_or(*l)
    }
}

impl<S: RuleSource> RuleSource for Renamed<S> {
    fn flavor(&self) -> Flavor {
        self.inner.flavor()
    }

    fn window(&self) -> usize {
        self.inner.window()
    }

    fn potential(&self) -> Option<Potential> {
        self.inner.potential()
    }

    // Only the last `window + 1` letters are passed on: that is enough to
    // find any lhs, and too long for an anchored lhs to span, as it should be.
    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        let keep = prefix.len().min(self.inner.window() + 1);
        let buf: Word = prefix[prefix.len() - keep..]
            .iter()
            .map(|l| self.image(l))
            .collect();
        let m = self.inner.match_ending(&buf)?;
        Some(Match {
            rhs: Cow::Owned(m.rhs.into_owned()),
            ..m
        })
    }

    fn match_starting(&self, rest_rev: &[Letter], at_start: bool) -> Option<Match<'_>> {
        let keep = rest_rev.len().min(self.inner.window() + 1);
        let buf: Word = rest_rev[rest_rev.len() - keep..]
            .iter()
            .map(|l| self.image(l))
            .collect();
        let m = self.inner.match_starting(&buf, at_start)?;
        Some(Match {
            rhs: Cow::Owned(m.rhs.into_owned()),
            ..m
        })
    }
}

/// A system for the same group over new generators: the strict compression
/// of the old one, with each new generator read as the compressed letter of
/// its spelling.
pub struct ChangedGenerators {
    source: Renamed<StrictCompressed>,
    translation: GeneratorTranslation,
}

pub fn change_generators(
    sys: &RewritingSystem,
    translation: GeneratorTranslation,
) -> Result<ChangedGenerators> {
    let old: HashSet<Letter> = sys.input_alphabet().iter().copied().collect();
    for (g, w) in translation.entries() {
        if let Some(l) = w.iter().find(|l| !old.contains(l)) {
            return Err(Error::UnknownLetter {
                letter: l.name().into(),
                alphabet: "input",
            });
        }
        if sys.working_alphabet().contains(g) {
            return Err(Error::AlphabetOverlap(g.name().into()));
        }
    }
    let inner = StrictCompressed::new(sys, translation.n())?;
    let map = translation
        .entries()
        .iter()
        .map(|(g, w)| (*g, Letter::compressed(w)))
        .collect();
    Ok(ChangedGenerators {
        source: Renamed::new(inner, map),
        translation,
    })
}

impl ChangedGenerators {
    pub fn translation(&self) -> &GeneratorTranslation {
        &self.translation
    }

    pub fn input_alphabet(&self) -> Word {
        self.translation.generators()
    }

    fn check_input(&self, w: &[Letter]) -> Result<()> {
        let gens = self.input_alphabet();
        match w.iter().find(|l| !gens.contains(l)) {
            Some(l) => Err(Error::UnknownLetter {
                letter: l.name().into(),
                alphabet: "input",
            }),
            None => Ok(()),
        }
    }

    pub fn reduce(&self, w: &[Letter]) -> Result<Word> {
        self.check_input(w)?;
        reduce(self, w)
    }

    pub fn accepts(&self, w: &[Letter]) -> Result<bool> {
        Ok(self.reduce(w)?.is_empty())
    }
}

impl RuleSource for ChangedGenerators {
    fn flavor(&self) -> Flavor {
        self.source.flavor()
    }

    fn window(&self) -> usize {
        self.source.window()
    }

    fn potential(&self) -> Option<Potential> {
        self.source.potential()
    }

    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        self.source.match_ending(prefix)
    }

    fn match_starting(&self, rest_rev: &[Letter], at_start: bool) -> Option<Match<'_>> {
        self.source.match_starting(rest_rev, at_start)
    }
}

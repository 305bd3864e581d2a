//! Interned letters and words.
//!
//! Letters are small copyable ids backed by a process-wide interner, so two
//! letters are equal exactly when their names are. A name of the form
//! `[x1.x2...]` denotes a compressed letter whose payload is the word
//! `x1 x2 ...`; the payload is parsed once, at interning time.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use once_cell::sync::Lazy;

use crate::error::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u32);

pub type Word = Vec<Letter>;

struct Entry {
    name: &'static str,
    payload: Option<&'static [Letter]>,
}

#[derive(Default)]
struct Interner {
    entries: Vec<Entry>,
    ids: HashMap<&'static str, u32>,
}

static INTERNER: Lazy<RwLock<Interner>> = Lazy::new(Default::default);

impl Letter {
    /// Interns `name`. Bracketed names are registered as compressed letters.
    pub fn new(name: &str) -> Letter {
        if let Some(&id) = INTERNER.read().unwrap().ids.get(name) {
            return Letter(id);
        }
        let payload = compressed_payload(name).map(|p| &*Box::leak(p.into_boxed_slice()));
        let mut table = INTERNER.write().unwrap();
        if let Some(&id) = table.ids.get(name) {
            return Letter(id);
        }
        let name: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = table.entries.len() as u32;
        table.entries.push(Entry { name, payload });
        table.ids.insert(name, id);
        Letter(id)
    }

    /// The compressed letter whose payload is `payload`.
    pub fn compressed(payload: &[Letter]) -> Letter {
        assert!(
            !payload.is_empty(),
            "compressed letters have non-empty payloads"
        );
        let mut name = String::from("[");
        for (i, l) in payload.iter().enumerate() {
            if i > 0 {
                name.push('.');
            }
            name.push_str(l.name());
        }
        name.push(']');
        Letter::new(&name)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn name(self) -> &'static str {
        INTERNER.read().unwrap().entries[self.0 as usize].name
    }

    /// Payload of a compressed letter, `None` for base letters.
    pub fn payload(self) -> Option<&'static [Letter]> {
        INTERNER.read().unwrap().entries[self.0 as usize].payload
    }

    pub fn is_compressed(self) -> bool {
        self.payload().is_some()
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const FORBIDDEN: &[char] = &['^', ',', '[', ']', '.'];

/// Checks that `name` is usable as a base (uncompressed) letter name.
pub fn check_base_name(name: &str) -> Result<(), String> {
    if name.is_empty() {
        return Err("empty letter name".into());
    }
    if let Some(c) = name
        .chars()
        .find(|c| c.is_whitespace() || FORBIDDEN.contains(c))
    {
        return Err(format!(
            "letter name {name:?} contains forbidden character {c:?}"
        ));
    }
    Ok(())
}

/// Checks a letter name that may be either a base name or a compressed name.
pub fn check_name(name: &str) -> Result<(), String> {
    if name.starts_with('[') {
        match split_top_level(&name[1..name.len().saturating_sub(1)]) {
            Some(parts) if name.ends_with(']') && name.len() > 2 => {
                parts.iter().try_for_each(|p| check_name(p))
            }
            _ => Err(format!("malformed compressed letter {name:?}")),
        }
    } else {
        check_base_name(name)
    }
}

fn compressed_payload(name: &str) -> Option<Vec<Letter>> {
    if name.len() < 3 || !name.starts_with('[') || !name.ends_with(']') {
        return None;
    }
    let parts = split_top_level(&name[1..name.len() - 1])?;
    if parts.iter().any(|p| p.is_empty()) {
        return None;
    }
    Some(parts.into_iter().map(Letter::new).collect())
}

/// Splits on `.` at bracket depth zero. Returns `None` on unbalanced brackets.
fn split_top_level(s: &str) -> Option<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
            }
            '.' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    parts.push(&s[start..]);
    Some(parts)
}

/// Parses a dot-separated word such as `t.t.1.t-` or `[a.b].[c]`.
/// The empty string (and `ε`) denote the empty word.
pub fn parse_word(s: &str) -> Result<Word, Error> {
    let s = s.trim();
    if s.is_empty() || s == "ε" {
        return Ok(Vec::new());
    }
    let parts =
        split_top_level(s).ok_or_else(|| Error::Parse(format!("unbalanced brackets in {s:?}")))?;
    parts
        .into_iter()
        .map(|p| {
            check_name(p).map_err(Error::Parse)?;
            Ok(Letter::new(p))
        })
        .collect()
}

pub fn format_word(w: &[Letter]) -> String {
    let mut out = String::new();
    for (i, l) in w.iter().enumerate() {
        if i > 0 {
            out.push('.');
        }
        out.push_str(l.name());
    }
    out
}

/// Parses a list of letter names, e.g. from a JSON array.
pub fn letters(names: &[&str]) -> Word {
    names.iter().map(|n| Letter::new(n)).collect()
}

/// `letter` repeated `n` times.
pub fn power(letter: Letter, n: usize) -> Word {
    vec![letter; n]
}

/// Concatenation of the payloads (base letters stay as they are).
pub fn write_out(w: &[Letter]) -> Word {
    let mut out = Vec::with_capacity(w.len());
    for &l in w {
        match l.payload() {
            Some(p) => out.extend_from_slice(p),
            None => out.push(l),
        }
    }
    out
}

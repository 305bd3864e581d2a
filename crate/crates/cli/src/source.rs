//! System files. A file is either an explicit rule table, or a recipe for a
//! rule source that is too large to tabulate:
//!
//! ```json
//! {"recipe": "heisenberg", "mu": 6, "k": 12}
//! {"recipe": "z-expanding", "mu": 10, "k": 5, "n": 2}
//! {"recipe": "compressed", "n": 3, "strict": true, "base": { ...table... }}
//! {"recipe": "dihedral", "base": { ...table for Z on 1, -1... }}
//! ```

use std::path::Path;

use cannon::constructions::{infinite_dihedral, ChangedGenerators, Compressed, FiniteIndexExtension, StrictCompressed};
use cannon::expanding::{heisenberg_system, integer_system, ExpandingSystem, IntegerScaling, UnitriangularScaling};
use cannon::{Error, Letter, Result, RewritingSystem, RuleSource, Word};
use serde_json::{json, Value};

pub enum Source {
    Table(RewritingSystem),
    Integers(ExpandingSystem<IntegerScaling>),
    Heisenberg(ExpandingSystem<UnitriangularScaling>),
    Compressed(Compressed),
    Strict(StrictCompressed),
    Dihedral(FiniteIndexExtension<ChangedGenerators>),
}

fn field(v: &Value, key: &str) -> Result<Option<u64>> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(x) => x
            .as_u64()
            .map(Some)
            .ok_or_else(|| Error::Parse(format!("recipe field {key:?} must be a non-negative integer"))),
    }
}

fn base(v: &Value) -> Result<RewritingSystem> {
    let base = v.get("base").ok_or_else(|| Error::Parse("recipe needs \"base\"".into()))?;
    RewritingSystem::from_json(&base.to_string())
}

fn need(v: &Value, key: &str) -> Result<u64> {
    field(v, key)?.ok_or_else(|| Error::Parse(format!("recipe needs {key:?}")))
}

fn table_value(sys: &RewritingSystem) -> Value {
    serde_json::from_str(&sys.to_json()).expect("system JSON")
}

impl Source {
    pub fn read(path: &Path) -> Result<Source> {
        Source::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Source> {
        let v: Value = serde_json::from_str(text)?;
        let Some(recipe) = v.get("recipe") else {
            return RewritingSystem::from_json(text).map(Source::Table);
        };
        let n = field(&v, "n")?.map(|n| n as usize);
        match recipe.as_str() {
            Some("z-expanding") => {
                let sys = integer_system(need(&v, "mu")? as i64, need(&v, "k")? as usize, n)?;
                Ok(Source::Integers(sys))
            }
            Some("heisenberg") => {
                let k = field(&v, "k")?.map(|k| k as usize);
                let sys = heisenberg_system(need(&v, "mu")? as u32, k, n)?;
                Ok(Source::Heisenberg(sys))
            }
            Some("dihedral") => {
                let d = infinite_dihedral(&base(&v)?)?;
                Ok(Source::Dihedral(d))
            }
            Some("compressed") => {
                let base = base(&v)?;
                let n = n.ok_or_else(|| Error::Parse("recipe needs \"n\"".into()))?;
                if v.get("strict").and_then(Value::as_bool).unwrap_or(false) {
                    Ok(Source::Strict(StrictCompressed::new(&base, n)?))
                } else {
                    Ok(Source::Compressed(Compressed::new(&base, n)?))
                }
            }
            _ => Err(Error::Parse(format!("unknown recipe {recipe}"))),
        }
    }

    pub fn compressed_recipe(base: &RewritingSystem, n: usize, strict: bool) -> Value {
        json!({"recipe": "compressed", "n": n, "strict": strict, "base": table_value(base)})
    }

    pub fn dihedral_recipe(base: &RewritingSystem) -> Value {
        json!({"recipe": "dihedral", "base": table_value(base)})
    }

    pub fn rules(&self) -> &dyn RuleSource {
        match self {
            Source::Table(s) => s,
            Source::Integers(s) => s,
            Source::Heisenberg(s) => s,
            Source::Compressed(s) => s,
            Source::Strict(s) => s,
            Source::Dihedral(s) => s,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Source::Table(_) => "table",
            Source::Integers(_) => "z-expanding",
            Source::Heisenberg(_) => "heisenberg",
            Source::Compressed(_) => "compressed",
            Source::Strict(_) => "strict-compressed",
            Source::Dihedral(_) => "dihedral",
        }
    }

    /// Letters a word given on the command line may use. Compressed sources
    /// take words over the base alphabet and pack them first.
    fn input_alphabet(&self) -> Word {
        match self {
            Source::Table(s) => s.input_alphabet().to_vec(),
            Source::Integers(s) => s.generators().to_vec(),
            Source::Heisenberg(s) => s.generators().to_vec(),
            Source::Compressed(c) => c.input_alphabet(),
            Source::Strict(c) => c.input_alphabet(),
            Source::Dihedral(d) => d.input_alphabet().to_vec(),
        }
    }

    /// Checks `w` against the input alphabet, packing it for compressed
    /// sources.
    pub fn prepare(&self, w: &[Letter]) -> Result<Word> {
        let (alpha, packed) = match self {
            Source::Compressed(c) => (c.input_alphabet(), c.encode(w)),
            Source::Strict(c) => (c.input_alphabet(), c.encode(w)),
            _ => (self.input_alphabet(), w.to_vec()),
        };
        for &l in &packed {
            if !alpha.contains(&l) {
                return Err(Error::UnknownLetter { letter: l.name().into(), alphabet: "input" });
            }
        }
        Ok(packed)
    }

    /// Problems with the source; implicit sources are checked when built.
    pub fn violations(&self) -> Vec<String> {
        match self {
            Source::Table(s) => s.validate().iter().map(|v| v.to_string()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn table(self, what: &str) -> Result<RewritingSystem> {
        match self {
            Source::Table(s) => Ok(s),
            _ => Err(Error::Precondition(format!("{what} needs an explicit rule table, not a recipe"))),
        }
    }
}

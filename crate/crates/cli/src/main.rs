mod source;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cannon::constructions::{free_product, infinite_dihedral, to_non_incremental, Compressed};
use cannon::expanding::{heisenberg_system, integer_system};
use cannon::groups::f2_times_z;
use cannon::history::{
    build_diagram, extract_splitting_path, find_breaker, naive_f2xz_candidate, render_ascii, render_svg,
    DeletionConvention, F2xzSets, Side,
};
use cannon::letter::letters;
use cannon::machines::{mimic, run_machine, DehnMachine};
use cannon::system::merge_rules;
use cannon::{format_word, parse_word, Error, Flavor, Letter, Result, RewritingSystem, Rule, Word};

use source::Source;

/// `println!` that ignores a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "cannon", version, about = "Length-reducing string rewriting for group word problems")]
struct Cli {
    /// Print results and errors as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel searches. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// A word as dot-separated letters, plus `--repeat x:n` powers appended in
/// order.
#[derive(Args)]
struct WordArg {
    /// Dot-separated letters, e.g. `a.b.A`; empty for the empty word.
    #[arg(default_value = "", allow_hyphen_values = true)]
    word: String,
    /// Append `letter:count`, e.g. `--repeat 1:572`.
    #[arg(long, value_name = "LETTER:N", allow_hyphen_values = true)]
    repeat: Vec<String>,
}

impl WordArg {
    fn parse(&self) -> Result<Word> {
        let mut w = parse_word(&self.word)?;
        for r in &self.repeat {
            let (l, n) = r
                .rsplit_once(':')
                .ok_or_else(|| Error::Parse(format!("--repeat wants LETTER:N, got {r:?}")))?;
            let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad count in {r:?}")))?;
            let l = parse_word(l)?;
            for _ in 0..n {
                w.extend_from_slice(&l);
            }
        }
        Ok(w)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a system file.
    Validate { system: PathBuf },
    /// Reduce a word.
    Reduce {
        system: PathBuf,
        #[command(flatten)]
        word: WordArg,
    },
    /// Reduce a word, printing every intermediate word.
    Trace {
        system: PathBuf,
        #[command(flatten)]
        word: WordArg,
    },
    /// Exit 0 if the word reduces to the empty word, 1 otherwise.
    Accepts {
        system: PathBuf,
        #[command(flatten)]
        word: WordArg,
    },
    /// Generate a system.
    Gen {
        #[command(subcommand)]
        what: Gen,
    },
    /// Combine systems.
    Combine {
        #[command(subcommand)]
        how: Combine,
    },
    /// Compress a system to n-letter blocks. Written as a recipe, so words
    /// on the command line are packed into blocks for you.
    Compress {
        system: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        strict: bool,
        /// Write the explicit rule table over block letters instead.
        #[arg(long, conflicts_with = "strict")]
        table: bool,
        #[arg(long, default_value_t = 1_000_000)]
        max_rules: usize,
    },
    /// Convert between flavors.
    Convert {
        #[command(subcommand)]
        how: Convert,
    },
    /// Dehn machines.
    Machine {
        #[command(subcommand)]
        what: Machine,
    },
    /// Draw the history diagram of a reduction.
    Diagram {
        system: PathBuf,
        #[command(flatten)]
        word: WordArg,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
        #[arg(long, conflicts_with = "svg")]
        ascii: bool,
        #[arg(long)]
        svg: bool,
        /// Subword boundaries as columns of the first word, e.g. `3,7`.
        #[arg(long, value_delimiter = ',')]
        boundaries: Vec<usize>,
        /// Draw the splitting path ending left of this letter of the result.
        #[arg(long)]
        path: Option<usize>,
        /// Characters per unit width in ASCII output.
        #[arg(long, default_value_t = 4)]
        scale: usize,
    },
    /// Search for a breaker of a candidate system.
    Breaker {
        #[arg(long, value_enum)]
        group: Group,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        /// Most pairs to examine.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
    /// Run the acceptance suite, or the listed criteria.
    Selftest { criteria: Vec<usize> },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    F2xz,
}

#[derive(Subcommand)]
enum Gen {
    /// ℤ from n -> mu n, decimal for mu = 10.
    ZDecimal {
        #[arg(long, default_value_t = 10)]
        mu: i64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Height bound for the normal-form rule.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        max_rules: usize,
    },
    /// The Heisenberg group; written as a recipe.
    Heisenberg {
        #[arg(long, default_value_t = 6)]
        mu: u32,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Free cancellation on a, A, b, B, ...
    FreeGroup {
        #[arg(long, default_value_t = 2)]
        rank: usize,
    },
    /// Dehn's algorithm for the genus-2 surface group.
    SurfaceOctagon,
    /// The naive F2 x Z candidate for `breaker`.
    F2xzNaive {
        #[arg(long, default_value_t = 2)]
        shuffle: usize,
    },
}

#[derive(Subcommand)]
enum Combine {
    FreeProduct { first: PathBuf, second: PathBuf },
    /// Extend a system for ℤ on 1, -1 to the infinite dihedral group;
    /// written as a recipe.
    FiniteIndex {
        #[arg(long, value_enum)]
        group: Extension,
        system: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Extension {
    Dihedral,
}

#[derive(Subcommand)]
enum Convert {
    ToNonIncremental { system: PathBuf },
}

#[derive(Subcommand)]
enum Machine {
    Run {
        machine: PathBuf,
        #[command(flatten)]
        word: WordArg,
    },
    /// Print the rewriting system that mimics the machine.
    Mimic { machine: PathBuf },
}

enum Out {
    Text(String),
    Json(Value),
    /// Text or JSON, and whether to exit 0.
    Verdict(String, Value, bool),
}

fn table(path: &Path, what: &str) -> Result<RewritingSystem> {
    Source::read(path)?.table(what)
}

fn free_group(rank: usize) -> Result<RewritingSystem> {
    if rank == 0 || rank > 26 {
        return Err(Error::Precondition("rank must be between 1 and 26".into()));
    }
    let mut alpha = Vec::new();
    let mut rules = Vec::new();
    for c in ('a'..='z').take(rank) {
        let (x, y) = (Letter::new(&c.to_string()), Letter::new(&c.to_ascii_uppercase().to_string()));
        alpha.extend([x, y]);
        rules.push(Rule::new(vec![x, y], vec![]));
        rules.push(Rule::new(vec![y, x], vec![]));
    }
    Ok(RewritingSystem::new(Flavor::Incremental, alpha.clone(), alpha, rules))
}

/// Cyclic conjugates of the relator a b A B c d C D and its inverse, split
/// as u -> v with |u| >= 5, plus free cancellation.
fn surface_octagon() -> Result<RewritingSystem> {
    let alpha = letters(&["a", "A", "b", "B", "c", "C", "d", "D"]);
    let inv = |l: Letter| alpha[alpha.iter().position(|&x| x == l).unwrap() ^ 1];
    let rel = letters(&["a", "b", "A", "B", "c", "d", "C", "D"]);
    let rel_inv: Word = rel.iter().rev().map(|&l| inv(l)).collect();
    let mut rules: Vec<Rule> = free_group(4)?.rules().to_vec();
    for r in [rel, rel_inv] {
        for k in 0..r.len() {
            let mut c = r.clone();
            c.rotate_left(k);
            for split in 5..=c.len() {
                let v: Word = c[split..].iter().rev().map(|&l| inv(l)).collect();
                rules.push(Rule::new(c[..split].to_vec(), v));
            }
        }
    }
    merge_rules(Flavor::Incremental, alpha.clone(), alpha, rules)
}

fn generate(what: Gen) -> Result<Out> {
    let text = match what {
        Gen::ZDecimal { mu, k, n, max_rules } => integer_system(mu, k, n)?.to_system(max_rules)?.to_json(),
        Gen::Heisenberg { mu, k } => {
            let sys = heisenberg_system(mu, k, None)?;
            serde_json::to_string_pretty(&json!({"recipe": "heisenberg", "mu": mu, "k": sys.params.k}))?
        }
        Gen::FreeGroup { rank } => free_group(rank)?.to_json(),
        Gen::SurfaceOctagon => surface_octagon()?.to_json(),
        Gen::F2xzNaive { shuffle } => naive_f2xz_candidate(shuffle).to_json(),
    };
    Ok(Out::Text(text))
}

fn diagram_cmd(
    system: &Path,
    word: &WordArg,
    svg: bool,
    boundaries: &[usize],
    path: Option<usize>,
    scale: usize,
) -> Result<Out> {
    let src = Source::read(system)?;
    let w = src.prepare(&word.parse()?)?;
    let rules = src.rules();
    let h = cannon::reduce_traced(rules, &w)?;
    let d = build_diagram(&h, rules.window(), boundaries, &DeletionConvention::keep_prefix())?;
    let p = match path {
        Some(t) => Some(extract_splitting_path(&d, t, Side::Left)?.0),
        None => None,
    };
    Ok(Out::Text(if svg { render_svg(&d, p.as_ref()) } else { render_ascii(&d, scale) }))
}

fn run(cli: Cli) -> Result<Out> {
    Ok(match cli.command {
        Command::Validate { system } => {
            let src = Source::read(&system)?;
            let v = src.violations();
            let text = if v.is_empty() { "valid".to_string() } else { v.join("\n") };
            Out::Verdict(text, json!({"valid": v.is_empty(), "kind": src.kind(), "violations": v}), v.is_empty())
        }
        Command::Reduce { system, word } => {
            let src = Source::read(&system)?;
            let out = cannon::reduce(src.rules(), &src.prepare(&word.parse()?)?)?;
            Out::Text(format_word(&out))
        }
        Command::Trace { system, word } => {
            let src = Source::read(&system)?;
            let h = cannon::reduce_traced(src.rules(), &src.prepare(&word.parse()?)?)?;
            if cli.json {
                let steps: Vec<Value> = h
                    .steps
                    .iter()
                    .map(|s| json!({"rule": s.rule, "start": s.start, "lhs": format_word(&s.lhs), "rhs": format_word(&s.rhs)}))
                    .collect();
                let words: Vec<String> = h.words.iter().map(|x| format_word(x)).collect();
                Out::Json(json!({"words": words, "steps": steps}))
            } else {
                let mut text = format_word(h.start());
                for (s, x) in h.steps.iter().zip(&h.words[1..]) {
                    text.push_str(&format!("\n{}  [{} -> {} at {}]", format_word(x), format_word(&s.lhs), format_word(&s.rhs), s.start));
                }
                Out::Text(text)
            }
        }
        Command::Accepts { system, word } => {
            let src = Source::read(&system)?;
            let ok = cannon::reduce(src.rules(), &src.prepare(&word.parse()?)?)?.is_empty();
            Out::Verdict(ok.to_string(), json!({"accepts": ok}), ok)
        }
        Command::Gen { what } => generate(what)?,
        Command::Combine { how } => match how {
            Combine::FreeProduct { first, second } => {
                let (a, b) = (table(&first, "free-product")?, table(&second, "free-product")?);
                Out::Text(free_product(&a, &b)?.to_json())
            }
            Combine::FiniteIndex { group: Extension::Dihedral, system } => {
                let ints = table(&system, "finite-index")?;
                infinite_dihedral(&ints)?;
                Out::Text(serde_json::to_string_pretty(&Source::dihedral_recipe(&ints))?)
            }
        },
        Command::Compress { system, n, strict, table: explicit, max_rules } => {
            let base = table(&system, "compress")?;
            if explicit {
                Out::Text(Compressed::new(&base, n)?.to_system(max_rules)?.to_json())
            } else {
                let recipe = Source::compressed_recipe(&base, n, strict);
                Source::parse(&recipe.to_string())?;
                Out::Text(serde_json::to_string_pretty(&recipe)?)
            }
        }
        Command::Convert { how: Convert::ToNonIncremental { system } } => {
            Out::Text(to_non_incremental(&table(&system, "convert")?).to_json())
        }
        Command::Machine { what } => match what {
            Machine::Run { machine, word } => {
                let m = DehnMachine::from_json(&std::fs::read_to_string(machine)?)?;
                let r = run_machine(&m, &word.parse()?)?;
                let state = m.states()[r.state].clone();
                let text = format!("{}\nstate {}, {} substitutions", format_word(&r.word), state, r.run.substitutions);
                let v = json!({"word": format_word(&r.word), "state": state, "substitutions": r.run.substitutions, "steps": r.run.configs.len() - 1});
                Out::Verdict(text, v, true)
            }
            Machine::Mimic { machine } => {
                let m = DehnMachine::from_json(&std::fs::read_to_string(machine)?)?;
                Out::Text(mimic(&m).to_json())
            }
        },
        Command::Diagram { system, word, format, ascii, svg, boundaries, path, scale } => {
            let svg = svg || (!ascii && matches!(format, Format::Svg));
            diagram_cmd(&system, &word, svg, &boundaries, path, scale)?
        }
        Command::Breaker { group: Group::F2xz, candidate, n1, n2, budget } => {
            let cand = Source::read(&candidate)?;
            let sets = F2xzSets { n1, n2 };
            let report = find_breaker(cand.rules(), &f2_times_z(), &sets.t1(), &sets.t2(), budget)?;
            Out::Text(report.to_json())
        }
        Command::Selftest { criteria } => {
            let results = cannon::acceptance::run(&criteria, |r| {
                if !cli.json {
                    say!("{r}");
                }
            });
            let ok = results.iter().all(|r| r.pass);
            let summary = format!("{} of {} criteria passed", results.iter().filter(|r| r.pass).count(), results.len());
            Out::Verdict(summary, serde_json::to_value(&results)?, ok)
        }
    })
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::UnknownLetter { .. } => "unknown-letter",
        Error::InvalidSystem(_) => "invalid-system",
        Error::StepBudget(_) => "step-budget",
        Error::Budget(_) => "budget",
        Error::Conflict { .. } => "conflict",
        Error::AlphabetOverlap(_) => "alphabet-overlap",
        Error::Params(_) => "params",
        Error::Precondition(_) => "precondition",
        Error::Json(_) => "json",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        std::env::set_var("RAYON_NUM_THREADS", n.max(1).to_string());
    }
    let json = cli.json;
    match run(cli) {
        Ok(Out::Text(t)) => {
            if json && !t.trim_start().starts_with('{') {
                say!("{}", json!({"result": t}));
            } else {
                say!("{t}");
            }
            ExitCode::SUCCESS
        }
        Ok(Out::Json(v)) => {
            say!("{}", serde_json::to_string_pretty(&v).expect("JSON"));
            ExitCode::SUCCESS
        }
        Ok(Out::Verdict(text, v, ok)) => {
            if json {
                say!("{}", serde_json::to_string_pretty(&v).expect("JSON"));
            } else {
                say!("{text}");
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if json {
                say!("{}", json!({"error": error_kind(&e), "message": e.to_string()}));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(1)
        }
    }
}

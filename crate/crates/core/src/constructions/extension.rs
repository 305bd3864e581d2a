//! Subgroups, overgroups of finite index, free products and plain unions.

use std::collections::HashSet;

use crate::constructions::generators::{
    change_generators, ChangedGenerators, GeneratorTranslation,
};
use crate::engine::{reduce, Match, RuleSource, Union};
use crate::error::{Error, Result};
use crate::groups::{Dihedral, GroupOracle};
use crate::letter::{format_word, Letter, Word};
use crate::system::{merge_rules, Flavor, Potential, RewritingSystem, Rule};

fn union_alphabets<'a>(parts: impl IntoIterator<Item = &'a [Letter]>) -> Word {
    let mut seen = HashSet::new();
    parts
        .into_iter()
        .flatten()
        .copied()
        .filter(|l| seen.insert(*l))
        .collect()
}

/// Union of rule sets over one flavor. Identical rules collapse; two rules
/// with the same lhs and different right-hand sides are an error.
pub fn merge_rule_sets(sets: &[&RewritingSystem]) -> Result<RewritingSystem> {
    let first = sets
        .first()
        .ok_or_else(|| Error::Precondition("nothing to merge".into()))?;
    let flavor = first.flavor();
    if sets.iter().any(|s| s.flavor() != flavor) {
        return Err(Error::Precondition(
            "cannot merge systems of different flavors".into(),
        ));
    }
    if sets.iter().any(|s| !s.is_strict()) {
        return Err(Error::Precondition(
            "can only merge strictly length-decreasing systems".into(),
        ));
    }
    let input = union_alphabets(sets.iter().map(|s| s.input_alphabet()));
    let working = union_alphabets(sets.iter().map(|s| s.working_alphabet()));
    let rules = sets
        .iter()
        .flat_map(|s| s.rules().iter().cloned())
        .collect();
    merge_rules(flavor, input, working, rules)
}

/// The same rules with a smaller input alphabet. A system for G accepts
/// exactly the trivial words of any subgroup generated by part of its
/// input alphabet.
pub fn restrict_to_subgroup(
    sys: &RewritingSystem,
    generators: &[Letter],
) -> Result<RewritingSystem> {
    if let Some(g) = generators
        .iter()
        .find(|g| !sys.input_alphabet().contains(g))
    {
        return Err(Error::UnknownLetter {
            letter: g.name().into(),
            alphabet: "input",
        });
    }
    Ok(sys.with_input_alphabet(generators.to_vec()))
}

/// Rules for G_0 * G_1: both rule sets, plus each anchored rule of one
/// factor preceded by any letter of the other, so that it also fires at the
/// start of every syllable.
pub fn free_product(sys0: &RewritingSystem, sys1: &RewritingSystem) -> Result<RewritingSystem> {
    for s in [sys0, sys1] {
        if s.flavor() != Flavor::Incremental || !s.is_strict() {
            return Err(Error::Precondition(
                "free products need strict incremental systems".into(),
            ));
        }
    }
    let a0: HashSet<Letter> = sys0.working_alphabet().iter().copied().collect();
    if let Some(l) = sys1.working_alphabet().iter().find(|l| a0.contains(l)) {
        return Err(Error::AlphabetOverlap(l.name().into()));
    }
    let mut rules: Vec<Rule> = Vec::new();
    for (own, other) in [(sys0, sys1), (sys1, sys0)] {
        rules.extend(own.rules().iter().cloned());
        for r in own.rules().iter().filter(|r| r.anchor_start) {
            for &a in other.working_alphabet() {
                let lhs = [&[a][..], &r.lhs].concat();
                let rhs = [&[a][..], &r.rhs].concat();
                rules.push(Rule::new(lhs, rhs));
            }
        }
    }
    let input = union_alphabets([sys0.input_alphabet(), sys1.input_alphabet()]);
    let working = union_alphabets([sys0.working_alphabet(), sys1.working_alphabet()]);
    merge_rules(Flavor::Incremental, input, working, rules)
}

/// A system for G built from one for a finite-index subgroup H: rules that
/// push a coset representative rightwards, turning generators of G into
/// generators of H behind it, together with the system for H.
pub struct FiniteIndexExtension<H> {
    translation: RewritingSystem,
    h_sys: H,
}

/// `h_generators` lists the input letters of `h_sys` with the elements of G
/// they stand for; generators of G lying in H must appear there under their
/// own names. `transversal` holds the representatives of the cosets H t other
/// than H itself, each a generator of G.
pub fn finite_index_extension<G, H>(
    h_sys: H,
    h_generators: &[(Letter, G::Element)],
    oracle: &G,
    in_h: impl Fn(&G::Element) -> bool,
    transversal: &[Letter],
) -> Result<FiniteIndexExtension<H>>
where
    G: GroupOracle,
    H: RuleSource,
{
    if h_sys.flavor() != Flavor::Incremental || h_sys.potential().is_some() {
        return Err(Error::Precondition(
            "the subgroup system must be strict and incremental".into(),
        ));
    }
    let gens = oracle.generators().to_vec();
    let elt = |w: &[Letter]| oracle.eval(w);
    let mut reps = Vec::new();
    for &t in transversal {
        if !gens.contains(&t) {
            return Err(Error::Precondition(format!(
                "transversal letter {t} is not a generator"
            )));
        }
        reps.push((t, elt(&[t])?));
    }
    for (i, (t, x)) in reps.iter().enumerate() {
        if in_h(x) {
            return Err(Error::Precondition(format!(
                "not a transversal: {t} lies in H"
            )));
        }
        for (u, y) in &reps[..i] {
            if in_h(&oracle.mul(x, &oracle.inverse(y))) {
                return Err(Error::Precondition(format!(
                    "not a transversal: {u} and {t} lie in one coset"
                )));
            }
        }
    }
    let h_letters: HashSet<Letter> = h_generators.iter().map(|(l, _)| *l).collect();
    for &g in &gens {
        if in_h(&elt(&[g])?) && !h_letters.contains(&g) {
            return Err(Error::Precondition(format!(
                "generator {g} lies in H but is not a letter of its system"
            )));
        }
    }
    let h_letter = |x: &G::Element, w: &[Letter]| -> Result<Word> {
        if oracle.is_identity(x) {
            return Ok(vec![]);
        }
        match h_generators.iter().find(|(_, y)| y == x) {
            Some((l, _)) => Ok(vec![*l]),
            None => Err(Error::Precondition(format!(
                "the element {} of H is not among the subgroup generators",
                format_word(w)
            ))),
        }
    };
    // H x = H t: returns h = x t^-1 and the letter t, if any.
    let split = |x: &G::Element, w: &[Letter]| -> Result<(Word, Word)> {
        if in_h(x) {
            return Ok((h_letter(x, w)?, vec![]));
        }
        for (t, y) in &reps {
            let h = oracle.mul(x, &oracle.inverse(y));
            if in_h(&h) {
                return Ok((h_letter(&h, w)?, vec![*t]));
            }
        }
        Err(Error::Precondition(format!(
            "not a transversal: {} lies in no listed coset",
            format_word(w)
        )))
    };

    let mut rules = Vec::new();
    for &g1 in gens.iter().filter(|g| !h_letters.contains(g)) {
        for &g2 in &gens {
            let w = [g1, g2];
            let x = elt(&w)?;
            if in_h(&x) {
                rules.push(Rule::new(w.to_vec(), h_letter(&x, &w)?));
            }
            for &g3 in &gens {
                let w = [g1, g2, g3];
                let (h, t) = split(&elt(&w)?, &w)?;
                rules.push(Rule::new(w.to_vec(), [h, t].concat()));
            }
        }
    }
    let working = union_alphabets([&gens[..], &h_letters.iter().copied().collect::<Word>()]);
    let translation = merge_rules(Flavor::Incremental, gens.clone(), working, rules)?;
    Ok(FiniteIndexExtension { translation, h_sys })
}

impl<H: RuleSource> FiniteIndexExtension<H> {
    /// The coset-pushing rules on their own.
    pub fn translation_rules(&self) -> &RewritingSystem {
        &self.translation
    }

    pub fn subgroup_system(&self) -> &H {
        &self.h_sys
    }

    pub fn input_alphabet(&self) -> &[Letter] {
        self.translation.input_alphabet()
    }

    pub fn reduce(&self, w: &[Letter]) -> Result<Word> {
        self.translation.check_input(w)?;
        reduce(self, w)
    }

    pub fn accepts(&self, w: &[Letter]) -> Result<bool> {
        Ok(self.reduce(w)?.is_empty())
    }
}

impl FiniteIndexExtension<RewritingSystem> {
    /// One explicit rule set, when the subgroup system is explicit.
    pub fn to_system(&self) -> Result<RewritingSystem> {
        merge_rule_sets(&[&self.translation, &self.h_sys])
    }
}

impl<H: RuleSource> RuleSource for FiniteIndexExtension<H> {
    fn flavor(&self) -> Flavor {
        Flavor::Incremental
    }

    fn window(&self) -> usize {
        self.translation.window().max(self.h_sys.window())
    }

    fn potential(&self) -> Option<Potential> {
        None
    }

    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        Union::best(
            [
                self.translation.match_ending(prefix),
                self.h_sys.match_ending(prefix),
            ]
            .into_iter()
            .flatten(),
        )
    }

    fn match_starting(&self, _rest_rev: &[Letter], _at_start: bool) -> Option<Match<'_>> {
        None
    }
}

/// The infinite dihedral group on `r`, `R` (= r^-1) and the reflection `s`,
/// from a system for the integers over `1` and `-1` (the translations
/// r^k). Subgroup generators are r, R, r2 and R2.
pub fn infinite_dihedral(
    integers: &RewritingSystem,
) -> Result<FiniteIndexExtension<ChangedGenerators>> {
    let spell = |name: &str, w: &[&str]| {
        (
            Letter::new(name),
            w.iter().map(|s| Letter::new(s)).collect::<Word>(),
        )
    };
    let translation = GeneratorTranslation::tight(vec![
        spell("r", &["1"]),
        spell("R", &["-1"]),
        spell("r2", &["1", "1"]),
        spell("R2", &["-1", "-1"]),
    ])?;
    let h = change_generators(integers, translation)?;
    let h_gens = [
        (Letter::new("r"), (1, 1)),
        (Letter::new("R"), (1, -1)),
        (Letter::new("r2"), (1, 2)),
        (Letter::new("R2"), (1, -2)),
    ];
    let oracle = Dihedral::new("r", "R", "s");
    finite_index_extension(
        h,
        &h_gens,
        &oracle,
        |x: &(i8, i64)| x.0 == 1,
        &[Letter::new("s")],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::reduce_traced;
    use crate::expanding::integer_system;
    use crate::groups::{random_word, FreeGroup};
    use crate::letter::parse_word;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rule(l: &str, r: &str) -> Rule {
        Rule::new(parse_word(l).unwrap(), parse_word(r).unwrap())
    }

    fn sys(rules: Vec<Rule>, alpha: &str) -> RewritingSystem {
        let a = parse_word(alpha).unwrap();
        RewritingSystem::new(Flavor::Incremental, a.clone(), a, rules)
    }

    fn free(a: &str, b: &str) -> RewritingSystem {
        sys(
            vec![rule(&format!("{a}.{b}"), ""), rule(&format!("{b}.{a}"), "")],
            &format!("{a}.{b}"),
        )
    }

    #[test]
    fn merging() {
        let one = sys(vec![rule("a.A", "")], "a.A.b");
        assert_eq!(merge_rule_sets(&[&one, &one]).unwrap().rules().len(), 1);
        let other = sys(vec![rule("a.A", "b")], "a.A.b");
        assert!(matches!(
            merge_rule_sets(&[&one, &other]),
            Err(Error::Conflict { .. })
        ));
        let disjoint = sys(vec![rule("b.b", "")], "a.A.b");
        assert_eq!(
            merge_rule_sets(&[&one, &disjoint]).unwrap().rules().len(),
            2
        );
    }

    #[test]
    fn restriction() {
        let f2 = merge_rule_sets(&[&free("a", "A"), &free("b", "B")]).unwrap();
        let sub = restrict_to_subgroup(&f2, &parse_word("a.A").unwrap()).unwrap();
        assert!(sub.accepts(&parse_word("a.a.A.A").unwrap()).unwrap());
        assert!(sub.accepts(&parse_word("b.B").unwrap()).is_err());
        assert_eq!(restrict_to_subgroup(&f2, f2.input_alphabet()).unwrap(), f2);
        assert!(restrict_to_subgroup(&f2, &parse_word("c").unwrap()).is_err());
    }

    #[test]
    fn free_product_of_integers() {
        let p = free_product(&free("a", "A"), &free("b", "B")).unwrap();
        let f2 = FreeGroup::rank2();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..2000 {
            let w = random_word(&mut rng, f2.generators(), i % 30);
            assert_eq!(
                p.accepts(&w).unwrap(),
                f2.is_trivial(&w).unwrap(),
                "{}",
                format_word(&w)
            );
        }
        assert!(!p.accepts(&parse_word("a").unwrap()).unwrap());
        let clash = free_product(&free("a", "A"), &free("a", "B"));
        assert!(matches!(clash, Err(Error::AlphabetOverlap(_))));
    }

    #[test]
    fn free_product_keeps_anchored_rules_per_syllable() {
        // x^2 = 1 written as an anchored rule only fires at the start of a word;
        // in the product it also fires after a letter of the other factor.
        let z2 = sys(
            vec![
                Rule::anchored(parse_word("x.x").unwrap(), vec![]),
                rule("x.x.x", "x"),
            ],
            "x",
        );
        let z = free("b", "B");
        let p = free_product(&z2, &z).unwrap();
        assert_eq!(p.rules().len(), 2 + 2 + 2);
        assert!(p.accepts(&parse_word("b.x.x.B").unwrap()).unwrap());
        let syllables = reduce_traced(&p, &parse_word("x.b.b.x.x.x").unwrap()).unwrap();
        assert_eq!(format_word(syllables.result()), "x.b.b.x");
    }

    fn dihedral() -> FiniteIndexExtension<ChangedGenerators> {
        let ints = integer_system(10, 5, None)
            .unwrap()
            .to_system(1_000_000)
            .unwrap();
        infinite_dihedral(&ints).unwrap()
    }

    #[test]
    fn dihedral_examples() {
        let d = dihedral();
        assert!(d.accepts(&parse_word("s.s").unwrap()).unwrap());
        assert!(d.accepts(&parse_word("r.s.r.s").unwrap()).unwrap());
        assert!(!d.accepts(&parse_word("r").unwrap()).unwrap());
        let lhs: Vec<String> = d
            .translation_rules()
            .rules()
            .iter()
            .map(|r| r.to_string())
            .collect();
        assert!(lhs.contains(&"s.r.r -> R2.s".to_string()), "{lhs:?}");
    }

    #[test]
    fn dihedral_matches_oracle() {
        let d = dihedral();
        let oracle = Dihedral::new("r", "R", "s");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..600 {
            let mut w = random_word(&mut rng, oracle.generators(), i % 25);
            if i % 2 == 0 {
                // Half the words are trivial.
                let inv = oracle.invert_word(&w);
                w.extend(inv);
            }
            let out = d.reduce(&w).unwrap();
            assert_eq!(
                out.is_empty(),
                oracle.is_trivial(&w).unwrap(),
                "{}",
                format_word(&w)
            );
            // At most one coset letter survives, with at most one letter after it.
            let coset: Vec<usize> = (0..out.len()).filter(|&k| out[k].name() == "s").collect();
            assert!(
                coset.len() <= 1 && coset.iter().all(|&k| k + 2 >= out.len()),
                "{}",
                format_word(&out)
            );
        }
    }

    #[test]
    fn coset_errors() {
        let ints = integer_system(10, 5, None)
            .unwrap()
            .to_system(1_000_000)
            .unwrap();
        let oracle = Dihedral::new("r", "R", "s");
        let h = [(Letter::new("r"), (1i8, 1i64)), (Letter::new("R"), (1, -1))];
        // r lies in H, so it cannot represent a coset.
        let bad = finite_index_extension(
            &ints,
            &h,
            &oracle,
            |x: &(i8, i64)| x.0 == 1,
            &[Letter::new("r")],
        );
        assert!(bad.is_err());
    }
}

//! Seeded random systems and words for differential and property tests.

use rand::Rng;

use crate::letter::{Letter, Word};
use crate::system::{Flavor, RewritingSystem, Rule};

/// Shape of a random system.
#[derive(Clone, Copy, Debug)]
pub struct RandomShape {
    pub rules: (usize, usize),
    pub max_lhs: usize,
    /// Chance that a rule is anchored at the start; end anchors only appear
    /// in non-incremental systems.
    pub anchor: f64,
}

impl Default for RandomShape {
    fn default() -> RandomShape {
        RandomShape {
            rules: (2, 7),
            max_lhs: 3,
            anchor: 0.15,
        }
    }
}

/// A length-reducing system over `alphabet` with distinct rule keys.
pub fn random_system<R: Rng>(
    rng: &mut R,
    flavor: Flavor,
    alphabet: &[Letter],
    shape: RandomShape,
) -> RewritingSystem {
    let pick = |rng: &mut R, n: usize| -> Word {
        (0..n)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect()
    };
    let mut rules: Vec<Rule> = Vec::new();
    for _ in 0..rng.gen_range(shape.rules.0..=shape.rules.1) {
        let k = rng.gen_range(1..=shape.max_lhs);
        let lhs = pick(rng, k);
        let r = rng.gen_range(0..k);
        let rhs = pick(rng, r);
        let start = rng.gen_bool(shape.anchor);
        let end = flavor == Flavor::NonIncremental && rng.gen_bool(shape.anchor);
        let rule = Rule::new(lhs, rhs).with_anchors(start, end);
        if rules.iter().all(|x| x.key() != rule.key()) {
            rules.push(rule);
        }
    }
    RewritingSystem::new(flavor, alphabet.to_vec(), alphabet.to_vec(), rules)
}

/// A uniform word of length `0..=max_len`.
pub fn random_word_upto<R: Rng>(rng: &mut R, alphabet: &[Letter], max_len: usize) -> Word {
    let n = rng.gen_range(0..=max_len);
    (0..n)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}

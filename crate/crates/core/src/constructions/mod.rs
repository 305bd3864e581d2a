//! Building new systems from old ones: changing flavor, compressing letters,
//! changing generators, and passing to subgroups, overgroups of finite index
//! and free products.

mod compress;
mod extension;
mod generators;
mod strict;

pub use compress::{chunk, compressed_alphabet, Compressed};
pub use extension::{
    finite_index_extension, free_product, infinite_dihedral, merge_rule_sets, restrict_to_subgroup,
    FiniteIndexExtension,
};
pub use generators::{change_generators, ChangedGenerators, GeneratorTranslation, Renamed};
pub use strict::StrictCompressed;

use std::collections::HashSet;

use crate::system::{Flavor, RewritingSystem, Rule};

fn occurs_before_end(inner: &Rule, outer: &Rule) -> bool {
    let (u, v) = (&inner.lhs, &outer.lhs);
    if u.len() >= v.len() || inner.anchor_end {
        return false;
    }
    (0..v.len() - u.len()).any(|s| {
        (!inner.anchor_start || (s == 0 && outer.anchor_start)) && v[s..s + u.len()] == u[..]
    })
}

/// The same system run by the non-incremental algorithm. Left-hand sides
/// that contain another left-hand side ending before their last letter can
/// never fire incrementally, and would fire wrongly otherwise, so they go.
///
/// Anchors take no room, so an unanchored lhs that begins with an anchored
/// one survives that test yet is shadowed at the start of the word. It gets
/// an anchored twin that makes the shorter substitution.
pub fn to_non_incremental(sys: &RewritingSystem) -> RewritingSystem {
    assert_eq!(sys.flavor(), Flavor::Incremental, "already non-incremental");
    let rules = sys.rules();
    let mut kept: Vec<Rule> = rules
        .iter()
        .filter(|r| !rules.iter().any(|o| occurs_before_end(o, r)))
        .cloned()
        .collect();
    let keys: HashSet<_> = kept.iter().map(|r| r.key()).collect();
    let mut twins = Vec::new();
    for r in kept.iter().filter(|r| !r.anchor_start) {
        let shadow = rules
            .iter()
            .filter(|o| o.anchor_start && o.lhs.len() < r.lhs.len() && r.lhs.starts_with(&o.lhs))
            .min_by_key(|o| o.lhs.len());
        if let Some(o) = shadow {
            let twin = Rule::anchored(r.lhs.clone(), [&o.rhs[..], &r.lhs[o.lhs.len()..]].concat());
            if !keys.contains(&twin.key()) {
                twins.push(twin);
            }
        }
    }
    kept.extend(twins);
    let mut out = RewritingSystem::new(
        Flavor::NonIncremental,
        sys.input_alphabet().to_vec(),
        sys.working_alphabet().to_vec(),
        kept,
    );
    if let Some(p) = sys.potential() {
        out = out.with_potential(p);
    }
    out
}

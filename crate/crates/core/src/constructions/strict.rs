//! Compression that keeps every rule strictly length-decreasing.
//!
//! Letters carry at most `2n - 1` base letters. Those longer than `n` (the
//! long letters) only ever sit to the left of the point where the base system
//! would act next, and far apart, so there is always slack to merge two
//! letters into one. Each rule runs the base system on a neighborhood of its
//! first redex for up to `2n - 1` steps, then writes the result back.

use std::borrow::Cow;

use crate::constructions::compress::{chunk, compressed_alphabet, BaseView};
use crate::engine::{Match, RuleSource};
use crate::error::{Error, Result};
use crate::letter::{write_out, Letter, Word};
use crate::system::{Flavor, RewritingSystem};

#[derive(Clone, Debug)]
struct Redex {
    start: usize,
    end: usize,
    rhs: Word,
}

pub struct StrictCompressed {
    view: BaseView,
    n: usize,
    // Letters the machine may see before the first redex (at least `a`
    // unless anchored) and after it (at most `b + n - 1`).
    a: usize,
    b: usize,
    // Minimum distance between the right ends of two long letters.
    gap: usize,
    // Longest written-out left-hand side.
    cap: usize,
}

impl StrictCompressed {
    pub fn new(base: &RewritingSystem, n: usize) -> Result<StrictCompressed> {
        if n == 0 {
            return Err(Error::Precondition("compression needs n >= 1".into()));
        }
        if !base.is_strict() {
            return Err(Error::Precondition(
                "strict compression needs a strictly length-decreasing system".into(),
            ));
        }
        let w = base.window().max(1);
        let (a, b) = (2 * n * w + w, 2 * n * w);
        Ok(StrictCompressed {
            view: BaseView::new(base),
            n,
            a,
            b,
            gap: (2 * n - 1) * (w - 1),
            cap: a + 2 * n - 2 + w + b + n - 1,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn input_alphabet(&self) -> Word {
        compressed_alphabet(&self.view.input, 1, self.n)
    }

    pub fn working_alphabet(&self) -> Word {
        compressed_alphabet(&self.view.working, 1, 2 * self.n - 1)
    }

    /// Compressed input word for a base input word, in blocks of `n`.
    pub fn encode(&self, w: &[Letter]) -> Word {
        chunk(w, self.n)
    }

    fn is_long(&self, l: Letter) -> bool {
        l.payload().is_some_and(|p| p.len() > self.n)
    }

    fn first(&self, x: &[Letter], at_start: bool, at_end: bool) -> Option<Redex> {
        self.view.first(x, at_start, at_end).map(|r| Redex {
            start: r.start,
            end: r.start + r.len,
            rhs: r.rhs,
        })
    }

    /// The next redex in `x` if it can be told from `x` alone. Without the
    /// end of the word, a non-incremental lhs starting in the last `W - 1`
    /// letters might run on past the end of `x`.
    fn visible(&self, x: &[Letter], at_start: bool, at_end: bool) -> Option<Redex> {
        let r = self.first(x, at_start, at_end)?;
        let hidden = self.view.flavor == Flavor::NonIncremental
            && !at_end
            && r.start + self.view.window > x.len();
        (!hidden).then_some(r)
    }

    /// Where the base system acts next on `y`: the end of the next redex
    /// (incremental) or its start (non-incremental).
    fn reduction_point(&self, y: &[Letter], at_start: bool, at_end: bool) -> usize {
        let next = self.first(y, at_start, at_end);
        match self.view.flavor {
            Flavor::Incremental => next.map_or(usize::MAX, |r| r.end),
            Flavor::NonIncremental => {
                let bound = if at_end {
                    usize::MAX
                } else {
                    (y.len() + 1).saturating_sub(self.view.window)
                };
                next.map_or(usize::MAX, |r| r.start).min(bound)
            }
        }
    }

    /// Long letters of `ls` (with write-out offsets `off`) all end by `limit`
    /// and are spaced out.
    fn long_letters_ok(&self, ls: &[Letter], off: &[usize], limit: usize) -> bool {
        let mut last: Option<usize> = None;
        for (i, &l) in ls.iter().enumerate() {
            if !self.is_long(l) {
                continue;
            }
            let end = off[i + 1];
            if end > limit || last.is_some_and(|p| end - p < self.gap) {
                return false;
            }
            last = Some(end);
        }
        true
    }

    /// Right-hand side for the lhs `ls` whose write-out `x` has first redex
    /// `u`, or `None` if the rule is discarded.
    fn rewrite(
        &self,
        ls: &[Letter],
        x: &[Letter],
        at_start: bool,
        at_end: bool,
        u: &Redex,
    ) -> Option<Word> {
        let limit = 2 * self.n - 1;
        let w = self.view.window;
        let after = x.len() - u.end;
        let mut y = x.to_vec();
        let mut count = 0;
        let mut leftmost = usize::MAX;
        let complete = loop {
            let Some(r) = self.visible(&y, at_start, at_end) else {
                break true;
            };
            y.splice(r.start..r.end, r.rhs.iter().copied());
            count += 1;
            leftmost = leftmost.min(r.start);
            if count == limit {
                break false;
            }
            // The machine would next look left of the subword.
            if !at_start && r.start + 1 < w {
                return None;
            }
        };
        let point = self.reduction_point(&y, at_start, at_end);

        // Untouched letters stay, except long letters the redex has moved past.
        let mut keep = 0;
        let mut pos = 0;
        let mut last_long = None;
        for &l in ls {
            let end = pos + l.payload().unwrap().len();
            if end > leftmost || (self.is_long(l) && end > point) {
                break;
            }
            if self.is_long(l) {
                last_long = Some(end);
            }
            keep += 1;
            pos = end;
        }
        let tail = &y[pos..];
        let old_long = ls[keep..].iter().filter(|l| self.is_long(**l)).count();
        let extra = (complete && after >= self.b) as usize;
        let since = last_long.map_or(self.gap, |p| (pos - p).min(self.gap));
        let body = self.pack(tail, pos, point, since, old_long + extra)?;
        if keep + body.len() >= ls.len() {
            return None;
        }
        let mut rhs = ls[..keep].to_vec();
        rhs.extend(body);
        Some(rhs)
    }

    /// Shortest way to write `tail` (which starts `pos` letters into the
    /// write-out) using at most `max_long` long letters, each ending by
    /// `point` and at least `gap` after the previous one; `since` is the
    /// distance back to the previous long letter, capped at `gap`. Ties go
    /// to fewer long letters, then to longer letters first.
    fn pack(
        &self,
        tail: &[Letter],
        pos: usize,
        point: usize,
        since: usize,
        max_long: usize,
    ) -> Option<Word> {
        let (n, gap, len) = (self.n, self.gap, tail.len());
        let long = n + 1..=2 * n - 1;
        // best[i][d][r]: (letters, long letters) to finish from i with the
        // last long letter d back and r long letters still allowed.
        let dim = (gap + 1, max_long + 1);
        let idx = |i: usize, d: usize, r: usize| (i * dim.0 + d) * dim.1 + r;
        let mut best = vec![None::<(usize, usize)>; (len + 1) * dim.0 * dim.1];
        for d in 0..=gap {
            for r in 0..=max_long {
                best[idx(len, d, r)] = Some((0, 0));
            }
        }
        let moves = |i: usize, d: usize, r: usize| {
            let shorts = (1..=n).rev().map(move |k| (k, false));
            let longs = long.clone().rev().map(move |k| (k, true));
            shorts.chain(longs).filter(move |&(k, is_long)| {
                i + k <= len && (!is_long || (r > 0 && d + k >= gap && pos + i + k <= point))
            })
        };
        let next = |i: usize, d: usize, r: usize, k: usize, is_long: bool| {
            if is_long {
                (i + k, 0, r - 1)
            } else {
                (i + k, gap.min(d + k), r)
            }
        };
        for i in (0..len).rev() {
            for d in 0..=gap {
                for r in 0..=max_long {
                    let mut b: Option<(usize, usize)> = None;
                    for (k, is_long) in moves(i, d, r) {
                        let (j, d2, r2) = next(i, d, r, k, is_long);
                        if let Some((c, l)) = best[idx(j, d2, r2)] {
                            let cand = (c + 1, l + is_long as usize);
                            if b.is_none_or(|x| cand < x) {
                                b = Some(cand);
                            }
                        }
                    }
                    best[idx(i, d, r)] = b;
                }
            }
        }
        let mut out = Vec::new();
        let (mut i, mut d, mut r) = (0, since, max_long);
        while i < len {
            let target = best[idx(i, d, r)]?;
            let (k, is_long) = moves(i, d, r)
                .find(|&(k, is_long)| {
                    let (j, d2, r2) = next(i, d, r, k, is_long);
                    best[idx(j, d2, r2)].map(|(c, l)| (c + 1, l + is_long as usize)) == Some(target)
                })
                .unwrap();
            out.push(Letter::compressed(&tail[i..i + k]));
            (i, d, r) = next(i, d, r, k, is_long);
        }
        Some(out)
    }
}

impl StrictCompressed {
    /// Letters of the working alphabet at the end of `w` (or its start, if
    /// `from_start`), up to `cap` base letters in all. Also says whether the
    /// run reaches the far end of `w`.
    fn run_of_letters<'w>(&self, w: impl ExactSizeIterator<Item = &'w Letter>) -> (usize, bool) {
        let size = w.len();
        let (mut count, mut total) = (0, 0);
        for &l in w {
            let Some(p) = self.view.payload(l, 2 * self.n - 1) else {
                break;
            };
            if total + p.len() > self.cap {
                break;
            }
            total += p.len();
            count += 1;
        }
        (count, count == size)
    }

    fn offsets(ls: &[Letter]) -> Vec<usize> {
        let mut off = Vec::with_capacity(ls.len() + 1);
        off.push(0);
        for l in ls {
            off.push(off.last().unwrap() + l.payload().unwrap().len());
        }
        off
    }

    fn in_band(&self, a: usize, anchored: bool) -> bool {
        if anchored {
            a < self.a
        } else {
            (self.a..=self.a + 2 * self.n - 2).contains(&a)
        }
    }
}

impl RuleSource for StrictCompressed {
    fn flavor(&self) -> Flavor {
        self.view.flavor
    }

    fn window(&self) -> usize {
        self.cap
    }

    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        let (count, reaches_start) = self.run_of_letters(prefix.iter().rev());
        if count == 0 {
            return None;
        }
        let ls = &prefix[prefix.len() - count..];
        let off = Self::offsets(ls);
        let x0 = write_out(ls);

        // First redex of each suffix, in x0 coordinates. It only changes once
        // the suffix starts inside it.
        let mut cached: Option<Redex> = None;
        for s in 0..ls.len() {
            let x = &x0[off[s]..];
            // At the start of the word the lhs is anchored when its redex is
            // close to the start, and an ordinary lhs otherwise.
            let mut u = None;
            if reaches_start && s == 0 {
                u = self.first(x, true, false).filter(|r| r.start < self.a);
            }
            let anchored = u.is_some();
            if !anchored {
                if cached.as_ref().is_none_or(|c| c.start < off[s]) {
                    cached = self.first(x, false, false).map(|r| Redex {
                        start: r.start + off[s],
                        end: r.end + off[s],
                        ..r
                    });
                }
                u = cached.clone().map(|r| Redex {
                    start: r.start - off[s],
                    end: r.end - off[s],
                    ..r
                });
            }
            let Some(u) = u else { break };
            if x.len() - u.end > self.b + self.n - 1 || !self.in_band(u.start, anchored) {
                continue;
            }
            let local: Vec<usize> = off[s..].iter().map(|o| o - off[s]).collect();
            if !self.long_letters_ok(&ls[s..], &local, u.end) {
                continue;
            }
            if let Some(rhs) = self.rewrite(&ls[s..], x, anchored, false, &u) {
                return Some(Match {
                    len: ls.len() - s,
                    rule: None,
                    rhs: Cow::Owned(rhs),
                    anchor_start: anchored,
                    anchor_end: false,
                });
            }
        }
        None
    }

    fn match_starting(&self, rest_rev: &[Letter], at_start: bool) -> Option<Match<'_>> {
        let (count, reaches_end) = self.run_of_letters(rest_rev.iter().rev());
        if count == 0 {
            return None;
        }
        let ls: Word = rest_rev.iter().rev().take(count).copied().collect();
        let off = Self::offsets(&ls);
        for len in (1..=count).rev() {
            let at_end = reaches_end && len == count;
            let x = write_out(&ls[..len]);
            let mut u = None;
            if at_start {
                u = self.first(&x, true, at_end).filter(|r| r.start < self.a);
            }
            let anchored = u.is_some();
            if !anchored {
                u = self.first(&x, false, at_end);
            }
            let Some(u) = u else { break };
            let after = x.len() - u.end;
            if after > self.b + self.n - 1
                || (after < self.b && !at_end)
                || !self.in_band(u.start, anchored)
            {
                continue;
            }
            if !self.long_letters_ok(&ls[..len], &off, u.start) {
                continue;
            }
            if let Some(rhs) = self.rewrite(&ls[..len], &x, anchored, at_end, &u) {
                return Some(Match {
                    len,
                    rule: None,
                    rhs: Cow::Owned(rhs),
                    anchor_start: anchored,
                    anchor_end: at_end,
                });
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{reduce, reduce_traced};
    use crate::letter::{format_word, parse_word};
    use crate::system::Rule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn free_group() -> RewritingSystem {
        let w = parse_word("a.A.b.B").unwrap();
        let rules = ["a.A", "A.a", "b.B", "B.b"]
            .iter()
            .map(|l| Rule::new(parse_word(l).unwrap(), vec![]))
            .collect();
        RewritingSystem::new(Flavor::Incremental, w.clone(), w, rules)
    }

    /// Checks the compression contract on `w` and returns the reduced word.
    fn check(base: &RewritingSystem, c: &StrictCompressed, w: &[Letter]) -> Word {
        let out = reduce(c, w).unwrap();
        let hist = reduce_traced(base, &write_out(w)).unwrap();
        let flat = write_out(&out);
        if !hist.words.contains(&flat) {
            let rules: Vec<String> = base.rules().iter().map(|r| r.to_string()).collect();
            let ours = reduce_traced(c, w).unwrap();
            let ours: Vec<String> = ours
                .words
                .iter()
                .map(|x| format_word(&write_out(x)))
                .collect();
            let theirs: Vec<String> = hist.words.iter().map(|x| format_word(x)).collect();
            panic!(
                "n={} rules {rules:?}\nours:\n{}\nbase:\n{}",
                c.n,
                ours.join("\n"),
                theirs.join("\n")
            );
        }
        assert_eq!(
            out.is_empty(),
            hist.result().is_empty(),
            "{}",
            format_word(w)
        );
        out
    }

    #[test]
    fn free_group_words() {
        let base = free_group();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alpha = base.input_alphabet().to_vec();
        for n in 1..=3 {
            let c = StrictCompressed::new(&base, n).unwrap();
            for _ in 0..300 {
                let len = rng.gen_range(0..40);
                let mut w: Word = (0..len).map(|_| alpha[rng.gen_range(0..4)]).collect();
                if rng.gen_bool(0.5) {
                    // Make it trivial so the whole word must vanish.
                    let inv: Word = w
                        .iter()
                        .rev()
                        .map(|l| {
                            let i = alpha.iter().position(|a| a == l).unwrap();
                            alpha[i ^ 1]
                        })
                        .collect();
                    w.extend(inv);
                }
                check(&base, &c, &c.encode(&w));
            }
        }
    }

    #[test]
    fn random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alpha = parse_word("a.b.c").unwrap();
        let rounds = std::env::var("STRESS").map_or(60, |v| v.parse().unwrap());
        for round in 0..rounds {
            let flavor = if round % 5 < 2 {
                Flavor::NonIncremental
            } else {
                Flavor::Incremental
            };
            let mut rules: Vec<Rule> = Vec::new();
            for _ in 0..rng.gen_range(1..6) {
                let k = rng.gen_range(1..=4);
                let lhs: Word = (0..k).map(|_| alpha[rng.gen_range(0..3)]).collect();
                let rhs: Word = (0..rng.gen_range(0..k))
                    .map(|_| alpha[rng.gen_range(0..3)])
                    .collect();
                let end = flavor == Flavor::NonIncremental && rng.gen_bool(0.2);
                let r = Rule::new(lhs, rhs).with_anchors(rng.gen_bool(0.2), end);
                if rules.iter().all(|x| x.key() != r.key()) {
                    rules.push(r);
                }
            }
            let base = RewritingSystem::new(flavor, alpha.clone(), alpha.clone(), rules);
            let c = StrictCompressed::new(&base, 1 + round % 4).unwrap();
            for _ in 0..40 {
                let w: Word = (0..rng.gen_range(0..90))
                    .map(|_| alpha[rng.gen_range(0..3)])
                    .collect();
                check(&base, &c, &c.encode(&w));
            }
        }
    }

    #[test]
    fn rejects_weak_systems() {
        let base = free_group().with_potential(crate::system::Potential::WrittenOutLength);
        assert!(StrictCompressed::new(&base, 2).is_err());
    }
}

//! Length-reducing systems from expanding endomorphisms.
//!
//! The working alphabet is 𝒢 ∪ {t, t⁻¹}, where a balanced word `t w t⁻¹`
//! stands for φ(w). Reduced words are place-value normal forms
//! `tⁿ gₙ t⁻¹ … t⁻¹ g₀`. The rules are produced on demand by
//! [`ExpandingSystem`], which is a [`RuleSource`]; for small parameters
//! [`ExpandingSystem::to_system`] enumerates them into an explicit table.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{self, Match, Matcher, RuleSource, Union};
use crate::error::{Error, Result};
use crate::groups::{
    random_word, Ball, GroupOracle, Integers, UniMatrix, Unitriangular, DEFAULT_BALL_BUDGET,
};
use crate::letter::{format_word, Letter, Word};
use crate::system::{Flavor, RewritingSystem, Rule};

pub type Element<D> = <<D as Endomorphism>::Group as GroupOracle>::Element;

/// An injective endomorphism φ of a group with finite-index image.
pub trait Endomorphism: Sync {
    type Group: GroupOracle;

    fn oracle(&self) -> &Self::Group;

    fn image(&self, e: &Element<Self>) -> Element<Self>;

    /// φ⁻¹(e), or `None` when e ∉ φ(G).
    fn preimage(&self, e: &Element<Self>) -> Option<Element<Self>>;

    /// A canonical label of the right coset φ(G)e.
    fn coset_key(&self, e: &Element<Self>) -> Element<Self>;

    /// [G : φ(G)].
    fn index(&self) -> usize;

    /// Upper bound on ℓ(φ(x)) over generators x.
    fn stretch(&self) -> usize;

    /// Exact word length when known in closed form.
    fn exact_length(&self, _e: &Element<Self>) -> Option<usize> {
        None
    }

    /// The expansion factor when it is known analytically.
    fn exact_expansion(&self) -> Option<Ratio<u64>> {
        None
    }

    fn label(&self) -> String;
}

/// n ↦ μn on ℤ.
#[derive(Clone, Debug)]
pub struct IntegerScaling {
    pub group: Integers,
    pub mu: i64,
}

impl IntegerScaling {
    pub fn new(group: Integers, mu: i64) -> IntegerScaling {
        assert!(mu >= 2);
        IntegerScaling { group, mu }
    }

    pub fn decimal() -> IntegerScaling {
        IntegerScaling::new(Integers::decimal(), 10)
    }
}

impl Endomorphism for IntegerScaling {
    type Group = Integers;

    fn oracle(&self) -> &Integers {
        &self.group
    }

    fn image(&self, e: &i64) -> i64 {
        e * self.mu
    }

    fn preimage(&self, e: &i64) -> Option<i64> {
        (e % self.mu == 0).then(|| e / self.mu)
    }

    fn coset_key(&self, e: &i64) -> i64 {
        e.rem_euclid(self.mu)
    }

    fn index(&self) -> usize {
        self.mu as usize
    }

    fn stretch(&self) -> usize {
        self.mu as usize
    }

    fn exact_length(&self, e: &i64) -> Option<usize> {
        Some(e.unsigned_abs() as usize)
    }

    fn exact_expansion(&self) -> Option<Ratio<u64>> {
        Some(Ratio::from_integer(self.mu as u64))
    }

    fn label(&self) -> String {
        format!("n -> {}n", self.mu)
    }
}

/// f_μ on U_n(ℤ): the (i, j) entry is multiplied by μ^(j−i).
#[derive(Clone, Debug)]
pub struct UnitriangularScaling {
    pub group: Unitriangular,
    pub mu: u32,
}

impl UnitriangularScaling {
    pub fn new(group: Unitriangular, mu: u32) -> UnitriangularScaling {
        assert!(mu >= 2);
        UnitriangularScaling { group, mu }
    }

    fn power(&self, d: usize) -> BigInt {
        num_traits::pow(BigInt::from(self.mu), d)
    }
}

impl Endomorphism for UnitriangularScaling {
    type Group = Unitriangular;

    fn oracle(&self) -> &Unitriangular {
        &self.group
    }

    fn image(&self, e: &UniMatrix) -> UniMatrix {
        let g = &self.group;
        g.from_entries(|i, j| g.entry(e, i, j) * self.power(j - i))
    }

    fn preimage(&self, e: &UniMatrix) -> Option<UniMatrix> {
        let g = &self.group;
        let n = g.dim();
        let mut out = Vec::with_capacity(e.0.len());
        for i in 0..n {
            for j in i + 1..n {
                let (q, r) = g.entry(e, i, j).div_rem(&self.power(j - i));
                if !r.is_zero() {
                    return None;
                }
                out.push(q);
            }
        }
        Some(UniMatrix(out))
    }

    /// Left-multiplies by image elements I + kμ^p E_{i,i+p}, superdiagonal by
    /// superdiagonal, until every entry (i, j) lies in [0, μ^(j−i)). Such a
    /// multiplication only changes entries on superdiagonals ≥ p, so the
    /// reduced diagonals stay fixed.
    fn coset_key(&self, e: &UniMatrix) -> UniMatrix {
        let g = &self.group;
        let n = g.dim();
        let mut x = e.clone();
        for p in 1..n {
            let m = self.power(p);
            for i in 0..n - p {
                let j = i + p;
                let k = -g.entry(&x, i, j).div_floor(&m);
                if k.is_zero() {
                    continue;
                }
                // row i += k μ^p · row j (the unit diagonal contributes k μ^p at (i, j)).
                let km = &k * &m;
                let s = g.slot(i, j);
                x.0[s] += &km;
                for c in j + 1..n {
                    let add = &km * g.entry(&x, j, c);
                    let s = g.slot(i, c);
                    x.0[s] += add;
                }
            }
        }
        x
    }

    fn index(&self) -> usize {
        let n = self.group.dim();
        let exp: usize = (1..n).map(|p| p * (n - p)).sum();
        (self.mu as usize).pow(exp as u32)
    }

    fn stretch(&self) -> usize {
        self.mu as usize
    }

    fn label(&self) -> String {
        format!("f_{} on U_{}(Z)", self.mu, self.group.dim())
    }
}

/// The nearest-coset table: for each coset of φ(G), the index in a ball of
/// its first element in BFS order (shortest, then lexicographically least).
pub struct CosetTable<E> {
    best: HashMap<E, usize>,
}

impl<E: Clone + Eq + std::hash::Hash> CosetTable<E> {
    pub fn build<D>(endo: &D, ball: &Ball<E>) -> Result<CosetTable<E>>
    where
        D: Endomorphism + ?Sized,
        D::Group: GroupOracle<Element = E>,
    {
        let mut best = HashMap::new();
        for (i, e) in ball.elements().iter().enumerate() {
            best.entry(endo.coset_key(e)).or_insert(i);
        }
        if best.len() != endo.index() {
            return Err(Error::Params(format!(
                "only {} of {} cosets of the image meet the ball of radius {}; the image is not {}-dense",
                best.len(),
                endo.index(),
                ball.radius,
                ball.radius
            )));
        }
        Ok(CosetTable { best })
    }

    pub fn nearest(&self, key: &E) -> usize {
        self.best[key]
    }

    /// Distance from the image to its farthest coset (the density radius).
    pub fn radius(&self, ball: &Ball<E>) -> usize {
        self.best
            .values()
            .map(|&i| ball.length_at(i))
            .max()
            .unwrap_or(0)
    }
}

/// Splits `elt` as φ(g′)·g″ with g″ a shortest coset representative.
/// Both words are canonical geodesics; `ball` must contain g′.
pub fn coset_decompose<D: Endomorphism + ?Sized>(
    endo: &D,
    ball: &Ball<Element<D>>,
    cosets: &CosetTable<Element<D>>,
    elt: &Element<D>,
) -> Result<(Word, Word)> {
    let g = endo.oracle();
    let i = cosets.nearest(&endo.coset_key(elt));
    let h = g.mul(elt, &g.inverse(&ball.elements()[i]));
    let pre = endo
        .preimage(&h)
        .expect("coset representative leaves the image");
    let g1 = ball.geodesic(&pre).ok_or_else(|| {
        Error::Params(format!(
            "preimage lies outside the ball of radius {}",
            ball.radius
        ))
    })?;
    Ok((g1, ball.geodesic_at(i)))
}

/// The distance from the image to its farthest coset (the least K for which
/// the image is K-dense), found by growing balls.
pub fn density<D: Endomorphism + ?Sized>(endo: &D, budget: usize) -> Result<usize> {
    for r in 0.. {
        let ball = Ball::build(endo.oracle(), r, budget)?;
        if let Ok(t) = CosetTable::build(endo, &ball) {
            return Ok(t.radius(&ball));
        }
    }
    unreachable!()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpandingParams {
    /// Expansion factor (a lower bound).
    pub m: Ratio<u64>,
    /// Density radius.
    pub k: usize,
    /// Height bound for rule 5.
    pub n: Option<usize>,
    /// False when M was only measured on a finite ball.
    pub m_exact: bool,
}

impl ExpandingParams {
    pub fn new(m: Ratio<u64>, k: usize, n: Option<usize>) -> ExpandingParams {
        ExpandingParams {
            m,
            k,
            n,
            m_exact: false,
        }
    }

    /// 3/M + 2/K < 1.
    pub fn decreasing(&self) -> bool {
        self.k > 0
            && Ratio::from_integer(3u64) / self.m + Ratio::new(2u64, self.k as u64)
                < Ratio::from_integer(1)
    }

    /// (M/3)^N > K.
    pub fn height_ok(&self, n: usize) -> bool {
        let (p, q) = (
            BigUint::from(*self.m.numer()),
            BigUint::from(*self.m.denom()),
        );
        num_traits::pow(p, n) > BigUint::from(self.k) * num_traits::pow(q * 3u32, n)
    }

    /// The least N with (M/3)^N > K, if M > 3.
    pub fn least_height(&self) -> Option<usize> {
        if self.m <= Ratio::from_integer(3) {
            return None;
        }
        (1..).find(|&n| self.height_ok(n))
    }

    pub fn check(&self) -> Result<()> {
        if self.m <= Ratio::from_integer(1) {
            return Err(Error::Params(format!(
                "expansion factor M = {} is not > 1",
                self.m
            )));
        }
        if !self.decreasing() {
            return Err(Error::Params(format!(
                "3/M + 2/K = {} is not < 1 (M = {}, K = {}); replace the endomorphism by a power",
                Ratio::from_integer(3u64) / self.m + Ratio::new(2u64, self.k.max(1) as u64),
                self.m,
                self.k
            )));
        }
        if let Some(n) = self.n {
            if n == 0 || !self.height_ok(n) {
                return Err(Error::Params(format!("(M/3)^N > K fails for N = {n}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ExpandingParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "M = {}{}, K = {}",
            self.m,
            if self.m_exact { "" } else { " (empirical)" },
            self.k
        )?;
        match self.n {
            Some(n) => write!(f, ", N = {n}"),
            None => Ok(()),
        }
    }
}

/// Measures M on the ball of the given radius and K exactly.
pub fn estimate_params<D: Endomorphism + ?Sized>(
    endo: &D,
    radius: usize,
    budget: usize,
) -> Result<ExpandingParams> {
    let g = endo.oracle();
    let k = density(endo, budget)?;
    let (m, exact) = match endo.exact_expansion() {
        Some(m) => (m, true),
        None => {
            let big = Ball::build(g, endo.stretch() * radius, budget)?;
            let mut m: Option<Ratio<u64>> = None;
            for r in 1..=radius {
                for i in big.sphere(r) {
                    let img = endo.image(&big.elements()[i]);
                    let len = big.length(&img).expect("image within the stretched ball");
                    let q = Ratio::new(len as u64, r as u64);
                    m = Some(m.map_or(q, |m| m.min(q)));
                }
            }
            (m.ok_or_else(|| Error::Params("empty ball".into()))?, false)
        }
    };
    let params = ExpandingParams {
        m,
        k,
        n: None,
        m_exact: exact,
    };
    params.check()?;
    Ok(params)
}

/// Shape of a word `tⁿ gₙ t⁻¹ gₙ₋₁ … t⁻¹ g₀` with each gᵢ over 𝒢.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub height: usize,
    /// gₙ, …, g₀.
    pub digits: Vec<Word>,
}

impl NormalForm {
    pub fn last_digit(&self) -> &[Letter] {
        self.digits.last().map(|d| &d[..]).unwrap_or(&[])
    }

    pub fn to_word(&self, t: Letter, t_inv: Letter) -> Word {
        let mut w = vec![t; self.height];
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                w.push(t_inv);
            }
            w.extend_from_slice(d);
        }
        w
    }
}

/// Splits by shape only; `None` if the t's are not all at the front or the
/// t⁻¹ count differs from the t count.
pub fn split_normal_form(w: &[Letter], t: Letter, t_inv: Letter) -> Option<NormalForm> {
    let height = w.iter().take_while(|&&l| l == t).count();
    let digits: Vec<Word> = w[height..]
        .split(|&l| l == t_inv)
        .map(|d| d.to_vec())
        .collect();
    if digits.len() != height + 1 || digits.iter().flatten().any(|&l| l == t) {
        return None;
    }
    Some(NormalForm { height, digits })
}

/// Evaluates a balanced word over 𝒢 ∪ {t, t⁻¹}, reading `t w t⁻¹` as φ(w).
pub fn eval_balanced<D: Endomorphism + ?Sized>(
    endo: &D,
    t: Letter,
    t_inv: Letter,
    w: &[Letter],
) -> Result<Element<D>> {
    let g = endo.oracle();
    let mut stack = vec![g.identity()];
    for &l in w {
        if l == t {
            stack.push(g.identity());
        } else if l == t_inv {
            if stack.len() < 2 {
                return Err(Error::Precondition(format!(
                    "unbalanced word {}",
                    format_word(w)
                )));
            }
            let inner = stack.pop().unwrap();
            let top = stack.last_mut().unwrap();
            *top = g.mul(top, &endo.image(&inner));
        } else {
            let x = g.eval(&[l])?;
            let top = stack.last_mut().unwrap();
            *top = g.mul(top, &x);
        }
    }
    if stack.len() != 1 {
        return Err(Error::Precondition(format!(
            "unbalanced word {}",
            format_word(w)
        )));
    }
    Ok(stack.pop().unwrap())
}

/// True iff every prefix has at least as many t's as t⁻¹'s and the counts agree at the end.
pub fn is_balanced(w: &[Letter], t: Letter, t_inv: Letter) -> bool {
    let mut depth = 0i64;
    for &l in w {
        if l == t {
            depth += 1;
        } else if l == t_inv {
            depth -= 1;
            if depth < 0 {
                return false;
            }
        }
    }
    depth == 0
}

/// Rules 1 to 4 (and optionally 5) for an expanding endomorphism, answered
/// from a BFS ball of radius 2K.
pub struct ExpandingSystem<D: Endomorphism> {
    pub endo: D,
    pub params: ExpandingParams,
    pub t: Letter,
    pub t_inv: Letter,
    gens: HashMap<Letter, Element<D>>,
    ball: Ball<Element<D>>,
    cosets: CosetTable<Element<D>>,
    /// Rule 2 right-hand sides (g′, g″) for the elements of length 2K.
    split: HashMap<Element<D>, (Word, Word)>,
    rule5_anchored: bool,
}

impl<D: Endomorphism> ExpandingSystem<D> {
    pub fn new(endo: D, params: ExpandingParams) -> Result<ExpandingSystem<D>> {
        ExpandingSystem::with_budget(endo, params, DEFAULT_BALL_BUDGET)
    }

    pub fn with_budget(
        endo: D,
        params: ExpandingParams,
        budget: usize,
    ) -> Result<ExpandingSystem<D>> {
        params.check()?;
        let (t, t_inv) = (Letter::new("t"), Letter::new("t-"));
        let g = endo.oracle();
        if g.generators().iter().any(|&x| x == t || x == t_inv) {
            return Err(Error::Params("generator names clash with t / t-".into()));
        }
        let gens = g
            .generators()
            .iter()
            .map(|&x| (x, g.generator(x).unwrap()))
            .collect();
        let k = params.k;
        let ball = Ball::build(g, 2 * k, budget)?;
        let inner = Ball::build(g, k, budget)?;
        CosetTable::build(&endo, &inner)?;
        let cosets = CosetTable::build(&endo, &ball)?;
        let mut split = HashMap::new();
        for i in ball.sphere(2 * k) {
            let e = &ball.elements()[i];
            let (g1, g2) = coset_decompose(&endo, &ball, &cosets, e)?;
            if 2 + g1.len() + g2.len() >= 2 * k {
                return Err(Error::Params(format!(
                    "rule 2 instance for {} is not length-decreasing: t {} t- {}",
                    format_word(&ball.geodesic_at(i)),
                    format_word(&g1),
                    format_word(&g2)
                )));
            }
            split.insert(e.clone(), (g1, g2));
        }
        // Rule 3 preimages must be short enough to look up.
        for e in ball.elements() {
            if let Some(p) = endo.preimage(e) {
                if ball.length(&p).is_none() {
                    return Err(Error::Params("rule 3 preimage outside the ball".into()));
                }
            }
        }
        Ok(ExpandingSystem {
            endo,
            params,
            t,
            t_inv,
            gens,
            ball,
            cosets,
            split,
            rule5_anchored: false,
        })
    }

    pub fn ball(&self) -> &Ball<Element<D>> {
        &self.ball
    }

    pub fn generators(&self) -> &[Letter] {
        self.endo.oracle().generators()
    }

    pub fn working_alphabet(&self) -> Word {
        let mut w = self.generators().to_vec();
        w.push(self.t);
        w.push(self.t_inv);
        w
    }

    fn eval_gens(&self, w: &[Letter]) -> Element<D> {
        let g = self.endo.oracle();
        w.iter()
            .fold(g.identity(), |acc, l| g.mul(&acc, &self.gens[l]))
    }

    pub fn decompose(&self, e: &Element<D>) -> Result<(Word, Word)> {
        coset_decompose(&self.endo, &self.ball, &self.cosets, e)
    }

    /// Value of a balanced word.
    pub fn value(&self, w: &[Letter]) -> Result<Element<D>> {
        eval_balanced(&self.endo, self.t, self.t_inv, w)
    }

    /// Word length of an element when it can be determined.
    pub fn length(&self, e: &Element<D>) -> Option<usize> {
        self.endo.exact_length(e).or_else(|| self.ball.length(e))
    }

    /// Parses a reduced word, checking the normal form clauses.
    pub fn parse_normal_form(&self, w: &[Letter]) -> Result<NormalForm> {
        let nf = split_normal_form(w, self.t, self.t_inv).ok_or_else(|| {
            Error::Precondition(format!(
                "{} is not of the form t^n g t- ... g",
                format_word(w)
            ))
        })?;
        let k2 = 2 * self.params.k;
        for (pos, d) in nf.digits.iter().enumerate() {
            let i = nf.height - pos;
            let e = self.eval_gens(d);
            if d.len() >= k2 || self.ball.length(&e) != Some(d.len()) {
                return Err(Error::Precondition(format!(
                    "digit {i} ({}) is not a short geodesic",
                    format_word(d)
                )));
            }
            if i < nf.height && !d.is_empty() && self.endo.preimage(&e).is_some() {
                return Err(Error::Precondition(format!(
                    "digit {i} ({}) lies in the image",
                    format_word(d)
                )));
            }
            if i == nf.height && nf.height > 0 && d.is_empty() {
                return Err(Error::Precondition("leading digit is empty".into()));
            }
        }
        Ok(nf)
    }

    /// Rule 5 left-hand side ending at the end of `prefix`. Its height is the
    /// number of trailing t⁻¹'s after the last t, which fixes its start.
    fn rule5(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        let n_max = self.params.n?;
        let window = self.rule5_window();
        let n = prefix.len();
        let mut c = 0;
        let mut j = n;
        loop {
            if j == 0 || n - j >= window {
                return None;
            }
            j -= 1;
            if prefix[j] == self.t {
                break;
            }
            if prefix[j] == self.t_inv {
                c += 1;
            }
        }
        if c == 0 || c > n_max || j + 1 < c {
            return None;
        }
        let s = j + 1 - c;
        if self.rule5_anchored && s != 0 {
            return None;
        }
        let lhs = &prefix[s..];
        let nf = self.parse_normal_form(lhs).ok()?;
        let v = self.value(lhs).ok()?;
        let len = self.ball.length(&v)?;
        if 2 * len >= nf.last_digit().len() {
            return None;
        }
        Some(Match {
            len: lhs.len(),
            rule: None,
            rhs: Cow::Owned(self.ball.geodesic(&v).unwrap()),
            anchor_start: self.rule5_anchored,
            anchor_end: false,
        })
    }

    fn rule5_window(&self) -> usize {
        let n = self.params.n.unwrap_or(0);
        2 * n + (n + 1) * (2 * self.params.k - 1)
    }

    /// Restricts rule 5 to whole-word prefixes instead of subwords.
    pub fn with_anchored_rule5(mut self, anchored: bool) -> ExpandingSystem<D> {
        self.rule5_anchored = anchored;
        self
    }

    fn unanchored(len: usize, rhs: Word) -> Option<Match<'static>> {
        Some(Match {
            len,
            rule: None,
            rhs: Cow::Owned(rhs),
            anchor_start: false,
            anchor_end: false,
        })
    }

    /// Enumerates the rule table. Fails when it would exceed `max_rules`.
    pub fn to_system(&self, max_rules: usize) -> Result<RewritingSystem> {
        let gens = self.generators().to_vec();
        let k2 = 2 * self.params.k;
        let too_many = || Error::Budget(format!("rule table exceeds {max_rules} rules"));
        let mut rules: Vec<Rule> = Vec::new();
        // Words over 𝒢 of length ≤ 2K, depth first with running values.
        let mut geodesic_words: Vec<Vec<(Word, Element<D>)>> = vec![Vec::new(); k2 + 1];
        let g = self.endo.oracle();
        let mut stack: Vec<(Word, Element<D>)> = vec![(Vec::new(), g.identity())];
        while let Some((w, e)) = stack.pop() {
            let len = self.ball.length(&e).unwrap();
            if len < w.len() {
                if rules.len() >= max_rules {
                    return Err(too_many());
                }
                rules.push(Rule::new(w.clone(), self.ball.geodesic(&e).unwrap()));
            } else {
                geodesic_words[w.len()].push((w.clone(), e.clone()));
            }
            if w.len() < k2 {
                for &x in gens.iter().rev() {
                    let mut v = w.clone();
                    v.push(x);
                    stack.push((v, g.mul(&e, &self.gens[&x])));
                }
            }
            if rules.len() + geodesic_words.iter().map(Vec::len).sum::<usize>() > max_rules {
                return Err(too_many());
            }
        }
        let mut extra: Vec<Rule> = Vec::new();
        for (w, e) in &geodesic_words[k2] {
            let (g1, g2) = &self.split[e];
            let mut rhs = vec![self.t];
            rhs.extend_from_slice(g1);
            rhs.push(self.t_inv);
            rhs.extend_from_slice(g2);
            extra.push(Rule::new(w.clone(), rhs));
            let mut lhs = vec![self.t_inv];
            lhs.extend_from_slice(w);
            let mut rhs = g1.clone();
            rhs.push(self.t_inv);
            rhs.extend_from_slice(g2);
            extra.push(Rule::new(lhs, rhs));
        }
        for words in &geodesic_words[1..=k2] {
            for (w, e) in words {
                if let Some(p) = self.endo.preimage(e) {
                    let mut lhs = vec![self.t_inv];
                    lhs.extend_from_slice(w);
                    let mut rhs = self.ball.geodesic(&p).unwrap();
                    rhs.push(self.t_inv);
                    extra.push(Rule::new(lhs, rhs));
                }
            }
        }
        extra.push(Rule::new(vec![self.t, self.t_inv], vec![]));
        if let Some(n_max) = self.params.n {
            let digits: Vec<&Word> = geodesic_words[..k2]
                .iter()
                .flatten()
                .map(|(w, _)| w)
                .collect();
            let interior: Vec<&Word> = geodesic_words[..k2]
                .iter()
                .flatten()
                .filter(|(w, e)| w.is_empty() || self.endo.preimage(e).is_none())
                .map(|(w, _)| w)
                .collect();
            for height in 1..=n_max {
                let count = digits.len().saturating_pow(height as u32 + 1);
                if rules.len() + extra.len() + count > max_rules.saturating_mul(16) {
                    return Err(too_many());
                }
                let mut idx = vec![0usize; height + 1];
                loop {
                    let nf = NormalForm {
                        height,
                        digits: (0..=height)
                            .map(|p| {
                                if p == 0 {
                                    digits[idx[0]].clone()
                                } else {
                                    interior[idx[p]].clone()
                                }
                            })
                            .collect(),
                    };
                    let w = nf.to_word(self.t, self.t_inv);
                    if !nf.digits[0].is_empty() {
                        if let Some(m) = self.rule5(&w) {
                            let r = Rule::new(w, m.rhs.into_owned());
                            extra.push(r.with_anchors(self.rule5_anchored, false));
                        }
                    }
                    // Odometer over (leading digit, interior digits).
                    let mut p = height;
                    loop {
                        let lim = if p == 0 { digits.len() } else { interior.len() };
                        idx[p] += 1;
                        if idx[p] < lim {
                            break;
                        }
                        idx[p] = 0;
                        if p == 0 {
                            break;
                        }
                        p -= 1;
                    }
                    if idx.iter().all(|&i| i == 0) {
                        break;
                    }
                }
            }
        }
        rules.extend(extra);
        if rules.len() > max_rules {
            return Err(too_many());
        }
        let sys = crate::system::merge_rules(
            Flavor::Incremental,
            gens.clone(),
            self.working_alphabet(),
            rules,
        )?;
        Ok(sys)
    }
}

impl<D: Endomorphism> RuleSource for ExpandingSystem<D> {
    fn flavor(&self) -> Flavor {
        Flavor::Incremental
    }

    fn window(&self) -> usize {
        let k2 = 2 * self.params.k;
        (k2 + 1).max(self.rule5_window())
    }

    fn match_ending(&self, prefix: &[Letter]) -> Option<Match<'_>> {
        let k2 = 2 * self.params.k;
        let n = prefix.len();
        let run = prefix
            .iter()
            .rev()
            .take(k2 + 1)
            .take_while(|l| self.gens.contains_key(l))
            .count();
        let m = run.min(k2);
        if m > 0 {
            let s = &prefix[n - m..];
            let e = self.eval_gens(s);
            let geodesic = self.ball.length(&e) == Some(m);
            if geodesic && run <= k2 && n > run && prefix[n - run - 1] == self.t_inv {
                if run == k2 {
                    let (g1, g2) = &self.split[&e];
                    let mut rhs = g1.clone();
                    rhs.push(self.t_inv);
                    rhs.extend_from_slice(g2);
                    return Self::unanchored(run + 1, rhs);
                }
                if let Some(p) = self.endo.preimage(&e) {
                    let mut rhs = self.ball.geodesic(&p).unwrap();
                    rhs.push(self.t_inv);
                    return Self::unanchored(run + 1, rhs);
                }
            }
            if !geodesic {
                return Self::unanchored(m, self.ball.geodesic(&e).unwrap());
            }
            if m == k2 {
                let (g1, g2) = &self.split[&e];
                let mut rhs = vec![self.t];
                rhs.extend_from_slice(g1);
                rhs.push(self.t_inv);
                rhs.extend_from_slice(g2);
                return Self::unanchored(k2, rhs);
            }
        } else if n >= 2 && prefix[n - 2] == self.t && prefix[n - 1] == self.t_inv {
            return Self::unanchored(2, Vec::new());
        }
        self.rule5(prefix)
    }

    fn match_starting(&self, _rest_rev: &[Letter], _at_start: bool) -> Option<Match<'_>> {
        None
    }
}

impl<D: Endomorphism> ExpandingSystem<D> {
    pub fn reduce(&self, w: &[Letter]) -> Result<Word> {
        engine::reduce(self, w)
    }

    pub fn accepts(&self, w: &[Letter]) -> Result<bool> {
        if let Some(&l) = w.iter().find(|l| !self.gens.contains_key(l)) {
            return Err(Error::UnknownLetter {
                letter: l.name().into(),
                alphabet: "input",
            });
        }
        Ok(self.reduce(w)?.is_empty())
    }
}

/// Outcome of [`check_height_bound`].
#[derive(Clone, Debug, Default)]
pub struct HeightReport {
    pub checked: usize,
    /// Outputs whose length could not be determined.
    pub skipped: usize,
    /// (input, output, height, length) for each violation.
    pub violations: Vec<(Word, Word, usize, usize)>,
}

/// ℓ(value) ≥ (M/3)^height on the reduced forms of the given inputs.
pub fn check_height_bound<D: Endomorphism>(
    sys: &ExpandingSystem<D>,
    inputs: &[Word],
) -> Result<HeightReport> {
    let mut report = HeightReport::default();
    let (p, q) = (
        BigUint::from(*sys.params.m.numer()),
        BigUint::from(*sys.params.m.denom()),
    );
    for w in inputs {
        let out = sys.reduce(w)?;
        let v = sys.value(&out)?;
        if sys.endo.oracle().is_identity(&v) {
            continue;
        }
        let nf = sys.parse_normal_form(&out)?;
        let Some(len) = sys.length(&v) else {
            report.skipped += 1;
            continue;
        };
        report.checked += 1;
        let h = nf.height;
        if BigUint::from(len) * num_traits::pow(q.clone() * 3u32, h) < num_traits::pow(p.clone(), h)
        {
            report.violations.push((w.clone(), out, h, len));
        }
    }
    Ok(report)
}

/// Outcome of [`check_tight`].
#[derive(Clone, Debug, Default)]
pub struct TightReport {
    pub checked: usize,
    /// Inputs whose output is not a geodesic word over 𝒢.
    pub not_geodesic: Vec<(Word, Word)>,
    /// Inputs during whose reduction an extra rule fired.
    pub extra_fired: Vec<Word>,
}

/// Merges `extra` local geodesic rules into the system and reduces the
/// sampled words whose value has length below `n`.
pub fn check_tight<D: Endomorphism>(
    sys: &ExpandingSystem<D>,
    extra: &[Rule],
    n: usize,
    samples: usize,
    max_len: usize,
    seed: u64,
) -> Result<TightReport> {
    let g = sys.endo.oracle();
    for r in extra {
        let over_gens = |w: &[Letter]| w.iter().all(|l| sys.gens.contains_key(l));
        if !over_gens(&r.lhs) || !over_gens(&r.rhs) || r.anchor_start || r.anchor_end {
            return Err(Error::Precondition(format!(
                "{r} is not a local rule over the generators"
            )));
        }
        if r.rhs.len() >= r.lhs.len() || sys.ball.length(&g.eval(&r.rhs)?) != Some(r.rhs.len()) {
            return Err(Error::Precondition(format!(
                "{r} is not a shortening rule with geodesic right-hand side"
            )));
        }
        if g.eval(&r.lhs)? != g.eval(&r.rhs)? {
            return Err(Error::Precondition(format!(
                "{r} does not preserve the element"
            )));
        }
        if sys
            .match_ending(&r.lhs)
            .is_some_and(|m| m.len == r.lhs.len())
        {
            return Err(Error::Precondition(format!(
                "left-hand side of {r} is already a left-hand side"
            )));
        }
    }
    let matcher = Matcher::build(Flavor::Incremental, extra);
    let union = Union::new(vec![sys as &dyn RuleSource, &matcher])?;
    let extra_lhs: HashSet<&Word> = extra.iter().map(|r| &r.lhs).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = TightReport::default();
    let mut attempts = 0;
    while report.checked < samples && attempts < samples * 100 {
        attempts += 1;
        let len = rng.gen_range(0..=max_len);
        let w = random_word(&mut rng, sys.generators(), len);
        let e = g.eval(&w)?;
        if sys.length(&e).is_none_or(|l| l >= n) {
            continue;
        }
        report.checked += 1;
        let mut fired = false;
        let out = engine::run(&union, &w, |step, _, _| {
            fired |= extra_lhs.contains(&step.lhs);
            true
        })?;
        if fired {
            report.extra_fired.push(w.clone());
        }
        let geodesic =
            out.iter().all(|l| sys.gens.contains_key(l)) && sys.length(&e) == Some(out.len());
        if !geodesic {
            report.not_geodesic.push((w, out));
        }
    }
    Ok(report)
}

/// ℤ with n ↦ μn, as in decimal notation for μ = 10.
pub fn integer_system(
    mu: i64,
    k: usize,
    n: Option<usize>,
) -> Result<ExpandingSystem<IntegerScaling>> {
    let endo = IntegerScaling::new(Integers::decimal(), mu);
    let params = ExpandingParams {
        m: Ratio::from_integer(mu as u64),
        k,
        n,
        m_exact: true,
    };
    ExpandingSystem::new(endo, params)
}

/// U₃(ℤ) on x, X, y, Y with f_μ. M is measured on the ball of radius 4;
/// `k` defaults to the exact density radius.
pub fn heisenberg_system(
    mu: u32,
    k: Option<usize>,
    n: Option<usize>,
) -> Result<ExpandingSystem<UnitriangularScaling>> {
    let endo = UnitriangularScaling::new(Unitriangular::heisenberg(), mu);
    let mut params = estimate_params(&endo, 4, DEFAULT_BALL_BUDGET)?;
    params.k = k.unwrap_or(params.k);
    params.n = n;
    ExpandingSystem::new(endo, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::letter::parse_word;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    fn ones(n: usize) -> Word {
        vec![Letter::new("1"); n]
    }

    #[test]
    fn decompose_is_nearest_coset() {
        let sys = integer_system(10, 5, None).unwrap();
        let (g1, g2) = sys.decompose(&7).unwrap();
        assert_eq!((g1, g2), (w("1"), w("-1.-1.-1")));
        let (g1, g2) = sys.decompose(&10).unwrap();
        assert_eq!((g1, g2), (w("1"), vec![]));
    }

    #[test]
    fn decimal_572() {
        let sys = integer_system(10, 5, None).unwrap();
        let out = sys.reduce(&ones(572)).unwrap();
        assert_eq!(format_word(&out), "t.t.1.1.1.1.1.t-.1.1.1.1.1.1.1.t-.1.1");
        let nf = sys.parse_normal_form(&out).unwrap();
        assert_eq!(nf.height, 2);
        assert_eq!(nf.digits, vec![ones(5), ones(7), ones(2)]);
        assert_eq!(sys.value(&out).unwrap(), 572);
    }

    #[test]
    fn integer_params() {
        let p = estimate_params(&IntegerScaling::decimal(), 10, 1000).unwrap();
        assert_eq!((p.m, p.k), (Ratio::from_integer(10), 5));
        let e = estimate_params(&IntegerScaling::new(Integers::decimal(), 2), 10, 1000);
        assert!(matches!(e, Err(Error::Params(_))));
    }

    #[test]
    fn empty_word_is_a_normal_form() {
        let sys = integer_system(10, 5, None).unwrap();
        let nf = sys.parse_normal_form(&[]).unwrap();
        assert_eq!((nf.height, nf.digits), (0, vec![vec![]]));
    }

    #[test]
    fn implicit_matches_explicit_for_integers() {
        for n in [None, Some(2)] {
            let sys = integer_system(10, 5, n).unwrap();
            let table = sys.to_system(1_000_000).unwrap();
            assert!(table.validate().is_empty());
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..300 {
                let len = rng.gen_range(0..120);
                let mut word = random_word(&mut rng, sys.generators(), len);
                if rng.gen_bool(0.5) {
                    word.extend(ones(rng.gen_range(0..200)));
                }
                let a = engine::reduce_traced(&sys, &word).unwrap();
                let b = table.reduce_traced(&word).unwrap();
                assert_eq!(a.words, b.words);
            }
        }
    }

    #[test]
    fn heisenberg_coset_key_is_invariant() {
        let endo = UnitriangularScaling::new(Unitriangular::heisenberg(), 3);
        let g = endo.oracle();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut keys = HashSet::new();
        for _ in 0..500 {
            let x = g.eval(&random_word(&mut rng, g.generators(), 20)).unwrap();
            let h = endo.image(&g.eval(&random_word(&mut rng, g.generators(), 8)).unwrap());
            let k = endo.coset_key(&x);
            assert_eq!(endo.coset_key(&g.mul(&h, &x)), k);
            // The key is itself in the coset.
            assert!(endo.preimage(&g.mul(&x, &g.inverse(&k))).is_some());
            keys.insert(k);
        }
        assert!(keys.len() <= endo.index());
    }

    #[test]
    fn u4_coset_key_is_invariant() {
        let endo = UnitriangularScaling::new(
            Unitriangular::new(4, &[("p", "P"), ("q", "Q"), ("r", "R")]),
            2,
        );
        assert_eq!(endo.index(), 2usize.pow(10));
        let g = endo.oracle();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..300 {
            let x = g.eval(&random_word(&mut rng, g.generators(), 16)).unwrap();
            let h = endo.image(&g.eval(&random_word(&mut rng, g.generators(), 6)).unwrap());
            assert_eq!(endo.coset_key(&g.mul(&h, &x)), endo.coset_key(&x));
            assert_eq!(endo.preimage(&endo.image(&x)), Some(x));
        }
    }

    #[test]
    fn balanced_evaluation() {
        let endo = IntegerScaling::decimal();
        let (t, ti) = (Letter::new("t"), Letter::new("t-"));
        assert_eq!(eval_balanced(&endo, t, ti, &w("t.1.t-.-1.-1")).unwrap(), 8);
        assert!(eval_balanced(&endo, t, ti, &w("t-.t")).is_err());
        assert!(is_balanced(&w("t.t.1.t-.t-"), t, ti));
        assert!(!is_balanced(&w("t-.t"), t, ti));
    }

    #[test]
    fn height_bound_has_teeth() {
        let mut input = ones(1_000);
        input.extend(vec![Letter::new("-1"); 999]);
        let plain = integer_system(10, 5, None).unwrap();
        let r = check_height_bound(&plain, &[input.clone()]).unwrap();
        assert_eq!(r.violations.len(), 1);
        let with5 = integer_system(10, 5, Some(2)).unwrap();
        assert!(with5.params.height_ok(2));
        let r = check_height_bound(&with5, &[input.clone()]).unwrap();
        assert!(r.violations.is_empty());
        // Whole-word rule 5 never sees the nested inner word.
        let anchored = integer_system(10, 5, Some(2))
            .unwrap()
            .with_anchored_rule5(true);
        let r = check_height_bound(&anchored, &[input]).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(
            with5
                .reduce(&w("t.1.t-.-1.-1.-1.-1.-1.-1.-1.-1.-1"))
                .unwrap(),
            w("1")
        );
        assert_eq!(with5.reduce(&w("t.1.t-.-1")).unwrap(), w("t.1.t-.-1"));
    }

    #[test]
    fn tightness_with_a_local_rule() {
        let sys = integer_system(10, 5, Some(2)).unwrap();
        let extra = vec![Rule::new(w("-1.1.1"), w("1"))];
        // Rule 1 already covers this left-hand side.
        assert!(check_tight(&sys, &extra, 4, 100, 12, 1).is_err());
        let r = check_tight(&sys, &[], 4, 200, 12, 1).unwrap();
        assert!(r.not_geodesic.is_empty() && r.checked == 200);
    }

    #[test]
    fn heisenberg_agrees_with_matrices() {
        let sys = heisenberg_system(6, None, None).unwrap();
        assert_eq!(sys.params.k, 12);
        let g = sys.endo.oracle();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for i in 0..400 {
            let len = rng.gen_range(0..=30);
            let mut word = random_word(&mut rng, g.generators(), len);
            if i % 2 == 0 {
                // Trivial words are rare at random; build some.
                let u = random_word(&mut rng, g.generators(), len / 2);
                word = u.clone();
                word.extend(g.invert_word(&u));
                word.rotate_left(len / 3);
            }
            let out = sys.reduce(&word).unwrap();
            assert_eq!(
                out.is_empty(),
                g.is_trivial(&word).unwrap(),
                "{}",
                format_word(&word)
            );
            assert_eq!(sys.value(&out).unwrap(), g.eval(&word).unwrap());
            sys.parse_normal_form(&out).unwrap();
        }
    }
}

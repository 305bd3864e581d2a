//! Ground-truth group oracles and the BFS word metric.
//!
//! Every oracle evaluates words over its generators to canonical element
//! payloads, so element equality is payload equality.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::letter::{Letter, Word};

pub trait GroupOracle: Sync {
    type Element: Clone + Eq + Hash + Debug + Send + Sync;

    /// Semigroup generators in declared order (this order defines "lexicographic").
    fn generators(&self) -> &[Letter];

    fn inverse_letter(&self, g: Letter) -> Letter;

    fn identity(&self) -> Self::Element;

    /// Value of a generator letter, `None` if `g` is not a generator.
    fn generator(&self, g: Letter) -> Option<Self::Element>;

    fn mul(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;

    fn inverse(&self, a: &Self::Element) -> Self::Element;

    fn eval(&self, w: &[Letter]) -> Result<Self::Element> {
        let mut acc = self.identity();
        for &l in w {
            let g = self.generator(l).ok_or_else(|| Error::UnknownLetter {
                letter: l.name().into(),
                alphabet: "generator",
            })?;
            acc = self.mul(&acc, &g);
        }
        Ok(acc)
    }

    fn is_identity(&self, e: &Self::Element) -> bool {
        *e == self.identity()
    }

    fn is_trivial(&self, w: &[Letter]) -> Result<bool> {
        Ok(self.is_identity(&self.eval(w)?))
    }

    /// The formal inverse: reversed, each letter replaced by its inverse.
    fn invert_word(&self, w: &[Letter]) -> Word {
        w.iter().rev().map(|&l| self.inverse_letter(l)).collect()
    }
}

pub fn random_word<R: Rng>(rng: &mut R, gens: &[Letter], len: usize) -> Word {
    (0..len)
        .map(|_| gens[rng.gen_range(0..gens.len())])
        .collect()
}

/// ℤ with generators `one` (+1) and `neg` (−1).
#[derive(Clone, Debug)]
pub struct Integers {
    gens: [Letter; 2],
}

impl Integers {
    pub fn new(one: &str, neg: &str) -> Integers {
        Integers {
            gens: [Letter::new(one), Letter::new(neg)],
        }
    }

    /// Generators named `1` and `-1`.
    pub fn decimal() -> Integers {
        Integers::new("1", "-1")
    }

    /// Canonical geodesic of n.
    pub fn word(&self, n: i64) -> Word {
        let l = if n >= 0 { self.gens[0] } else { self.gens[1] };
        vec![l; n.unsigned_abs() as usize]
    }
}

impl GroupOracle for Integers {
    type Element = i64;

    fn generators(&self) -> &[Letter] {
        &self.gens
    }

    fn inverse_letter(&self, g: Letter) -> Letter {
        if g == self.gens[0] {
            self.gens[1]
        } else {
            self.gens[0]
        }
    }

    fn identity(&self) -> i64 {
        0
    }

    fn generator(&self, g: Letter) -> Option<i64> {
        if g == self.gens[0] {
            Some(1)
        } else if g == self.gens[1] {
            Some(-1)
        } else {
            None
        }
    }

    fn mul(&self, a: &i64, b: &i64) -> i64 {
        a + b
    }

    fn inverse(&self, a: &i64) -> i64 {
        -a
    }

    fn eval(&self, w: &[Letter]) -> Result<i64> {
        let mut n = 0i64;
        for &l in w {
            n += self.generator(l).ok_or_else(|| Error::UnknownLetter {
                letter: l.name().into(),
                alphabet: "generator",
            })?;
        }
        Ok(n)
    }
}

/// Free group; each generator pair is (x, X).
#[derive(Clone, Debug)]
pub struct FreeGroup {
    gens: Vec<Letter>,
    inverse: HashMap<Letter, Letter>,
}

impl FreeGroup {
    pub fn new(pairs: &[(&str, &str)]) -> FreeGroup {
        let mut gens = Vec::new();
        let mut inverse = HashMap::new();
        for (x, y) in pairs {
            let (x, y) = (Letter::new(x), Letter::new(y));
            gens.push(x);
            gens.push(y);
            inverse.insert(x, y);
            inverse.insert(y, x);
        }
        FreeGroup { gens, inverse }
    }

    /// F₂ on a, A, b, B.
    pub fn rank2() -> FreeGroup {
        FreeGroup::new(&[("a", "A"), ("b", "B")])
    }
}

impl GroupOracle for FreeGroup {
    /// The freely reduced word.
    type Element = Word;

    fn generators(&self) -> &[Letter] {
        &self.gens
    }

    fn inverse_letter(&self, g: Letter) -> Letter {
        self.inverse[&g]
    }

    fn identity(&self) -> Word {
        Vec::new()
    }

    fn generator(&self, g: Letter) -> Option<Word> {
        self.inverse.contains_key(&g).then(|| vec![g])
    }

    fn mul(&self, a: &Word, b: &Word) -> Word {
        let mut out = a.clone();
        for &l in b {
            if out.last() == Some(&self.inverse[&l]) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        out
    }

    fn inverse(&self, a: &Word) -> Word {
        self.invert_word(a)
    }
}

/// Upper unitriangular n×n integer matrices U_n(ℤ), generated by the
/// elementary matrices I + E_{i,i+1} and their inverses.
#[derive(Clone, Debug)]
pub struct Unitriangular {
    n: usize,
    gens: Vec<Letter>,
}

/// Strictly upper entries of a unitriangular matrix, row by row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniMatrix(pub Vec<BigInt>);

impl Unitriangular {
    /// `names[i]` = (generator, inverse) for the superdiagonal entry (i, i+1).
    pub fn new(n: usize, names: &[(&str, &str)]) -> Unitriangular {
        assert!(n >= 2 && names.len() == n - 1);
        let gens = names
            .iter()
            .flat_map(|(a, b)| [Letter::new(a), Letter::new(b)])
            .collect();
        Unitriangular { n, gens }
    }

    /// The Heisenberg group U₃(ℤ) on x, X, y, Y.
    pub fn heisenberg() -> Unitriangular {
        Unitriangular::new(3, &[("x", "X"), ("y", "Y")])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Offset of entry (i, j), i < j, in the packed storage.
    pub fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn entry<'a>(&self, m: &'a UniMatrix, i: usize, j: usize) -> &'a BigInt {
        &m.0[self.slot(i, j)]
    }

    pub fn from_entries(&self, f: impl Fn(usize, usize) -> BigInt) -> UniMatrix {
        let mut v = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                v.push(f(i, j));
            }
        }
        UniMatrix(v)
    }

    /// Heisenberg coordinates (a, b, c) of a U₃ element: a = x₁₂, b = x₂₃, c = x₁₃.
    pub fn abc(&self, m: &UniMatrix) -> (BigInt, BigInt, BigInt) {
        assert_eq!(self.n, 3);
        (m.0[0].clone(), m.0[2].clone(), m.0[1].clone())
    }
}

impl GroupOracle for Unitriangular {
    type Element = UniMatrix;

    fn generators(&self) -> &[Letter] {
        &self.gens
    }

    fn inverse_letter(&self, g: Letter) -> Letter {
        let i = self.gens.iter().position(|&x| x == g).expect("generator");
        self.gens[i ^ 1]
    }

    fn identity(&self) -> UniMatrix {
        self.from_entries(|_, _| BigInt::zero())
    }

    fn generator(&self, g: Letter) -> Option<UniMatrix> {
        let i = self.gens.iter().position(|&x| x == g)?;
        let (row, sign) = (i / 2, if i % 2 == 0 { 1 } else { -1 });
        Some(self.from_entries(|a, b| {
            if a == row && b == row + 1 {
                BigInt::from(sign)
            } else {
                BigInt::zero()
            }
        }))
    }

    fn mul(&self, a: &UniMatrix, b: &UniMatrix) -> UniMatrix {
        self.from_entries(|i, j| {
            let mut s = self.entry(a, i, j) + self.entry(b, i, j);
            for k in i + 1..j {
                s += self.entry(a, i, k) * self.entry(b, k, j);
            }
            s
        })
    }

    fn inverse(&self, a: &UniMatrix) -> UniMatrix {
        // Solve (I + A)(I + B) = I column by column: B_ij = -A_ij - Σ A_ik B_kj.
        let mut inv = self.identity();
        for d in 1..self.n {
            for i in 0..self.n - d {
                let j = i + d;
                let mut s = -self.entry(a, i, j).clone();
                for k in i + 1..j {
                    s -= self.entry(a, i, k) * self.entry(&inv, k, j);
                }
                let slot = self.slot(i, j);
                inv.0[slot] = s;
            }
        }
        inv
    }
}

/// The infinite dihedral group as affine maps n ↦ e·n + k of ℤ, with
/// r = translation by 1, R its inverse and s = negation.
#[derive(Clone, Debug)]
pub struct Dihedral {
    gens: [Letter; 3],
}

impl Dihedral {
    pub fn new(r: &str, r_inv: &str, s: &str) -> Dihedral {
        Dihedral {
            gens: [Letter::new(r), Letter::new(r_inv), Letter::new(s)],
        }
    }
}

impl GroupOracle for Dihedral {
    /// (e, k) with e = ±1.
    type Element = (i8, i64);

    fn generators(&self) -> &[Letter] {
        &self.gens
    }

    fn inverse_letter(&self, g: Letter) -> Letter {
        match self.gens.iter().position(|&x| x == g) {
            Some(0) => self.gens[1],
            Some(1) => self.gens[0],
            _ => g,
        }
    }

    fn identity(&self) -> (i8, i64) {
        (1, 0)
    }

    fn generator(&self, g: Letter) -> Option<(i8, i64)> {
        match self.gens.iter().position(|&x| x == g)? {
            0 => Some((1, 1)),
            1 => Some((1, -1)),
            _ => Some((-1, 0)),
        }
    }

    fn mul(&self, a: &(i8, i64), b: &(i8, i64)) -> (i8, i64) {
        (a.0 * b.0, a.0 as i64 * b.1 + a.1)
    }

    fn inverse(&self, a: &(i8, i64)) -> (i8, i64) {
        (a.0, -(a.0 as i64) * a.1)
    }
}

/// G × H; every generator belongs to exactly one factor.
#[derive(Clone, Debug)]
pub struct DirectProduct<A, B> {
    pub left: A,
    pub right: B,
    gens: Vec<Letter>,
}

impl<A: GroupOracle, B: GroupOracle> DirectProduct<A, B> {
    pub fn new(left: A, right: B) -> DirectProduct<A, B> {
        let gens = left
            .generators()
            .iter()
            .chain(right.generators())
            .copied()
            .collect();
        DirectProduct { left, right, gens }
    }
}

/// F₂ × ℤ on a, A, b, B and the central generator z, Z.
pub fn f2_times_z() -> DirectProduct<FreeGroup, Integers> {
    DirectProduct::new(FreeGroup::rank2(), Integers::new("z", "Z"))
}

impl<A: GroupOracle, B: GroupOracle> GroupOracle for DirectProduct<A, B> {
    type Element = (A::Element, B::Element);

    fn generators(&self) -> &[Letter] {
        &self.gens
    }

    fn inverse_letter(&self, g: Letter) -> Letter {
        if self.left.generators().contains(&g) {
            self.left.inverse_letter(g)
        } else {
            self.right.inverse_letter(g)
        }
    }

    fn identity(&self) -> Self::Element {
        (self.left.identity(), self.right.identity())
    }

    fn generator(&self, g: Letter) -> Option<Self::Element> {
        if let Some(x) = self.left.generator(g) {
            Some((x, self.right.identity()))
        } else {
            self.right.generator(g).map(|y| (self.left.identity(), y))
        }
    }

    fn mul(&self, a: &Self::Element, b: &Self::Element) -> Self::Element {
        (self.left.mul(&a.0, &b.0), self.right.mul(&a.1, &b.1))
    }

    fn inverse(&self, a: &Self::Element) -> Self::Element {
        (self.left.inverse(&a.0), self.right.inverse(&a.1))
    }
}

/// G * H via normal forms: alternating non-identity syllables.
#[derive(Clone, Debug)]
pub struct FreeProduct<A, B> {
    pub left: A,
    pub right: B,
    gens: Vec<Letter>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Syllable<X, Y> {
    Left(X),
    Right(Y),
}

impl<A: GroupOracle, B: GroupOracle> FreeProduct<A, B> {
    pub fn new(left: A, right: B) -> FreeProduct<A, B> {
        let gens = left
            .generators()
            .iter()
            .chain(right.generators())
            .copied()
            .collect();
        FreeProduct { left, right, gens }
    }

    fn push(
        &self,
        out: &mut Vec<Syllable<A::Element, B::Element>>,
        s: Syllable<A::Element, B::Element>,
    ) {
        let merged = match (out.last(), &s) {
            (Some(Syllable::Left(x)), Syllable::Left(y)) => {
                Some(Syllable::Left(self.left.mul(x, y)))
            }
            (Some(Syllable::Right(x)), Syllable::Right(y)) => {
                Some(Syllable::Right(self.right.mul(x, y)))
            }
            _ => None,
        };
        match merged {
            Some(m) => {
                out.pop();
                let trivial = match &m {
                    Syllable::Left(x) => self.left.is_identity(x),
                    Syllable::Right(y) => self.right.is_identity(y),
                };
                if !trivial {
                    out.push(m);
                }
            }
            None => out.push(s),
        }
    }
}

impl<A: GroupOracle, B: GroupOracle> GroupOracle for FreeProduct<A, B> {
    type Element = Vec<Syllable<A::Element, B::Element>>;

    fn generators(&self) -> &[Letter] {
        &self.gens
    }

    fn inverse_letter(&self, g: Letter) -> Letter {
        if self.left.generators().contains(&g) {
            self.left.inverse_letter(g)
        } else {
            self.right.inverse_letter(g)
        }
    }

    fn identity(&self) -> Self::Element {
        Vec::new()
    }

    fn generator(&self, g: Letter) -> Option<Self::Element> {
        if let Some(x) = self.left.generator(g) {
            Some(if self.left.is_identity(&x) {
                vec![]
            } else {
                vec![Syllable::Left(x)]
            })
        } else {
            let y = self.right.generator(g)?;
            Some(if self.right.is_identity(&y) {
                vec![]
            } else {
                vec![Syllable::Right(y)]
            })
        }
    }

    fn mul(&self, a: &Self::Element, b: &Self::Element) -> Self::Element {
        let mut out = a.clone();
        for s in b {
            self.push(&mut out, s.clone());
        }
        out
    }

    fn inverse(&self, a: &Self::Element) -> Self::Element {
        a.iter()
            .rev()
            .map(|s| match s {
                Syllable::Left(x) => Syllable::Left(self.left.inverse(x)),
                Syllable::Right(y) => Syllable::Right(self.right.inverse(y)),
            })
            .collect()
    }
}

/// The ball of radius r in the Cayley graph, with lexicographically least
/// geodesics (generator order) recorded as BFS parent pointers.
#[derive(Clone, Debug)]
pub struct Ball<E> {
    pub radius: usize,
    elements: Vec<E>,
    lengths: Vec<u32>,
    parents: Vec<(u32, Letter)>,
    index: HashMap<E, u32>,
    /// `spheres[k]` = index of the first element of length k.
    spheres: Vec<usize>,
}

pub const DEFAULT_BALL_BUDGET: usize = 10_000_000;

impl<E: Clone + Eq + Hash> Ball<E> {
    pub fn build<G>(oracle: &G, radius: usize, budget: usize) -> Result<Ball<E>>
    where
        G: GroupOracle<Element = E> + ?Sized,
    {
        let gens: Vec<(Letter, E)> = oracle
            .generators()
            .iter()
            .map(|&g| (g, oracle.generator(g).expect("generator")))
            .collect();
        let id = oracle.identity();
        let mut ball = Ball {
            radius,
            elements: vec![id.clone()],
            lengths: vec![0],
            parents: vec![(u32::MAX, gens[0].0)],
            index: HashMap::from([(id, 0)]),
            spheres: vec![0],
        };
        let mut level = 0..1usize;
        for k in 1..=radius {
            let next_start = ball.elements.len();
            ball.spheres.push(next_start);
            for i in level.clone() {
                for (g, gv) in &gens {
                    let e = oracle.mul(&ball.elements[i], gv);
                    if ball.index.contains_key(&e) {
                        continue;
                    }
                    if ball.elements.len() >= budget {
                        return Err(Error::Budget(format!(
                            "ball of radius {radius} exceeds {budget} elements"
                        )));
                    }
                    ball.index.insert(e.clone(), ball.elements.len() as u32);
                    ball.elements.push(e);
                    ball.lengths.push(k as u32);
                    ball.parents.push((i as u32, *g));
                }
            }
            level = next_start..ball.elements.len();
        }
        Ok(ball)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn index_of(&self, e: &E) -> Option<usize> {
        self.index.get(e).map(|&i| i as usize)
    }

    /// Geodesic length, if the element lies in the ball.
    pub fn length(&self, e: &E) -> Option<usize> {
        self.index_of(e).map(|i| self.lengths[i] as usize)
    }

    pub fn length_at(&self, i: usize) -> usize {
        self.lengths[i] as usize
    }

    /// Lexicographically least geodesic of the i-th element.
    pub fn geodesic_at(&self, mut i: usize) -> Word {
        let mut w = Vec::with_capacity(self.lengths[i] as usize);
        while i != 0 {
            let (p, g) = self.parents[i];
            w.push(g);
            i = p as usize;
        }
        w.reverse();
        w
    }

    pub fn geodesic(&self, e: &E) -> Option<Word> {
        self.index_of(e).map(|i| self.geodesic_at(i))
    }

    /// Indices of elements of length exactly k, in lexicographic order of their geodesics.
    pub fn sphere(&self, k: usize) -> std::ops::Range<usize> {
        let start = self.spheres[k];
        let end = self
            .spheres
            .get(k + 1)
            .copied()
            .unwrap_or(self.elements.len());
        start..end
    }
}

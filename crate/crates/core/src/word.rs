//! Words over the alphabet `{x_1, x_1^-1, ..., x_n, x_n^-1}`.
//!
//! Text format: generator `i` is the `i`-th lowercase ASCII letter, its
//! inverse the matching uppercase letter, and the empty string is the
//! identity. Letters are ordered `a < A < b < B < ...`; sphere enumeration
//! is lexicographic in that order.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::{Error, Result};

/// Number of free generators, `1 ..= 26`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rank(u8);

impl Rank {
    pub const MAX: usize = 26;

    pub fn new(n: usize) -> Result<Self> {
        if (1..=Self::MAX).contains(&n) {
            Ok(Rank(n as u8))
        } else {
            Err(Error::InvalidRank(n))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// `2n`.
    pub fn alphabet_size(self) -> usize {
        2 * self.get()
    }

    /// All `2n` letters in enumeration order.
    pub fn letters(self) -> impl Iterator<Item = Letter> + Clone {
        (0..self.alphabet_size() as u8).map(Letter)
    }

    pub fn contains(self, letter: Letter) -> bool {
        letter.generator() < self.get()
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A generator or its inverse, packed as `2 * generator + inverted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    /// `generator` is zero-based: `0` is `a`.
    pub fn new(generator: usize, inverted: bool) -> Self {
        assert!(generator < Rank::MAX, "generator index out of range");
        Letter((generator as u8) << 1 | inverted as u8)
    }

    pub fn from_code(code: u8) -> Self {
        assert!((code as usize) < 2 * Rank::MAX);
        Letter(code)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    /// `+1` for a generator, `-1` for an inverse.
    pub fn sign(self) -> i64 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator() as u8) as char;
        if self.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(Letter::new(c as usize - 'a' as usize, false)),
            'A'..='Z' => Some(Letter::new(c as usize - 'A' as usize, true)),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    s.chars()
        .map(|c| {
            Letter::from_char(c).ok_or_else(|| Error::InvalidWord {
                word: s.to_string(),
                reason: format!("unexpected character {c:?}"),
            })
        })
        .collect()
}

/// An element of the free monoid `M_n`: any finite sequence of letters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonoidWord(Vec<Letter>);

impl MonoidWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        MonoidWord(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Free reduction: cancel adjacent `x x^-1` pairs until none remain.
    pub fn reduce(&self) -> ReducedWord {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        ReducedWord(out)
    }
}

impl FromStr for MonoidWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_letters(s).map(MonoidWord)
    }
}

impl fmt::Display for MonoidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|l| write!(f, "{l}"))
    }
}

/// A freely reduced word, the canonical form of an element of `F_n`.
///
/// Ordering is shortlex-free plain lexicographic on letter codes; use
/// [`ReducedWord::shortlex_cmp`] when length-first order matters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord(Vec::new())
    }

    /// Fails if `letters` contains an adjacent inverse pair.
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if let Some(i) = letters.windows(2).position(|p| p[0].inverse() == p[1]) {
            return Err(Error::InvalidWord {
                word: MonoidWord(letters).to_string(),
                reason: format!("not freely reduced at position {i}"),
            });
        }
        Ok(ReducedWord(letters))
    }

    pub fn generator(index: usize) -> Self {
        ReducedWord(vec![Letter::new(index, false)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Geodesic length `l_X`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Smallest rank whose alphabet contains every letter of the word.
    pub fn min_rank(&self) -> usize {
        self.0.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    pub fn fits_rank(&self, rank: Rank) -> bool {
        self.0.iter().all(|&l| rank.contains(l))
    }

    pub fn inverse(&self) -> Self {
        ReducedWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn multiply(&self, other: &ReducedWord) -> Self {
        let common = self
            .0
            .iter()
            .rev()
            .zip(other.0.iter())
            .take_while(|(x, y)| x.inverse() == **y)
            .count();
        let mut out = Vec::with_capacity(self.len() + other.len() - 2 * common);
        out.extend_from_slice(&self.0[..self.len() - common]);
        out.extend_from_slice(&other.0[common..]);
        ReducedWord(out)
    }

    /// `h · self · h^-1`.
    pub fn conjugate_by(&self, h: &ReducedWord) -> Self {
        h.multiply(self).multiply(&h.inverse())
    }

    /// Multiply on the right by a single letter.
    pub fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&f), Some(&l)) => self.0.len() == 1 || f.inverse() != l,
            _ => true,
        }
    }

    /// Returns `(t, core)` with `self = t · core · t^-1` and `core`
    /// cyclically reduced.
    pub fn cyclic_decomposition(&self) -> (ReducedWord, ReducedWord) {
        let n = self.0.len();
        let mut i = 0;
        while 2 * i + 1 < n && self.0[i].inverse() == self.0[n - 1 - i] {
            i += 1;
        }
        (
            ReducedWord(self.0[..i].to_vec()),
            ReducedWord(self.0[i..n - i].to_vec()),
        )
    }

    pub fn cyclically_reduce(&self) -> ReducedWord {
        self.cyclic_decomposition().1
    }

    /// Exponent-sum vector in `Z^n`.
    pub fn abelianize(&self, rank: Rank) -> AbelianImage {
        let mut v = vec![0i64; rank.get()];
        for l in &self.0 {
            v[l.generator()] += l.sign();
        }
        AbelianImage(v)
    }

    pub fn shortlex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl FromStr for ReducedWord {
    type Err = Error;

    /// Strict: rejects words that are not freely reduced. Use
    /// `MonoidWord::from_str(s)?.reduce()` to reduce on the way in.
    fn from_str(s: &str) -> Result<Self> {
        let letters = parse_letters(s)?;
        ReducedWord::new(letters)
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|l| write!(f, "{l}"))
    }
}

impl From<ReducedWord> for MonoidWord {
    fn from(w: ReducedWord) -> Self {
        MonoidWord(w.0)
    }
}

/// Image of a word in the abelianization `Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianImage(pub Vec<i64>);

impl AbelianImage {
    pub fn zero(rank: Rank) -> Self {
        AbelianImage(vec![0; rank.get()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn exponents(&self) -> &[i64] {
        &self.0
    }
}

impl Add for &AbelianImage {
    type Output = AbelianImage;

    fn add(self, rhs: &AbelianImage) -> AbelianImage {
        assert_eq!(self.0.len(), rhs.0.len());
        AbelianImage(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// `|C_k| = 2n (2n-1)^(k-1)` for `k >= 1`, `|C_0| = 1`.
pub fn sphere_size(rank: Rank, k: usize) -> BigUint {
    if k == 0 {
        return BigUint::one();
    }
    let n = rank.get() as u32;
    BigUint::from(2 * n) * BigUint::from(2 * n - 1).pow(k as u32 - 1)
}

/// `|B_k| = sum_{j <= k} |C_j|`.
pub fn ball_size(rank: Rank, k: usize) -> BigUint {
    (0..=k).fold(BigUint::zero(), |acc, j| acc + sphere_size(rank, j))
}

pub fn sphere_size_u128(rank: Rank, k: usize) -> Option<u128> {
    sphere_size(rank, k).to_u128()
}

pub fn sphere_size_f64(rank: Rank, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let n = rank.get() as f64;
    2.0 * n * (2.0 * n - 1.0).powi(k as i32 - 1)
}

pub fn ball_size_f64(rank: Rank, k: usize) -> f64 {
    (0..=k).map(|j| sphere_size_f64(rank, j)).sum()
}

/// Odometer over the reduced words of a fixed length, in enumeration order.
/// Optionally pinned to a first letter so spheres can be split across
/// workers.
#[derive(Debug, Clone)]
pub(crate) struct SphereCursor {
    rank: Rank,
    word: Vec<Letter>,
    pinned_first: bool,
    started: bool,
    done: bool,
}

impl SphereCursor {
    pub(crate) fn new(rank: Rank, k: usize, first: Option<Letter>) -> Self {
        let mut word = Vec::with_capacity(k);
        let mut done = false;
        if k > 0 {
            let f = first.unwrap_or(Letter(0));
            if !rank.contains(f) {
                done = true;
            }
            word.push(f);
            for _ in 1..k {
                let prev = *word.last().unwrap();
                word.push(Self::min_after(prev));
            }
        } else if first.is_some() {
            // The only word of length 0 has no first letter.
            done = true;
        }
        SphereCursor { rank, word, pinned_first: first.is_some(), started: false, done }
    }

    fn min_after(prev: Letter) -> Letter {
        if prev.inverse() == Letter(0) {
            Letter(1)
        } else {
            Letter(0)
        }
    }

    /// Moves to the next word; returns `false` once exhausted.
    pub(crate) fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let size = self.rank.alphabet_size() as u8;
        let floor = usize::from(self.pinned_first);
        let mut pos = self.word.len();
        while pos > floor {
            pos -= 1;
            let forbidden = if pos == 0 { None } else { Some(self.word[pos - 1].inverse()) };
            let mut c = self.word[pos].0 + 1;
            if Some(Letter(c)) == forbidden {
                c += 1;
            }
            if c < size {
                self.word[pos] = Letter(c);
                for j in pos + 1..self.word.len() {
                    self.word[j] = Self::min_after(self.word[j - 1]);
                }
                return true;
            }
        }
        self.done = true;
        false
    }

    pub(crate) fn current(&self) -> &[Letter] {
        &self.word
    }
}

/// Iterator over the reduced words of length exactly `k`.
#[derive(Debug, Clone)]
pub struct SphereIter {
    cursor: SphereCursor,
}

impl Iterator for SphereIter {
    type Item = ReducedWord;

    fn next(&mut self) -> Option<ReducedWord> {
        if self.cursor.advance() {
            Some(ReducedWord(self.cursor.current().to_vec()))
        } else {
            None
        }
    }
}

fn check_sphere_budget(rank: Rank, k: usize, cap: u128) -> Result<()> {
    let size = sphere_size(rank, k);
    if size > BigUint::from(cap) {
        return Err(Error::budget(
            format!("sphere C_{k} of F_{rank}"),
            size.to_f64().unwrap_or(f64::INFINITY),
            cap as f64,
        ));
    }
    Ok(())
}

/// All reduced words of length `k`, each exactly once, in enumeration order.
/// Fails when `|C_k|` exceeds `cap`.
pub fn enumerate_sphere(rank: Rank, k: usize, cap: u128) -> Result<SphereIter> {
    check_sphere_budget(rank, k, cap)?;
    Ok(SphereIter { cursor: SphereCursor::new(rank, k, None) })
}

/// The part of `C_k` beginning with `first` (`k >= 1`).
pub fn enumerate_sphere_with_first(rank: Rank, k: usize, first: Letter, cap: u128) -> Result<SphereIter> {
    check_sphere_budget(rank, k, cap)?;
    Ok(SphereIter { cursor: SphereCursor::new(rank, k, Some(first)) })
}

/// Calls `f` on every word of `C_k` without allocating per word. The
/// callback sees a reused buffer.
pub fn for_each_in_sphere(rank: Rank, k: usize, first: Option<Letter>, mut f: impl FnMut(&ReducedWord)) {
    let mut cursor = SphereCursor::new(rank, k, first);
    let mut buf = ReducedWord::identity();
    while cursor.advance() {
        buf.0.clear();
        buf.0.extend_from_slice(cursor.current());
        f(&buf);
    }
}

/// Sphere partitions for parallel consumption: `[None]` for `k = 0`,
/// otherwise one entry per first letter.
pub fn sphere_partitions(rank: Rank, k: usize) -> Vec<Option<Letter>> {
    if k == 0 {
        vec![None]
    } else {
        rank.letters().map(Some).collect()
    }
}

/// Uniformly random reduced word of length `k`.
pub fn random_reduced_word<R: Rng + ?Sized>(rank: Rank, k: usize, rng: &mut R) -> ReducedWord {
    let size = rank.alphabet_size();
    let mut out: Vec<Letter> = Vec::with_capacity(k);
    for i in 0..k {
        let l = if i == 0 {
            Letter(rng.gen_range(0..size) as u8)
        } else {
            let forbidden = out[i - 1].inverse();
            let mut c = rng.gen_range(0..size - 1) as u8;
            if c >= forbidden.0 {
                c += 1;
            }
            Letter(c)
        };
        out.push(l);
    }
    ReducedWord(out)
}

/// Uniformly random word of length `k` in the free monoid.
pub fn random_monoid_word<R: Rng + ?Sized>(rank: Rank, k: usize, rng: &mut R) -> MonoidWord {
    let size = rank.alphabet_size();
    MonoidWord((0..k).map(|_| Letter(rng.gen_range(0..size) as u8)).collect())
}

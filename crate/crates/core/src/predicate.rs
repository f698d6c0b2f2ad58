//! Membership oracles for subsets of `F_n`.
//!
//! Every predicate answers `contains` for a single reduced word. Predicates
//! whose membership is decided by a finite-memory reading of the word (a
//! parity, a group image, an exponent vector) also provide exact sphere
//! counts `|S ∩ C_k|` through a transfer recursion over states
//! `(automaton state, last letter)`, which never backtracks and therefore
//! walks precisely the reduced words.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;
use std::hash::Hash;
use std::sync::Arc;

use crate::quotient::FiniteQuotient;
use crate::whitehead::is_primitive;
use rayon::prelude::*;

use crate::word::{for_each_in_sphere, sphere_partitions, Letter, Rank, ReducedWord};
use crate::{Error, Result};

/// Upper bound on `(state, last letter)` pairs held by one level of a
/// transfer count.
pub const DEFAULT_STATE_CAP: usize = 20_000_000;

pub trait SetPredicate: Send + Sync {
    fn name(&self) -> String;

    fn contains(&self, w: &ReducedWord) -> bool;

    /// `|S ∩ C_k|` for `k = 0..=k_max`, when the set admits transfer
    /// counting. `None` means unsupported.
    fn sphere_counts(&self, _rank: Rank, _k_max: usize) -> Option<Result<Vec<u128>>> {
        None
    }

    /// `|S ∩ C_k| / |C_k|` for `k = 0..=k_max`, in floating point so that
    /// deep spheres do not overflow. Defaults to the exact counts.
    fn sphere_frequencies(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        let counts = self.sphere_counts(rank, k_max)?;
        Some(counts.map(|c| {
            c.iter()
                .enumerate()
                .map(|(k, &n)| n as f64 / crate::word::sphere_size_f64(rank, k))
                .collect()
        }))
    }
}

impl<P: SetPredicate + ?Sized> SetPredicate for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        (**self).contains(w)
    }
    fn sphere_counts(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        (**self).sphere_counts(rank, k_max)
    }
    fn sphere_frequencies(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        (**self).sphere_frequencies(rank, k_max)
    }
}

impl<P: SetPredicate + ?Sized> SetPredicate for Arc<P> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        (**self).contains(w)
    }
    fn sphere_counts(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        (**self).sphere_counts(rank, k_max)
    }
    fn sphere_frequencies(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        (**self).sphere_frequencies(rank, k_max)
    }
}

/// A deterministic automaton read letter by letter along a reduced word.
pub(crate) trait Transfer {
    type State: Clone + Eq + Hash;

    fn initial(&self) -> Self::State;
    fn step(&self, s: &Self::State, l: Letter) -> Self::State;
    fn accepts(&self, s: &Self::State) -> bool;

    /// Whether an accepting state can still be reached within `remaining`
    /// more letters. Must be true for accepting states.
    fn viable(&self, _s: &Self::State, _remaining: usize) -> bool {
        true
    }
}

/// Exact counts of accepted reduced words of each length `0..=k_max`.
pub(crate) fn transfer_counts<T: Transfer>(t: &T, rank: Rank, k_max: usize, cap: usize) -> Result<Vec<u128>> {
    let overflow = || Error::Overflow(format!("counting words up to length {k_max}"));
    let mut level: HashMap<(T::State, Option<Letter>), u128> = HashMap::new();
    level.insert((t.initial(), None), 1);
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut accepted = 0u128;
        for ((s, _), &c) in &level {
            if t.accepts(s) {
                accepted = accepted.checked_add(c).ok_or_else(overflow)?;
            }
        }
        out.push(accepted);
        if k == k_max {
            break;
        }
        let remaining = k_max - k - 1;
        let mut next: HashMap<(T::State, Option<Letter>), u128> = HashMap::with_capacity(level.len() * 2);
        for ((s, last), &c) in &level {
            for l in rank.letters() {
                if Some(l.inverse()) == *last {
                    continue;
                }
                let ns = t.step(s, l);
                if !t.viable(&ns, remaining) {
                    continue;
                }
                let e = next.entry((ns, Some(l))).or_insert(0);
                *e = e.checked_add(c).ok_or_else(overflow)?;
            }
        }
        if next.len() > cap {
            return Err(Error::budget(format!("transfer states at length {}", k + 1), next.len() as f64, cap as f64));
        }
        level = next;
    }
    Ok(out)
}

/// Fixed-key hashing, so iteration order and with it the floating-point
/// summation order are the same on every run.
type StableMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

/// Probability that a uniform reduced word of each length `0..=k_max` is
/// accepted.
pub(crate) fn transfer_frequencies<T: Transfer>(t: &T, rank: Rank, k_max: usize, cap: usize) -> Result<Vec<f64>> {
    let mut level: StableMap<(T::State, Option<Letter>), f64> = StableMap::default();
    level.insert((t.initial(), None), 1.0);
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        out.push(level.iter().filter(|((s, _), _)| t.accepts(s)).map(|(_, &p)| p).sum());
        if k == k_max {
            break;
        }
        let remaining = k_max - k - 1;
        let share = 1.0 / if k == 0 { rank.alphabet_size() } else { rank.alphabet_size() - 1 } as f64;
        let mut next: StableMap<(T::State, Option<Letter>), f64> =
            StableMap::with_capacity_and_hasher(level.len() * 2, Default::default());
        for ((s, last), &p) in &level {
            for l in rank.letters() {
                if Some(l.inverse()) == *last {
                    continue;
                }
                let ns = t.step(s, l);
                if t.viable(&ns, remaining) {
                    *next.entry((ns, Some(l))).or_insert(0.0) += p * share;
                }
            }
        }
        if next.len() > cap {
            return Err(Error::budget(format!("transfer states at length {}", k + 1), next.len() as f64, cap as f64));
        }
        level = next;
    }
    Ok(out)
}

/// `|S ∩ C_k|` by enumeration, split over first letters across threads.
pub fn count_in_sphere<P: SetPredicate + ?Sized>(p: &P, rank: Rank, k: usize) -> u128 {
    sphere_partitions(rank, k)
        .into_par_iter()
        .map(|first| {
            let mut c = 0u128;
            for_each_in_sphere(rank, k, first, |w| c += u128::from(p.contains(w)));
            c
        })
        .sum()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AllWords;

impl SetPredicate for AllWords {
    fn name(&self) -> String {
        "all".into()
    }
    fn contains(&self, _w: &ReducedWord) -> bool {
        true
    }
    fn sphere_counts(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        Some(
            (0..=k_max)
                .map(|k| {
                    crate::word::sphere_size_u128(rank, k)
                        .ok_or_else(|| Error::Overflow(format!("sphere size at length {k}")))
                })
                .collect(),
        )
    }
    fn sphere_frequencies(&self, _rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        Some(Ok(vec![1.0; k_max + 1]))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoWords;

impl SetPredicate for NoWords {
    fn name(&self) -> String {
        "none".into()
    }
    fn contains(&self, _w: &ReducedWord) -> bool {
        false
    }
    fn sphere_counts(&self, _rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        Some(Ok(vec![0; k_max + 1]))
    }
    fn sphere_frequencies(&self, _rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        Some(Ok(vec![0.0; k_max + 1]))
    }
}

/// Words of even length.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvenLength;

impl SetPredicate for EvenLength {
    fn name(&self) -> String {
        "even".into()
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        w.len().is_multiple_of(2)
    }
    fn sphere_counts(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        Some(AllWords.sphere_counts(rank, k_max)?.map(|mut v| {
            v.iter_mut().enumerate().filter(|(k, _)| k % 2 == 1).for_each(|(_, c)| *c = 0);
            v
        }))
    }
    fn sphere_frequencies(&self, _rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        Some(Ok((0..=k_max).map(|k| if k % 2 == 0 { 1.0 } else { 0.0 }).collect()))
    }
}

/// The derived subgroup `[F_n, F_n]`: words with zero exponent sum in every
/// generator.
#[derive(Debug, Clone, Copy, Default)]
pub struct DerivedSubgroup;

struct AbelianTransfer;

impl Transfer for AbelianTransfer {
    type State = Vec<i32>;

    fn initial(&self) -> Vec<i32> {
        Vec::new()
    }

    fn step(&self, s: &Vec<i32>, l: Letter) -> Vec<i32> {
        let mut v = s.clone();
        if v.len() <= l.generator() {
            v.resize(l.generator() + 1, 0);
        }
        v[l.generator()] += l.sign() as i32;
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    fn accepts(&self, s: &Vec<i32>) -> bool {
        s.is_empty()
    }

    fn viable(&self, s: &Vec<i32>, remaining: usize) -> bool {
        s.iter().map(|x| x.unsigned_abs() as usize).sum::<usize>() <= remaining
    }
}

impl SetPredicate for DerivedSubgroup {
    fn name(&self) -> String {
        "commutator".into()
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        let mut v = vec![0i64; w.min_rank()];
        for l in w.letters() {
            v[l.generator()] += l.sign();
        }
        v.iter().all(|&e| e == 0)
    }
    fn sphere_counts(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        Some(transfer_counts(&AbelianTransfer, rank, k_max, DEFAULT_STATE_CAP))
    }
    fn sphere_frequencies(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        Some(transfer_frequencies(&AbelianTransfer, rank, k_max, DEFAULT_STATE_CAP))
    }
}

/// Kernel of the homomorphism `F_n → Z` sending generator `i` to
/// `weights[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerKernel {
    weights: Vec<i64>,
}

impl IntegerKernel {
    pub fn new(weights: Vec<i64>) -> Self {
        IntegerKernel { weights }
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    fn weight(&self, l: Letter) -> i64 {
        self.weights.get(l.generator()).copied().unwrap_or(0) * l.sign()
    }
}

impl Transfer for IntegerKernel {
    type State = i64;

    fn initial(&self) -> i64 {
        0
    }
    fn step(&self, s: &i64, l: Letter) -> i64 {
        s + self.weight(l)
    }
    fn accepts(&self, s: &i64) -> bool {
        *s == 0
    }
    fn viable(&self, s: &i64, remaining: usize) -> bool {
        let max = self.weights.iter().map(|w| w.unsigned_abs()).max().unwrap_or(0);
        s.unsigned_abs() <= max * remaining as u64
    }
}

impl SetPredicate for IntegerKernel {
    fn name(&self) -> String {
        let w: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        format!("zkernel({})", w.join(","))
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        w.letters().iter().map(|&l| self.weight(l)).sum::<i64>() == 0
    }
    fn sphere_counts(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        if self.weights.len() != rank.get() {
            return Some(Err(Error::Precondition(format!(
                "{} has {} weights for rank {rank}",
                self.name(),
                self.weights.len()
            ))));
        }
        Some(transfer_counts(self, rank, k_max, DEFAULT_STATE_CAP))
    }
    fn sphere_frequencies(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        if let Some(Err(e)) = self.sphere_counts(rank, 0) {
            return Some(Err(e));
        }
        Some(transfer_frequencies(self, rank, k_max, DEFAULT_STATE_CAP))
    }
}

/// Words whose image in a finite quotient lies in a given set of elements;
/// with the identity alone this is the kernel.
#[derive(Debug, Clone)]
pub struct QuotientFiber {
    quotient: Arc<FiniteQuotient>,
    targets: Vec<bool>,
    label: String,
}

impl QuotientFiber {
    pub fn kernel(quotient: Arc<FiniteQuotient>) -> Self {
        let label = format!("kernel({})", quotient.label());
        Self::new(quotient, &[0], label)
    }

    pub fn new(quotient: Arc<FiniteQuotient>, elements: &[usize], label: impl Into<String>) -> Self {
        let mut targets = vec![false; quotient.order()];
        for &e in elements {
            targets[e] = true;
        }
        QuotientFiber { quotient, targets, label: label.into() }
    }
}

impl Transfer for QuotientFiber {
    type State = u32;

    fn initial(&self) -> u32 {
        0
    }
    fn step(&self, s: &u32, l: Letter) -> u32 {
        self.quotient.act(*s, l)
    }
    fn accepts(&self, s: &u32) -> bool {
        self.targets[*s as usize]
    }
}

impl SetPredicate for QuotientFiber {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        self.targets[self.quotient.image(w) as usize]
    }
    fn sphere_counts(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        if rank != self.quotient.rank() {
            return Some(Err(Error::Precondition(format!(
                "quotient has rank {}, asked for rank {rank}",
                self.quotient.rank()
            ))));
        }
        Some(transfer_counts(self, rank, k_max, DEFAULT_STATE_CAP))
    }
    fn sphere_frequencies(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        if let Some(Err(e)) = self.sphere_counts(rank, 0) {
            return Some(Err(e));
        }
        Some(transfer_frequencies(self, rank, k_max, DEFAULT_STATE_CAP))
    }
}

/// Kernel of the homomorphism `F_n → F_m` sending generator `i` to
/// `images[i]`. The transfer state is the reduced image, pruned once it is
/// too long to cancel back to the identity in the letters left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeImageKernel {
    images: Vec<ReducedWord>,
    inverse_images: Vec<ReducedWord>,
}

impl FreeImageKernel {
    pub fn new(images: Vec<ReducedWord>) -> Self {
        let inverse_images = images.iter().map(|w| w.inverse()).collect();
        FreeImageKernel { images, inverse_images }
    }

    /// `F_{n+1} → F_n` killing the last generator and fixing the others.
    pub fn kill_last_generator(target_rank: Rank) -> Self {
        let mut images: Vec<ReducedWord> = (0..target_rank.get()).map(ReducedWord::generator).collect();
        images.push(ReducedWord::identity());
        Self::new(images)
    }

    fn image_of(&self, l: Letter) -> &ReducedWord {
        if l.is_inverse() {
            &self.inverse_images[l.generator()]
        } else {
            &self.images[l.generator()]
        }
    }

    pub fn image(&self, w: &ReducedWord) -> ReducedWord {
        w.letters().iter().fold(ReducedWord::identity(), |acc, &l| acc.multiply(self.image_of(l)))
    }
}

impl Transfer for FreeImageKernel {
    type State = ReducedWord;

    fn initial(&self) -> ReducedWord {
        ReducedWord::identity()
    }
    fn step(&self, s: &ReducedWord, l: Letter) -> ReducedWord {
        s.multiply(self.image_of(l))
    }
    fn accepts(&self, s: &ReducedWord) -> bool {
        s.is_identity()
    }
    fn viable(&self, s: &ReducedWord, remaining: usize) -> bool {
        let max = self.images.iter().map(|w| w.len()).max().unwrap_or(0);
        s.len() <= max * remaining
    }
}

impl SetPredicate for FreeImageKernel {
    fn name(&self) -> String {
        let w: Vec<String> =
            self.images.iter().map(|w| if w.is_identity() { "1".to_string() } else { w.to_string() }).collect();
        format!("freekernel({})", w.join(","))
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        self.image(w).is_identity()
    }
    fn sphere_counts(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        if self.images.len() != rank.get() {
            return Some(Err(Error::Precondition(format!(
                "{} has {} images for rank {rank}",
                self.name(),
                self.images.len()
            ))));
        }
        Some(transfer_counts(self, rank, k_max, DEFAULT_STATE_CAP))
    }
    fn sphere_frequencies(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        if let Some(Err(e)) = self.sphere_counts(rank, 0) {
            return Some(Err(e));
        }
        Some(transfer_frequencies(self, rank, k_max, DEFAULT_STATE_CAP))
    }
}

/// Non-trivial words whose first letter lies in a given set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstLetterIn {
    letters: Vec<Letter>,
}

impl FirstLetterIn {
    pub fn new(letters: Vec<Letter>) -> Self {
        FirstLetterIn { letters }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub(crate) enum FirstState {
    Start,
    In,
    Out,
}

impl Transfer for FirstLetterIn {
    type State = FirstState;

    fn initial(&self) -> FirstState {
        FirstState::Start
    }
    fn step(&self, s: &FirstState, l: Letter) -> FirstState {
        match s {
            FirstState::Start if self.letters.contains(&l) => FirstState::In,
            FirstState::Start => FirstState::Out,
            other => other.clone(),
        }
    }
    fn accepts(&self, s: &FirstState) -> bool {
        *s == FirstState::In
    }
    fn viable(&self, s: &FirstState, _remaining: usize) -> bool {
        *s != FirstState::Out
    }
}

impl SetPredicate for FirstLetterIn {
    fn name(&self) -> String {
        let s: String = self.letters.iter().map(|l| l.to_char()).collect();
        format!("first({s})")
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        w.first().is_some_and(|l| self.letters.contains(&l))
    }
    fn sphere_counts(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<u128>>> {
        Some(transfer_counts(self, rank, k_max, DEFAULT_STATE_CAP))
    }
    fn sphere_frequencies(&self, rank: Rank, k_max: usize) -> Option<Result<Vec<f64>>> {
        if let Some(Err(e)) = self.sphere_counts(rank, 0) {
            return Some(Err(e));
        }
        Some(transfer_frequencies(self, rank, k_max, DEFAULT_STATE_CAP))
    }
}

/// Primitive elements: members of some free basis.
#[derive(Debug, Clone, Copy)]
pub struct Primitive {
    rank: Rank,
}

impl Primitive {
    pub fn new(rank: Rank) -> Self {
        Primitive { rank }
    }
}

impl SetPredicate for Primitive {
    fn name(&self) -> String {
        "primitive".into()
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        is_primitive(self.rank, w)
    }
}

/// Union of predicates; exhaustive counting only.
pub struct Union(pub Vec<Box<dyn SetPredicate>>);

impl SetPredicate for Union {
    fn name(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|p| p.name()).collect();
        format!("union({})", parts.join("|"))
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        self.0.iter().any(|p| p.contains(w))
    }
}

/// A predicate backed by a closure.
pub struct FnPredicate<F> {
    name: String,
    f: F,
}

impl<F: Fn(&ReducedWord) -> bool + Send + Sync> FnPredicate<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnPredicate { name: name.into(), f }
    }
}

impl<F: Fn(&ReducedWord) -> bool + Send + Sync> SetPredicate for FnPredicate<F> {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn contains(&self, w: &ReducedWord) -> bool {
        (self.f)(w)
    }
}

/// Builds a predicate from its text form:
///
/// - `all`, `none`, `even`, `commutator`, `primitive`
/// - `zkernel:1,0` (kernel of `F_n → Z`, one weight per generator)
/// - `cyclic-kernel:m=3,images=1,0` (kernel of `F_n → Z/m`)
/// - `free-kernel:a,b,1` (kernel of `F_n → F_m`, one image per generator,
///   `1` for the identity)
/// - `first:aA` (non-trivial words starting with one of the letters)
pub fn parse_predicate(spec: &str, rank: Rank) -> Result<Box<dyn SetPredicate>> {
    let bad = |m: &str| Error::Parse(format!("predicate {spec:?}: {m}"));
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let no_args = |p: Box<dyn SetPredicate>| if rest.is_empty() { Ok(p) } else { Err(bad("takes no arguments")) };
    match head {
        "all" => no_args(Box::new(AllWords)),
        "none" => no_args(Box::new(NoWords)),
        "even" => no_args(Box::new(EvenLength)),
        "commutator" => no_args(Box::new(DerivedSubgroup)),
        "primitive" => no_args(Box::new(Primitive::new(rank))),
        "zkernel" => {
            let weights = rest
                .split(',')
                .map(|w| w.trim().parse::<i64>().map_err(|_| bad("weights must be integers")))
                .collect::<Result<Vec<_>>>()?;
            if weights.len() != rank.get() {
                return Err(bad("need one weight per generator"));
            }
            Ok(Box::new(IntegerKernel::new(weights)))
        }
        "cyclic-kernel" => {
            let m_part = rest.strip_prefix("m=").ok_or_else(|| bad("expected m=<order>,images=..."))?;
            let (m, images) = m_part.split_once(",images=").ok_or_else(|| bad("expected m=<order>,images=..."))?;
            let m: usize = m.parse().map_err(|_| bad("bad order"))?;
            let images = images
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| bad("images must be residues")))
                .collect::<Result<Vec<_>>>()?;
            let q = FiniteQuotient::cyclic(rank, m, &images)?;
            Ok(Box::new(QuotientFiber::kernel(Arc::new(q))))
        }
        "free-kernel" => {
            let images = rest
                .split(',')
                .map(|x| if x.trim() == "1" { Ok(ReducedWord::identity()) } else { x.trim().parse::<ReducedWord>() })
                .collect::<Result<Vec<_>>>()?;
            if images.len() != rank.get() {
                return Err(bad("need one image per generator"));
            }
            Ok(Box::new(FreeImageKernel::new(images)))
        }
        "first" => {
            let letters = rest
                .chars()
                .map(|c| Letter::from_char(c).ok_or_else(|| bad("letters expected")))
                .collect::<Result<Vec<_>>>()?;
            Ok(Box::new(FirstLetterIn::new(letters)))
        }
        _ => Err(bad("unknown predicate")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exhaustive(p: &dyn SetPredicate, rank: Rank, k_max: usize) -> Vec<u128> {
        (0..=k_max)
            .map(|k| {
                let mut c = 0u128;
                for_each_in_sphere(rank, k, None, |w| c += u128::from(p.contains(w)));
                c
            })
            .collect()
    }

    #[test]
    fn transfer_counts_match_enumeration() {
        let two = Rank::new(2).unwrap();
        let three = Rank::new(3).unwrap();
        let z3 = Arc::new(FiniteQuotient::cyclic(two, 3, &[1, 0]).unwrap());
        let preds: Vec<(Box<dyn SetPredicate>, Rank, usize)> = vec![
            (Box::new(AllWords), two, 10),
            (Box::new(EvenLength), two, 10),
            (Box::new(DerivedSubgroup), two, 10),
            (Box::new(DerivedSubgroup), three, 6),
            (Box::new(IntegerKernel::new(vec![1, 0])), two, 10),
            (Box::new(IntegerKernel::new(vec![2, -1])), two, 9),
            (Box::new(QuotientFiber::kernel(z3)), two, 10),
            (Box::new(FreeImageKernel::kill_last_generator(two)), three, 7),
            (Box::new(FreeImageKernel::new(vec!["ab".parse().unwrap(), "b".parse().unwrap()])), two, 8),
            (Box::new(FirstLetterIn::new(vec![Letter::new(0, false), Letter::new(0, true)])), two, 9),
        ];
        for (p, rank, k) in preds {
            let dp = p.sphere_counts(rank, k).unwrap().unwrap();
            assert_eq!(dp, exhaustive(p.as_ref(), rank, k), "{}", p.name());
            let freq = p.sphere_frequencies(rank, k).unwrap().unwrap();
            for (j, (&f, &c)) in freq.iter().zip(&dp).enumerate() {
                let expected = c as f64 / crate::word::sphere_size_f64(rank, j);
                assert!((f - expected).abs() < 1e-12, "{} k={j}: {f} vs {expected}", p.name());
            }
        }
    }

    #[test]
    fn commutator_vanishes_on_odd_spheres() {
        let two = Rank::new(2).unwrap();
        let counts = DerivedSubgroup.sphere_counts(two, 20).unwrap().unwrap();
        assert!(counts.iter().skip(1).step_by(2).all(|&c| c == 0));
        // On C_4 only the eight commutators of distinct generator letters.
        assert_eq!(counts[4], 8);
    }

    #[test]
    fn cyclic_kernel_first_sphere() {
        // a -> 1, b -> 0 in Z/3: of a, A, b, B only b and B map to 0.
        let two = Rank::new(2).unwrap();
        let p = parse_predicate("cyclic-kernel:m=3,images=1,0", two).unwrap();
        assert_eq!(p.sphere_counts(two, 1).unwrap().unwrap(), vec![1, 2]);
    }

    #[test]
    fn overflow_and_budget_are_reported() {
        let two = Rank::new(2).unwrap();
        assert!(matches!(AllWords.sphere_counts(two, 200).unwrap(), Err(Error::Overflow(_))));
        let err = transfer_counts(&AbelianTransfer, two, 30, 100).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn parse_forms() {
        let two = Rank::new(2).unwrap();
        for s in ["all", "none", "even", "commutator", "primitive", "zkernel:1,0", "free-kernel:a,1", "first:aA"] {
            assert!(parse_predicate(s, two).is_ok(), "{s}");
        }
        assert!(parse_predicate("zkernel:1", two).is_err());
        assert!(parse_predicate("even:3", two).is_err());
        assert!(parse_predicate("bogus", two).is_err());
        assert!(Primitive::new(two).sphere_counts(two, 3).is_none());
    }
}

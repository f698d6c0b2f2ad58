//! Atomic measures `μ_{c,d}` on `F_n`.
//!
//! A complexity function `c` with finite level sets and a density `d`
//! determine the measure that spreads `d(k)` evenly over the level set
//! `C_k = c^{-1}(k)`. Every set measure is a truncated series reported
//! together with the mass the truncation could have missed.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{Density, DensitySpec, BASEL};
use crate::fit::{fit_log_log, LineFit};
use crate::predicate::{count_in_sphere, SetPredicate};
use crate::quotient::{sphere_pushforwards, FiniteQuotient};
use crate::word::{ball_size_f64, for_each_in_sphere, random_reduced_word, sphere_partitions, sphere_size, Rank, ReducedWord};
use crate::{Error, Result};

/// Words enumerated before an exhaustive sum gives up.
pub const DEFAULT_WORD_BUDGET: f64 = 5e7;

pub trait ComplexityFunction: Send + Sync {
    fn name(&self) -> String;

    fn complexity(&self, w: &ReducedWord) -> usize;

    /// `|c^{-1}(k)|`.
    fn sphere_cardinality(&self, k: usize) -> BigUint;

    /// Calls `f` on every word of complexity `k`.
    fn visit_sphere(&self, k: usize, f: &mut dyn FnMut(&ReducedWord));

    /// The rank, when `c` is word length in `F_n`; enables transfer-matrix
    /// shortcuts.
    fn word_length_rank(&self) -> Option<Rank> {
        None
    }
}

/// Word length with respect to the standard basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordLength {
    pub rank: Rank,
}

impl WordLength {
    pub fn new(rank: Rank) -> Self {
        WordLength { rank }
    }
}

impl ComplexityFunction for WordLength {
    fn name(&self) -> String {
        "length".into()
    }
    fn complexity(&self, w: &ReducedWord) -> usize {
        w.len()
    }
    fn sphere_cardinality(&self, k: usize) -> BigUint {
        sphere_size(self.rank, k)
    }
    fn visit_sphere(&self, k: usize, f: &mut dyn FnMut(&ReducedWord)) {
        for_each_in_sphere(self.rank, k, None, f)
    }
    fn word_length_rank(&self) -> Option<Rank> {
        Some(self.rank)
    }
}

/// A truncated series value. The true value lies in
/// `[value - error_bound, value + error_bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub error_bound: f64,
    pub truncation_depth: usize,
}

impl MeasureResult {
    pub fn interval(&self) -> (f64, f64) {
        (self.value - self.error_bound, self.value + self.error_bound)
    }
}

#[derive(Debug, Clone)]
pub struct AtomicMeasure<C = WordLength> {
    complexity: C,
    density: Density,
}

impl AtomicMeasure<WordLength> {
    pub fn word_length(rank: Rank, density: Density) -> Self {
        AtomicMeasure { complexity: WordLength::new(rank), density }
    }
}

impl<C: ComplexityFunction> AtomicMeasure<C> {
    pub fn new(complexity: C, density: Density) -> Self {
        AtomicMeasure { complexity, density }
    }

    pub fn complexity(&self) -> &C {
        &self.complexity
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    /// `d(c(w)) / |C_{c(w)}|`.
    pub fn point_mass(&self, w: &ReducedWord) -> f64 {
        let k = self.complexity.complexity(w);
        let d = self.density.eval(k);
        if d == 0.0 {
            return 0.0;
        }
        d / self.complexity.sphere_cardinality(k).to_f64().unwrap_or(f64::INFINITY)
    }

    /// `Σ_{k ≤ depth} d(k) |S ∩ C_k| / |C_k|`, with the rest of the series
    /// bounded by `tail_mass(depth + 1)`. Uses transfer counting when the
    /// predicate supports it, enumeration otherwise.
    pub fn set_measure<P: SetPredicate + ?Sized>(&self, s: &P, depth: usize) -> Result<MeasureResult> {
        if let Some(rank) = self.complexity.word_length_rank() {
            if let Some(freqs) = s.sphere_frequencies(rank, depth) {
                return Ok(self.measure_from_sphere_frequencies(&freqs?));
            }
        }
        self.set_measure_exhaustive(s, depth, DEFAULT_WORD_BUDGET)
    }

    /// Enumerates every level set up to `depth`.
    pub fn set_measure_exhaustive<P: SetPredicate + ?Sized>(&self, s: &P, depth: usize, budget: f64) -> Result<MeasureResult> {
        let total: f64 =
            (0..=depth).map(|k| self.complexity.sphere_cardinality(k).to_f64().unwrap_or(f64::INFINITY)).sum();
        if total > budget {
            return Err(Error::budget(format!("enumerating complexity levels up to {depth}"), total, budget));
        }
        let freqs: Vec<f64> = (0..=depth)
            .map(|k| {
                let size = self.complexity.sphere_cardinality(k).to_f64().unwrap_or(f64::INFINITY);
                if size == 0.0 {
                    return 0.0;
                }
                let hits = match self.complexity.word_length_rank() {
                    Some(rank) => count_in_sphere(s, rank, k),
                    None => {
                        let mut c = 0u128;
                        self.complexity.visit_sphere(k, &mut |w| c += u128::from(s.contains(w)));
                        c
                    }
                };
                hits as f64 / size
            })
            .collect();
        Ok(self.measure_from_sphere_frequencies(&freqs))
    }

    /// Combines per-level frequencies `|S ∩ C_k| / |C_k|`, `k = 0..len`.
    pub fn measure_from_sphere_frequencies(&self, freqs: &[f64]) -> MeasureResult {
        let depth = freqs.len().saturating_sub(1);
        let value = freqs.iter().enumerate().map(|(k, f)| self.density.eval(k) * f).sum();
        MeasureResult { value, error_bound: self.density.tail_mass(depth + 1), truncation_depth: depth }
    }

    /// `Σ_w c(w) μ(w)`, truncated after `depth` with the remaining mean
    /// bounded exactly. Fails for densities with infinite mean.
    pub fn mean_length(&self, depth: usize) -> Result<MeasureResult> {
        let error_bound = self.density.mean_tail(depth + 1)?;
        let value = (0..=depth).map(|k| k as f64 * self.density.eval(k)).sum();
        Ok(MeasureResult { value, error_bound, truncation_depth: depth })
    }

    /// Mean length truncated at the first depth whose remainder is below
    /// `tolerance`.
    pub fn mean_length_to(&self, tolerance: f64, max_depth: usize) -> Result<MeasureResult> {
        let mut depth = self.density.support_start();
        loop {
            let r = self.mean_length(depth)?;
            if r.error_bound <= tolerance {
                return Ok(r);
            }
            if depth >= max_depth {
                return Err(Error::ToleranceUnreachable { tolerance, max_depth, parameter: f64::NAN });
            }
            depth = (depth.max(1) * 2).min(max_depth);
        }
    }
}

/// Mean of `c` over the fiber of `g`: `Σ_{w̄=g} c(w) μ(w) / Σ_{w̄=g} μ(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberComplexity {
    pub element: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub depth: usize,
}

/// Fibers with truncated mass below this are rejected as unmeasured.
pub const FIBER_MASS_TOLERANCE: f64 = 1e-12;

pub fn mean_fiber_complexity(
    m: &AtomicMeasure<WordLength>,
    q: &FiniteQuotient,
    g: usize,
    depth: usize,
) -> Result<FiberComplexity> {
    if q.rank() != m.complexity.rank {
        return Err(Error::Precondition(format!("quotient rank {} differs from measure rank {}", q.rank(), m.complexity.rank)));
    }
    if g >= q.order() {
        return Err(Error::Precondition(format!("element {g} outside a group of order {}", q.order())));
    }
    let d = &m.density;
    let mean_rest = d.mean_tail(depth + 1)?;
    let mass_rest = d.tail_mass(depth + 1);
    let spheres = sphere_pushforwards(q, depth);
    let (mut num, mut den) = (0.0, 0.0);
    for (k, p) in spheres.iter().enumerate() {
        let w = d.eval(k) * p.masses()[g];
        num += k as f64 * w;
        den += w;
    }
    if den < FIBER_MASS_TOLERANCE {
        return Err(Error::Precondition(format!("fiber of element {g} has mass {den:e} up to depth {depth}")));
    }
    Ok(FiberComplexity {
        element: g,
        value: num / den,
        lower: num / (den + mass_rest),
        upper: (num + mean_rest) / den,
        numerator: num,
        denominator: den,
        depth,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuInfinityPoint {
    pub parameter: f64,
    pub value: f64,
    pub error_bound: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuInfinityReport {
    pub predicate: String,
    pub points: Vec<MuInfinityPoint>,
    /// `2 μ(λ/2) - μ(λ)` for successive grid pairs.
    pub richardson: Vec<f64>,
    pub converged: bool,
    pub estimate: Option<f64>,
    pub verdict: String,
}

/// Successive values closer than this count as settled.
pub const MU_INFINITY_STEP: f64 = 1e-3;

/// Evaluates `μ_p(S)` along `grid` (parameters approaching the limit) and
/// decides whether the values settle. Each evaluation is truncated deep
/// enough that its error is below `tolerance`.
pub fn mu_infinity<P: SetPredicate + ?Sized>(
    rank: Rank,
    family: &dyn Fn(f64) -> Result<DensitySpec>,
    s: &P,
    grid: &[f64],
    tolerance: f64,
    max_depth: usize,
) -> Result<MuInfinityReport> {
    let mut points = Vec::with_capacity(grid.len());
    for &p in grid {
        let d = Density::new(family(p)?.with_rank(rank))?;
        let depth = d
            .effective_support(tolerance, max_depth)
            .ok_or(Error::ToleranceUnreachable { tolerance, max_depth, parameter: p })?;
        let r = AtomicMeasure::word_length(rank, d).set_measure(s, depth)?;
        points.push(MuInfinityPoint { parameter: p, value: r.value, error_bound: r.error_bound, depth });
    }
    let values: Vec<f64> = points.iter().map(|p| p.value).collect();
    let richardson: Vec<f64> = values.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let converged = values.len() >= 3 && values[values.len() - 3..].windows(2).all(|w| (w[1] - w[0]).abs() < MU_INFINITY_STEP);
    let estimate = converged.then(|| *richardson.last().expect("three values give two extrapolations"));
    let verdict = if converged {
        "converged".to_string()
    } else {
        let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let shrinking = diffs.len() >= 2 && diffs[diffs.len() - 1] < diffs[diffs.len() - 2];
        if shrinking { "no convergence detected yet (differences shrinking)" } else { "no convergence detected" }.to_string()
    };
    Ok(MuInfinityReport { predicate: s.name(), points, richardson, converged, estimate, verdict })
}

/// `λ_0, λ_0/2, λ_0/4, ...`.
pub fn geometric_grid(lambda0: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|j| lambda0 * 0.5f64.powi(j as i32)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereAverage {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreePoint {
    pub k: usize,
    pub mean: f64,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeEstimate {
    pub alpha: f64,
    pub fit: LineFit,
    pub points: Vec<DegreePoint>,
}

/// Degree of polynomial growth on average of `f` under the inverse-square
/// density: fits `ln t_k` against `ln k` with `t_k = (6/π²) f̄_k / k`, where
/// `f̄_k` is the sphere average of `f`, and returns `1 + slope`.
pub fn degree_of_growth(
    f: &(dyn Fn(&ReducedWord) -> f64 + Sync),
    rank: Rank,
    k_min: usize,
    k_max: usize,
    mode: SphereAverage,
) -> Result<DegreeEstimate> {
    if k_min == 0 || k_max < k_min {
        return Err(Error::Precondition(format!("bad range {k_min}..={k_max}; need 1 <= k_min <= k_max")));
    }
    if k_max - k_min + 1 < 3 {
        return Err(Error::DegenerateFit(format!("{} spheres, need at least 3", k_max - k_min + 1)));
    }
    if mode == SphereAverage::Exhaustive {
        let words = ball_size_f64(rank, k_max);
        if words > DEFAULT_WORD_BUDGET {
            return Err(Error::budget(format!("enumerating spheres up to {k_max}"), words, DEFAULT_WORD_BUDGET));
        }
    }
    let mut points = Vec::new();
    for k in k_min..=k_max {
        let mean = match mode {
            SphereAverage::Exhaustive => {
                let sum: f64 = sphere_partitions(rank, k)
                    .into_par_iter()
                    .map(|first| {
                        let mut s = 0.0;
                        for_each_in_sphere(rank, k, first, |w| s += f(w));
                        s
                    })
                    .collect::<Vec<f64>>()
                    .iter()
                    .sum();
                sum / crate::word::sphere_size_f64(rank, k)
            }
            SphereAverage::Sampled { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                (0..samples).map(|_| f(&random_reduced_word(rank, k, &mut rng))).sum::<f64>() / samples as f64
            }
        };
        points.push(DegreePoint { k, mean, term: BASEL * mean / k as f64 });
    }
    if points.iter().all(|p| p.mean <= 0.0) {
        return Err(Error::DegenerateFit("f vanishes on every sphere".into()));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.k as f64, p.term)).collect();
    let fit = fit_log_log(&pts, 3)?;
    Ok(DegreeEstimate { alpha: 1.0 + fit.slope, fit, points })
}

/// Words `u`, `h` with `μ(u) ≠ μ(h u h^-1)`: a conjugate of different
/// length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugationWitness {
    pub u: String,
    pub h: String,
    pub conjugate: String,
    pub mass_u: f64,
    pub mass_conjugate: f64,
}

/// Searches `u = a^k`, `h = b^j` for a witness that the measure is not
/// invariant under inner automorphisms. Needs rank at least 2. Returns `None`
/// when no positive-mass level `1..=max_len` yields one, e.g. for a measure
/// concentrated on the identity.
pub fn conjugation_witness(m: &AtomicMeasure<WordLength>, max_len: usize) -> Option<ConjugationWitness> {
    if m.complexity.rank.get() < 2 {
        return None;
    }
    let a = ReducedWord::generator(0);
    let b = ReducedWord::generator(1);
    for k in 1..=max_len {
        if m.density.eval(k) == 0.0 {
            continue;
        }
        let u = (1..k).fold(a.clone(), |acc, _| acc.multiply(&a));
        let mut h = b.clone();
        for _ in 0..4 {
            let c = u.conjugate_by(&h);
            let (mu, mc) = (m.point_mass(&u), m.point_mass(&c));
            if mu != mc {
                return Some(ConjugationWitness {
                    u: u.to_string(),
                    h: h.to_string(),
                    conjugate: c.to_string(),
                    mass_u: mu,
                    mass_conjugate: mc,
                });
            }
            h = h.multiply(&b);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::{AllWords, EvenLength, FnPredicate, NoWords, QuotientFiber};
    use std::sync::Arc;

    fn two() -> Rank {
        Rank::new(2).unwrap()
    }

    fn exp(lambda: f64) -> Density {
        Density::new(DensitySpec::Exponential { lambda }).unwrap()
    }

    #[test]
    fn point_masses() {
        let m = AtomicMeasure::word_length(two(), exp(3f64.ln()));
        assert!((m.point_mass(&"a".parse().unwrap()) - 1.0 / 18.0).abs() < 1e-15);
        let dirac = AtomicMeasure::word_length(two(), Density::new(DensitySpec::Dirac { m: 2 }).unwrap());
        assert!((dirac.point_mass(&"ab".parse().unwrap()) - 1.0 / 12.0).abs() < 1e-15);
        let mut masses = Vec::new();
        for_each_in_sphere(two(), 3, None, |w| masses.push(m.point_mass(w)));
        assert!(masses.iter().all(|&x| x == masses[0]));
    }

    #[test]
    fn whole_group_and_empty_set() {
        let m = AtomicMeasure::word_length(two(), exp(0.7));
        for depth in [0, 3, 10] {
            let r = m.set_measure(&AllWords, depth).unwrap();
            assert!((r.value + r.error_bound - 1.0).abs() < 1e-12);
            assert_eq!(m.set_measure(&NoWords, depth).unwrap().value, 0.0);
        }
    }

    #[test]
    fn even_words_exponential() {
        let lambda: f64 = 0.8;
        let m = AtomicMeasure::word_length(two(), exp(lambda));
        let r = m.set_measure(&EvenLength, 80).unwrap();
        assert!((r.value - 1.0 / (1.0 + (-lambda).exp())).abs() < 1e-12);
        let ex = m.set_measure_exhaustive(&EvenLength, 8, 1e7).unwrap();
        let dp = m.set_measure(&EvenLength, 8).unwrap();
        assert!((ex.value - dp.value).abs() < 1e-15);
    }

    #[test]
    fn exhaustive_budget() {
        let m = AtomicMeasure::word_length(two(), exp(0.7));
        assert!(m.set_measure_exhaustive(&EvenLength, 30, 1e6).unwrap_err().is_budget());
    }

    #[test]
    fn additivity_and_monotonicity() {
        let m = AtomicMeasure::word_length(two(), exp(0.5));
        let s = FnPredicate::new("starts-a", |w: &ReducedWord| w.first().is_some_and(|l| l.generator() == 0));
        let t = FnPredicate::new("starts-b", |w: &ReducedWord| w.first().is_some_and(|l| l.generator() == 1));
        let st = FnPredicate::new("nontrivial", |w: &ReducedWord| !w.is_empty());
        let (a, b, ab) = (
            m.set_measure(&s, 7).unwrap().value,
            m.set_measure(&t, 7).unwrap().value,
            m.set_measure(&st, 7).unwrap().value,
        );
        assert!((a + b - ab).abs() < 1e-15);
        assert!(a <= ab && b <= ab);
    }

    #[test]
    fn mean_lengths() {
        let dirac = AtomicMeasure::word_length(two(), Density::new(DensitySpec::Dirac { m: 9 }).unwrap());
        assert_eq!(dirac.mean_length(20).unwrap().value, 9.0);
        for lambda in [0.1, 0.5, 1.0, 2.0] {
            let r = AtomicMeasure::word_length(two(), exp(lambda)).mean_length_to(1e-9, 100_000).unwrap();
            let expected = 1.0 / lambda.exp_m1();
            assert!((r.value - expected).abs() < 1e-6, "{lambda}");
            assert!((r.value - expected).abs() <= r.error_bound + 1e-12);
        }
        let cauchy = AtomicMeasure::word_length(two(), Density::new(DensitySpec::InverseSquare).unwrap());
        assert!(matches!(cauchy.mean_length(10), Err(Error::InfiniteMean(_))));
        // Small λ: the mean grows without bound.
        let small = AtomicMeasure::word_length(two(), exp(1e-3)).mean_length_to(1e-6, 1 << 24).unwrap();
        assert!(small.value > 900.0);
    }

    #[test]
    fn mu_infinity_even_words() {
        let fam = |l: f64| Ok(DensitySpec::Exponential { lambda: l });
        let r = mu_infinity(two(), &fam, &EvenLength, &geometric_grid(1.0, 12), 1e-12, 1 << 20).unwrap();
        assert!(r.converged);
        assert!((r.estimate.unwrap() - 0.5).abs() < 0.01);
        let all = mu_infinity(two(), &fam, &AllWords, &geometric_grid(1.0, 6), 1e-12, 1 << 20).unwrap();
        assert!((all.estimate.unwrap() - 1.0).abs() < 1e-9);
        let dirac = |m: f64| Ok(DensitySpec::Dirac { m: m as usize });
        let grid: Vec<f64> = (1..=10).map(f64::from).collect();
        let r = mu_infinity(two(), &dirac, &EvenLength, &grid, 1e-12, 100).unwrap();
        assert!(!r.converged && r.estimate.is_none());
    }

    #[test]
    fn tolerance_unreachable() {
        let fam = |l: f64| Ok(DensitySpec::Exponential { lambda: l });
        let err = mu_infinity(two(), &fam, &EvenLength, &[1e-4], 1e-12, 1000).unwrap_err();
        assert!(matches!(err, Error::ToleranceUnreachable { .. }));
    }

    #[test]
    fn degree_estimates() {
        for m in 0..4 {
            let f = move |w: &ReducedWord| (w.len() as f64).powi(m);
            let est = degree_of_growth(&f, two(), 1, 10, SphereAverage::Exhaustive).unwrap();
            assert!((est.alpha - m as f64).abs() < 1e-9, "m={m}: {}", est.alpha);
        }
        let zero = |_: &ReducedWord| 0.0;
        assert!(degree_of_growth(&zero, two(), 1, 5, SphereAverage::Exhaustive).is_err());
        let one = |_: &ReducedWord| 1.0;
        assert!(degree_of_growth(&one, two(), 1, 2, SphereAverage::Exhaustive).is_err());
    }

    #[test]
    fn fiber_complexity() {
        let trivial = FiniteQuotient::trivial(two());
        let m = AtomicMeasure::word_length(two(), exp(1.0));
        let fc = mean_fiber_complexity(&m, &trivial, 0, 60).unwrap();
        let mean = m.mean_length(60).unwrap().value;
        assert!((fc.value - mean).abs() < 1e-12);

        let z2 = FiniteQuotient::cyclic(two(), 2, &[1, 0]).unwrap();
        let dirac = AtomicMeasure::word_length(two(), Density::new(DensitySpec::Dirac { m: 2 }).unwrap());
        assert_eq!(mean_fiber_complexity(&dirac, &z2, 0, 10).unwrap().value, 2.0);
        let z2_both = FiniteQuotient::cyclic(two(), 2, &[1, 1]).unwrap();
        assert!(mean_fiber_complexity(&dirac, &z2_both, 1, 10).is_err());

        let fc = mean_fiber_complexity(&m, &z2, 1, 30).unwrap();
        assert!(fc.lower <= fc.value && fc.value <= fc.upper);
        // Every word in the odd fiber is non-trivial, so the fiber mean exceeds
        // 1 and with it the overall mean length.
        assert!(fc.value >= 1.0 && fc.value > mean_length_exp(1.0));
        assert!(fc.upper - fc.lower < 1e-10);
        // Same numerator and denominator by enumeration.
        let kernel = QuotientFiber::new(Arc::new(z2.clone()), &[1], "odd-a");
        let den = m.set_measure_exhaustive(&kernel, 10, 1e7).unwrap().value;
        let fc10 = mean_fiber_complexity(&m, &z2, 1, 10).unwrap();
        assert!((fc10.denominator - den).abs() < 1e-14);
        let mut num = 0.0;
        for k in 0..=10 {
            let mut hits = 0u64;
            for_each_in_sphere(two(), k, None, |w| hits += u64::from(z2.image(w) == 1));
            num += k as f64 * m.density().eval(k) * hits as f64 / crate::word::sphere_size_f64(two(), k);
        }
        assert!((fc10.numerator - num).abs() < 1e-14);
    }

    fn mean_length_exp(lambda: f64) -> f64 {
        1.0 / lambda.exp_m1()
    }

    #[test]
    fn conjugation_changes_mass() {
        let m = AtomicMeasure::word_length(two(), exp(0.5));
        let w = conjugation_witness(&m, 5).unwrap();
        assert_ne!(w.mass_u, w.mass_conjugate);
        let at_identity = AtomicMeasure::word_length(two(), Density::new(DensitySpec::Dirac { m: 0 }).unwrap());
        assert!(conjugation_witness(&at_identity, 5).is_none());
    }
}

//! Relative frequencies on spheres and balls, and what can be read off them
//! at finite range: limit verdicts, the Stolz comparison of spherical and
//! disc limits, growth rates and the decay exponent of the derived subgroup.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::fit::{fit_log_log, LineFit};
use crate::predicate::{count_in_sphere, DerivedSubgroup, FirstLetterIn, SetPredicate};
use crate::word::{ball_size_f64, random_reduced_word, sphere_size_f64, sphere_size_u128, Letter, Rank};
use crate::{Error, Result};

/// Words an exhaustive series may enumerate.
pub const EXHAUSTIVE_BUDGET: f64 = 1e8;

/// Monte Carlo draws per seeded substream.
const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Spherical,
    Disc,
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesKind::Spherical => "spherical",
            SeriesKind::Disc => "disc",
        })
    }
}

impl FromStr for SeriesKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spherical" => Ok(SeriesKind::Spherical),
            "disc" => Ok(SeriesKind::Disc),
            _ => Err(Error::Parse(format!("unknown series kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountingStrategy {
    Exhaustive,
    Dp,
    MonteCarlo { samples: usize, seed: u64 },
}

impl fmt::Display for CountingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountingStrategy::Exhaustive => f.write_str("exhaustive"),
            CountingStrategy::Dp => f.write_str("dp"),
            CountingStrategy::MonteCarlo { samples, seed } => write!(f, "monte-carlo(samples={samples},seed={seed})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyPoint {
    pub k: usize,
    /// Exact counts; absent for Monte Carlo estimates.
    pub numerator: Option<u128>,
    pub denominator: Option<u128>,
    pub ratio: f64,
    /// Binomial standard error for Monte Carlo, zero for exact counts.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySeries {
    pub kind: SeriesKind,
    pub predicate: String,
    pub rank: usize,
    pub strategy: String,
    pub points: Vec<FrequencyPoint>,
}

impl FrequencySeries {
    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ratio).collect()
    }

    pub fn ratio_at(&self, k: usize) -> Option<f64> {
        self.points.iter().find(|p| p.k == k).map(|p| p.ratio)
    }

    /// Keeps points with `k` of the given parity.
    pub fn parity_subsequence(&self, even: bool) -> FrequencySeries {
        FrequencySeries {
            points: self.points.iter().filter(|p| (p.k % 2 == 0) == even).copied().collect(),
            ..self.clone()
        }
    }

    /// Keeps points with `k >= k_min`.
    pub fn from_k(&self, k_min: usize) -> FrequencySeries {
        FrequencySeries { points: self.points.iter().filter(|p| p.k >= k_min).copied().collect(), ..self.clone() }
    }

    /// CSV with columns `predicate,n,kind,k,numerator,denominator,ratio,stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_series_csv(std::slice::from_ref(self), out)
    }
}

/// Several series in one CSV table; numerator and denominator are left
/// empty for Monte Carlo rows.
pub fn write_series_csv<W: Write>(series: &[FrequencySeries], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["predicate", "n", "kind", "k", "numerator", "denominator", "ratio", "stderr"])?;
    let opt = |x: Option<u128>| x.map(|v| v.to_string()).unwrap_or_default();
    for s in series {
        for p in &s.points {
            w.write_record([
                s.predicate.clone(),
                s.rank.to_string(),
                s.kind.to_string(),
                p.k.to_string(),
                opt(p.numerator),
                opt(p.denominator),
                format!("{:e}", p.ratio),
                format!("{:e}", p.stderr),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn exact_sphere_counts<P: SetPredicate + ?Sized>(
    s: &P,
    rank: Rank,
    k_max: usize,
    strategy: CountingStrategy,
) -> Result<Vec<u128>> {
    match strategy {
        CountingStrategy::Dp => s.sphere_counts(rank, k_max).ok_or_else(|| Error::DpUnsupported(s.name()))?,
        CountingStrategy::Exhaustive => {
            let words = ball_size_f64(rank, k_max);
            if words > EXHAUSTIVE_BUDGET {
                return Err(Error::budget(format!("enumerating the ball of radius {k_max}"), words, EXHAUSTIVE_BUDGET));
            }
            Ok((0..=k_max).map(|k| count_in_sphere(s, rank, k)).collect())
        }
        CountingStrategy::MonteCarlo { .. } => unreachable!("Monte Carlo has no exact counts"),
    }
}

/// Fraction of `samples` draws landing in `S`, drawn in fixed-size seeded
/// substreams so the result does not depend on the thread count.
fn monte_carlo_fraction<P: SetPredicate + ?Sized>(
    s: &P,
    rank: Rank,
    samples: usize,
    seed: u64,
    series_stream: u64,
    draw_length: &(dyn Fn(&mut ChaCha8Rng) -> usize + Sync),
) -> (f64, f64) {
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((series_stream << 32) | c as u64);
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            (0..n)
                .filter(|_| {
                    let len = draw_length(&mut rng);
                    s.contains(&random_reduced_word(rank, len, &mut rng))
                })
                .count() as u64
        })
        .collect::<Vec<u64>>()
        .iter()
        .sum();
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// Relative frequencies `|S ∩ C_k| / |C_k|` (spherical) or
/// `|S ∩ B_k| / |B_k|` (disc) for `k = 0..=k_max`.
pub fn frequency_series<P: SetPredicate + ?Sized>(
    s: &P,
    rank: Rank,
    kind: SeriesKind,
    k_max: usize,
    strategy: CountingStrategy,
) -> Result<FrequencySeries> {
    let points = match strategy {
        CountingStrategy::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Precondition("Monte Carlo needs at least one sample".into()));
            }
            (0..=k_max)
                .map(|k| {
                    let (ratio, stderr) = match kind {
                        SeriesKind::Spherical => monte_carlo_fraction(s, rank, samples, seed, k as u64, &|_| k),
                        SeriesKind::Disc => {
                            // Length j with probability |C_j| / |B_k|.
                            let ball = ball_size_f64(rank, k);
                            let cdf: Vec<f64> = (0..=k)
                                .scan(0.0, |acc, j| {
                                    *acc += sphere_size_f64(rank, j) / ball;
                                    Some(*acc)
                                })
                                .collect();
                            let draw = move |rng: &mut ChaCha8Rng| {
                                let u: f64 = rng.gen();
                                cdf.iter().position(|&c| u < c).unwrap_or(k)
                            };
                            monte_carlo_fraction(s, rank, samples, seed, (1 << 31) | k as u64, &draw)
                        }
                    };
                    FrequencyPoint { k, numerator: None, denominator: None, ratio, stderr }
                })
                .collect()
        }
        _ => {
            let counts = exact_sphere_counts(s, rank, k_max, strategy)?;
            let mut points = Vec::with_capacity(k_max + 1);
            let (mut num, mut den) = (0u128, 0u128);
            let overflow = || Error::Overflow(format!("ball counts up to radius {k_max}"));
            for (k, &c) in counts.iter().enumerate() {
                let size = sphere_size_u128(rank, k).ok_or_else(overflow)?;
                let (n, d) = match kind {
                    SeriesKind::Spherical => (c, size),
                    SeriesKind::Disc => {
                        num = num.checked_add(c).ok_or_else(overflow)?;
                        den = den.checked_add(size).ok_or_else(overflow)?;
                        (num, den)
                    }
                };
                points.push(FrequencyPoint {
                    k,
                    numerator: Some(n),
                    denominator: Some(d),
                    ratio: n as f64 / d as f64,
                    stderr: 0.0,
                });
            }
            points
        }
    };
    Ok(FrequencySeries { kind, predicate: s.name(), rank: rank.get(), strategy: strategy.to_string(), points })
}

/// Tolerance for the finite-range limit test.
pub const LIMIT_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityVerdict {
    /// `None` when the series is judged to have no limit.
    pub limit_estimate: Option<f64>,
    pub last_differences: Vec<f64>,
    /// Distance between the last even-`k` and last odd-`k` ratios; zero when
    /// the series has only one parity.
    pub parity_gap: f64,
    pub oscillating: bool,
    /// Extremes over the final third of the range.
    pub limsup_estimate: f64,
    pub liminf_estimate: f64,
    pub trend: String,
}

impl DensityVerdict {
    pub fn is_defined(&self) -> bool {
        self.limit_estimate.is_some()
    }
}

/// Judges whether the ratios settle: the last three successive differences
/// and the even/odd gap must all stay below `1e-2`. Needs six points.
pub fn density_verdict(series: &FrequencySeries) -> Result<DensityVerdict> {
    let r = series.ratios();
    if r.len() < 6 {
        return Err(Error::Precondition(format!("{} points, need at least 6", r.len())));
    }
    let diffs: Vec<f64> = r.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let last_differences = diffs[diffs.len() - 3..].to_vec();
    let last_of = |even: bool| series.points.iter().rev().find(|p| (p.k % 2 == 0) == even).map(|p| p.ratio);
    let parity_gap = match (last_of(true), last_of(false)) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => 0.0,
    };
    let oscillating = parity_gap >= LIMIT_TOLERANCE;
    let settled = last_differences.iter().all(|&d| d < LIMIT_TOLERANCE) && !oscillating;
    let tail = &r[r.len() - (r.len() / 3).max(1)..];
    let limsup_estimate = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let liminf_estimate = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let increasing = tail.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    let trend = match (increasing, decreasing) {
        (true, true) => "constant",
        (true, false) => "increasing",
        (false, true) => "decreasing",
        _ if oscillating => "oscillating",
        _ => "mixed",
    }
    .to_string();
    Ok(DensityVerdict {
        limit_estimate: settled.then(|| *r.last().expect("non-empty")),
        last_differences,
        parity_gap,
        oscillating,
        limsup_estimate,
        liminf_estimate,
        trend,
    })
}

/// Agreement tolerance for spherical against disc limits.
pub const STOLZ_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StolzReport {
    pub predicate: String,
    pub k_max: usize,
    pub even_only: bool,
    pub spherical: DensityVerdict,
    pub disc: DensityVerdict,
    pub spherical_estimate: f64,
    pub disc_estimate: f64,
    pub difference: f64,
    pub tolerance: f64,
    /// False when the spherical series has no limit, which leaves nothing to
    /// compare.
    pub applicable: bool,
    pub agree: bool,
}

/// Compares the last spherical and disc frequencies at `k_max`, optionally
/// along even `k` only.
pub fn stolz_check<P: SetPredicate + ?Sized>(
    s: &P,
    rank: Rank,
    k_max: usize,
    strategy: CountingStrategy,
    even_only: bool,
) -> Result<StolzReport> {
    let restrict = |series: FrequencySeries| if even_only { series.parity_subsequence(true) } else { series };
    let sph = restrict(frequency_series(s, rank, SeriesKind::Spherical, k_max, strategy)?);
    let disc = restrict(frequency_series(s, rank, SeriesKind::Disc, k_max, strategy)?);
    let spherical = density_verdict(&sph)?;
    let disc_verdict = density_verdict(&disc)?;
    let spherical_estimate = *sph.ratios().last().expect("verdict needs points");
    let disc_estimate = *disc.ratios().last().expect("verdict needs points");
    let difference = (spherical_estimate - disc_estimate).abs();
    let applicable = spherical.is_defined();
    Ok(StolzReport {
        predicate: s.name(),
        k_max,
        even_only,
        agree: applicable && difference <= STOLZ_TOLERANCE,
        spherical,
        disc: disc_verdict,
        spherical_estimate,
        disc_estimate,
        difference,
        tolerance: STOLZ_TOLERANCE,
        applicable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub predicate: String,
    pub k_max: usize,
    /// `(k, ρ_k^{1/k})` of the disc frequencies, `k >= 1`.
    pub roots: Vec<(usize, f64)>,
    pub window_start: usize,
    /// Largest root over the window: the finite-range limsup proxy.
    pub estimate: f64,
    /// `(ρ_{k_max} / ρ_{k_max - 2})^{1/2}`, a diagnostic that is not thrown
    /// off by polynomial prefactors.
    pub ratio_rate: Option<f64>,
}

/// Growth rate `limsup ρ_k(S)^{1/k}` of the disc frequencies, estimated as
/// the maximum root over the final third of `1..=k_max`.
pub fn growth_rate<P: SetPredicate + ?Sized>(
    s: &P,
    rank: Rank,
    k_max: usize,
    strategy: CountingStrategy,
) -> Result<GrowthEstimate> {
    if k_max < 3 {
        return Err(Error::Precondition(format!("k_max = {k_max} is too short for a growth estimate")));
    }
    let series = frequency_series(s, rank, SeriesKind::Disc, k_max, strategy)?;
    let ratios = series.ratios();
    if ratios.iter().all(|&r| r == 0.0) {
        return Err(Error::Precondition(format!("{} has zero frequency up to {k_max}", s.name())));
    }
    let roots: Vec<(usize, f64)> = (1..=k_max).map(|k| (k, ratios[k].powf(1.0 / k as f64))).collect();
    let window_start = k_max - k_max / 3;
    let estimate = roots.iter().filter(|(k, _)| *k >= window_start).map(|r| r.1).fold(0.0, f64::max);
    let ratio_rate = (ratios[k_max - 2] > 0.0).then(|| (ratios[k_max] / ratios[k_max - 2]).sqrt());
    Ok(GrowthEstimate { predicate: s.name(), k_max, roots, window_start, estimate, ratio_rate })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpFit {
    pub rank: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub slope: f64,
    pub expected: f64,
    pub fit: LineFit,
    /// `(k, ρ_k)` on even `k`.
    pub points: Vec<(usize, f64)>,
}

/// Slope of `ln ρ_k` against `ln k` for the derived subgroup over even `k`
/// in `k_min..=k_max` (odd spheres miss it entirely).
pub fn sharp_exponent_fit(rank: Rank, k_min: usize, k_max: usize) -> Result<SharpFit> {
    let evens: Vec<usize> = (k_min.max(2)..=k_max).filter(|k| k % 2 == 0).collect();
    if evens.len() < 5 {
        return Err(Error::DegenerateFit(format!("{} even lengths in {k_min}..={k_max}, need 5", evens.len())));
    }
    let freqs = DerivedSubgroup.sphere_frequencies(rank, k_max).expect("derived subgroup has transfer counting")?;
    let points: Vec<(usize, f64)> = evens.iter().map(|&k| (k, freqs[k])).collect();
    let pts: Vec<(f64, f64)> = points.iter().map(|&(k, r)| (k as f64, r)).collect();
    let fit = fit_log_log(&pts, 5)?;
    Ok(SharpFit { rank: rank.get(), k_min, k_max, slope: fit.slope, expected: -(rank.get() as f64) / 2.0, fit, points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonAdditivity {
    pub s: String,
    pub t: String,
    pub gamma_s: f64,
    pub gamma_t: f64,
    pub gamma_union: f64,
    pub sum: f64,
}

/// Two disjoint sets of positive density, words starting with `a^{±1}` and
/// words starting with any other letter: each has growth rate 1, and so does
/// their union, not 2.
pub fn growth_rate_non_additivity(rank: Rank, k_max: usize) -> Result<NonAdditivity> {
    if rank.get() < 2 {
        return Err(Error::Precondition("needs rank at least 2".into()));
    }
    let a = vec![Letter::new(0, false), Letter::new(0, true)];
    let rest: Vec<Letter> = rank.letters().filter(|l| l.generator() != 0).collect();
    let all: Vec<Letter> = rank.letters().collect();
    let (s, t, u) = (FirstLetterIn::new(a), FirstLetterIn::new(rest), FirstLetterIn::new(all));
    let g = |p: &FirstLetterIn| growth_rate(p, rank, k_max, CountingStrategy::Dp).map(|e| e.estimate);
    let (gamma_s, gamma_t, gamma_union) = (g(&s)?, g(&t)?, g(&u)?);
    Ok(NonAdditivity { s: s.name(), t: t.name(), gamma_s, gamma_t, gamma_union, sum: gamma_s + gamma_t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::{AllWords, EvenLength, FnPredicate, IntegerKernel};
    use crate::word::ReducedWord;

    fn two() -> Rank {
        Rank::new(2).unwrap()
    }

    #[test]
    fn even_length_oscillates() {
        let s = frequency_series(&EvenLength, two(), SeriesKind::Spherical, 10, CountingStrategy::Dp).unwrap();
        assert_eq!(s.ratios(), vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let v = density_verdict(&s).unwrap();
        assert!(!v.is_defined() && v.oscillating);
        assert_eq!((v.limsup_estimate, v.liminf_estimate), (1.0, 0.0));
    }

    #[test]
    fn all_words() {
        let s = frequency_series(&AllWords, two(), SeriesKind::Disc, 12, CountingStrategy::Dp).unwrap();
        assert_eq!(density_verdict(&s).unwrap().limit_estimate, Some(1.0));
        let g = growth_rate(&AllWords, two(), 12, CountingStrategy::Dp).unwrap();
        assert_eq!(g.estimate, 1.0);
        let st = stolz_check(&AllWords, two(), 12, CountingStrategy::Dp, false).unwrap();
        assert!(st.agree && st.difference == 0.0);
    }

    #[test]
    fn strategies_agree() {
        let preds: Vec<Box<dyn SetPredicate>> =
            vec![Box::new(EvenLength), Box::new(DerivedSubgroup), Box::new(IntegerKernel::new(vec![1, 0]))];
        for p in &preds {
            for kind in [SeriesKind::Spherical, SeriesKind::Disc] {
                let dp = frequency_series(p, two(), kind, 9, CountingStrategy::Dp).unwrap();
                let ex = frequency_series(p, two(), kind, 9, CountingStrategy::Exhaustive).unwrap();
                assert_eq!(dp.points, ex.points);
                let mc = frequency_series(p, two(), kind, 9, CountingStrategy::MonteCarlo { samples: 20_000, seed: 7 })
                    .unwrap();
                for (a, b) in mc.points.iter().zip(&dp.points) {
                    let sigma = (b.ratio * (1.0 - b.ratio) / 20_000.0).sqrt();
                    assert!((a.ratio - b.ratio).abs() <= 4.0 * sigma + 1e-12, "{} {kind} k={}", p.name(), a.k);
                }
            }
        }
    }

    #[test]
    fn dp_unsupported() {
        let p = FnPredicate::new("custom", |w: &ReducedWord| w.len() == 3);
        let err = frequency_series(&p, two(), SeriesKind::Spherical, 4, CountingStrategy::Dp).unwrap_err();
        assert!(matches!(err, Error::DpUnsupported(_)));
    }

    #[test]
    fn finite_additivity_of_frequencies() {
        let a = FirstLetterIn::new(vec![Letter::new(0, false)]);
        let b = FirstLetterIn::new(vec![Letter::new(1, true)]);
        let ab = FirstLetterIn::new(vec![Letter::new(0, false), Letter::new(1, true)]);
        let f = |p: &FirstLetterIn| frequency_series(p, two(), SeriesKind::Spherical, 8, CountingStrategy::Dp).unwrap();
        for ((x, y), z) in f(&a).points.iter().zip(&f(&b).points).zip(&f(&ab).points) {
            assert_eq!(x.numerator.unwrap() + y.numerator.unwrap(), z.numerator.unwrap());
        }
    }

    #[test]
    fn commutator_spheres() {
        let s = frequency_series(&DerivedSubgroup, two(), SeriesKind::Spherical, 12, CountingStrategy::Dp).unwrap();
        assert!(s.points.iter().filter(|p| p.k % 2 == 1).all(|p| p.numerator == Some(0)));
    }

    #[test]
    fn sharp_fit_rejects_short_ranges() {
        assert!(sharp_exponent_fit(two(), 10, 16).is_err());
        assert!(sharp_exponent_fit(two(), 10, 18).is_ok());
    }

    #[test]
    fn gamma_is_not_additive() {
        let r = growth_rate_non_additivity(two(), 12).unwrap();
        assert!(r.gamma_union < r.sum - 0.5);
        assert!(r.gamma_s > 0.9 && r.gamma_t > 0.9);
    }

    #[test]
    fn csv_layout() {
        let s = frequency_series(&EvenLength, two(), SeriesKind::Disc, 2, CountingStrategy::Dp).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("predicate,n,kind,k,numerator,denominator,ratio,stderr\neven,2,disc,0,1,1,"));
        assert!(!text.contains('\r'));
    }
}

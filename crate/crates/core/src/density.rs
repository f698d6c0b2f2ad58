//! Moderating densities on the non-negative integers.
//!
//! Six families: Poisson, exponential, Gauss, Cauchy (general form and the
//! fixed `6/π² · k^-2` form used for polynomial degrees), Dirac and the
//! finite disc uniform density, which depends on the rank of the free group.
//! Unnormalized families carry a numerically computed normalizer; tails are
//! closed-form where available and otherwise summed with an explicit
//! remainder bound.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::word::{ball_size, sphere_size, Rank};
use crate::{Error, Result};

/// `6 / π²`, the normalizer of `k^-2` on `k >= 1`.
pub const BASEL: f64 = 6.0 / (PI * PI);

/// Direct terms summed before an Euler–Maclaurin remainder takes over for
/// the polynomially decaying families.
const EM_OFFSET: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensitySpec {
    Poisson { lambda: f64 },
    Exponential { lambda: f64 },
    Gauss { a: f64, sigma: f64 },
    Cauchy { lambda: f64 },
    /// `d(k) = 6/π² · k^-2` for `k >= 1`, `d(0) = 0`. Text form `cauchy7`.
    InverseSquare,
    Dirac { m: usize },
    DiscUniform { m: usize, rank: Option<usize> },
}

impl DensitySpec {
    /// Fills in the rank of a disc uniform spec that was given without one.
    pub fn with_rank(self, rank: Rank) -> Self {
        match self {
            DensitySpec::DiscUniform { m, rank: None } => DensitySpec::DiscUniform { m, rank: Some(rank.get()) },
            other => other,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            DensitySpec::Poisson { .. } => "poisson",
            DensitySpec::Exponential { .. } => "exponential",
            DensitySpec::Gauss { .. } => "gauss",
            DensitySpec::Cauchy { .. } => "cauchy",
            DensitySpec::InverseSquare => "cauchy7",
            DensitySpec::Dirac { .. } => "dirac",
            DensitySpec::DiscUniform { .. } => "discuniform",
        }
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::Poisson { lambda } => write!(f, "poisson:lambda={lambda}"),
            DensitySpec::Exponential { lambda } => write!(f, "exponential:lambda={lambda}"),
            DensitySpec::Gauss { a, sigma } => write!(f, "gauss:a={a},sigma={sigma}"),
            DensitySpec::Cauchy { lambda } => write!(f, "cauchy:lambda={lambda}"),
            DensitySpec::InverseSquare => write!(f, "cauchy7"),
            DensitySpec::Dirac { m } => write!(f, "dirac:m={m}"),
            DensitySpec::DiscUniform { m, rank: None } => write!(f, "discuniform:m={m}"),
            DensitySpec::DiscUniform { m, rank: Some(n) } => write!(f, "discuniform:m={m},n={n}"),
        }
    }
}

impl FromStr for DensitySpec {
    type Err = Error;

    /// Parses `family[:key=value,...]`, e.g. `exponential:lambda=0.25`,
    /// `cauchy7`, `dirac:m=12`, `discuniform:m=12`. Unknown or missing keys
    /// are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse(format!("density {s:?}: {msg}"));
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params: Vec<(&str, &str)> = Vec::new();
        for kv in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {kv:?}")))?;
            params.push((k.trim(), v.trim()));
        }
        let allowed: &[&str] = match family {
            "poisson" | "exponential" | "cauchy" => &["lambda"],
            "gauss" => &["a", "sigma"],
            "cauchy7" => &[],
            "dirac" => &["m"],
            "discuniform" => &["m", "n"],
            other => return Err(bad(format!("unknown family {other:?}"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(bad(format!("unknown key {k:?}")));
        }
        let get = |key: &str| params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let real = |key: &str| -> Result<f64> {
            let v = get(key).ok_or_else(|| bad(format!("missing {key}")))?;
            v.parse::<f64>().map_err(|_| bad(format!("{key}={v} is not a number")))
        };
        let int = |key: &str| -> Result<usize> {
            let v = get(key).ok_or_else(|| bad(format!("missing {key}")))?;
            v.parse::<usize>().map_err(|_| bad(format!("{key}={v} is not a non-negative integer")))
        };
        Ok(match family {
            "poisson" => DensitySpec::Poisson { lambda: real("lambda")? },
            "exponential" => DensitySpec::Exponential { lambda: real("lambda")? },
            "cauchy" => DensitySpec::Cauchy { lambda: real("lambda")? },
            "gauss" => DensitySpec::Gauss { a: real("a")?, sigma: real("sigma")? },
            "cauchy7" => DensitySpec::InverseSquare,
            "dirac" => DensitySpec::Dirac { m: int("m")? },
            "discuniform" => DensitySpec::DiscUniform {
                m: int("m")?,
                rank: if get("n").is_some() { Some(int("n")?) } else { None },
            },
            _ => unreachable!(),
        })
    }
}

/// A normalized probability mass function on `{0, 1, 2, ...}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Density {
    spec: DensitySpec,
    normalizer: f64,
    support_start: usize,
    #[serde(skip)]
    table: Option<Vec<f64>>,
}

impl Density {
    pub fn new(spec: DensitySpec) -> Result<Self> {
        let invalid = |m: &str| Err(Error::InvalidDensity(format!("{spec}: {m}")));
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let mut normalizer = 1.0;
        let mut support_start = 0;
        let mut table = None;
        match spec {
            DensitySpec::Poisson { lambda } | DensitySpec::Exponential { lambda } => {
                if !positive(lambda) {
                    return invalid("lambda must be positive");
                }
            }
            DensitySpec::Gauss { a, sigma } => {
                if !a.is_finite() || !positive(sigma) {
                    return invalid("a must be finite and sigma positive");
                }
                normalizer = 1.0 / gauss_tail_unnormalized(a, sigma, 0);
            }
            DensitySpec::Cauchy { lambda } => {
                if !positive(lambda) {
                    return invalid("lambda must be positive");
                }
                normalizer = 1.0 / cauchy_tail_unnormalized(lambda, 0);
            }
            DensitySpec::InverseSquare => {
                normalizer = BASEL;
                support_start = 1;
            }
            DensitySpec::Dirac { m } => support_start = m,
            DensitySpec::DiscUniform { m, rank } => {
                let Some(n) = rank else {
                    return invalid("disc uniform density needs the rank n");
                };
                let rank = Rank::new(n)?;
                let ball = ball_size(rank, m);
                table = Some(
                    (0..=m)
                        .map(|k| ratio_f64(&sphere_size(rank, k), &ball))
                        .collect::<Vec<f64>>(),
                );
            }
        }
        Ok(Density { spec, normalizer, support_start, table })
    }

    pub fn spec(&self) -> &DensitySpec {
        &self.spec
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn support_start(&self) -> usize {
        self.support_start
    }

    /// Dirac and disc uniform densities vanish beyond a finite point.
    pub fn support_end(&self) -> Option<usize> {
        match self.spec {
            DensitySpec::Dirac { m } | DensitySpec::DiscUniform { m, .. } => Some(m),
            _ => None,
        }
    }

    /// `d(k) > 0` for infinitely many `k`.
    pub fn positive_infinitely_often(&self) -> bool {
        self.support_end().is_none()
    }

    pub fn eval(&self, k: usize) -> f64 {
        if k < self.support_start {
            return 0.0;
        }
        let kf = k as f64;
        match self.spec {
            DensitySpec::Poisson { lambda } => (-lambda + kf * lambda.ln() - ln_gamma(kf + 1.0)).exp(),
            DensitySpec::Exponential { lambda } => -(-lambda).exp_m1() * (-lambda * kf).exp(),
            DensitySpec::Gauss { a, sigma } => self.normalizer * (-(kf - a).powi(2) / sigma).exp(),
            DensitySpec::Cauchy { lambda } => self.normalizer / ((kf - lambda).powi(2) + 1.0),
            DensitySpec::InverseSquare => BASEL / (kf * kf),
            DensitySpec::Dirac { m } => f64::from(u8::from(k == m)),
            DensitySpec::DiscUniform { .. } => {
                self.table.as_ref().and_then(|t| t.get(k).copied()).unwrap_or(0.0)
            }
        }
    }

    /// `sum_{k >= l} d(k)`.
    pub fn tail_mass(&self, l: usize) -> f64 {
        if l <= self.support_start {
            return 1.0;
        }
        match self.spec {
            DensitySpec::Exponential { lambda } => (-lambda * l as f64).exp(),
            DensitySpec::Dirac { .. } => 0.0,
            DensitySpec::DiscUniform { .. } => {
                self.table.as_ref().map(|t| t.iter().skip(l).sum()).unwrap_or(0.0)
            }
            DensitySpec::Poisson { lambda } => poisson_tail(lambda, l),
            DensitySpec::Gauss { a, sigma } => self.normalizer * gauss_tail_unnormalized(a, sigma, l),
            DensitySpec::Cauchy { lambda } => self.normalizer * cauchy_tail_unnormalized(lambda, l),
            DensitySpec::InverseSquare => BASEL * inverse_square_tail(l),
        }
    }

    /// `sum_{k >= l} k d(k)`; an error for the Cauchy families, whose mean
    /// diverges.
    pub fn mean_tail(&self, l: usize) -> Result<f64> {
        let l = l.max(self.support_start);
        Ok(match self.spec {
            DensitySpec::Exponential { lambda } => {
                let x = (-lambda).exp();
                let one_minus_x = -(-lambda).exp_m1();
                (-lambda * l as f64).exp() * (l as f64 * one_minus_x + x) / one_minus_x
            }
            DensitySpec::Poisson { lambda } => {
                if l == 0 {
                    lambda
                } else {
                    lambda * self.tail_mass(l - 1)
                }
            }
            DensitySpec::Dirac { m } => {
                if l <= m {
                    m as f64
                } else {
                    0.0
                }
            }
            DensitySpec::DiscUniform { .. } => self
                .table
                .as_ref()
                .map(|t| t.iter().enumerate().skip(l).map(|(k, d)| k as f64 * d).sum())
                .unwrap_or(0.0),
            DensitySpec::Gauss { a, sigma } => self.normalizer * gauss_mean_tail_unnormalized(a, sigma, l),
            DensitySpec::Cauchy { .. } | DensitySpec::InverseSquare => {
                return Err(Error::InfiniteMean(self.spec.to_string()))
            }
        })
    }

    pub fn mean(&self) -> Result<f64> {
        self.mean_tail(0)
    }

    /// Smallest `K` with `tail_mass(K + 1) <= eps`, searched up to `cap`.
    pub fn effective_support(&self, eps: f64, cap: usize) -> Option<usize> {
        if let Some(end) = self.support_end() {
            return Some(end);
        }
        // Exponential search then bisection; tail_mass is non-increasing.
        let mut hi = self.support_start.max(1);
        while self.tail_mass(hi + 1) > eps {
            if hi >= cap {
                return None;
            }
            hi = (hi * 2).min(cap);
        }
        let mut lo = self.support_start;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.tail_mass(mid + 1) <= eps {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    pub fn sampler(&self) -> LengthSampler {
        LengthSampler::new(self.clone())
    }
}

fn ratio_f64(num: &num_bigint::BigUint, den: &num_bigint::BigUint) -> f64 {
    // Shift both down so they fit an f64 without overflowing.
    let shift = den.bits().saturating_sub(1000);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// Sums `term(k)` for `k >= start` until the terms are decreasing, past
/// `decreasing_from`, and below `1e-18` of the running sum; the remainder is
/// then bounded by a geometric series with ratio `ratio(k)`.
fn sum_light_tail(start: usize, decreasing_from: f64, term: impl Fn(usize) -> f64, ratio: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut k = start;
    loop {
        let t = term(k);
        sum += t;
        if (k as f64) > decreasing_from {
            let r = ratio(k);
            if r < 1.0 {
                let remainder = t * r / (1.0 - r);
                if remainder <= 1e-18 * sum.max(f64::MIN_POSITIVE) || t == 0.0 {
                    return sum + remainder;
                }
            }
        }
        k += 1;
    }
}

fn poisson_tail(lambda: f64, l: usize) -> f64 {
    let term = |k: usize| (-lambda + k as f64 * lambda.ln() - ln_gamma(k as f64 + 1.0)).exp();
    sum_light_tail(l, lambda, term, |k| lambda / (k as f64 + 1.0))
}

fn gauss_tail_unnormalized(a: f64, sigma: f64, l: usize) -> f64 {
    let term = |k: usize| (-(k as f64 - a).powi(2) / sigma).exp();
    // (k+j-a)^2 >= (k-a)^2 + 2j(k-a) for k > a bounds terms by a geometric series.
    sum_light_tail(l, a, term, |k| (-2.0 * (k as f64 - a) / sigma).exp())
}

fn gauss_mean_tail_unnormalized(a: f64, sigma: f64, l: usize) -> f64 {
    let term = |k: usize| k as f64 * (-(k as f64 - a).powi(2) / sigma).exp();
    // With r = exp(-2(k-a)/sigma), sum_j (k+j) r^j <= k/(1-r) + r/(1-r)^2 so
    // a ratio of r·(k+1)/k bounds every later step.
    sum_light_tail(l, a.max(1.0), term, |k| {
        (-2.0 * (k as f64 - a) / sigma).exp() * (k as f64 + 1.0) / k as f64
    })
}

/// Euler–Maclaurin remainder `sum_{k >= n} f(k)` from the integral and
/// derivatives at `n`.
fn euler_maclaurin_tail(integral: f64, f: f64, f1: f64, f3: f64) -> f64 {
    integral + f / 2.0 - f1 / 12.0 + f3 / 720.0
}

fn cauchy_tail_unnormalized(lambda: f64, l: usize) -> f64 {
    let f = |x: f64| 1.0 / ((x - lambda).powi(2) + 1.0);
    let n = l.max(lambda.ceil() as usize) + EM_OFFSET;
    let direct: f64 = (l..n).map(|k| f(k as f64)).sum();
    let u = n as f64 - lambda;
    let q = 1.0 + u * u;
    let integral = PI / 2.0 - u.atan();
    let f1 = -2.0 * u / (q * q);
    let f3 = 24.0 * u * (1.0 - u * u) / q.powi(4);
    direct + euler_maclaurin_tail(integral, f(n as f64), f1, f3)
}

fn inverse_square_tail(l: usize) -> f64 {
    let start = l.max(1);
    let n = start + EM_OFFSET;
    let direct: f64 = (start..n).map(|k| 1.0 / (k as f64).powi(2)).sum();
    let x = n as f64;
    direct + euler_maclaurin_tail(1.0 / x, 1.0 / (x * x), -2.0 / x.powi(3), -24.0 / x.powi(5))
}

/// Inverse-CDF sampler over a cached prefix-sum table, with an exact
/// rejection step beyond the table for the polynomially decaying families.
#[derive(Debug, Clone)]
pub struct LengthSampler {
    density: Density,
    cdf: Vec<f64>,
}

const LIGHT_TABLE_CAP: usize = 1 << 22;
const HEAVY_TABLE_LEN: usize = 1 << 16;

impl LengthSampler {
    pub fn new(density: Density) -> Self {
        let end = match density.spec {
            DensitySpec::Cauchy { lambda } => HEAVY_TABLE_LEN.max(lambda.ceil() as usize + 4),
            DensitySpec::InverseSquare => HEAVY_TABLE_LEN,
            _ => density.effective_support(1e-17, LIGHT_TABLE_CAP).unwrap_or(LIGHT_TABLE_CAP),
        };
        let mut acc = 0.0;
        let cdf = (0..=end)
            .map(|k| {
                acc += density.eval(k);
                acc
            })
            .collect();
        LengthSampler { density, cdf }
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let last = *self.cdf.last().unwrap();
        if u < last {
            return self.cdf.partition_point(|&c| c <= u);
        }
        match self.density.spec {
            DensitySpec::Cauchy { lambda } => self.sample_heavy_tail(rng, lambda, 1.0),
            DensitySpec::InverseSquare => self.sample_heavy_tail(rng, 0.0, 0.0),
            _ => {
                // Light tails: keep accumulating past the table. Reached with
                // probability below 1e-17.
                let mut acc = last;
                let mut k = self.cdf.len();
                loop {
                    acc += self.density.eval(k);
                    if u < acc || self.density.eval(k) == 0.0 && k > self.density.support_start {
                        return k;
                    }
                    k += 1;
                }
            }
        }
    }

    /// Samples `k >= K0` (K0 = table length) from `1/((k-λ)^2 + c)` by
    /// rejection from the integer-binned Pareto proposal `1/(t(t+1))`,
    /// `t = k - λ`.
    fn sample_heavy_tail<R: Rng + ?Sized>(&self, rng: &mut R, lambda: f64, c: f64) -> usize {
        let k0 = self.cdf.len();
        let s = k0 as f64 - lambda;
        debug_assert!(s > 1.0);
        let ratio = |t: f64| t * (t + 1.0) / (t * t + c);
        let bound = if c == 0.0 {
            ratio(s)
        } else {
            let peak = 1.0 + 2f64.sqrt();
            ratio(if s <= peak { peak } else { s })
        };
        loop {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let y = s / u;
            let j = (y - s).floor();
            if !j.is_finite() || j > 1e15 {
                continue;
            }
            let t = s + j;
            if rng.gen::<f64>() * bound < ratio(t) {
                return k0 + j as usize;
            }
        }
    }
}

/// One length drawn with a ChaCha generator seeded by `seed`.
pub fn sample_length(density: &Density, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    density.sampler().sample(&mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn d(s: &str) -> Density {
        Density::new(s.parse().unwrap()).unwrap()
    }

    fn grid() -> Vec<Density> {
        let mut out = Vec::new();
        for l in [0.05, 0.5, 1.0, 3.0, 20.0] {
            out.push(d(&format!("poisson:lambda={l}")));
            out.push(d(&format!("exponential:lambda={l}")));
            out.push(d(&format!("cauchy:lambda={l}")));
        }
        for (a, s) in [(0.0, 1.0), (5.0, 2.0), (-3.0, 4.0), (40.0, 10.0), (2.5, 0.1)] {
            out.push(d(&format!("gauss:a={a},sigma={s}")));
        }
        out.push(d("cauchy7"));
        for m in [0, 1, 7, 30] {
            out.push(d(&format!("dirac:m={m}")));
            out.push(d(&format!("discuniform:m={m},n=2")));
            out.push(d(&format!("discuniform:m={m},n=3")));
        }
        out
    }

    #[test]
    fn eval_examples() {
        let e = Density::new(DensitySpec::Exponential { lambda: 3f64.ln() }).unwrap();
        assert!((e.eval(1) - 2.0 / 9.0).abs() < 1e-15);
        let dirac = d("dirac:m=5");
        assert_eq!(dirac.eval(5), 1.0);
        assert_eq!(dirac.eval(4), 0.0);
        let c7 = d("cauchy7");
        assert!((c7.eval(1) - 0.607_927_101_854_026_6).abs() < 1e-15);
        assert_eq!(c7.eval(0), 0.0);
    }

    #[test]
    fn tail_examples() {
        let e = Density::new(DensitySpec::Exponential { lambda: 3f64.ln() }).unwrap();
        assert_eq!(e.tail_mass(0), 1.0);
        assert!((e.tail_mass(2) - 1.0 / 9.0).abs() < 1e-15);
        let summed: f64 = (2..200).map(|k| e.eval(k)).sum();
        assert!((summed - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(d("dirac:m=5").tail_mass(6), 0.0);
        assert_eq!(d("dirac:m=5").tail_mass(5), 1.0);
    }

    #[test]
    fn normalization_over_grid() {
        for dens in grid() {
            for cut in [0usize, 1, 3, 10, 50] {
                let head: f64 = (0..cut).map(|k| dens.eval(k)).sum();
                let total = head + dens.tail_mass(cut);
                assert!((total - 1.0).abs() < 1e-9, "{}: cut {cut} gives {total}", dens.spec());
            }
            assert!((dens.tail_mass(0) - 1.0).abs() < 1e-12, "{}", dens.spec());
        }
    }

    #[test]
    fn tails_are_monotone() {
        for dens in grid() {
            let mut prev = 1.0 + 1e-12;
            for l in (0..400).step_by(7) {
                let t = dens.tail_mass(l);
                assert!(t <= prev + 1e-15, "{} at {l}", dens.spec());
                assert!(t >= 0.0);
                prev = t;
            }
            assert!(dens.tail_mass(100_000) < 1e-4, "{}", dens.spec());
        }
    }

    #[test]
    fn inverse_square_tail_matches_trigamma_value() {
        // sum_{k >= 1} k^-2 = π²/6 and sum_{k >= 2} = π²/6 - 1.
        assert!((inverse_square_tail(1) - PI * PI / 6.0).abs() < 1e-13);
        assert!((inverse_square_tail(2) - (PI * PI / 6.0 - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn disc_uniform_matches_sphere_ratios() {
        let dens = d("discuniform:m=6,n=2");
        let ball = 1.0 + 4.0 + 12.0 + 36.0 + 108.0 + 324.0 + 972.0;
        assert!((dens.eval(3) - 36.0 / ball).abs() < 1e-15);
        let total: f64 = (0..=6).map(|k| dens.eval(k)).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(dens.eval(7), 0.0);
        assert!(Density::new("discuniform:m=3".parse().unwrap()).is_err());
    }

    #[test]
    fn means() {
        for lambda in [0.1, 0.5, 1.0, 2.0] {
            let e = Density::new(DensitySpec::Exponential { lambda }).unwrap();
            let summed: f64 = (0..20_000).map(|k| k as f64 * e.eval(k)).sum();
            assert!((e.mean().unwrap() - summed).abs() < 1e-9);
            assert!((e.mean().unwrap() - 1.0 / lambda.exp_m1()).abs() < 1e-12);
        }
        assert!((d("poisson:lambda=3.5").mean().unwrap() - 3.5).abs() < 1e-12);
        let g = d("gauss:a=5,sigma=2");
        let summed: f64 = (0..200).map(|k| k as f64 * g.eval(k)).sum();
        assert!((g.mean().unwrap() - summed).abs() < 1e-12);
        assert!(matches!(d("cauchy7").mean(), Err(Error::InfiniteMean(_))));
        assert!(matches!(d("cauchy:lambda=2").mean(), Err(Error::InfiniteMean(_))));
    }

    #[test]
    fn parse_round_trip_and_rejections() {
        for s in ["exponential:lambda=0.25", "cauchy7", "dirac:m=12", "discuniform:m=12", "gauss:a=1,sigma=2"] {
            let spec: DensitySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("exponential:mu=1".parse::<DensitySpec>().is_err());
        assert!("weibull:k=1".parse::<DensitySpec>().is_err());
        assert!("dirac".parse::<DensitySpec>().is_err());
        assert!(Density::new("exponential:lambda=-1".parse().unwrap()).is_err());
        assert!(Density::new("gauss:a=0,sigma=0".parse().unwrap()).is_err());
    }

    #[test]
    fn sampler_is_deterministic_and_trivial_for_dirac() {
        let dirac = d("dirac:m=7");
        for seed in 0..20 {
            assert_eq!(sample_length(&dirac, seed), 7);
        }
        let e = d("exponential:lambda=0.3");
        assert_eq!(sample_length(&e, 99), sample_length(&e, 99));
    }

    fn sample_mean_check(dens: &Density, n: usize, seed: u64) -> (f64, f64) {
        let sampler = dens.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn exponential_sample_mean() {
        let e = d("exponential:lambda=1");
        let expected: f64 = (0..200).map(|k| k as f64 * e.eval(k)).sum();
        assert!((expected - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-12);
        let (mean, se) = sample_mean_check(&e, 1_000_000, 11);
        assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} (se {se})");
    }

    #[test]
    fn inverse_square_frequency_of_one() {
        let c7 = d("cauchy7");
        let sampler = c7.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| sampler.sample(&mut rng) == 1).count();
        let p = BASEL;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    /// Chi-squared goodness of fit with bins merged until each expects >= 5.
    fn chi_squared_passes(dens: &Density, seed: u64) -> (f64, f64) {
        let n = 100_000usize;
        let sampler = dens.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = std::collections::BTreeMap::<usize, usize>::new();
        for _ in 0..n {
            *counts.entry(sampler.sample(&mut rng)).or_default() += 1;
        }
        let mut bins: Vec<(f64, f64)> = Vec::new();
        let (mut exp_acc, mut obs_acc) = (0.0, 0.0);
        let mut k = 0;
        loop {
            exp_acc += n as f64 * dens.eval(k);
            obs_acc += *counts.get(&k).unwrap_or(&0) as f64;
            if exp_acc >= 5.0 {
                bins.push((exp_acc, obs_acc));
                exp_acc = 0.0;
                obs_acc = 0.0;
            }
            k += 1;
            if n as f64 * dens.tail_mass(k) < 5.0 {
                break;
            }
        }
        // Everything from k on goes into one final bin.
        let tail_obs: usize = counts.range(k..).map(|(_, c)| c).sum();
        let last = (exp_acc + n as f64 * dens.tail_mass(k), obs_acc + tail_obs as f64);
        if last.0 > 0.0 {
            bins.push(last);
        }
        let stat: f64 = bins.iter().map(|(e, o)| (o - e).powi(2) / e).sum();
        let dof = (bins.len() - 1).max(1) as f64;
        let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.999);
        (stat, critical)
    }

    #[test]
    fn sampler_matches_pmf() {
        let families = [
            "poisson:lambda=4",
            "exponential:lambda=0.2",
            "gauss:a=6,sigma=5",
            "cauchy:lambda=3",
            "cauchy7",
            "discuniform:m=8,n=2",
        ];
        for (i, s) in families.iter().enumerate() {
            let (stat, critical) = chi_squared_passes(&d(s), 1000 + i as u64);
            assert!(stat < critical, "{s}: chi2 {stat} >= {critical}");
        }
    }

    #[test]
    fn heavy_tail_sampler_reaches_beyond_table() {
        // Force the tail branch: mass beyond 65536 for k^-2 is ~9.3e-6.
        let c7 = d("cauchy7");
        let sampler = c7.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let beyond = (0..2_000_000).filter(|_| sampler.sample(&mut rng) >= HEAVY_TABLE_LEN).count();
        let p = c7.tail_mass(HEAVY_TABLE_LEN);
        let expected = 2e6 * p;
        assert!((beyond as f64 - expected).abs() < 4.0 * expected.sqrt(), "{beyond} vs {expected}");
    }
}

//! Random walks on the Cayley tree of `F_n`.
//!
//! A walk of length `L` is a uniformly random word of the free monoid on the
//! `2n` letters; its endpoint is the free reduction. The reduced length of
//! the endpoint performs the reflected walk on `{0, 1, 2, ...}` that steps
//! up with probability `(2n-1)/2n` (always, from `0`) and down otherwise.

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::Density;
use crate::word::{random_monoid_word, Letter, MonoidWord, Rank, ReducedWord};
use crate::{Error, Result};

/// Largest number of reduced endpoints an exact pushforward may track.
pub const DEFAULT_STATE_CAP: usize = 4_000_000;

/// Trials per seeded substream.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum LengthSource {
    Fixed(usize),
    Random(Density),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub rank: Rank,
    pub length: LengthSource,
    pub seed: u64,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_walk<R: Rng>(cfg: &WalkConfig, rng: &mut R) -> (MonoidWord, ReducedWord) {
    let len = match &cfg.length {
        LengthSource::Fixed(l) => *l,
        LengthSource::Random(d) => d.sampler().sample(rng),
    };
    let w = random_monoid_word(cfg.rank, len, rng);
    let r = w.reduce();
    (w, r)
}

/// One walk: the monoid word and its reduced endpoint.
pub fn simulate_walk(cfg: &WalkConfig) -> (MonoidWord, ReducedWord) {
    draw_walk(cfg, &mut stream_rng(cfg.seed, 0))
}

/// `trials` independent walks, drawn in seeded substreams.
pub fn simulate_walks(cfg: &WalkConfig, trials: usize) -> Vec<(MonoidWord, ReducedWord)> {
    (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(cfg.seed, c as u64);
            let n = CHUNK.min(trials - c * CHUNK);
            (0..n).map(move |_| draw_walk(cfg, &mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

/// Reduced length after `len` uniform steps, tracking only the stack of
/// uncancelled letters.
fn reduced_length<R: Rng>(rank: Rank, len: usize, rng: &mut R, stack: &mut Vec<u8>) -> usize {
    let size = rank.alphabet_size() as u8;
    stack.clear();
    for _ in 0..len {
        let l = rng.gen_range(0..size);
        if stack.last() == Some(&(l ^ 1)) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    stack.len()
}

/// Exact law of the endpoint of a walk of fixed length: counts of monoid
/// words per reduced endpoint, in shortlex order.
#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardTable {
    pub rank: Rank,
    pub length: usize,
    pub counts: Vec<(ReducedWord, u128)>,
    /// `(2n)^L`.
    pub total: u128,
}

impl PushforwardTable {
    pub fn mass(&self, w: &ReducedWord) -> f64 {
        self.counts
            .binary_search_by(|(x, _)| x.shortlex_cmp(w))
            .map(|i| self.counts[i].1 as f64 / self.total as f64)
            .unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.counts.iter().map(|(_, c)| *c as f64 / self.total as f64).sum()
    }

    /// Monoid words per reduced length `0..=L`.
    pub fn length_marginal(&self) -> Vec<u128> {
        let mut out = vec![0u128; self.length + 1];
        for (w, c) in &self.counts {
            out[w.len()] += c;
        }
        out
    }

    /// CSV with columns `word,mass`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["word", "mass"])?;
        for (word, c) in &self.counts {
            w.write_record([word.to_string(), format!("{:e}", *c as f64 / self.total as f64)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact pushforward of the uniform measure on monoid words of length `L`,
/// stepping the count of every reduced endpoint one letter at a time.
pub fn exact_pushforward(rank: Rank, length: usize, state_cap: usize) -> Result<PushforwardTable> {
    let a = rank.alphabet_size() as u128;
    let total = a.checked_pow(length as u32).ok_or_else(|| Error::Overflow(format!("(2n)^{length}")))?;
    // Endpoints after L steps have length ≤ L and the parity of L.
    let states: f64 = (0..=length)
        .filter(|j| j % 2 == length % 2)
        .map(|j| crate::word::sphere_size_f64(rank, j))
        .sum();
    if states > state_cap as f64 {
        return Err(Error::budget(format!("pushforward of walks of length {length}"), states, state_cap as f64));
    }
    let mut level: HashMap<ReducedWord, u128> = HashMap::from([(ReducedWord::identity(), 1)]);
    for _ in 0..length {
        let mut next: HashMap<ReducedWord, u128> = HashMap::with_capacity(level.len() * 3);
        for (w, &c) in &level {
            for l in rank.letters() {
                let mut v = w.clone();
                v.push(l);
                *next.entry(v).or_insert(0) += c;
            }
        }
        level = next;
    }
    let mut counts: Vec<(ReducedWord, u128)> = level.into_iter().collect();
    counts.sort_by(|x, y| x.0.shortlex_cmp(&y.0));
    Ok(PushforwardTable { rank, length, counts, total })
}

/// Mixture of exact pushforwards over lengths `0..=max_len` weighted by
/// `d(L)`; the lengths cut off carry `tail_mass(max_len + 1)`.
pub fn random_length_pushforward(
    rank: Rank,
    density: &Density,
    max_len: usize,
    state_cap: usize,
) -> Result<(Vec<(ReducedWord, f64)>, f64)> {
    let mut acc: HashMap<ReducedWord, f64> = HashMap::new();
    for len in 0..=max_len {
        let w = density.eval(len);
        if w == 0.0 {
            continue;
        }
        let t = exact_pushforward(rank, len, state_cap)?;
        for (word, c) in t.counts {
            *acc.entry(word).or_insert(0.0) += w * c as f64 / t.total as f64;
        }
    }
    let mut out: Vec<(ReducedWord, f64)> = acc.into_iter().collect();
    out.sort_by(|x, y| x.0.shortlex_cmp(&y.0));
    Ok((out, density.tail_mass(max_len + 1)))
}

/// Number of monoid words of length `L` whose reduction has each length
/// `0..=L`, by the reflected walk's own recursion: from `0` all `2n` letters
/// step up; elsewhere `2n-1` step up and one steps down.
pub fn reflected_walk_exact(rank: Rank, length: usize) -> Result<Vec<u128>> {
    let a = rank.alphabet_size() as u128;
    let overflow = || Error::Overflow(format!("reflected walk counts at length {length}"));
    let mut dist = vec![0u128; length + 1];
    dist[0] = 1;
    for _ in 0..length {
        let mut next = vec![0u128; length + 1];
        for (j, &c) in dist.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if j == 0 {
                next[1] = next[1].checked_add(c.checked_mul(a).ok_or_else(overflow)?).ok_or_else(overflow)?;
            } else {
                let up = c.checked_mul(a - 1).ok_or_else(overflow)?;
                next[j + 1] = next[j + 1].checked_add(up).ok_or_else(overflow)?;
                next[j - 1] = next[j - 1].checked_add(c).ok_or_else(overflow)?;
            }
        }
        dist = next;
    }
    Ok(dist)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicStats {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub within_bounds: bool,
}

/// Monte Carlo mean of the reduced length of walks of fixed length `L`,
/// checked against `[(n-1)/n · L, L]`.
pub fn geodesic_length_stats(rank: Rank, length: usize, trials: usize, seed: u64) -> Result<GeodesicStats> {
    if trials < 100 {
        return Err(Error::Precondition(format!("{trials} trials, need at least 100")));
    }
    let sums: Vec<(f64, f64)> = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let mut stack = Vec::with_capacity(length);
            let n = CHUNK.min(trials - c * CHUNK);
            (0..n).fold((0.0, 0.0), |(s, s2), _| {
                let x = reduced_length(rank, length, &mut rng, &mut stack) as f64;
                (s + x, s2 + x * x)
            })
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let t = trials as f64;
    let mean = s / t;
    let var = ((s2 - t * mean * mean) / (t - 1.0)).max(0.0);
    let n = rank.get();
    let lower_bound = (n - 1) as f64 / n as f64 * length as f64;
    let upper_bound = length as f64;
    Ok(GeodesicStats {
        n,
        length,
        trials,
        mean,
        stderr: (var / t).sqrt(),
        lower_bound,
        upper_bound,
        within_bounds: mean >= lower_bound && mean <= upper_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReflectedWalkStats {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub trials: usize,
    /// Visits to each final position `0..=L`.
    pub histogram: Vec<u64>,
    pub mean: f64,
    pub stderr: f64,
    /// Mean of the coupled walk without reflection (same draws, stepping down
    /// from `0` as well).
    pub free_mean: f64,
    pub free_stderr: f64,
    /// The reflected walk never ends below its coupled free walk.
    pub coupling_holds: bool,
}

/// Simulates the reflected walk alongside its unreflected coupling.
pub fn reflected_walk(rank: Rank, length: usize, trials: usize, seed: u64) -> Result<ReflectedWalkStats> {
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let a = rank.alphabet_size() as u32;
    let chunks: Vec<(Vec<u64>, f64, f64, f64, f64, bool)> = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let mut hist = vec![0u64; length + 1];
            let (mut s, mut s2, mut f, mut f2, mut ok) = (0.0, 0.0, 0.0, 0.0, true);
            for _ in 0..CHUNK.min(trials - c * CHUNK) {
                let (mut pos, mut free) = (0usize, 0i64);
                for _ in 0..length {
                    // One of the 2n letters undoes the last step.
                    let down = rng.gen_range(0..a) == 0;
                    pos = if pos == 0 || !down { pos + 1 } else { pos - 1 };
                    free += if down { -1 } else { 1 };
                }
                ok &= pos as i64 >= free;
                hist[pos] += 1;
                let (x, y) = (pos as f64, free as f64);
                s += x;
                s2 += x * x;
                f += y;
                f2 += y * y;
            }
            (hist, s, s2, f, f2, ok)
        })
        .collect();
    let mut histogram = vec![0u64; length + 1];
    let (mut s, mut s2, mut f, mut f2, mut ok) = (0.0, 0.0, 0.0, 0.0, true);
    for (h, a, b, c, d, o) in chunks {
        histogram.iter_mut().zip(h).for_each(|(x, y)| *x += y);
        s += a;
        s2 += b;
        f += c;
        f2 += d;
        ok &= o;
    }
    let t = trials as f64;
    let se = |sum: f64, sq: f64| {
        let m = sum / t;
        if trials > 1 {
            (((sq - t * m * m) / (t - 1.0)).max(0.0) / t).sqrt()
        } else {
            0.0
        }
    };
    Ok(ReflectedWalkStats {
        n: rank.get(),
        length,
        trials,
        histogram,
        mean: s / t,
        stderr: se(s, s2),
        free_mean: f / t,
        free_stderr: se(f, f2),
        coupling_holds: ok,
    })
}

/// Letter permutations and inversions of the generators preserve the walk
/// law; this applies one to a word.
pub fn relabel(w: &ReducedWord, map: impl Fn(Letter) -> Letter) -> ReducedWord {
    w.letters().iter().fold(ReducedWord::identity(), |mut acc, &l| {
        acc.push(map(l));
        acc
    })
}

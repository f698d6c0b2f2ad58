//! Whitehead graphs and primitive elements.
//!
//! The graph of a word has one vertex per letter `x_i^{±1}` and an edge
//! `(x, y^{-1})` for every two-letter subword `xy`; the optional external
//! edge closes the word up cyclically. Primitivity is decided by Whitehead's
//! length reduction: a word is primitive exactly when automorphisms of the
//! second kind can shrink its cyclic reduction down to a single letter.

use std::collections::{HashSet, VecDeque};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::word::{for_each_in_sphere, sphere_partitions, sphere_size_u128, Letter, Rank, ReducedWord};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiteheadGraph {
    rank: Rank,
    /// Unordered pairs of letter indices, smaller index first.
    edges: Vec<(usize, usize)>,
    include_external: bool,
}

impl WhiteheadGraph {
    pub fn new(rank: Rank, u: &ReducedWord, include_external: bool) -> Self {
        let l = u.letters();
        let edge = |x: Letter, y: Letter| {
            let (p, q) = (x.index(), y.inverse().index());
            (p.min(q), p.max(q))
        };
        let mut edges: Vec<(usize, usize)> = l.windows(2).map(|w| edge(w[0], w[1])).collect();
        if include_external {
            if let (Some(last), Some(first)) = (u.last(), u.first()) {
                edges.push(edge(last, first));
            }
        }
        WhiteheadGraph { rank, edges, include_external }
    }

    /// A graph with the given edges between letter indices.
    pub fn from_edges(rank: Rank, edges: &[(usize, usize)]) -> Self {
        let edges = edges.iter().map(|&(p, q)| (p.min(q), p.max(q))).collect();
        WhiteheadGraph { rank, edges, include_external: false }
    }

    pub fn vertex_count(&self) -> usize {
        self.rank.alphabet_size()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn includes_external(&self) -> bool {
        self.include_external
    }

    /// Loops count twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|&(p, q)| usize::from(p == v) + usize::from(q == v)).sum()
    }

    /// Connected components among all vertices except `removed`; isolated
    /// vertices are components of their own.
    pub fn components_without(&self, removed: Option<usize>) -> usize {
        let n = self.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(p, q) in &self.edges {
            if Some(p) == removed || Some(q) == removed {
                continue;
            }
            let (a, b) = (find(&mut parent, p), find(&mut parent, q));
            parent[a] = b;
        }
        (0..n).filter(|&v| Some(v) != removed && find(&mut parent, v) == v).count()
    }

    /// A vertex whose removal increases the number of components.
    pub fn cut_vertex(&self) -> Option<Letter> {
        let base = self.components_without(None);
        (0..self.vertex_count())
            .find(|&v| self.components_without(Some(v)) > base)
            .map(|v| Letter::from_code(v as u8))
    }

    pub fn has_cut_vertex(&self) -> bool {
        self.cut_vertex().is_some()
    }

    /// A non-loop edge whose endpoints meet no other edge. A loop is never an
    /// isolated edge.
    pub fn has_isolated_edge(&self) -> bool {
        self.edges.iter().any(|&(p, q)| p != q && self.degree(p) == 1 && self.degree(q) == 1)
    }
}

/// A Whitehead automorphism of the second kind `(A, a)`: every letter `y`
/// other than `a^{±1}` becomes `[a^{-1}] y [a]`, with the prefix present when
/// `y^{-1} ∈ A` and the suffix when `y ∈ A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct WhiteheadMove {
    a: Letter,
    /// Bit `y.index()` set when `y ∈ A`.
    set: u64,
}

impl WhiteheadMove {
    fn all(rank: Rank) -> Vec<WhiteheadMove> {
        let size = rank.alphabet_size();
        let mut out = Vec::new();
        for a in rank.letters() {
            let others: Vec<usize> = (0..size).filter(|&i| i != a.index() && i != a.inverse().index()).collect();
            for mask in 0u64..(1 << others.len()) {
                let mut set = 1u64 << a.index();
                for (bit, &i) in others.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        set |= 1 << i;
                    }
                }
                out.push(WhiteheadMove { a, set });
            }
        }
        out
    }

    fn contains(&self, y: Letter) -> bool {
        self.set >> y.index() & 1 == 1
    }

    fn apply(&self, w: &ReducedWord) -> ReducedWord {
        let mut out = ReducedWord::identity();
        for &y in w.letters() {
            if y.generator() == self.a.generator() {
                out.push(y);
                continue;
            }
            if self.contains(y.inverse()) {
                out.push(self.a.inverse());
            }
            out.push(y);
            if self.contains(y) {
                out.push(self.a);
            }
        }
        out
    }
}

/// Whether `u` belongs to some free basis of `F_n`.
pub fn is_primitive(rank: Rank, u: &ReducedWord) -> bool {
    if !u.fits_rank(rank) {
        return false;
    }
    let moves = WhiteheadMove::all(rank);
    let mut w = u.cyclically_reduce();
    'descend: loop {
        if w.len() <= 1 {
            return w.len() == 1;
        }
        for m in &moves {
            let v = m.apply(&w).cyclically_reduce();
            if v.len() < w.len() {
                w = v;
                continue 'descend;
            }
        }
        return false;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveStrategy {
    Exhaustive,
    /// Closure of the generators under elementary automorphisms, restricted
    /// to words of length at most `k + slack`.
    OrbitBfs { slack: usize },
}

pub const DEFAULT_ORBIT_SLACK: usize = 2;
pub const ORBIT_BUDGET: usize = 20_000_000;
pub const EXHAUSTIVE_BUDGET: u128 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimitiveCountRow {
    pub n: usize,
    pub k: usize,
    pub count: u128,
    pub sphere_size: u128,
    pub ratio: f64,
    /// Reference lower bound: for `n = 2` the bound `(4/√3)√3^k` (odd `k`)
    /// or `(4/3)√3^k` (even `k`); otherwise `(2n-3)^k`.
    pub lower_bound_ref: f64,
    /// Reference upper bound `(2n-2)^k`.
    pub upper_bound_ref: f64,
}

impl PrimitiveCountRow {
    fn new(rank: Rank, k: usize, count: u128) -> Result<Self> {
        let sphere_size = sphere_size_u128(rank, k).ok_or_else(|| Error::Overflow(format!("sphere size at {k}")))?;
        let n = rank.get();
        let lower_bound_ref = if n == 2 {
            let s3 = 3f64.sqrt().powi(k as i32);
            if k % 2 == 1 { 4.0 / 3f64.sqrt() * s3 } else { 4.0 / 3.0 * s3 }
        } else {
            ((2 * n - 3) as f64).powi(k as i32)
        };
        Ok(PrimitiveCountRow {
            n,
            k,
            count,
            sphere_size,
            ratio: count as f64 / sphere_size as f64,
            lower_bound_ref,
            upper_bound_ref: ((2 * n - 2) as f64).powi(k as i32),
        })
    }

    /// Exact form of the two-generator lower bound: `P(2,k) > 4·3^{(k-1)/2}`
    /// for odd `k`, `P(2,k) > 4·3^{k/2-1}` for even `k ≥ 2`. `None` off rank
    /// two or at `k = 0`.
    pub fn exceeds_two_generator_bound(&self) -> Option<bool> {
        if self.n != 2 || self.k == 0 {
            return None;
        }
        let bound = if self.k % 2 == 1 { 4 * 3u128.pow((self.k as u32 - 1) / 2) } else { 4 * 3u128.pow(self.k as u32 / 2 - 1) };
        Some(self.count > bound)
    }
}

/// `P(n, k)`, the number of primitive elements of length `k`.
pub fn count_primitives(rank: Rank, k: usize, strategy: PrimitiveStrategy) -> Result<PrimitiveCountRow> {
    let count = match strategy {
        PrimitiveStrategy::Exhaustive => {
            let size = sphere_size_u128(rank, k).unwrap_or(u128::MAX);
            if size > EXHAUSTIVE_BUDGET {
                return Err(Error::budget(format!("enumerating C_{k}"), size as f64, EXHAUSTIVE_BUDGET as f64));
            }
            sphere_partitions(rank, k)
                .into_par_iter()
                .map(|first| {
                    let mut c = 0u128;
                    for_each_in_sphere(rank, k, first, |w| c += u128::from(is_primitive(rank, w)));
                    c
                })
                .sum()
        }
        PrimitiveStrategy::OrbitBfs { slack } => {
            let orbit = primitive_orbit(rank, k + slack, ORBIT_BUDGET)?;
            orbit.iter().filter(|w| w.len() == k).count() as u128
        }
    };
    PrimitiveCountRow::new(rank, k, count)
}

/// Rows for `k = 1..=k_max`.
/// The largest sphere is checked against the budget before any counting.
pub fn primitive_table(rank: Rank, k_max: usize, strategy: PrimitiveStrategy) -> Result<Vec<PrimitiveCountRow>> {
    let size = sphere_size_u128(rank, k_max).unwrap_or(u128::MAX);
    if strategy == PrimitiveStrategy::Exhaustive && size > EXHAUSTIVE_BUDGET {
        return Err(Error::budget(format!("enumerating C_{k_max}"), size as f64, EXHAUSTIVE_BUDGET as f64));
    }
    (1..=k_max).map(|k| count_primitives(rank, k, strategy)).collect()
}

/// CSV with columns `n,k,count,sphere_size,ratio,lower_bound_ref,upper_bound_ref`.
pub fn write_primitive_csv<W: Write>(rows: &[PrimitiveCountRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "k", "count", "sphere_size", "ratio", "lower_bound_ref", "upper_bound_ref"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.count.to_string(),
            r.sphere_size.to_string(),
            format!("{:e}", r.ratio),
            format!("{:e}", r.lower_bound_ref),
            format!("{:e}", r.upper_bound_ref),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Signed permutations of the generators: adjacent swaps and single
/// inversions, which generate them all.
fn type_one_moves(rank: Rank) -> Vec<Box<dyn Fn(Letter) -> Letter + Send + Sync>> {
    let mut out: Vec<Box<dyn Fn(Letter) -> Letter + Send + Sync>> = Vec::new();
    for i in 0..rank.get() {
        out.push(Box::new(move |l: Letter| if l.generator() == i { l.inverse() } else { l }));
        if i + 1 < rank.get() {
            out.push(Box::new(move |l: Letter| match l.generator() {
                g if g == i => Letter::new(i + 1, l.is_inverse()),
                g if g == i + 1 => Letter::new(i, l.is_inverse()),
                _ => l,
            }));
        }
    }
    out
}

/// Every primitive word of length at most `max_len` reachable from `a`
/// through elementary automorphisms without leaving that length range.
pub fn primitive_orbit(rank: Rank, max_len: usize, budget: usize) -> Result<HashSet<ReducedWord>> {
    let moves = WhiteheadMove::all(rank);
    let perms = type_one_moves(rank);
    let start = ReducedWord::generator(0);
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(w) = queue.pop_front() {
        let images = moves.iter().map(|m| m.apply(&w)).chain(perms.iter().map(|p| {
            ReducedWord::new(w.letters().iter().map(|&l| p(l)).collect()).expect("letter maps preserve reducedness")
        }));
        for v in images {
            if v.len() <= max_len && !seen.contains(&v) {
                if seen.len() >= budget {
                    return Err(Error::budget("primitive orbit", (budget + 1) as f64, budget as f64));
                }
                seen.insert(v.clone());
                queue.push_back(v);
            }
        }
    }
    Ok(seen)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralReport {
    pub n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub primitives_checked: u64,
    /// Primitives whose cyclic reduction, with the external edge, has neither
    /// a cut vertex nor an isolated edge.
    pub counterexamples_cyclic_external: Vec<String>,
    /// Same test on the word itself without the external edge.
    pub counterexamples_plain: Vec<String>,
}

/// Checks that every primitive `u` with `k_min <= |u| <= k_max` has a
/// Whitehead graph with a cut vertex or an isolated edge, under both edge
/// conventions.
pub fn structural_check(rank: Rank, k_min: usize, k_max: usize) -> Result<StructuralReport> {
    let mut checked = 0u64;
    let mut cyc = Vec::new();
    let mut plain = Vec::new();
    for k in k_min..=k_max {
        let size = sphere_size_u128(rank, k).unwrap_or(u128::MAX);
        if size > EXHAUSTIVE_BUDGET {
            return Err(Error::budget(format!("enumerating C_{k}"), size as f64, EXHAUSTIVE_BUDGET as f64));
        }
        let parts: Vec<(u64, Vec<String>, Vec<String>)> = sphere_partitions(rank, k)
            .into_par_iter()
            .map(|first| {
                let (mut n, mut c, mut p) = (0u64, Vec::new(), Vec::new());
                for_each_in_sphere(rank, k, first, |w| {
                    if !is_primitive(rank, w) {
                        return;
                    }
                    n += 1;
                    let ok = |g: WhiteheadGraph| g.has_cut_vertex() || g.has_isolated_edge();
                    if !ok(WhiteheadGraph::new(rank, &w.cyclically_reduce(), true)) {
                        c.push(w.to_string());
                    }
                    if !ok(WhiteheadGraph::new(rank, w, false)) {
                        p.push(w.to_string());
                    }
                });
                (n, c, p)
            })
            .collect();
        for (n, c, p) in parts {
            checked += n;
            cyc.extend(c);
            plain.extend(p);
        }
    }
    Ok(StructuralReport {
        n: rank.get(),
        k_min,
        k_max,
        primitives_checked: checked,
        counterexamples_cyclic_external: cyc,
        counterexamples_plain: plain,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub rows: Vec<PrimitiveCountRow>,
    /// `min_k P(n,k) / (2n-3)^k`.
    pub c1: f64,
    /// `max_k P(n,k) / (2n-2)^k`.
    pub c2: f64,
    /// `max_k ρ_k / ((2n-2)/(2n-1))^k`.
    pub density_constant: f64,
    pub lower_ratios: Vec<f64>,
    pub upper_ratios: Vec<f64>,
    pub holds: bool,
}

/// Fits the constants of `c1 (2n-3)^k <= P(n,k) <= c2 (2n-2)^k` over
/// `k_min..=k_max`. Needs rank at least three.
pub fn primitive_bounds_check(rank: Rank, k_min: usize, k_max: usize) -> Result<BoundsReport> {
    let n = rank.get();
    if n < 3 {
        return Err(Error::Precondition("the exponential bounds are stated for rank at least 3".into()));
    }
    if k_min == 0 || k_max < k_min {
        return Err(Error::Precondition(format!("bad range {k_min}..={k_max}")));
    }
    let rows = (k_min..=k_max)
        .map(|k| count_primitives(rank, k, PrimitiveStrategy::Exhaustive))
        .collect::<Result<Vec<_>>>()?;
    let lower_ratios: Vec<f64> =
        rows.iter().map(|r| r.count as f64 / ((2 * n - 3) as f64).powi(r.k as i32)).collect();
    let upper_ratios: Vec<f64> = rows.iter().map(|r| r.count as f64 / r.upper_bound_ref).collect();
    let q = (2 * n - 2) as f64 / (2 * n - 1) as f64;
    let density_constant = rows.iter().map(|r| r.ratio / q.powi(r.k as i32)).fold(0.0, f64::max);
    let c1 = lower_ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = upper_ratios.iter().copied().fold(0.0, f64::max);
    let holds = c1 > 0.0 && c2.is_finite();
    Ok(BoundsReport { n, rows, c1, c2, density_constant, lower_ratios, upper_ratios, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: usize) -> Rank {
        Rank::new(n).unwrap()
    }

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn idx(c: char) -> usize {
        Letter::from_char(c).unwrap().index()
    }

    #[test]
    fn graph_edges() {
        let g = WhiteheadGraph::new(r(2), &w("ab"), false);
        assert_eq!(g.edges(), &[(idx('a'), idx('B'))]);
        let g = WhiteheadGraph::new(r(2), &w("ab"), true);
        assert_eq!(g.edges().len(), 2);
        assert!(g.edges().contains(&(idx('A'), idx('b'))));
        assert!(WhiteheadGraph::new(r(2), &w("a"), false).edges().is_empty());
        assert_eq!(WhiteheadGraph::new(r(3), &w("abcab"), true).edges().len(), 5);
    }

    #[test]
    fn cut_vertices() {
        let path = WhiteheadGraph::from_edges(r(2), &[(idx('a'), idx('b')), (idx('b'), idx('A'))]);
        assert_eq!(path.cut_vertex(), Letter::from_char('b'));
        let single = WhiteheadGraph::from_edges(r(2), &[(idx('a'), idx('b'))]);
        assert!(!single.has_cut_vertex());
        assert!(!WhiteheadGraph::from_edges(r(2), &[]).has_cut_vertex());
    }

    #[test]
    fn isolated_edges() {
        assert!(WhiteheadGraph::new(r(2), &w("ab"), false).has_isolated_edge());
        let k4: Vec<(usize, usize)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
        assert!(!WhiteheadGraph::from_edges(r(2), &k4).has_isolated_edge());
        let lp = WhiteheadGraph::from_edges(r(2), &[(0, 0)]);
        assert_eq!(lp.degree(0), 2);
        assert!(!lp.has_isolated_edge());
    }

    #[test]
    fn primitivity_examples() {
        let two = r(2);
        assert!(is_primitive(two, &w("a")));
        assert!(!is_primitive(two, &w("aa")));
        assert!(is_primitive(two, &w("abA")));
        assert!(!is_primitive(two, &w("abAB")));
        assert!(!is_primitive(two, &w("")));
        assert!(is_primitive(two, &w("aab")));
        assert!(!is_primitive(two, &w("aabb")));
        assert!(!is_primitive(two, &w("c")));
    }

    #[test]
    fn small_counts() {
        let two = r(2);
        assert_eq!(count_primitives(two, 1, PrimitiveStrategy::Exhaustive).unwrap().count, 4);
        assert_eq!(count_primitives(two, 2, PrimitiveStrategy::Exhaustive).unwrap().count, 8);
        assert!(count_primitives(two, 3, PrimitiveStrategy::Exhaustive).unwrap().count > 12);
    }

    #[test]
    fn strategies_agree() {
        for k in 1..=6 {
            let ex = count_primitives(r(2), k, PrimitiveStrategy::Exhaustive).unwrap();
            let bfs = count_primitives(r(2), k, PrimitiveStrategy::OrbitBfs { slack: DEFAULT_ORBIT_SLACK }).unwrap();
            assert_eq!(ex.count, bfs.count, "k={k}");
        }
        for k in 1..=4 {
            let ex = count_primitives(r(3), k, PrimitiveStrategy::Exhaustive).unwrap();
            let bfs = count_primitives(r(3), k, PrimitiveStrategy::OrbitBfs { slack: DEFAULT_ORBIT_SLACK }).unwrap();
            assert_eq!(ex.count, bfs.count, "k={k}");
        }
    }

    #[test]
    fn invariance_under_conjugation_and_inversion() {
        let two = r(2);
        for k in 1..=5 {
            for_each_in_sphere(two, k, None, |u| {
                let p = is_primitive(two, u);
                assert_eq!(p, is_primitive(two, &u.inverse()), "{u}");
                for h in ["a", "B", "ab"] {
                    assert_eq!(p, is_primitive(two, &u.conjugate_by(&w(h))), "{u} by {h}");
                }
            });
        }
    }

    #[test]
    fn bounds_need_rank_three() {
        assert!(primitive_bounds_check(r(2), 1, 4).is_err());
        let rep = primitive_bounds_check(r(3), 1, 3).unwrap();
        assert!(rep.holds && rep.c1 > 0.0);
    }

    #[test]
    fn exact_two_generator_bound() {
        let row = count_primitives(r(2), 1, PrimitiveStrategy::Exhaustive).unwrap();
        // P(2,1) = 4 meets the bound with equality.
        assert_eq!(row.exceeds_two_generator_bound(), Some(false));
        let row = count_primitives(r(2), 3, PrimitiveStrategy::Exhaustive).unwrap();
        assert_eq!(row.exceeds_two_generator_bound(), Some(true));
    }
}

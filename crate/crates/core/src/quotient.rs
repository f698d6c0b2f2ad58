//! Finite quotients `F_n → G` and the measures they inherit.
//!
//! Elements of `G` are indexed `0..m` with `0` the identity, in the order a
//! breadth-first search from the identity discovers them (letters tried in
//! the order a, A, b, B, ...). Generators act on the right: the image of a
//! word is the product of its letter images read left to right, and the
//! Cayley neighbours of `g` are `g·x` for the `2n` letters `x`.

use std::collections::HashMap;

use serde::Serialize;

use crate::density::Density;
use crate::fit::{fit_line, LineFit};
use crate::word::{sphere_size_u128, Letter, Rank, ReducedWord};
use crate::{Error, Result};

pub const MAX_ORDER: usize = 100_000;
pub const MAX_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteQuotient {
    rank: Rank,
    order: usize,
    label: String,
    /// `action[g * 2n + x.index()] = g·x`.
    action: Vec<u32>,
}

impl FiniteQuotient {
    /// The group generated by permutations of `0..points`; `generators[i]`
    /// lists the image of every point under generator `i`.
    pub fn from_permutations(rank: Rank, generators: &[Vec<u32>], label: impl Into<String>) -> Result<Self> {
        if generators.len() != rank.get() {
            return Err(Error::Precondition(format!("{} generator images for rank {rank}", generators.len())));
        }
        let points = generators.first().map_or(0, |g| g.len());
        if points == 0 || points > MAX_POINTS {
            return Err(Error::Precondition(format!("permutation degree {points} outside 1..={MAX_POINTS}")));
        }
        let mut letter_perms = Vec::with_capacity(rank.alphabet_size());
        for (i, g) in generators.iter().enumerate() {
            if g.len() != points {
                return Err(Error::Precondition(format!("generator {i} acts on {} points, expected {points}", g.len())));
            }
            let mut inv = vec![u32::MAX; points];
            for (x, &y) in g.iter().enumerate() {
                if y as usize >= points || inv[y as usize] != u32::MAX {
                    return Err(Error::Precondition(format!("generator {i} is not a permutation")));
                }
                inv[y as usize] = x as u32;
            }
            letter_perms.push(g.clone());
            letter_perms.push(inv);
        }

        let identity: Vec<u32> = (0..points as u32).collect();
        let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut elements = vec![identity.clone()];
        index.insert(identity, 0);
        let mut action = Vec::new();
        let mut head = 0;
        while head < elements.len() {
            let e = elements[head].clone();
            for perm in &letter_perms {
                // Right action: first e, then the letter.
                let prod: Vec<u32> = e.iter().map(|&x| perm[x as usize]).collect();
                let next = match index.get(&prod) {
                    Some(&i) => i,
                    None => {
                        let i = elements.len() as u32;
                        if elements.len() >= MAX_ORDER {
                            return Err(Error::budget("quotient group order", (MAX_ORDER + 1) as f64, MAX_ORDER as f64));
                        }
                        index.insert(prod.clone(), i);
                        elements.push(prod);
                        i
                    }
                };
                action.push(next);
            }
            head += 1;
        }
        Ok(FiniteQuotient { rank, order: elements.len(), label: label.into(), action })
    }

    /// A group given by its multiplication table (`table[g][h] = g·h`, element
    /// `0` the identity) and the element images of the generators. Elements
    /// outside the subgroup the images generate are dropped and the rest are
    /// reindexed in search order.
    pub fn from_table(rank: Rank, table: &[Vec<usize>], images: &[usize], label: impl Into<String>) -> Result<Self> {
        let m = table.len();
        if m == 0 || m > MAX_ORDER {
            return Err(Error::Precondition(format!("table order {m} outside 1..={MAX_ORDER}")));
        }
        if images.len() != rank.get() {
            return Err(Error::Precondition(format!("{} generator images for rank {rank}", images.len())));
        }
        for (g, row) in table.iter().enumerate() {
            if row.len() != m || row.iter().any(|&h| h >= m) {
                return Err(Error::Precondition(format!("table row {g} is malformed")));
            }
            if row[0] != g || table[0][g] != g {
                return Err(Error::Precondition("element 0 is not the identity".into()));
            }
        }
        if m <= 400 {
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        if table[table[a][b]][c] != table[a][table[b][c]] {
                            return Err(Error::Precondition(format!("table is not associative at ({a},{b},{c})")));
                        }
                    }
                }
            }
        }
        let inverse = |g: usize| (0..m).find(|&h| table[g][h] == 0);
        let mut letter_images = Vec::with_capacity(rank.alphabet_size());
        for &g in images {
            if g >= m {
                return Err(Error::Precondition(format!("generator image {g} outside the table")));
            }
            let inv = inverse(g).ok_or_else(|| Error::Precondition(format!("element {g} has no inverse")))?;
            letter_images.push(g);
            letter_images.push(inv);
        }
        let mut reindex = vec![u32::MAX; m];
        let mut elements = vec![0usize];
        reindex[0] = 0;
        let mut raw_action = Vec::new();
        let mut head = 0;
        while head < elements.len() {
            let e = elements[head];
            for &x in &letter_images {
                let p = table[e][x];
                if reindex[p] == u32::MAX {
                    reindex[p] = elements.len() as u32;
                    elements.push(p);
                }
                raw_action.push(reindex[p]);
            }
            head += 1;
        }
        Ok(FiniteQuotient { rank, order: elements.len(), label: label.into(), action: raw_action })
    }

    /// `Z/m` with generator `i` sent to the residue `images[i]`.
    pub fn cyclic(rank: Rank, m: usize, images: &[usize]) -> Result<Self> {
        if m == 0 {
            return Err(Error::Precondition("cyclic group of order 0".into()));
        }
        let table: Vec<Vec<usize>> = (0..m).map(|g| (0..m).map(|h| (g + h) % m).collect()).collect();
        let imgs: Vec<usize> = images.iter().map(|x| x % m).collect();
        let labels: Vec<String> = imgs.iter().map(|x| x.to_string()).collect();
        Self::from_table(rank, &table, &imgs, format!("Z/{m}[{}]", labels.join(",")))
    }

    pub fn trivial(rank: Rank) -> Self {
        FiniteQuotient { rank, order: 1, label: "1".into(), action: vec![0; rank.alphabet_size()] }
    }

    /// Parses the text quotient format; see the crate README for examples.
    pub fn parse(text: &str) -> Result<Self> {
        parse_quotient(text)
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `g·x`.
    #[inline]
    pub fn act(&self, g: u32, x: Letter) -> u32 {
        self.action[g as usize * self.rank.alphabet_size() + x.index()]
    }

    pub fn image(&self, w: &ReducedWord) -> u32 {
        w.letters().iter().fold(0, |g, &x| self.act(g, x))
    }

    /// Number of `(element, last letter)` transfer states.
    pub fn transfer_states(&self) -> usize {
        self.order * self.rank.alphabet_size()
    }
}

fn parse_cycles(s: &str, points: usize) -> Result<Vec<u32>> {
    let bad = |m: &str| Error::Parse(format!("permutation {s:?}: {m}"));
    let mut perm: Vec<u32> = (0..points as u32).collect();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(|| bad("expected '('"))?;
        let close = open.find(')').ok_or_else(|| bad("missing ')'"))?;
        let cycle = open[..close]
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| match t.parse::<usize>() {
                Ok(p) if (1..=points).contains(&p) => Ok(p - 1),
                _ => Err(bad("points are 1-based integers within range")),
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, &p) in cycle.iter().enumerate() {
            let q = cycle[(i + 1) % cycle.len()];
            if perm[p] != p as u32 {
                return Err(bad("cycles must be disjoint"));
            }
            perm[p] = q as u32;
        }
        rest = open[close + 1..].trim_start();
    }
    let mut seen = vec![false; points];
    for &p in &perm {
        if std::mem::replace(&mut seen[p as usize], true) {
            return Err(bad("cycles must be disjoint"));
        }
    }
    Ok(perm)
}

fn parse_quotient(text: &str) -> Result<FiniteQuotient> {
    let mut rank = None;
    let mut points = None;
    let mut gens: Vec<(usize, String)> = Vec::new();
    let mut table: Option<Vec<Vec<usize>>> = None;
    let mut in_table = false;
    let mut label = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::Parse(format!("line {}: {m}", lineno + 1));
        if in_table && !line.contains('=') {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad table entry {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            table.as_mut().expect("table started").push(row);
            continue;
        }
        in_table = false;
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(g) = key.strip_prefix("gen ") {
            let g = g.trim();
            let l = match g.chars().collect::<Vec<_>>().as_slice() {
                [c] => Letter::from_char(*c).filter(|l| !l.is_inverse()),
                _ => None,
            };
            let l = l.ok_or_else(|| err(format!("bad generator name {g:?}")))?;
            if gens.iter().any(|(i, _)| *i == l.generator()) {
                return Err(err(format!("generator {g} given twice")));
            }
            gens.push((l.generator(), value.to_string()));
            continue;
        }
        match key {
            "n" => rank = Some(Rank::new(value.parse().map_err(|_| err("bad rank".into()))?)?),
            "points" => points = Some(value.parse::<usize>().map_err(|_| err("bad point count".into()))?),
            "name" => label = Some(value.to_string()),
            "table" => {
                if !value.is_empty() {
                    return Err(err("table rows start on the next line".into()));
                }
                table = Some(Vec::new());
                in_table = true;
            }
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    let rank = rank.ok_or_else(|| Error::Parse("missing n = <rank>".into()))?;
    gens.sort_by_key(|(i, _)| *i);
    if gens.len() != rank.get() || gens.iter().enumerate().any(|(j, (i, _))| *i != j) {
        return Err(Error::Parse(format!("need exactly one gen line for each of the {rank} generators")));
    }
    match (points, table) {
        (Some(p), None) => {
            let perms = gens.iter().map(|(_, v)| parse_cycles(v, p)).collect::<Result<Vec<_>>>()?;
            let label = label.unwrap_or_else(|| format!("perm{p}"));
            FiniteQuotient::from_permutations(rank, &perms, label)
        }
        (None, Some(t)) => {
            let images = gens
                .iter()
                .map(|(_, v)| v.parse::<usize>().map_err(|_| Error::Parse(format!("bad element index {v:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let label = label.unwrap_or_else(|| format!("table{}", t.len()));
            FiniteQuotient::from_table(rank, &t, &images, label)
        }
        _ => Err(Error::Parse("give exactly one of points = <degree> or table =".into())),
    }
}

/// A probability vector on the elements of a finite quotient.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct GroupDistribution(pub Vec<f64>);

impl GroupDistribution {
    pub fn point_mass(order: usize, g: usize) -> Self {
        let mut v = vec![0.0; order];
        v[g] = 1.0;
        GroupDistribution(v)
    }

    pub fn uniform(order: usize) -> Self {
        GroupDistribution(vec![1.0 / order as f64; order])
    }

    pub fn masses(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Total variation distance to the uniform distribution.
    pub fn tv_to_uniform(&self) -> f64 {
        let u = 1.0 / self.0.len() as f64;
        0.5 * self.0.iter().map(|p| (p - u).abs()).sum::<f64>()
    }

    /// Euclidean distance to the uniform distribution.
    pub fn euclidean_to_uniform(&self) -> f64 {
        let u = 1.0 / self.0.len() as f64;
        self.0.iter().map(|p| (p - u).powi(2)).sum::<f64>().sqrt()
    }
}

/// Half the L1 distance.
pub fn tv_distance(p: &GroupDistribution, q: &GroupDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { left: p.len(), right: q.len() });
    }
    Ok(0.5 * p.0.iter().zip(&q.0).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Exact counts `|{w ∈ C_k : w̄ = g}|` for every `g`, by the
/// non-backtracking transfer on `(element, last letter)`.
pub fn sphere_pushforward_counts(q: &FiniteQuotient, k: usize) -> Result<Vec<u128>> {
    let a = q.rank.alphabet_size();
    let mut out = vec![0u128; q.order];
    if k == 0 {
        out[0] = 1;
        return Ok(out);
    }
    let overflow = || Error::Overflow(format!("sphere counts at length {k}"));
    let mut state = vec![0u128; q.transfer_states()];
    for x in q.rank.letters() {
        state[q.act(0, x) as usize * a + x.index()] += 1;
    }
    for _ in 1..k {
        let mut next = vec![0u128; state.len()];
        for (s, &c) in state.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (g, last) = ((s / a) as u32, Letter::from_code((s % a) as u8));
            for x in q.rank.letters() {
                if x == last.inverse() {
                    continue;
                }
                let t = q.act(g, x) as usize * a + x.index();
                next[t] = next[t].checked_add(c).ok_or_else(overflow)?;
            }
        }
        state = next;
    }
    for (s, &c) in state.iter().enumerate() {
        out[s / a] = out[s / a].checked_add(c).ok_or_else(overflow)?;
    }
    Ok(out)
}

/// Images of the uniform distributions on `C_0, ..., C_{k_max}`.
pub fn sphere_pushforwards(q: &FiniteQuotient, k_max: usize) -> Vec<GroupDistribution> {
    let a = q.rank.alphabet_size();
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(GroupDistribution::point_mass(q.order, 0));
    if k_max == 0 {
        return out;
    }
    let mut state = vec![0.0f64; q.transfer_states()];
    for x in q.rank.letters() {
        state[q.act(0, x) as usize * a + x.index()] += 1.0 / a as f64;
    }
    let collapse = |state: &[f64]| {
        let mut d = vec![0.0; q.order];
        for (s, &p) in state.iter().enumerate() {
            d[s / a] += p;
        }
        GroupDistribution(d)
    };
    out.push(collapse(&state));
    let share = 1.0 / (a - 1).max(1) as f64;
    for _ in 2..=k_max {
        let mut next = vec![0.0f64; state.len()];
        for (s, &p) in state.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (g, last) = ((s / a) as u32, Letter::from_code((s % a) as u8));
            for x in q.rank.letters() {
                if x != last.inverse() {
                    next[q.act(g, x) as usize * a + x.index()] += p * share;
                }
            }
        }
        state = next;
        out.push(collapse(&state));
    }
    out
}

/// Image of the uniform distribution on `C_k`.
pub fn sphere_pushforward(q: &FiniteQuotient, k: usize) -> GroupDistribution {
    sphere_pushforwards(q, k).pop().expect("at least one sphere")
}

/// One step of the simple random walk: `τ(p)(g·x) += p(g)/2n`.
pub fn simple_walk_step(q: &FiniteQuotient, p: &GroupDistribution) -> GroupDistribution {
    let share = 1.0 / q.rank.alphabet_size() as f64;
    let mut next = vec![0.0; q.order];
    for (g, &m) in p.0.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        for x in q.rank.letters() {
            next[q.act(g as u32, x) as usize] += m * share;
        }
    }
    GroupDistribution(next)
}

/// `τ^steps(E_1)`.
pub fn simple_walk_operator(q: &FiniteQuotient, steps: usize) -> GroupDistribution {
    let mut p = GroupDistribution::point_mass(q.order, 0);
    for _ in 0..steps {
        p = simple_walk_step(q, &p);
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkOperator {
    /// `τ`: uniform step to one of the `2n` Cayley neighbours.
    Simple,
    /// The law of uniform reduced words: never undo the last letter.
    NonBacktracking,
}

impl WalkOperator {
    /// Distributions after `0..=steps` steps from the identity.
    pub fn trajectory(self, q: &FiniteQuotient, steps: usize) -> Vec<GroupDistribution> {
        match self {
            WalkOperator::NonBacktracking => sphere_pushforwards(q, steps),
            WalkOperator::Simple => {
                let mut out = vec![GroupDistribution::point_mass(q.order, 0)];
                for i in 0..steps {
                    out.push(simple_walk_step(q, &out[i]));
                }
                out
            }
        }
    }
}

impl std::str::FromStr for WalkOperator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(WalkOperator::Simple),
            "non-backtracking" => Ok(WalkOperator::NonBacktracking),
            _ => Err(Error::Parse(format!("unknown operator {s:?}"))),
        }
    }
}

pub const MIXING_THRESHOLD: f64 = 0.367_879_441_171_442_33;

/// Least `l` with TV(P_l, U) below `threshold`, searching up to `cap` steps.
pub fn mixing_time(q: &FiniteQuotient, op: WalkOperator, threshold: f64, cap: usize) -> Result<usize> {
    let traj = op.trajectory(q, cap);
    traj.iter()
        .position(|p| p.tv_to_uniform() < threshold)
        .ok_or_else(|| Error::NoMixing { cap, last_distance: traj.last().map_or(1.0, |p| p.tv_to_uniform()) })
}

/// `μ̄_l` restricted to `k ≤ depth`, with the bound on what the cut-off
/// spheres can add to any one entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedMeasure {
    pub l: usize,
    pub depth: usize,
    pub distribution: GroupDistribution,
    pub error_bound: f64,
    pub tv_to_uniform: f64,
}

pub fn induced_truncated_measure(q: &FiniteQuotient, d: &Density, l: usize, depth: usize) -> Result<TruncatedMeasure> {
    let spheres = sphere_pushforwards(q, depth.max(l));
    truncated_from_spheres(&spheres, d, l, depth)
}

fn truncated_from_spheres(spheres: &[GroupDistribution], d: &Density, l: usize, depth: usize) -> Result<TruncatedMeasure> {
    if depth < l {
        return Err(Error::Precondition(format!("depth {depth} is below l = {l}")));
    }
    let tail = d.tail_mass(l);
    if tail <= 0.0 {
        return Err(Error::Precondition(format!("{} puts no mass on lengths ≥ {l}", d.spec())));
    }
    let m = spheres[0].len();
    let mut acc = vec![0.0; m];
    for (k, sphere) in spheres.iter().enumerate().take(depth + 1).skip(l) {
        let w = d.eval(k);
        if w == 0.0 {
            continue;
        }
        for (a, p) in acc.iter_mut().zip(&sphere.0) {
            *a += w * p;
        }
    }
    acc.iter_mut().for_each(|a| *a /= tail);
    let distribution = GroupDistribution(acc);
    Ok(TruncatedMeasure {
        l,
        depth,
        tv_to_uniform: distribution.tv_to_uniform(),
        distribution,
        error_bound: d.tail_mass(depth + 1) / tail,
    })
}

/// Smallest depth `≥ l` whose cut-off tail is negligible relative to
/// `tail_mass(l)`, capped at `l + max_extra`.
fn depth_for(d: &Density, l: usize, rel: f64, max_extra: usize) -> usize {
    let tail = d.tail_mass(l);
    let mut depth = l;
    while depth < l + max_extra && d.tail_mass(depth + 1) > rel * tail {
        depth += 1;
    }
    depth
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1StarPoint {
    pub k: usize,
    pub l: usize,
    pub tv: f64,
    pub error_bound: f64,
    pub used_in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1StarReport {
    pub quotient: String,
    pub order: usize,
    pub density: String,
    pub l0: usize,
    pub l0_source: String,
    pub points: Vec<C1StarPoint>,
    pub fit: Option<LineFit>,
    pub min_r_squared: f64,
    pub pass: bool,
}

/// Points with TV below this are treated as floating-point floor.
pub const TV_FLOOR: f64 = 1e-12;

/// Fits `ln TV(μ̄_{k·l0}, U)` against `k = 1..=k_count`. `l0 = None` uses the
/// mixing time of the simple walk.
pub fn check_c1star(q: &FiniteQuotient, d: &Density, l0: Option<usize>, k_count: usize) -> Result<C1StarReport> {
    if !d.positive_infinitely_often() {
        return Err(Error::Precondition(format!(
            "{} is positive at only finitely many lengths; the criterion needs d(k) > 0 infinitely often",
            d.spec()
        )));
    }
    let (l0, l0_source) = match l0 {
        Some(l) if l > 0 => (l, "given".to_string()),
        Some(_) => return Err(Error::Precondition("l0 must be positive".into())),
        None => (mixing_time(q, WalkOperator::Simple, MIXING_THRESHOLD, 10_000)?.max(1), "simple-walk mixing time".into()),
    };
    let l_max = k_count * l0;
    let depth_max = depth_for(d, l_max, 1e-16, 4000);
    let spheres = sphere_pushforwards(q, depth_max);
    let mut points = Vec::with_capacity(k_count);
    for k in 1..=k_count {
        let l = k * l0;
        let depth = depth_for(d, l, 1e-16, 4000).min(depth_max);
        let tm = truncated_from_spheres(&spheres, d, l, depth)?;
        let used = tm.tv_to_uniform > TV_FLOOR && tm.tv_to_uniform > 10.0 * tm.error_bound;
        points.push(C1StarPoint { k, l, tv: tm.tv_to_uniform, error_bound: tm.error_bound, used_in_fit: used });
    }
    // Fit the leading run above the floor.
    let fit_pts: Vec<(f64, f64)> =
        points.iter().take_while(|p| p.used_in_fit).map(|p| (p.k as f64, p.tv.ln())).collect();
    for p in points.iter_mut().skip(fit_pts.len()) {
        p.used_in_fit = false;
    }
    let min_r_squared = 0.98;
    let fit = fit_line(&fit_pts, 3).ok();
    let pass = fit.is_some_and(|f| f.slope < 0.0 && f.r_squared >= min_r_squared);
    Ok(C1StarReport {
        quotient: q.label.clone(),
        order: q.order,
        density: d.spec().to_string(),
        l0,
        l0_source,
        points,
        fit,
        min_r_squared,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub l: usize,
    /// TV of `μ̄_l` built from the true sphere images.
    pub tv_sphere_measure: f64,
    /// TV of the simple-walk mixture `Σ_{k≥l} d(k) τ^k(E_1)`
    /// normalized.
    pub tv_simple_mixture: f64,
    /// TV of `τ^l(E_1)`.
    pub tv_simple_walk: f64,
    pub sphere_measure_bounded: bool,
    pub simple_mixture_bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionFailure {
    pub element: usize,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub quotient: String,
    pub order: usize,
    pub density: String,
    pub monotonicity_steps: usize,
    pub monotone: bool,
    /// `(element, step)` pairs where TV(τ^{k+1}(E_g)) exceeded TV(τ^k(E_g)).
    pub monotonicity_violations: Vec<(usize, usize)>,
    /// Elements where `τ` fails to shrink the Euclidean distance to `U`.
    pub euclidean_contraction_failures: Vec<ContractionFailure>,
    pub rows: Vec<ProbeRow>,
}

const PROBE_SLACK: f64 = 1e-12;

/// Evaluates the inequalities of the finite-quotient convergence argument
/// numerically, each side computed exactly.
pub fn operator_inequality_probe(q: &FiniteQuotient, d: &Density, l_max: usize, steps: usize) -> Result<ProbeReport> {
    let m = q.order;
    let mut violations = Vec::new();
    let mut contraction = Vec::new();
    for g in 0..m {
        let mut p = GroupDistribution::point_mass(m, g);
        let before_e = p.euclidean_to_uniform();
        let mut prev = p.tv_to_uniform();
        for k in 0..steps {
            p = simple_walk_step(q, &p);
            if k == 0 {
                let after_e = p.euclidean_to_uniform();
                if m > 1 && after_e >= before_e - PROBE_SLACK {
                    contraction.push(ContractionFailure { element: g, before: before_e, after: after_e });
                }
            }
            let tv = p.tv_to_uniform();
            if tv > prev + PROBE_SLACK {
                violations.push((g, k));
            }
            prev = tv;
        }
    }

    let depth_max = depth_for(d, l_max, 1e-16, 4000);
    let spheres = sphere_pushforwards(q, depth_max);
    let simple = WalkOperator::Simple.trajectory(q, depth_max);
    let mut rows = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        if d.tail_mass(l) <= 0.0 {
            break;
        }
        let depth = depth_for(d, l, 1e-16, 4000).min(depth_max);
        let sphere_tv = truncated_from_spheres(&spheres, d, l, depth)?.tv_to_uniform;
        let mixture_tv = truncated_from_spheres(&simple, d, l, depth)?.tv_to_uniform;
        let walk_tv = simple[l].tv_to_uniform();
        rows.push(ProbeRow {
            l,
            tv_sphere_measure: sphere_tv,
            tv_simple_mixture: mixture_tv,
            tv_simple_walk: walk_tv,
            sphere_measure_bounded: sphere_tv <= walk_tv + PROBE_SLACK,
            simple_mixture_bounded: mixture_tv <= walk_tv + PROBE_SLACK,
        });
    }
    Ok(ProbeReport {
        quotient: q.label.clone(),
        order: m,
        density: d.spec().to_string(),
        monotonicity_steps: steps,
        monotone: violations.is_empty(),
        monotonicity_violations: violations,
        euclidean_contraction_failures: contraction,
        rows,
    })
}

/// Integer check: sphere image counts sum to `|C_k|`.
pub fn sphere_counts_consistent(q: &FiniteQuotient, k: usize) -> Result<bool> {
    let counts = sphere_pushforward_counts(q, k)?;
    let total = counts.iter().try_fold(0u128, |a, &c| a.checked_add(c));
    Ok(total.is_some() && total == sphere_size_u128(q.rank, k))
}

/// The symmetric group on three points with `a ↦ (1 2)`, `b ↦ (1 2 3)`.
pub fn s3_example() -> FiniteQuotient {
    FiniteQuotient::parse("n = 2\npoints = 3\nname = S3\ngen a = (1 2)\ngen b = (1 2 3)\n").expect("valid S3 spec")
}

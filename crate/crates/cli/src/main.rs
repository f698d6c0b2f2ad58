use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use freestat::asymptotics::write_series_csv;
use freestat::measure::{degree_of_growth, geometric_grid, mu_infinity, SphereAverage};
use freestat::predicate::parse_predicate;
use freestat::quotient::{
    check_c1star, operator_inequality_probe, s3_example, simple_walk_step, sphere_pushforward, C1StarReport,
    ProbeReport,
};
use freestat::walks::{
    exact_pushforward, geodesic_length_stats, random_length_pushforward, reflected_walk, reflected_walk_exact,
    GeodesicStats, ReflectedWalkStats, DEFAULT_STATE_CAP,
};
use freestat::whitehead::{
    primitive_bounds_check, primitive_table, structural_check, write_primitive_csv, BoundsReport, PrimitiveCountRow,
    PrimitiveStrategy, StructuralReport, DEFAULT_ORBIT_SLACK,
};
use freestat::word::{enumerate_sphere, sphere_size};
use freestat::{
    density_verdict, frequency_series, growth_rate, sharp_exponent_fit, stolz_check, AtomicMeasure, CountingStrategy,
    Density, DensitySpec, DensityVerdict, Error, FiniteQuotient, GroupDistribution, MeasureResult, Rank, ReducedWord,
    SeriesKind, WalkOperator,
};

#[derive(Parser)]
#[command(name = "freestat", version, about = "Measures, densities and random walks on free groups")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sphere sizes |C_k| for each rank, optionally checked by enumeration.
    Spheres(SpheresArgs),
    /// μ(S) for each density, with the truncation error.
    MeasureSet(MeasureSetArgs),
    /// Expected word length for each density.
    MeanLength(MeanLengthArgs),
    /// Limit of μ_λ(S) as λ → 0 along a halving grid.
    MuInfinity(MuInfinityArgs),
    /// Degree of polynomial growth of |w|^m on average.
    Degree(DegreeArgs),
    /// Spherical or disc frequency series (CSV).
    DensitySeries(DensitySeriesArgs),
    /// Compares spherical and disc limits.
    Stolz(StolzArgs),
    /// Growth rate of the disc frequencies.
    GrowthRate(GrowthRateArgs),
    /// Log-log slope of the commutator subgroup's spherical frequencies.
    SharpFit(SharpFitArgs),
    /// Exact counts of primitive elements per sphere (CSV).
    Primitives(PrimitivesArgs),
    /// Whitehead-graph structure of primitives, or their growth bounds.
    WhiteheadCheck(WhiteheadCheckArgs),
    /// Monte Carlo geodesic length of simple random walks.
    Walk(WalkArgs),
    /// Exact pushforward of the simple random walk to F_n (CSV).
    Pushforward(PushforwardArgs),
    /// Mixing report on a finite quotient.
    QuotientMix(QuotientMixArgs),
    /// Exponential-decay check of the induced measures on a quotient.
    C1starCheck(C1StarArgs),
    /// Numerical check of the operator inequalities on a quotient.
    OperatorProbe(ProbeArgs),
}

#[derive(Args)]
struct SpheresArgs {
    /// Rank; repeat for several.
    #[arg(long = "n", required = true)]
    ranks: Vec<usize>,
    #[arg(long)]
    kmax: usize,
    /// Also count each sphere by enumeration.
    #[arg(long)]
    enumerate: bool,
}

#[derive(Args)]
struct MeasureSetArgs {
    #[arg(long = "n")]
    rank: usize,
    /// Density spec, e.g. exponential:lambda=0.5; repeat for several.
    #[arg(long = "density", required = true)]
    densities: Vec<String>,
    #[arg(long)]
    predicate: String,
    /// Truncation depth; by default the depth whose tail is below --tolerance.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, default_value_t = 4000)]
    max_depth: usize,
    /// Count by enumeration even when exact counting is available.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args)]
struct MeanLengthArgs {
    #[arg(long = "n", default_value_t = 2)]
    rank: usize,
    #[arg(long = "density", required = true)]
    densities: Vec<String>,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    max_depth: usize,
}

#[derive(Args)]
struct MuInfinityArgs {
    #[arg(long = "n")]
    rank: usize,
    #[arg(long)]
    predicate: String,
    /// Family with a single parameter: exponential, poisson or cauchy.
    #[arg(long, default_value = "exponential")]
    family: String,
    #[arg(long, default_value_t = 1.0)]
    lambda0: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    max_depth: usize,
    /// Also report the spherical density verdict up to this length.
    #[arg(long)]
    series_kmax: Option<usize>,
}

#[derive(Args)]
struct DegreeArgs {
    #[arg(long = "n", default_value_t = 2)]
    rank: usize,
    /// Exponent m of f(w) = |w|^m; repeat for several.
    #[arg(long = "power", required = true)]
    powers: Vec<u32>,
    #[arg(long, default_value_t = 4)]
    kmin: usize,
    #[arg(long, default_value_t = 14)]
    kmax: usize,
    /// Average over this many sampled words per sphere instead of all.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Counting {
    /// exhaustive, dp or mc.
    #[arg(long, default_value = "dp")]
    strategy: String,
    /// Monte Carlo samples per point.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Required with --strategy mc.
    #[arg(long)]
    seed: Option<u64>,
}

impl Counting {
    fn parse(&self) -> Result<CountingStrategy, Error> {
        match self.strategy.as_str() {
            "exhaustive" => Ok(CountingStrategy::Exhaustive),
            "dp" => Ok(CountingStrategy::Dp),
            "mc" => {
                let seed = self.seed.ok_or_else(|| Error::Precondition("--strategy mc needs --seed".into()))?;
                Ok(CountingStrategy::MonteCarlo { samples: self.samples, seed })
            }
            other => Err(Error::Parse(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Args)]
struct DensitySeriesArgs {
    /// Rank; repeat once per predicate or give once for all.
    #[arg(long = "n", required = true)]
    ranks: Vec<usize>,
    #[arg(long = "predicate", required = true)]
    predicates: Vec<String>,
    #[arg(long, default_value = "spherical")]
    kind: String,
    #[arg(long)]
    kmax: usize,
    #[command(flatten)]
    counting: Counting,
    /// Write the limit verdicts as JSON here.
    #[arg(long)]
    verdict: Option<PathBuf>,
}

#[derive(Args)]
struct StolzArgs {
    #[arg(long = "n", required = true)]
    ranks: Vec<usize>,
    #[arg(long = "predicate", required = true)]
    predicates: Vec<String>,
    /// all or even; repeat once per predicate or give once for all.
    #[arg(long = "parity", default_value = "all")]
    parities: Vec<String>,
    #[arg(long)]
    kmax: usize,
    #[command(flatten)]
    counting: Counting,
}

#[derive(Args)]
struct GrowthRateArgs {
    #[arg(long = "n", required = true)]
    ranks: Vec<usize>,
    #[arg(long = "predicate", required = true)]
    predicates: Vec<String>,
    #[arg(long = "kmax", required = true)]
    kmaxes: Vec<usize>,
    #[command(flatten)]
    counting: Counting,
}

#[derive(Args)]
struct SharpFitArgs {
    #[arg(long = "n", required = true)]
    ranks: Vec<usize>,
    #[arg(long = "kmin", required = true)]
    kmins: Vec<usize>,
    #[arg(long = "kmax", required = true)]
    kmaxes: Vec<usize>,
}

#[derive(Args)]
struct PrimitivesArgs {
    #[arg(long = "n")]
    rank: usize,
    #[arg(long, default_value_t = 1)]
    kmin: usize,
    #[arg(long)]
    kmax: usize,
    /// exhaustive or orbit.
    #[arg(long, default_value = "exhaustive")]
    strategy: String,
    #[arg(long, default_value_t = DEFAULT_ORBIT_SLACK)]
    slack: usize,
}

#[derive(Args)]
struct WhiteheadCheckArgs {
    /// structural or bounds.
    #[arg(long, default_value = "structural")]
    mode: String,
    #[arg(long = "n", required = true)]
    ranks: Vec<usize>,
    #[arg(long)]
    kmin: usize,
    #[arg(long)]
    kmax: usize,
    /// Bounds mode: also track the rank-2 primitive density on this range.
    #[arg(long, num_args = 2, value_names = ["KMIN", "KMAX"])]
    rank2_range: Option<Vec<usize>>,
}

#[derive(Args)]
struct WalkArgs {
    /// RANK:LENGTH; repeat for several.
    #[arg(long = "case", required = true)]
    cases: Vec<String>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Report the walk reflected at the identity instead.
    #[arg(long)]
    reflected: bool,
    /// RANK:LMAX; compare exact pushforward length marginals with the
    /// reflected recursion for every length up to LMAX. Repeatable.
    #[arg(long = "exact")]
    exact: Vec<String>,
}

#[derive(Args)]
struct PushforwardArgs {
    #[arg(long = "n")]
    rank: usize,
    /// Fixed walk length.
    #[arg(long, conflicts_with = "density")]
    length: Option<usize>,
    /// Random walk length drawn from this density.
    #[arg(long)]
    density: Option<String>,
    /// Longest length kept for a random-length walk.
    #[arg(long, default_value_t = 10)]
    max_len: usize,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
}

#[derive(Args)]
struct QuotientArg {
    /// Quotient file, or `s3`, or `cyclic:m=3,images=1,0`; repeat for several.
    #[arg(long = "spec", required = true)]
    specs: Vec<String>,
    #[arg(long)]
    density: String,
}

#[derive(Args)]
struct QuotientMixArgs {
    #[command(flatten)]
    quotient: QuotientArg,
    /// Take l0 from the simple-walk mixing time.
    #[arg(long, conflicts_with = "l0")]
    l0auto: bool,
    #[arg(long)]
    l0: Option<usize>,
    #[arg(long, default_value_t = 12)]
    k_count: usize,
    /// Steps over which TV(τ^k(E_1), U) is checked for monotonicity.
    #[arg(long, default_value_t = 50)]
    monotone_steps: usize,
}

#[derive(Args)]
struct C1StarArgs {
    #[command(flatten)]
    quotient: QuotientArg,
    /// Defaults to the simple-walk mixing time.
    #[arg(long)]
    l0: Option<usize>,
    #[arg(long, default_value_t = 12)]
    k_count: usize,
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    quotient: QuotientArg,
    #[arg(long, default_value_t = 20)]
    lmax: usize,
    #[arg(long, default_value_t = 50)]
    steps: usize,
}

type Res<T> = Result<T, Error>;

fn rank(n: usize) -> Res<Rank> {
    Rank::new(n)
}

fn density(spec: &str, r: Rank) -> Res<Density> {
    Density::new(spec.parse::<DensitySpec>()?.with_rank(r))
}

/// Repeats a single value to `len` entries; otherwise lengths must agree.
fn broadcast<T: Clone>(flag: &str, v: &[T], len: usize) -> Res<Vec<T>> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); len]),
        l if l == len => Ok(v.to_vec()),
        l => Err(Error::Precondition(format!("--{flag} given {l} times, expected 1 or {len}"))),
    }
}

fn json<T: Serialize>(value: &T) -> Res<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn load_quotient(spec: &str) -> Res<FiniteQuotient> {
    if spec == "s3" {
        return Ok(s3_example());
    }
    if let Some(rest) = spec.strip_prefix("cyclic:") {
        let bad = || Error::Parse(format!("quotient {spec:?}: expected cyclic:m=M,images=I1,I2,..."));
        let rest = rest.strip_prefix("m=").ok_or_else(bad)?;
        let (m, images) = rest.split_once(",images=").ok_or_else(bad)?;
        let m: usize = m.parse().map_err(|_| bad())?;
        let images =
            images.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| bad())).collect::<Res<Vec<_>>>()?;
        return FiniteQuotient::cyclic(rank(images.len())?, m, &images);
    }
    let text = fs::read_to_string(spec).map_err(|e| Error::Io(format!("{spec}: {e}")))?;
    FiniteQuotient::parse(&text)
}

#[derive(Serialize)]
struct MeasureRow {
    density: String,
    predicate: String,
    value: f64,
    error_bound: f64,
    truncation_depth: usize,
}

fn measure_set(a: &MeasureSetArgs) -> Res<Vec<u8>> {
    let r = rank(a.rank)?;
    let s = parse_predicate(&a.predicate, r)?;
    let mut rows = Vec::new();
    for spec in &a.densities {
        let d = density(spec, r)?;
        let depth = match a.depth {
            Some(depth) => depth,
            None => d.effective_support(a.tolerance, a.max_depth).ok_or_else(|| {
                Error::Precondition(format!("{spec}: tail above {:e} at depth {}", a.tolerance, a.max_depth))
            })?,
        };
        let m = AtomicMeasure::word_length(r, d);
        let MeasureResult { value, error_bound, truncation_depth } = if a.exhaustive {
            m.set_measure_exhaustive(&s, depth, freestat::measure::DEFAULT_WORD_BUDGET)?
        } else {
            m.set_measure(&s, depth)?
        };
        rows.push(MeasureRow { density: m.density().spec().to_string(), predicate: s.name(), value, error_bound, truncation_depth });
    }
    json(&rows)
}

#[derive(Serialize)]
struct MeanLengthRow {
    density: String,
    value: f64,
    error_bound: f64,
    truncation_depth: usize,
}

fn mean_length(a: &MeanLengthArgs) -> Res<Vec<u8>> {
    let r = rank(a.rank)?;
    let mut rows = Vec::new();
    for spec in &a.densities {
        let m = AtomicMeasure::word_length(r, density(spec, r)?);
        let res = m.mean_length_to(a.tolerance, a.max_depth)?;
        rows.push(MeanLengthRow {
            density: m.density().spec().to_string(),
            value: res.value,
            error_bound: res.error_bound,
            truncation_depth: res.truncation_depth,
        });
    }
    json(&rows)
}

#[derive(Serialize)]
struct MuInfinityOut {
    family: String,
    report: freestat::measure::MuInfinityReport,
    spherical_verdict: Option<DensityVerdict>,
}

fn mu_inf(a: &MuInfinityArgs) -> Res<Vec<u8>> {
    let r = rank(a.rank)?;
    let s = parse_predicate(&a.predicate, r)?;
    let family: Box<dyn Fn(f64) -> Res<DensitySpec>> = match a.family.as_str() {
        "exponential" => Box::new(|lambda| Ok(DensitySpec::Exponential { lambda })),
        "poisson" => Box::new(|lambda| Ok(DensitySpec::Poisson { lambda })),
        "cauchy" => Box::new(|lambda| Ok(DensitySpec::Cauchy { lambda })),
        other => return Err(Error::Parse(format!("unknown one-parameter family {other:?}"))),
    };
    let grid = geometric_grid(a.lambda0, a.steps);
    let report = mu_infinity(r, &*family, &s, &grid, a.tolerance, a.max_depth)?;
    let spherical_verdict = match a.series_kmax {
        Some(k) => Some(density_verdict(&frequency_series(&s, r, SeriesKind::Spherical, k, CountingStrategy::Dp)?)?),
        None => None,
    };
    json(&MuInfinityOut { family: a.family.clone(), report, spherical_verdict })
}

#[derive(Serialize)]
struct DegreeRow {
    power: u32,
    estimate: freestat::measure::DegreeEstimate,
}

fn degree(a: &DegreeArgs) -> Res<Vec<u8>> {
    let r = rank(a.rank)?;
    let mode = match a.samples {
        Some(samples) => {
            let seed = a.seed.ok_or_else(|| Error::Precondition("--samples needs --seed".into()))?;
            SphereAverage::Sampled { samples, seed }
        }
        None => SphereAverage::Exhaustive,
    };
    let mut rows = Vec::new();
    for &m in &a.powers {
        let f = move |w: &ReducedWord| (w.len() as f64).powi(m as i32);
        rows.push(DegreeRow { power: m, estimate: degree_of_growth(&f, r, a.kmin, a.kmax, mode)? });
    }
    json(&rows)
}

fn density_series(a: &DensitySeriesArgs) -> Res<Vec<u8>> {
    let kind: SeriesKind = a.kind.parse()?;
    let strategy = a.counting.parse()?;
    let ranks = broadcast("n", &a.ranks, a.predicates.len())?;
    let mut all = Vec::new();
    for (p, &n) in a.predicates.iter().zip(&ranks) {
        let r = rank(n)?;
        all.push(frequency_series(&parse_predicate(p, r)?, r, kind, a.kmax, strategy)?);
    }
    if let Some(path) = &a.verdict {
        #[derive(Serialize)]
        struct Row {
            predicate: String,
            n: usize,
            verdict: DensityVerdict,
        }
        let rows = all
            .iter()
            .map(|s| Ok(Row { predicate: s.predicate.clone(), n: s.rank, verdict: density_verdict(s)? }))
            .collect::<Res<Vec<_>>>()?;
        fs::write(path, json(&rows)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let mut buf = Vec::new();
    write_series_csv(&all, &mut buf)?;
    Ok(buf)
}

fn stolz(a: &StolzArgs) -> Res<Vec<u8>> {
    let strategy = a.counting.parse()?;
    let len = a.predicates.len();
    let ranks = broadcast("n", &a.ranks, len)?;
    let parities = broadcast("parity", &a.parities, len)?;
    let mut rows = Vec::new();
    for ((p, &n), parity) in a.predicates.iter().zip(&ranks).zip(&parities) {
        let even_only = match parity.as_str() {
            "all" => false,
            "even" => true,
            other => return Err(Error::Parse(format!("unknown parity {other:?}"))),
        };
        let r = rank(n)?;
        rows.push(stolz_check(&parse_predicate(p, r)?, r, a.kmax, strategy, even_only)?);
    }
    json(&rows)
}

fn growth(a: &GrowthRateArgs) -> Res<Vec<u8>> {
    let strategy = a.counting.parse()?;
    let len = a.predicates.len();
    let ranks = broadcast("n", &a.ranks, len)?;
    let kmaxes = broadcast("kmax", &a.kmaxes, len)?;
    let mut rows = Vec::new();
    for ((p, &n), &k) in a.predicates.iter().zip(&ranks).zip(&kmaxes) {
        let r = rank(n)?;
        rows.push(growth_rate(&parse_predicate(p, r)?, r, k, strategy)?);
    }
    json(&rows)
}

fn sharp(a: &SharpFitArgs) -> Res<Vec<u8>> {
    let len = a.ranks.len();
    let kmins = broadcast("kmin", &a.kmins, len)?;
    let kmaxes = broadcast("kmax", &a.kmaxes, len)?;
    let mut rows = Vec::new();
    for ((&n, &lo), &hi) in a.ranks.iter().zip(&kmins).zip(&kmaxes) {
        rows.push(sharp_exponent_fit(rank(n)?, lo, hi)?);
    }
    json(&rows)
}

fn primitive_strategy(name: &str, slack: usize) -> Res<PrimitiveStrategy> {
    match name {
        "exhaustive" => Ok(PrimitiveStrategy::Exhaustive),
        "orbit" => Ok(PrimitiveStrategy::OrbitBfs { slack }),
        other => Err(Error::Parse(format!("unknown primitive strategy {other:?}"))),
    }
}

fn primitives(a: &PrimitivesArgs) -> Res<Vec<u8>> {
    let strategy = primitive_strategy(&a.strategy, a.slack)?;
    let rows = primitive_table(rank(a.rank)?, a.kmax, strategy)?;
    let rows: Vec<PrimitiveCountRow> = rows.into_iter().filter(|r| r.k >= a.kmin).collect();
    let mut buf = Vec::new();
    write_primitive_csv(&rows, &mut buf)?;
    Ok(buf)
}

#[derive(Serialize)]
struct BoundsOut {
    bounds: Vec<BoundsReport>,
    rank2_density: Vec<PrimitiveCountRow>,
    rank2_decreasing: Option<bool>,
}

fn whitehead_check(a: &WhiteheadCheckArgs) -> Res<Vec<u8>> {
    match a.mode.as_str() {
        "structural" => {
            let reports = a
                .ranks
                .iter()
                .map(|&n| structural_check(rank(n)?, a.kmin, a.kmax))
                .collect::<Res<Vec<StructuralReport>>>()?;
            for r in &reports {
                for w in r.counterexamples_cyclic_external.iter() {
                    eprintln!("counterexample in F_{}: {w}", r.n);
                }
            }
            json(&reports)
        }
        "bounds" => {
            let bounds = a
                .ranks
                .iter()
                .map(|&n| primitive_bounds_check(rank(n)?, a.kmin, a.kmax))
                .collect::<Res<Vec<_>>>()?;
            let (rank2_density, rank2_decreasing) = match a.rank2_range.as_deref() {
                Some(&[lo, hi]) => {
                    let rows: Vec<PrimitiveCountRow> = primitive_table(rank(2)?, hi, PrimitiveStrategy::Exhaustive)?
                        .into_iter()
                        .filter(|r| r.k >= lo)
                        .collect();
                    let dec = rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
                    (rows, Some(dec))
                }
                _ => (Vec::new(), None),
            };
            json(&BoundsOut { bounds, rank2_density, rank2_decreasing })
        }
        other => Err(Error::Parse(format!("unknown mode {other:?}"))),
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum WalkStats {
    Geodesic(GeodesicStats),
    Reflected(ReflectedWalkStats),
}

#[derive(Serialize)]
struct ExactCheck {
    n: usize,
    max_length: usize,
    marginals_match: bool,
    mismatched_lengths: Vec<usize>,
}

#[derive(Serialize)]
struct WalkOut {
    seed: u64,
    stats: Vec<WalkStats>,
    exact: Vec<ExactCheck>,
}

fn rank_and_length(case: &str) -> Res<(usize, usize)> {
    let bad = || Error::Parse(format!("{case:?}: expected RANK:LENGTH"));
    let (n, l) = case.split_once(':').ok_or_else(bad)?;
    Ok((n.parse().map_err(|_| bad())?, l.parse().map_err(|_| bad())?))
}

fn walk(a: &WalkArgs) -> Res<Vec<u8>> {
    let mut stats = Vec::new();
    for case in &a.cases {
        let (n, l) = rank_and_length(case)?;
        let r = rank(n)?;
        stats.push(if a.reflected {
            WalkStats::Reflected(reflected_walk(r, l, a.trials, a.seed)?)
        } else {
            WalkStats::Geodesic(geodesic_length_stats(r, l, a.trials, a.seed)?)
        });
    }
    let mut exact = Vec::new();
    for case in &a.exact {
        let (n, max) = rank_and_length(case)?;
        let r = rank(n)?;
        let mut mismatched = Vec::new();
        for len in 0..=max {
            if exact_pushforward(r, len, DEFAULT_STATE_CAP)?.length_marginal() != reflected_walk_exact(r, len)? {
                mismatched.push(len);
            }
        }
        exact.push(ExactCheck { n, max_length: max, marginals_match: mismatched.is_empty(), mismatched_lengths: mismatched });
    }
    json(&WalkOut { seed: a.seed, stats, exact })
}

fn pushforward(a: &PushforwardArgs) -> Res<Vec<u8>> {
    let r = rank(a.rank)?;
    let mut buf = Vec::new();
    match (&a.length, &a.density) {
        (Some(l), None) => exact_pushforward(r, *l, a.state_cap)?.write_csv(&mut buf)?,
        (None, Some(spec)) => {
            let d = density(spec, r)?;
            let (rows, missing) = random_length_pushforward(r, &d, a.max_len, a.state_cap)?;
            buf.extend_from_slice(b"word,mass\n");
            for (w, m) in rows {
                buf.extend_from_slice(format!("{w},{m:e}\n").as_bytes());
            }
            buf.extend_from_slice(format!("(tail),{missing:e}\n").as_bytes());
        }
        _ => return Err(Error::Precondition("give exactly one of --length and --density".into())),
    }
    Ok(buf)
}

#[derive(Serialize)]
struct MixOut {
    quotient: String,
    order: usize,
    simple_mixing_time: usize,
    non_backtracking_mixing_time: usize,
    tv_sphere1: f64,
    uniform_fixed_error: f64,
    monotone_steps: usize,
    monotone: bool,
    c1star: C1StarReport,
}

fn quotient_mix(a: &QuotientMixArgs) -> Res<Vec<u8>> {
    if !a.l0auto && a.l0.is_none() {
        return Err(Error::Precondition("give --l0auto or --l0".into()));
    }
    let mut rows = Vec::new();
    for spec in &a.quotient.specs {
        let q = load_quotient(spec)?;
        let d = density(&a.quotient.density, q.rank())?;
        let cap = 10_000;
        let threshold = freestat::quotient::MIXING_THRESHOLD;
        let u = GroupDistribution::uniform(q.order());
        let stepped = simple_walk_step(&q, &u);
        let uniform_fixed_error =
            stepped.masses().iter().zip(u.masses()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let traj = WalkOperator::Simple.trajectory(&q, a.monotone_steps);
        let tvs: Vec<f64> = traj.iter().map(|p| p.tv_to_uniform()).collect();
        let monotone = tvs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        rows.push(MixOut {
            quotient: q.label().to_string(),
            order: q.order(),
            simple_mixing_time: freestat::quotient::mixing_time(&q, WalkOperator::Simple, threshold, cap)?,
            non_backtracking_mixing_time: freestat::quotient::mixing_time(
                &q,
                WalkOperator::NonBacktracking,
                threshold,
                cap,
            )?,
            tv_sphere1: sphere_pushforward(&q, 1).tv_to_uniform(),
            uniform_fixed_error,
            monotone_steps: a.monotone_steps,
            monotone,
            c1star: check_c1star(&q, &d, if a.l0auto { None } else { a.l0 }, a.k_count)?,
        });
    }
    json(&rows)
}

fn c1star(a: &C1StarArgs) -> Res<Vec<u8>> {
    let rows = a
        .quotient
        .specs
        .iter()
        .map(|spec| {
            let q = load_quotient(spec)?;
            check_c1star(&q, &density(&a.quotient.density, q.rank())?, a.l0, a.k_count)
        })
        .collect::<Res<Vec<C1StarReport>>>()?;
    json(&rows)
}

fn probe(a: &ProbeArgs) -> Res<Vec<u8>> {
    let rows = a
        .quotient
        .specs
        .iter()
        .map(|spec| {
            let q = load_quotient(spec)?;
            operator_inequality_probe(&q, &density(&a.quotient.density, q.rank())?, a.lmax, a.steps)
        })
        .collect::<Res<Vec<ProbeReport>>>()?;
    json(&rows)
}

fn spheres(a: &SpheresArgs) -> Res<Vec<u8>> {
    let mut out = String::from("n,k,sphere_size,enumerated\n");
    for &n in &a.ranks {
        let r = rank(n)?;
        for k in 0..=a.kmax {
            let enumerated = if a.enumerate {
                enumerate_sphere(r, k, freestat::measure::DEFAULT_WORD_BUDGET as u128)?.count().to_string()
            } else {
                String::new()
            };
            out.push_str(&format!("{n},{k},{},{enumerated}\n", sphere_size(r, k)));
        }
    }
    Ok(out.into_bytes())
}

fn run(cli: &Cli) -> Res<Vec<u8>> {
    match &cli.command {
        Command::Spheres(a) => spheres(a),
        Command::MeasureSet(a) => measure_set(a),
        Command::MeanLength(a) => mean_length(a),
        Command::MuInfinity(a) => mu_inf(a),
        Command::Degree(a) => degree(a),
        Command::DensitySeries(a) => density_series(a),
        Command::Stolz(a) => stolz(a),
        Command::GrowthRate(a) => growth(a),
        Command::SharpFit(a) => sharp(a),
        Command::Primitives(a) => primitives(a),
        Command::WhiteheadCheck(a) => whitehead_check(a),
        Command::Walk(a) => walk(a),
        Command::Pushforward(a) => pushforward(a),
        Command::QuotientMix(a) => quotient_mix(a),
        Command::C1starCheck(a) => c1star(a),
        Command::OperatorProbe(a) => probe(a),
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_budget() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let bytes = match run(&cli) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &bytes),
        None => io::stdout().lock().write_all(&bytes),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

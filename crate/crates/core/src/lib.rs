//! Measuring sets in free groups.
//!
//! `freestat` builds atomic probability measures on the free group `F_n` out
//! of a complexity function (word length by default) and a moderating
//! density on the non-negative integers, and provides the tooling used to
//! study how such measures, asymptotic densities and random walks behave:
//!
//! - [`word`]: reduced words, free reduction, sphere enumeration.
//! - [`density`]: the six moderating density families with tail bounds and
//!   seeded samplers.
//! - [`measure`]: point masses, set measures with certified truncation
//!   error, mean length, the `λ → 0` limit and the degree-of-growth estimator.
//! - [`predicate`]: membership oracles for subsets of `F_n`, with exact
//!   transfer-matrix counting where the set admits it.
//! - [`asymptotics`]: spherical and disc frequency series, limit verdicts,
//!   growth rates and exponent fits.
//! - [`whitehead`]: Whitehead graphs and primitivity.
//! - [`walks`]: random walks on the Cayley tree and their pushforwards.
//! - [`quotient`]: induced measures on finite quotients and mixing.

pub mod asymptotics;
pub mod density;
mod error;
pub mod fit;
pub mod measure;
pub mod predicate;
pub mod quotient;
pub mod walks;
pub mod whitehead;
pub mod word;

pub use asymptotics::{
    density_verdict, frequency_series, growth_rate, sharp_exponent_fit, stolz_check, CountingStrategy,
    DensityVerdict, FrequencyPoint, FrequencySeries, GrowthEstimate, SeriesKind, SharpFit, StolzReport,
};
pub use density::{Density, DensitySpec, LengthSampler};
pub use error::{Error, Result};
pub use measure::{AtomicMeasure, ComplexityFunction, MeasureResult, WordLength};
pub use predicate::SetPredicate;
pub use quotient::{FiniteQuotient, GroupDistribution, WalkOperator};
pub use whitehead::{is_primitive, WhiteheadGraph};
pub use word::{AbelianImage, Letter, MonoidWord, Rank, ReducedWord};

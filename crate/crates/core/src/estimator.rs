//! Sample-only access: uniform example streams, rejection filtering onto a
//! slice, Hoeffding sample planning and empirical inner products.
//!
//! All logarithms are base 2. Estimation accuracy for basis coefficients is
//! expressed for the normalized quantity `<f|_r, chi_B> / ||chi_B||_2`, so
//! the error it induces in `sum_B <f|_r, chi_B>^2 / ||chi_B||^2` does not
//! depend on the scale of the individual basis functions.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::{BooleanFunction, BooleanOracle};
use crate::combinatorics::{binomial, low_mask, MAX_POINT_N};
use crate::error::{invalid, Error, Result};
use crate::seed;
use crate::slice_basis::{basis_value, SliceBasis, SliceIndex, TopSet};
use crate::slice_fourier::{expand_to_degree, restrict};

/// Rejection filtering gives up after this many times the expected
/// consumption.
pub const DEFAULT_BUDGET_FACTOR: f64 = 64.0;

/// Refuse plans whose consumption budget exceeds this many examples.
pub const MAX_PLANNED_CONSUMPTION: f64 = (1u64 << 40) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub x: u64,
    pub y: i8,
}

#[derive(Clone)]
enum Source {
    Table(Arc<BooleanFunction>),
    Oracle(Arc<dyn BooleanOracle>),
    Replay(Arc<Vec<Example>>),
}

/// Labeled examples `(x, f(x))` with `x` uniform on `{0,1}^n`.
#[derive(Clone)]
pub struct ExampleStream {
    n: u32,
    source: Source,
    rng: seed::Rng,
    consumed: u64,
    record: Option<Vec<Example>>,
}

impl std::fmt::Debug for ExampleStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.source {
            Source::Table(_) => "table",
            Source::Oracle(_) => "oracle",
            Source::Replay(_) => "replay",
        };
        f.debug_struct("ExampleStream")
            .field("n", &self.n)
            .field("source", &kind)
            .field("consumed", &self.consumed)
            .finish()
    }
}

impl ExampleStream {
    pub fn from_table(f: Arc<BooleanFunction>, seed: u64) -> Self {
        ExampleStream {
            n: f.n(),
            source: Source::Table(f),
            rng: seed::rng(seed),
            consumed: 0,
            record: None,
        }
    }

    pub fn from_oracle(f: Arc<dyn BooleanOracle>, seed: u64) -> Result<Self> {
        let n = f.n();
        if n > MAX_POINT_N {
            return Err(Error::DimensionTooLarge { n, cap: MAX_POINT_N });
        }
        Ok(ExampleStream {
            n,
            source: Source::Oracle(f),
            rng: seed::rng(seed),
            consumed: 0,
            record: None,
        })
    }

    /// Replays recorded examples in order; errors once they run out.
    pub fn replay(n: u32, examples: Vec<Example>) -> Self {
        ExampleStream {
            n,
            source: Source::Replay(Arc::new(examples)),
            rng: seed::rng(0),
            consumed: 0,
            record: None,
        }
    }

    /// Keeps a copy of every emitted example (see [`Self::take_recording`]).
    pub fn recording(mut self) -> Self {
        self.record = Some(Vec::new());
        self
    }

    pub fn take_recording(&mut self) -> Option<Vec<Example>> {
        self.record.take()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn table(&self) -> Option<&BooleanFunction> {
        match &self.source {
            Source::Table(f) => Some(f),
            _ => None,
        }
    }

    pub fn next_example(&mut self) -> Result<Example> {
        let ex = match &self.source {
            Source::Table(f) => {
                let x = self.rng.random::<u64>() & low_mask(self.n);
                Example { x, y: f.value(x) }
            }
            Source::Oracle(f) => {
                let x = self.rng.random::<u64>() & low_mask(self.n);
                Example { x, y: f.eval(x) }
            }
            Source::Replay(v) => *v
                .get(self.consumed as usize)
                .ok_or(Error::StreamExhausted { consumed: self.consumed })?,
        };
        self.consumed += 1;
        if let Some(rec) = &mut self.record {
            rec.push(ex);
        }
        Ok(ex)
    }
}

/// `ceil((high - low)^2 log2(2/delta) / (2 eps^2))`, at least 1.
pub fn sample_size(epsilon: f64, delta: f64, low: f64, high: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return invalid(format!("epsilon must be positive, got {epsilon}"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("delta must lie in (0, 1], got {delta}"));
    }
    if !(high > low) {
        return invalid(format!("empty range [{low}, {high}]"));
    }
    let m = (high - low).powi(2) * (2.0 / delta).log2() / (2.0 * epsilon * epsilon);
    if !m.is_finite() || m > u64::MAX as f64 {
        return invalid(format!("sample size {m} does not fit in u64"));
    }
    Ok((m.ceil() as u64).max(1))
}

/// A Hoeffding plan for a variable with range `[range_low, range_high]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub epsilon: f64,
    pub delta: f64,
    pub range_low: f64,
    pub range_high: f64,
    pub m: u64,
}

impl SamplePlan {
    pub fn new(epsilon: f64, delta: f64, range_low: f64, range_high: f64) -> Result<Self> {
        Ok(SamplePlan {
            epsilon,
            delta,
            range_low,
            range_high,
            m: sample_size(epsilon, delta, range_low, range_high)?,
        })
    }
}

/// `C(n, r) / 2^n`.
pub fn slice_probability(n: u32, r: u32) -> f64 {
    if r > n {
        return 0.0;
    }
    binomial(n, r) as f64 / 2f64.powi(n as i32)
}

/// Examples that all lie on one slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceBatch {
    pub slice: SliceIndex,
    pub examples: Vec<Example>,
    /// Stream examples consumed to collect them.
    pub consumed: u64,
}

pub fn default_budget(n: u32, r: u32, m: usize) -> u64 {
    (DEFAULT_BUDGET_FACTOR * m as f64 / slice_probability(n, r)).ceil() as u64
}

/// Keeps examples with `|x| = r` until `m` are kept, within the default
/// budget of `64 m / Pr[|x| = r]` consumed examples.
pub fn filter_to_slice(stream: &mut ExampleStream, r: u32, m: usize) -> Result<SliceBatch> {
    let budget = default_budget(stream.n(), r, m);
    filter_to_slice_with_budget(stream, r, m, budget)
}

pub fn filter_to_slice_with_budget(
    stream: &mut ExampleStream,
    r: u32,
    m: usize,
    budget: u64,
) -> Result<SliceBatch> {
    let slice = SliceIndex::new(stream.n(), r)?;
    if m == 0 {
        return invalid("filter_to_slice needs m >= 1");
    }
    let mut batch = SliceBatch {
        slice,
        examples: Vec::with_capacity(m),
        consumed: 0,
    };
    extend_batch(stream, &mut batch, m, budget)?;
    Ok(batch)
}

/// Grows `batch` to `m` examples, consuming at most `budget` more.
pub fn extend_batch(stream: &mut ExampleStream, batch: &mut SliceBatch, m: usize, budget: u64) -> Result<()> {
    let r = batch.slice.r();
    let start = stream.consumed();
    while batch.examples.len() < m {
        if stream.consumed() - start >= budget {
            batch.consumed += stream.consumed() - start;
            return Err(Error::BudgetExhausted {
                r,
                kept: batch.examples.len(),
                wanted: m,
                consumed: batch.consumed,
            });
        }
        let ex = stream.next_example()?;
        if ex.x.count_ones() == r {
            batch.examples.push(ex);
        }
    }
    batch.consumed += stream.consumed() - start;
    Ok(())
}

/// Empirical mean of `y chi_B(x)` (or `y chi_B(complement x)` when `dual`).
pub fn estimate_inner_product(batch: &SliceBatch, b: &TopSet, dual: bool) -> Result<f64> {
    if batch.examples.is_empty() {
        return invalid("no examples to estimate from");
    }
    if dual != batch.slice.is_dual() {
        return invalid(format!(
            "dual form must be used exactly when r > n/2 (n={}, r={})",
            batch.slice.n(),
            batch.slice.r()
        ));
    }
    if b.degree() > batch.slice.max_degree() {
        return invalid(format!("degree {} exceeds min(r, n-r)", b.degree()));
    }
    Ok(batch_mean(batch, b))
}

fn batch_mean(batch: &SliceBatch, b: &TopSet) -> f64 {
    let s: i128 = batch
        .examples
        .iter()
        .map(|e| e.y as i128 * basis_value(b, batch.slice, e.x))
        .sum();
    s as f64 / batch.examples.len() as f64
}

/// How coefficient estimates are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimation {
    /// Exact slice averages read from the truth table.
    Exact,
    /// Rejection-filtered random examples with a Hoeffding plan.
    #[default]
    Sampled,
}

/// Target additive accuracy for each normalized coefficient estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Accuracy {
    /// `1 / (8 * number of coefficients on the slice)`.
    #[default]
    DeskScale,
    Absolute { epsilon: f64 },
    /// `n^(-c d)`.
    Asymptotic { c: f64 },
}

impl Accuracy {
    pub fn per_coefficient(&self, n: u32, d: u32, coefficients: usize) -> f64 {
        match *self {
            Accuracy::DeskScale => 1.0 / (8.0 * coefficients.max(1) as f64),
            Accuracy::Absolute { epsilon } => epsilon,
            Accuracy::Asymptotic { c } => (n as f64).powf(-c * d as f64),
        }
    }
}

/// Estimated inner products `<f|_r, chi_B>` for every basis element on one
/// slice up to a degree.
#[derive(Clone, Debug)]
pub struct SliceEstimate {
    pub basis: SliceBasis,
    pub inner: Vec<f64>,
    /// The frozen batch the estimates were computed from (sampled mode).
    pub batch: Option<SliceBatch>,
    pub plan: Option<SamplePlan>,
    pub planned_consumption: u64,
}

impl SliceEstimate {
    /// `S = sum_B <f|_r, chi_B>^2 / ||chi_B||^2`.
    pub fn score(&self) -> f64 {
        self.inner
            .iter()
            .zip(self.basis.norms_sq())
            .map(|(c, nsq)| c * c / nsq)
            .sum()
    }

    /// `f^(B) = <f|_r, chi_B> / ||chi_B||^2`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.inner
            .iter()
            .zip(self.basis.norms_sq())
            .map(|(c, nsq)| c / nsq)
            .collect()
    }

    pub fn samples_used(&self) -> usize {
        self.batch.as_ref().map_or(0, |b| b.examples.len())
    }

    pub fn consumed(&self) -> u64 {
        self.batch.as_ref().map_or(0, |b| b.consumed)
    }
}

/// Estimation settings shared by the distinguisher and the learner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimationConfig {
    pub estimation: Estimation,
    pub accuracy: Accuracy,
    /// Failure probability for this slice; split evenly over its
    /// coefficients by the union bound.
    pub delta: f64,
    /// Degree parameter `d` used by [`Accuracy::Asymptotic`].
    pub degree: u32,
}

/// Hoeffding plan covering every coefficient of `basis`: the largest of the
/// per-coefficient sample sizes for `y chi_B(x) / ||chi_B||_2`, whose range
/// is bounded by the counting bound on `|chi_B|`.
pub fn slice_plan(basis: &SliceBasis, cfg: &EstimationConfig) -> Result<SamplePlan> {
    let slice = basis.slice();
    let eps = cfg.accuracy.per_coefficient(slice.n(), cfg.degree, basis.len());
    let delta = cfg.delta / basis.len() as f64;
    let mut worst = SamplePlan::new(eps, delta, -1.0, 1.0)?;
    for (b, nsq) in basis.top_sets().iter().zip(basis.norms_sq()) {
        let rho = b.sup_norm_bound() as f64 / nsq.sqrt();
        let plan = SamplePlan::new(eps, delta, -rho, rho)?;
        if plan.m > worst.m {
            worst = plan;
        }
    }
    Ok(worst)
}

pub fn estimate_slice(
    stream: &mut ExampleStream,
    r: u32,
    degree: u32,
    cfg: &EstimationConfig,
) -> Result<SliceEstimate> {
    let slice = SliceIndex::new(stream.n(), r)?;
    match cfg.estimation {
        Estimation::Exact => {
            let f = stream.table().ok_or(Error::NotTableMode)?;
            let e = expand_to_degree(&restrict(f, r)?, degree)?;
            let basis = SliceBasis::new(slice, degree)?;
            Ok(SliceEstimate {
                inner: e.terms.iter().map(|t| t.inner).collect(),
                basis,
                batch: None,
                plan: None,
                planned_consumption: 0,
            })
        }
        Estimation::Sampled => {
            let basis = SliceBasis::new(slice, degree)?;
            let plan = slice_plan(&basis, cfg)?;
            let budget = DEFAULT_BUDGET_FACTOR * plan.m as f64 / slice_probability(slice.n(), r);
            if budget > MAX_PLANNED_CONSUMPTION {
                return invalid(format!(
                    "slice r={r} needs {} samples ({budget:.3e} examples); loosen the accuracy",
                    plan.m
                ));
            }
            let batch = filter_to_slice_with_budget(stream, r, plan.m as usize, budget.ceil() as u64)?;
            let inner = basis
                .top_sets()
                .par_iter()
                .map(|b| batch_mean(&batch, b))
                .collect();
            Ok(SliceEstimate {
                basis,
                inner,
                batch: Some(batch),
                plan: Some(plan),
                planned_consumption: budget.ceil() as u64,
            })
        }
    }
}

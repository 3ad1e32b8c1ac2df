//! Weak learner: find a slice concentrated on low degrees, round its
//! low-degree approximation by a random threshold, and answer with the
//! off-slice majority elsewhere.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::BooleanFunction;
use crate::combinatorics::binomial;
use crate::distinguisher::{SliceScore, DEFAULT_ACCEPT_THRESHOLD, DEFAULT_DELTA};
use crate::error::{invalid, Error, Result};
use crate::estimator::{
    default_budget, estimate_slice, extend_batch, sample_size, slice_probability, Accuracy, Estimation,
    EstimationConfig, ExampleStream, SliceBatch, DEFAULT_BUDGET_FACTOR,
};
use crate::seed;
use crate::slice_basis::{basis_value, SliceIndex, TopSet};
use crate::slice_fourier::{slice_window, SliceFunction};
use crate::FORMAT_VERSION;

pub const DEFAULT_ROUNDING_BUDGET: u32 = 64;

/// Rounding stops once the estimated disagreement is at most this.
pub fn rounding_acceptance() -> f64 {
    3f64.sqrt() / 4.0
}

/// Disagreement expected from a slice with `W^{<=d} >= 3/8` and exact
/// estimates: `sqrt(5/8) / 2`.
pub fn rounding_target() -> f64 {
    (5.0f64 / 8.0).sqrt() / 2.0
}

/// `t = ceil(sqrt(n log n))` in `[2, n]`, `d = ceil(4k sqrt(n / log n))`
/// capped at `floor(n/2)`.
pub fn learner_params(n: u32, k: u32) -> Result<(u32, u32)> {
    if n < 2 || k < 1 {
        return invalid(format!("learner_params needs n >= 2 and k >= 1, got n={n}, k={k}"));
    }
    let nf = n as f64;
    let lg = nf.log2();
    let t = (nf * lg).sqrt().ceil() as u32;
    let d = (4.0 * k as f64 * (nf / lg).sqrt()).ceil() as u32;
    Ok((t.clamp(2, n), d.min(n / 2)))
}

/// `1/2 - p_min/4` with `p_min` the smallest `Pr[|x| = r]` over the
/// middle window of width `t`.
pub fn weak_learning_bound(n: u32, t: u32) -> f64 {
    let p_min = slice_window(n, t)
        .map(|r| slice_probability(n, r))
        .fold(1.0, f64::min);
    0.5 - p_min / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerParams {
    pub t: u32,
    pub d: u32,
    #[serde(default = "default_threshold")]
    pub accept_threshold: f64,
    #[serde(default)]
    pub accuracy: Accuracy,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub estimation: Estimation,
    #[serde(default = "default_rounding_budget")]
    pub rounding_budget: u32,
    /// Additive accuracy for the off-slice mean.
    #[serde(default = "default_mu_epsilon")]
    pub mu_epsilon: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_threshold() -> f64 {
    DEFAULT_ACCEPT_THRESHOLD
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_rounding_budget() -> u32 {
    DEFAULT_ROUNDING_BUDGET
}

fn default_mu_epsilon() -> f64 {
    0.05
}

impl LearnerParams {
    pub fn new(t: u32, d: u32) -> Self {
        LearnerParams {
            t,
            d,
            accept_threshold: DEFAULT_ACCEPT_THRESHOLD,
            accuracy: Accuracy::default(),
            delta: DEFAULT_DELTA,
            estimation: Estimation::default(),
            rounding_budget: DEFAULT_ROUNDING_BUDGET,
            mu_epsilon: default_mu_epsilon(),
            seed: 0,
        }
    }

    pub fn for_k_monotone(n: u32, k: u32) -> Result<Self> {
        let (t, d) = learner_params(n, k)?;
        Ok(Self::new(t, d))
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        if self.t <= 1 || self.t > n {
            return invalid(format!("t={} must satisfy 1 < t <= n={n}", self.t));
        }
        if !(self.accept_threshold > 0.0 && self.accept_threshold < 1.0) {
            return invalid(format!("accept_threshold={} must lie in (0, 1)", self.accept_threshold));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return invalid(format!("delta={} must lie in (0, 1]", self.delta));
        }
        if self.rounding_budget == 0 {
            return invalid("rounding_budget must be >= 1");
        }
        if !(self.mu_epsilon > 0.0) {
            return invalid("mu_epsilon must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisTerm {
    pub top_set: TopSet,
    pub coeff: f64,
}

/// `h(x) = sgn(g(x) - theta)` on the chosen slice, `off_slice_sign`
/// elsewhere; the fallback is constant `+1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub format_version: u32,
    pub n: u32,
    pub r_star: Option<u32>,
    pub degree: u32,
    pub theta: f64,
    pub off_slice_sign: i8,
    pub fallback: bool,
    pub g_coeffs: Vec<HypothesisTerm>,
}

/// `sgn` with `sgn(0) = +1`.
#[inline]
pub fn sgn(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

impl Hypothesis {
    pub fn fallback(n: u32) -> Self {
        Hypothesis {
            format_version: FORMAT_VERSION,
            n,
            r_star: None,
            degree: 0,
            theta: 0.0,
            off_slice_sign: 1,
            fallback: true,
            g_coeffs: Vec::new(),
        }
    }

    /// Wraps `f` itself: the full expansion of `f|_r` with `theta = 0` and
    /// the given off-slice sign.
    pub fn from_expansion(e: &crate::SliceExpansion, theta: f64, off_slice_sign: i8) -> Self {
        Hypothesis {
            format_version: FORMAT_VERSION,
            n: e.slice.n(),
            r_star: Some(e.slice.r()),
            degree: e.max_degree,
            theta,
            off_slice_sign,
            fallback: false,
            g_coeffs: e
                .terms
                .iter()
                .map(|t| HypothesisTerm {
                    top_set: t.top_set.clone(),
                    coeff: t.coeff,
                })
                .collect(),
        }
    }

    pub fn slice(&self) -> Option<SliceIndex> {
        self.r_star.map(|r| SliceIndex::new(self.n, r).expect("validated slice"))
    }

    pub fn validate(&self) -> Result<()> {
        if self.off_slice_sign != 1 && self.off_slice_sign != -1 {
            return invalid(format!("off_slice_sign must be +-1, got {}", self.off_slice_sign));
        }
        if !(-1.0..=1.0).contains(&self.theta) {
            return invalid(format!("theta={} outside [-1, 1]", self.theta));
        }
        if self.fallback {
            return Ok(());
        }
        let r = self.r_star.ok_or_else(|| Error::Format("non-fallback hypothesis lacks r_star".into()))?;
        let slice = SliceIndex::new(self.n, r)?;
        for t in &self.g_coeffs {
            let b = &t.top_set;
            if b.degree() > slice.max_degree().min(self.degree) || b.entries().last().is_some_and(|&e| e > self.n) {
                return invalid(format!("top set {} invalid for slice (n={}, r={r})", b.label(), self.n));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let h: Hypothesis = serde_json::from_str(s)?;
        h.validate()?;
        Ok(h)
    }

    /// `g(x)`; meaningful only on the chosen slice.
    pub fn g(&self, x: u64) -> f64 {
        match self.slice() {
            Some(s) => self
                .g_coeffs
                .iter()
                .map(|t| t.coeff * basis_value(&t.top_set, s, x) as f64)
                .sum(),
            None => 0.0,
        }
    }

    pub fn eval(&self, x: u64) -> i8 {
        if self.fallback {
            return 1;
        }
        match self.r_star {
            Some(r) if x.count_ones() == r => sgn(self.g(x) - self.theta),
            _ => self.off_slice_sign,
        }
    }

    /// `g` at every point of the chosen slice, in rank order.
    pub fn g_values(&self) -> Vec<f64> {
        match self.slice() {
            Some(s) => s.points().par_iter().map(|&x| self.g(x)).collect(),
            None => Vec::new(),
        }
    }
}

/// `sgn(g - theta)` pointwise with `sgn(0) = +1`.
pub fn round_by_threshold(slice: SliceIndex, g: &[f64], theta: f64) -> Result<SliceFunction> {
    if !(-1.0..=1.0).contains(&theta) {
        return invalid(format!("theta={theta} outside [-1, 1]"));
    }
    SliceFunction::new(slice, g.iter().map(|&v| sgn(v - theta)).collect())
}

/// Fraction of slice points where two slice functions differ.
pub fn slice_disagreement(a: &SliceFunction, b: &SliceFunction) -> f64 {
    let n = a.values().len();
    a.values().iter().zip(b.values()).filter(|(x, y)| x != y).count() as f64 / n as f64
}

/// `E_x |f(x) - g(x)|` over the slice.
pub fn l1_distance(f: &SliceFunction, g: &[f64]) -> f64 {
    f.values().iter().zip(g).map(|(&v, &w)| (v as f64 - w).abs()).sum::<f64>() / g.len() as f64
}

/// `E_x (f(x) - g(x))^2` over the slice.
pub fn l2_distance_sq(f: &SliceFunction, g: &[f64]) -> f64 {
    f.values().iter().zip(g).map(|(&v, &w)| (v as f64 - w).powi(2)).sum::<f64>() / g.len() as f64
}

/// `E_theta Pr_x[f(x) != sgn(g(x) - theta)]` for `theta` uniform on
/// `[-1, 1]`, integrated exactly over the breakpoints `{g(x)}`.
pub fn theta_averaged_disagreement(f: &SliceFunction, g: &[f64]) -> Result<f64> {
    let vals = f.values();
    if vals.len() != g.len() {
        return invalid(format!("g has {} values, slice has {}", g.len(), vals.len()));
    }
    // h(x) = +1 iff theta <= g(x); sweeping theta upward flips points to -1
    // in order of their clamped g value.
    let mut pts: Vec<(f64, i8)> = g.iter().map(|&v| v.clamp(-1.0, 1.0)).zip(vals.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = pts.len() as f64;
    // On (-1, first breakpoint) every point rounds to +1.
    let mut wrong = vals.iter().filter(|&&v| v == -1).count() as f64;
    let mut lo = -1.0;
    let mut acc = 0.0;
    for &(c, v) in &pts {
        acc += (c - lo) * wrong;
        lo = c;
        wrong += if v == 1 { 1.0 } else { -1.0 };
    }
    acc += (1.0 - lo) * wrong;
    Ok(acc / (2.0 * total))
}

/// Same average from the per-point probabilities
/// `Pr_theta[theta > g]` or `Pr_theta[theta <= g]`.
pub fn theta_averaged_disagreement_pointwise(f: &SliceFunction, g: &[f64]) -> f64 {
    let s: f64 = f
        .values()
        .iter()
        .zip(g)
        .map(|(&v, &w)| {
            if v == 1 {
                ((1.0 - w) / 2.0).clamp(0.0, 1.0)
            } else {
                ((w + 1.0) / 2.0).clamp(0.0, 1.0)
            }
        })
        .sum();
    s / g.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorDecomposition {
    /// `Pr[|x| = r]`.
    pub slice_mass: f64,
    pub on_slice: f64,
    pub off_slice: f64,
    /// `(1 - slice_mass) off_slice + slice_mass on_slice`.
    pub combined: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerReport {
    pub hypothesis: Hypothesis,
    pub empirical_error: f64,
    pub rounding_attempts: u32,
    /// Last rounding-loop disagreement estimate.
    pub p_on_slice: Option<f64>,
    /// Off-slice label mean (all points for the fallback).
    pub mu_off_slice: f64,
    pub per_slice: Vec<SliceScore>,
    /// Stream examples consumed.
    pub samples_used: u64,
}

const DOMAIN_THETA: u64 = 11;

enum RoundingData {
    Exact { f: SliceFunction, g: Vec<f64> },
    Sampled { batch: SliceBatch, g: Vec<f64> },
}

impl RoundingData {
    fn disagreement(&self, theta: f64) -> f64 {
        match self {
            RoundingData::Exact { f, g } => {
                let wrong = f.values().iter().zip(g).filter(|(&v, &w)| v != sgn(w - theta)).count();
                wrong as f64 / g.len() as f64
            }
            RoundingData::Sampled { batch, g } => {
                let wrong = batch.examples.iter().zip(g).filter(|(e, &w)| e.y != sgn(w - theta)).count();
                wrong as f64 / g.len() as f64
            }
        }
    }
}

/// Mean label over points with `|x| != r` (over all points when `r` is
/// `None`).
fn off_slice_mean(stream: &mut ExampleStream, r: Option<u32>, p: &LearnerParams) -> Result<f64> {
    let n = stream.n();
    let keep = |x: u64| r.is_none_or(|r| x.count_ones() != r);
    match p.estimation {
        Estimation::Exact => {
            let f = stream.table().ok_or(Error::NotTableMode)?;
            let (mut s, mut c) = (0i64, 0i64);
            for x in 0..f.len() as u64 {
                if keep(x) {
                    s += f.value(x) as i64;
                    c += 1;
                }
            }
            Ok(if c == 0 { 0.0 } else { s as f64 / c as f64 })
        }
        Estimation::Sampled => {
            let mass = 1.0 - r.map_or(0.0, |r| slice_probability(n, r));
            if mass <= 0.0 {
                return Ok(0.0);
            }
            let m = sample_size(p.mu_epsilon, p.delta, -1.0, 1.0)?;
            let budget = (DEFAULT_BUDGET_FACTOR * m as f64 / mass).ceil() as u64;
            let start = stream.consumed();
            let (mut s, mut kept) = (0i64, 0u64);
            while kept < m {
                if stream.consumed() - start >= budget {
                    return Err(Error::BudgetExhausted {
                        r: r.unwrap_or(u32::MAX),
                        kept: kept as usize,
                        wanted: m as usize,
                        consumed: stream.consumed() - start,
                    });
                }
                let e = stream.next_example()?;
                if keep(e.x) {
                    s += e.y as i64;
                    kept += 1;
                }
            }
            Ok(s as f64 / kept as f64)
        }
    }
}

/// Scans the middle slices, stops at the first with `S >= threshold`,
/// rounds its low-degree approximation and backs off to the off-slice
/// majority.
pub fn learn(stream: &mut ExampleStream, p: &LearnerParams) -> Result<LearnerReport> {
    let n = stream.n();
    p.validate(n)?;
    let before = stream.consumed();
    let window = slice_window(n, p.t);
    let cfg = EstimationConfig {
        estimation: p.estimation,
        accuracy: p.accuracy,
        delta: p.delta / window.clone().count() as f64,
        degree: p.d,
    };
    let mut per_slice = Vec::new();
    let mut chosen = None;
    for r in window {
        let est = estimate_slice(stream, r, p.d, &cfg)?;
        let s = est.score();
        per_slice.push(SliceScore {
            r,
            s,
            coefficients: est.basis.len(),
            samples_used: est.samples_used(),
            consumed: est.consumed(),
        });
        if s >= p.accept_threshold {
            chosen = Some(est);
            break;
        }
    }
    let Some(est) = chosen else {
        let mu = off_slice_mean(stream, None, p)?;
        return Ok(LearnerReport {
            hypothesis: Hypothesis::fallback(n),
            empirical_error: ((1.0 - mu) / 2.0).clamp(0.0, 1.0),
            rounding_attempts: 0,
            p_on_slice: None,
            mu_off_slice: mu,
            per_slice,
            samples_used: stream.consumed() - before,
        });
    };

    let slice = est.basis.slice();
    let r = slice.r();
    let mut h = Hypothesis {
        format_version: FORMAT_VERSION,
        n,
        r_star: Some(r),
        degree: est.basis.max_degree(),
        theta: 0.0,
        off_slice_sign: 1,
        fallback: false,
        g_coeffs: est
            .basis
            .top_sets()
            .iter()
            .zip(est.coefficients())
            .map(|(b, coeff)| HypothesisTerm {
                top_set: b.clone(),
                coeff,
            })
            .collect(),
    };

    let data = match (p.estimation, est.batch) {
        (Estimation::Exact, _) => {
            let f = crate::slice_fourier::restrict(stream.table().ok_or(Error::NotTableMode)?, r)?;
            let g = h.g_values();
            let l2 = l2_distance_sq(&f, &g);
            assert!(
                l2 <= 1.0 - p.accept_threshold + 1e-9 && l1_distance(&f, &g) <= l2.sqrt() + 1e-12,
                "exact low-degree approximation too far from f: l2^2={l2}"
            );
            RoundingData::Exact { f, g }
        }
        (Estimation::Sampled, Some(mut batch)) => {
            let eps = (rounding_acceptance() - rounding_target()) / 2.0;
            let m = sample_size(eps, p.delta / p.rounding_budget as f64, 0.0, 1.0)? as usize;
            if batch.examples.len() < m {
                let extra = m - batch.examples.len();
                extend_batch(stream, &mut batch, m, default_budget(n, r, extra))?;
            }
            let g = batch.examples.par_iter().map(|e| h.g(e.x)).collect();
            RoundingData::Sampled { batch, g }
        }
        (Estimation::Sampled, None) => unreachable!("sampled estimates carry their batch"),
    };

    let mut rng = seed::rng(seed::derive(p.seed, DOMAIN_THETA, r as u64));
    let mut attempts = 0;
    let mut last = (0.0, 1.0);
    while last.1 > rounding_acceptance() {
        if attempts == p.rounding_budget {
            return Err(Error::RoundingBudget {
                attempts,
                last_p: last.1,
            });
        }
        attempts += 1;
        let theta = rng.random_range(-1.0..=1.0);
        last = (theta, data.disagreement(theta));
    }
    h.theta = last.0;

    let mu = off_slice_mean(stream, Some(r), p)?;
    h.off_slice_sign = sgn(mu);
    let mass = slice_probability(n, r);
    let off_err = (1.0 - h.off_slice_sign as f64 * mu) / 2.0;
    let empirical_error = ((1.0 - mass) * off_err + mass * last.1).clamp(0.0, 1.0);
    Ok(LearnerReport {
        hypothesis: h,
        empirical_error,
        rounding_attempts: attempts,
        p_on_slice: Some(last.1),
        mu_off_slice: mu,
        per_slice,
        samples_used: stream.consumed() - before,
    })
}

/// Exact `Pr_x[f(x) != h(x)]` over the whole cube.
pub fn evaluate_hypothesis(h: &Hypothesis, f: &BooleanFunction) -> Result<f64> {
    if h.n != f.n() {
        return invalid(format!("hypothesis has n={} but function has n={}", h.n, f.n()));
    }
    let wrong: u64 = (0..f.len() as u64)
        .into_par_iter()
        .filter(|&x| h.eval(x) != f.value(x))
        .count() as u64;
    Ok(wrong as f64 / f.len() as f64)
}

/// Splits the exact error into its on-slice and off-slice parts, each
/// computed separately from the truth table.
pub fn error_decomposition(h: &Hypothesis, f: &BooleanFunction) -> Result<ErrorDecomposition> {
    if h.n != f.n() {
        return invalid(format!("hypothesis has n={} but function has n={}", h.n, f.n()));
    }
    let n = f.n();
    let Some(slice) = h.slice().filter(|_| !h.fallback) else {
        let e = evaluate_hypothesis(h, f)?;
        return Ok(ErrorDecomposition {
            slice_mass: 0.0,
            on_slice: 0.0,
            off_slice: e,
            combined: e,
        });
    };
    let r = slice.r();
    let pts = slice.points();
    let g = h.g_values();
    let on_wrong = pts
        .iter()
        .zip(&g)
        .filter(|(&x, &w)| sgn(w - h.theta) != f.value(x))
        .count();
    let off_total = (1u64 << n) - binomial(n, r) as u64;
    let off_wrong = (0..f.len() as u64)
        .filter(|x| x.count_ones() != r && f.value(*x) != h.off_slice_sign)
        .count();
    let slice_mass = slice_probability(n, r);
    let on_slice = on_wrong as f64 / pts.len() as f64;
    let off_slice = if off_total == 0 {
        0.0
    } else {
        off_wrong as f64 / off_total as f64
    };
    Ok(ErrorDecomposition {
        slice_mass,
        on_slice,
        off_slice,
        combined: (1.0 - slice_mass) * off_slice + slice_mass * on_slice,
    })
}

//! Low-degree distinguisher: accept an example oracle when some middle
//! slice carries at least `accept_threshold` of its weight on degrees
//! `<= d`.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::{random_function, BooleanFunction};
use crate::error::{invalid, Result};
use crate::estimator::{estimate_slice, Accuracy, Estimation, EstimationConfig, ExampleStream};
use crate::seed;
use crate::slice_fourier::slice_window;

pub const DEFAULT_ACCEPT_THRESHOLD: f64 = 0.375;
pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguisherParams {
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
    #[serde(default)]
    pub seed: u64,
}

fn default_threshold() -> f64 {
    DEFAULT_ACCEPT_THRESHOLD
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl DistinguisherParams {
    pub fn new(t: u32, d: u32) -> Self {
        DistinguisherParams {
            t,
            d,
            accept_threshold: DEFAULT_ACCEPT_THRESHOLD,
            accuracy: Accuracy::default(),
            delta: DEFAULT_DELTA,
            estimation: Estimation::default(),
            seed: 0,
        }
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
        Ok(())
    }
}

/// `t = ceil((k n^2 log n)^(1/3))` in `[2, n]`,
/// `d = ceil(4 (k^2 n / log n)^(1/3))` capped at `floor(n/2)`.
pub fn k_monotone_params(n: u32, k: u32) -> Result<DistinguisherParams> {
    if n < 2 || k < 1 {
        return invalid(format!("k_monotone_params needs n >= 2 and k >= 1, got n={n}, k={k}"));
    }
    let (nf, kf) = (n as f64, k as f64);
    let lg = nf.log2();
    let t = (kf * nf * nf * lg).cbrt().ceil() as u32;
    let d = (4.0 * (kf * kf * nf / lg).cbrt()).ceil() as u32;
    Ok(DistinguisherParams::new(t.clamp(2, n), d.min(n / 2)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceScore {
    pub r: u32,
    /// Estimated `W^{<=d}(f|_r)`.
    pub s: f64,
    pub coefficients: usize,
    /// Slice examples the estimates were computed from.
    pub samples_used: usize,
    /// Stream examples consumed for this slice.
    pub consumed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguisherReport {
    pub verdict: bool,
    pub accept_threshold: f64,
    pub per_slice: Vec<SliceScore>,
    /// Stream examples consumed over the whole run.
    pub total_samples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl DistinguisherReport {
    pub fn max_score(&self) -> f64 {
        self.per_slice.iter().map(|s| s.s).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs the slice scan; returns on the first slice with `S >= threshold`.
pub fn run(stream: &mut ExampleStream, p: &DistinguisherParams) -> Result<DistinguisherReport> {
    let n = stream.n();
    p.validate(n)?;
    let window = slice_window(n, p.t);
    let cfg = EstimationConfig {
        estimation: p.estimation,
        accuracy: p.accuracy,
        delta: p.delta / window.clone().count() as f64,
        degree: p.d,
    };
    let before = stream.consumed();
    let mut per_slice = Vec::new();
    let mut planned_max = 0u64;
    let mut verdict = false;
    for r in window {
        let est = estimate_slice(stream, r, p.d, &cfg)?;
        planned_max = planned_max.max(est.planned_consumption);
        let s = est.score();
        per_slice.push(SliceScore {
            r,
            s,
            coefficients: est.basis.len(),
            samples_used: est.samples_used(),
            consumed: est.consumed(),
        });
        if s >= p.accept_threshold {
            verdict = true;
            break;
        }
    }
    let total_samples = stream.consumed() - before;
    let report = DistinguisherReport {
        verdict,
        accept_threshold: p.accept_threshold,
        per_slice,
        total_samples,
        wall_time_ms: None,
    };
    assert_eq!(report.verdict, report.max_score() >= p.accept_threshold);
    assert!(total_samples <= report.per_slice.len() as u64 * planned_max);
    Ok(report)
}

/// Same as [`run`] with the elapsed time recorded in the report.
pub fn run_timed(stream: &mut ExampleStream, p: &DistinguisherParams) -> Result<DistinguisherReport> {
    let start = Instant::now();
    let mut report = run(stream, p)?;
    report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub index: u64,
    pub function_seed: u64,
    pub verdict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub max_score: Option<f64>,
    pub total_samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageReport {
    pub trials: u64,
    pub family_rate: f64,
    pub random_rate: f64,
    pub advantage: f64,
    /// Wald 95% half-width for the difference of the two rates.
    pub half_width: f64,
    pub family: Vec<TrialOutcome>,
    pub random: Vec<TrialOutcome>,
}

impl AdvantageReport {
    pub fn ci(&self) -> (f64, f64) {
        (self.advantage - self.half_width, self.advantage + self.half_width)
    }
}

const DOMAIN_FAMILY: u64 = 1;
const DOMAIN_RANDOM: u64 = 2;
const DOMAIN_FAMILY_STREAM: u64 = 3;
const DOMAIN_RANDOM_STREAM: u64 = 4;

fn trial(
    f: Result<BooleanFunction>,
    index: u64,
    function_seed: u64,
    stream_seed: u64,
    p: &DistinguisherParams,
) -> TrialOutcome {
    let outcome = f.and_then(|f| {
        let mut stream = ExampleStream::from_table(Arc::new(f), stream_seed);
        run(&mut stream, p)
    });
    match outcome {
        Ok(rep) => TrialOutcome {
            index,
            function_seed,
            verdict: Some(rep.verdict),
            error: None,
            max_score: Some(rep.max_score()),
            total_samples: rep.total_samples,
        },
        Err(e) => TrialOutcome {
            index,
            function_seed,
            verdict: None,
            error: Some(e.to_string()),
            max_score: None,
            total_samples: 0,
        },
    }
}

/// Acceptance rate on `family(seed)` draws minus the rate on uniformly
/// random functions of the same dimension. Failed trials count as
/// rejections and keep their error message.
pub fn advantage<F>(n: u32, family: F, p: &DistinguisherParams, trials: u64, master: u64) -> Result<AdvantageReport>
where
    F: Fn(u64) -> Result<BooleanFunction> + Sync,
{
    if trials == 0 {
        return invalid("advantage needs trials >= 1");
    }
    p.validate(n)?;
    let family_runs: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let fs = seed::derive(master, DOMAIN_FAMILY, i);
            let f = family(fs).and_then(|f| {
                if f.n() == n {
                    Ok(f)
                } else {
                    invalid(format!("family produced n={} instead of {n}", f.n()))
                }
            });
            trial(f, i, fs, seed::derive(master, DOMAIN_FAMILY_STREAM, i), p)
        })
        .collect();
    let random_runs: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let fs = seed::derive(master, DOMAIN_RANDOM, i);
            trial(random_function(n, fs), i, fs, seed::derive(master, DOMAIN_RANDOM_STREAM, i), p)
        })
        .collect();
    let rate = |v: &[TrialOutcome]| v.iter().filter(|t| t.verdict == Some(true)).count() as f64 / trials as f64;
    let (a, b) = (rate(&family_runs), rate(&random_runs));
    let tf = trials as f64;
    let half_width = 1.96 * (a * (1.0 - a) / tf + b * (1.0 - b) / tf).sqrt();
    Ok(AdvantageReport {
        trials,
        family_rate: a,
        random_rate: b,
        advantage: a - b,
        half_width,
        family: family_runs,
        random: random_runs,
    })
}

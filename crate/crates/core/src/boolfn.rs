//! Boolean functions `{0,1}^n -> {+1,-1}`, monotone generators, the
//! alternating number and the k-alternating decomposition.

use std::sync::Arc;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{low_mask, MAX_POINT_N};
use crate::error::{invalid, Error, Result};
use crate::seed;

/// Largest dimension stored as a dense table.
pub const MAX_TABLE_N: u32 = 30;

/// Maps a 0/1 bit to its sign: `false -> +1`, `true -> -1`.
#[inline]
pub fn sign_of(bit: bool) -> i8 {
    if bit {
        -1
    } else {
        1
    }
}

/// Black-box access to a function by evaluation. Algorithms that are only
/// allowed random examples go through [`crate::estimator::ExampleStream`]
/// built on top of this.
pub trait BooleanOracle: Send + Sync {
    fn n(&self) -> u32;
    fn eval(&self, x: u64) -> i8;
}

/// Dense truth table. Bit `x` of the packed table is set iff `f(x) = -1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    n: u32,
    bits: Vec<u64>,
}

fn words_for(n: u32) -> usize {
    ((1usize << n) + 63) / 64
}

impl BooleanFunction {
    fn check_n(n: u32) -> Result<()> {
        if n > MAX_TABLE_N {
            return Err(Error::DimensionTooLarge { n, cap: MAX_TABLE_N });
        }
        Ok(())
    }

    pub fn constant(n: u32, sign: i8) -> Result<Self> {
        Self::check_n(n)?;
        let mut f = BooleanFunction {
            n,
            bits: vec![if sign < 0 { u64::MAX } else { 0 }; words_for(n)],
        };
        f.mask_tail();
        Ok(f)
    }

    pub fn from_fn(n: u32, mut f: impl FnMut(u64) -> i8) -> Result<Self> {
        Self::check_n(n)?;
        let mut bits = vec![0u64; words_for(n)];
        for x in 0..(1u64 << n) {
            if f(x) < 0 {
                bits[(x / 64) as usize] |= 1 << (x % 64);
            }
        }
        Ok(BooleanFunction { n, bits })
    }

    pub fn from_signs(n: u32, signs: &[i8]) -> Result<Self> {
        Self::check_n(n)?;
        if signs.len() != 1usize << n {
            return invalid(format!("expected {} signs, got {}", 1u64 << n, signs.len()));
        }
        if let Some(v) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return invalid(format!("sign {v} is not +1 or -1"));
        }
        Self::from_fn(n, |x| signs[x as usize])
    }

    /// Wraps packed words (bit set = -1). Bits past `2^n` must be clear.
    pub fn from_words(n: u32, bits: Vec<u64>) -> Result<Self> {
        Self::check_n(n)?;
        if bits.len() != words_for(n) {
            return Err(Error::Format(format!(
                "table for n={n} needs {} words, got {}",
                words_for(n),
                bits.len()
            )));
        }
        let f = BooleanFunction { n, bits };
        let mut masked = f.clone();
        masked.mask_tail();
        if masked != f {
            return Err(Error::Format("padding bits past 2^n are set".into()));
        }
        Ok(f)
    }

    fn mask_tail(&mut self) {
        let len = 1u64 << self.n;
        if len % 64 != 0 {
            let last = self.bits.len() - 1;
            self.bits[last] &= (1u64 << (len % 64)) - 1;
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        1usize << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    pub fn is_negative(&self, x: u64) -> bool {
        (self.bits[(x / 64) as usize] >> (x % 64)) & 1 == 1
    }

    #[inline]
    pub fn value(&self, x: u64) -> i8 {
        sign_of(self.is_negative(x))
    }

    pub fn signs(&self) -> impl Iterator<Item = i8> + '_ {
        (0..1u64 << self.n).map(move |x| self.value(x))
    }

    pub fn count_negative(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// `Some(sign)` if the function is constant.
    pub fn constant_value(&self) -> Option<i8> {
        match self.count_negative() {
            0 => Some(1),
            c if c == 1u64 << self.n => Some(-1),
            _ => None,
        }
    }

    /// Pointwise negation (the complement in 0/1 terms).
    pub fn negate(&self) -> Self {
        let mut f = BooleanFunction {
            n: self.n,
            bits: self.bits.iter().map(|w| !w).collect(),
        };
        f.mask_tail();
        f
    }

    /// Pointwise product in the ±1 convention, i.e. XOR of the 0/1 forms.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return invalid(format!("dimension mismatch: {} vs {}", self.n, other.n));
        }
        Ok(BooleanFunction {
            n: self.n,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// `x ⪯ y => f(x) >= f(y)`: the set of `-1` points is an up-set.
    pub fn is_monotone(&self) -> bool {
        (0..1u64 << self.n).all(|x| {
            !self.is_negative(x)
                || (0..self.n)
                    .filter(|i| x >> i & 1 == 0)
                    .all(|i| self.is_negative(x | 1 << i))
        })
    }

    pub fn majority(n: u32) -> Result<Self> {
        Self::from_fn(n, |x| sign_of(2 * x.count_ones() > n))
    }

    pub fn parity(n: u32) -> Result<Self> {
        Self::from_fn(n, |x| sign_of(x.count_ones() % 2 == 1))
    }

    /// `x_i` in the 0/1 convention, `i` 1-based.
    pub fn dictator(n: u32, i: u32) -> Result<Self> {
        if i == 0 || i > n {
            return invalid(format!("coordinate {i} out of range 1..={n}"));
        }
        Self::from_fn(n, |x| sign_of(x >> (i - 1) & 1 == 1))
    }
}

impl BooleanOracle for BooleanFunction {
    fn n(&self) -> u32 {
        self.n
    }

    fn eval(&self, x: u64) -> i8 {
        self.value(x)
    }
}

/// Families of monotone test instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MonotoneSpec {
    /// `-1` iff `sum_i w_i x_i >= threshold_fraction * sum_i w_i`, with
    /// `w_i` uniform in `[0, 1]`.
    WeightedThreshold { threshold_fraction: f64 },
    /// `-1` iff some clause (a conjunction of `width` distinct variables)
    /// is satisfied.
    MonotoneDnf { clauses: usize, width: usize },
    /// `-1` iff `|x| >= threshold`; the threshold is drawn uniformly from
    /// `1..=n` when absent.
    SliceThreshold { threshold: Option<u32> },
}

impl Default for MonotoneSpec {
    fn default() -> Self {
        MonotoneSpec::WeightedThreshold {
            threshold_fraction: 0.5,
        }
    }
}

/// One realized draw from a [`MonotoneSpec`], evaluable at any `n <= 63`.
#[derive(Clone, Debug, PartialEq)]
pub enum MonotoneDraw {
    WeightedThreshold { weights: Vec<f64>, threshold: f64 },
    Dnf { n: u32, clauses: Vec<u64> },
    SliceThreshold { n: u32, threshold: u32 },
}

impl MonotoneSpec {
    pub fn validate(&self, n: u32) -> Result<()> {
        if n == 0 || n > MAX_POINT_N {
            return invalid(format!("n={n} must lie in 1..={MAX_POINT_N}"));
        }
        match *self {
            MonotoneSpec::WeightedThreshold { threshold_fraction } => {
                if !(0.0..=1.0).contains(&threshold_fraction) {
                    return invalid("threshold_fraction must lie in [0, 1]");
                }
            }
            MonotoneSpec::MonotoneDnf { clauses, width } => {
                if clauses == 0 || width == 0 || width > n as usize {
                    return invalid(format!(
                        "monotone DNF needs clauses >= 1 and 1 <= width <= n (got {clauses}, {width})"
                    ));
                }
            }
            MonotoneSpec::SliceThreshold { threshold } => {
                if let Some(t) = threshold {
                    if t > n + 1 {
                        return invalid(format!("slice threshold {t} exceeds n+1"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, n: u32, rng: &mut R) -> Result<MonotoneDraw> {
        self.validate(n)?;
        Ok(match *self {
            MonotoneSpec::WeightedThreshold { threshold_fraction } => {
                let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                let threshold = threshold_fraction * weights.iter().sum::<f64>();
                MonotoneDraw::WeightedThreshold { weights, threshold }
            }
            MonotoneSpec::MonotoneDnf { clauses, width } => MonotoneDraw::Dnf {
                n,
                clauses: (0..clauses)
                    .map(|_| {
                        sample_indices(rng, n as usize, width)
                            .iter()
                            .fold(0u64, |m, i| m | 1 << i)
                    })
                    .collect(),
            },
            MonotoneSpec::SliceThreshold { threshold } => MonotoneDraw::SliceThreshold {
                n,
                threshold: threshold.unwrap_or_else(|| rng.random_range(1..=n)),
            },
        })
    }
}

impl BooleanOracle for MonotoneDraw {
    fn n(&self) -> u32 {
        match self {
            MonotoneDraw::WeightedThreshold { weights, .. } => weights.len() as u32,
            MonotoneDraw::Dnf { n, .. } | MonotoneDraw::SliceThreshold { n, .. } => *n,
        }
    }

    fn eval(&self, x: u64) -> i8 {
        match self {
            MonotoneDraw::WeightedThreshold { weights, threshold } => {
                let s: f64 = weights
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| x >> i & 1 == 1)
                    .map(|(_, w)| w)
                    .sum();
                sign_of(s >= *threshold)
            }
            MonotoneDraw::Dnf { clauses, .. } => sign_of(clauses.iter().any(|&c| x & c == c)),
            MonotoneDraw::SliceThreshold { threshold, .. } => {
                sign_of(x.count_ones() >= *threshold)
            }
        }
    }
}

impl MonotoneDraw {
    pub fn to_table(&self) -> Result<BooleanFunction> {
        BooleanFunction::from_fn(self.n(), |x| self.eval(x))
    }
}

/// Product of k monotone parts, optionally negated.
///
/// `combined(x) = s * prod_i parts_i(x)` with `s = -1` iff `negated`.
/// Generated instances are never negated; decompositions of functions with
/// `f(0^n) = -1` are.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KMonotoneFunction {
    parts: Vec<BooleanFunction>,
    negated: bool,
    combined: BooleanFunction,
}

impl KMonotoneFunction {
    pub fn new(n: u32, parts: Vec<BooleanFunction>, negated: bool) -> Result<Self> {
        let mut combined = BooleanFunction::constant(n, if negated { -1 } else { 1 })?;
        for (i, p) in parts.iter().enumerate() {
            if p.n() != n {
                return invalid(format!("part {i} has n={} but expected {n}", p.n()));
            }
            if !p.is_monotone() {
                return invalid(format!("part {i} is not monotone"));
            }
            combined = combined.product(p)?;
        }
        Ok(KMonotoneFunction {
            parts,
            negated,
            combined,
        })
    }

    pub fn n(&self) -> u32 {
        self.combined.n()
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[BooleanFunction] {
        &self.parts
    }

    pub fn negated(&self) -> bool {
        self.negated
    }

    pub fn combined(&self) -> &BooleanFunction {
        &self.combined
    }

    pub fn into_combined(self) -> BooleanFunction {
        self.combined
    }
}

/// Oracle-mode k-monotone function (no table; any `n <= 63`).
#[derive(Clone, Debug)]
pub struct KMonotoneOracle {
    pub parts: Vec<MonotoneDraw>,
}

impl BooleanOracle for KMonotoneOracle {
    fn n(&self) -> u32 {
        self.parts.first().map_or(0, |p| p.n())
    }

    fn eval(&self, x: u64) -> i8 {
        self.parts.iter().map(|p| p.eval(x)).product()
    }
}

pub fn random_k_monotone_oracle(n: u32, k: usize, spec: &MonotoneSpec, seed: u64) -> Result<KMonotoneOracle> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    let mut rng = seed::rng(seed);
    let parts = (0..k)
        .map(|_| spec.draw(n, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(KMonotoneOracle { parts })
}

/// k independent monotone draws combined by pointwise product.
pub fn random_k_monotone(n: u32, k: usize, spec: &MonotoneSpec, seed: u64) -> Result<KMonotoneFunction> {
    BooleanFunction::check_n(n)?;
    let oracle = random_k_monotone_oracle(n, k, spec, seed)?;
    let parts = oracle
        .parts
        .iter()
        .map(MonotoneDraw::to_table)
        .collect::<Result<Vec<_>>>()?;
    KMonotoneFunction::new(n, parts, false)
}

/// Each of the `2^n` signs is an independent fair coin.
pub fn random_function(n: u32, seed: u64) -> Result<BooleanFunction> {
    BooleanFunction::check_n(n)?;
    let mut rng = seed::rng(seed);
    let mut bits: Vec<u64> = (0..words_for(n)).map(|_| rng.random::<u64>()).collect();
    if n < 6 {
        bits[0] &= low_mask(1 << n);
    }
    BooleanFunction::from_words(n, bits)
}

/// `A(x)`: the maximum number of flips of `f` along a chain ending at `x`.
///
/// Any chain can be refined to a saturated one starting at `0^n` without
/// losing flips, so the recurrence over single-bit predecessors is exact.
pub fn alternation_profile(f: &BooleanFunction) -> Vec<u32> {
    let n = f.n();
    let mut a = vec![0u32; f.len()];
    for x in 1..(1u64 << n) {
        let fx = f.is_negative(x);
        let mut best = 0;
        let mut rest = x;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            let y = x ^ bit;
            best = best.max(a[y as usize] + u32::from(f.is_negative(y) != fx));
        }
        a[x as usize] = best;
    }
    a
}

pub fn alternating_number(f: &BooleanFunction) -> u32 {
    alternation_profile(f).into_iter().max().unwrap_or(0)
}

/// Result of evaluating Markov's negation-count formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MarkovNegations {
    pub negations: u32,
    pub alternating_number: u32,
    /// The formula was applied to the complement because `f(0^n) = -1`
    /// (i.e. `1` in the 0/1 convention). `a(f)` is complement-invariant.
    pub complemented: bool,
}

/// `ceil(log2(a(f) + 1)) - 1`.
pub fn markov_negations(f: &BooleanFunction) -> Result<MarkovNegations> {
    if f.constant_value().is_some() {
        return Err(Error::ConstantFunction);
    }
    let complemented = f.is_negative(0);
    let g = if complemented { f.negate() } else { f.clone() };
    let a = alternating_number(&g);
    // a >= 1 once f is non-constant
    let m = a + 1;
    let ceil_log2 = u32::BITS - (m - 1).leading_zeros();
    Ok(MarkovNegations {
        negations: ceil_log2 - 1,
        alternating_number: a,
        complemented,
    })
}

/// Number of monotone parts needed to write `f` as a product (without a
/// negation): `a(f) + [f(0^n) = -1]`.
pub fn monotone_part_count(f: &BooleanFunction) -> u32 {
    alternating_number(f) + u32::from(f.is_negative(0))
}

/// Writes `f = s * m_1 * .. * m_k` with `k = a(f)`, where `m_i(x) = -1` iff
/// `A(x) >= i` and `s = f(0^n)`.
pub fn decompose_k_alternating(f: &BooleanFunction) -> Result<KMonotoneFunction> {
    let n = f.n();
    let profile = Arc::new(alternation_profile(f));
    let k = profile.iter().copied().max().unwrap_or(0);
    let parts = (1..=k)
        .map(|i| {
            let p = Arc::clone(&profile);
            BooleanFunction::from_fn(n, move |x| sign_of(p[x as usize] >= i))
        })
        .collect::<Result<Vec<_>>>()?;
    let km = KMonotoneFunction::new(n, parts, f.is_negative(0))?;
    debug_assert_eq!(km.combined(), f);
    Ok(km)
}

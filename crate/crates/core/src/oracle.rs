//! Brute-force reference implementations, written from the definitions
//! alone: no closed-form norms and no `b_i >= 2i` shortcut. Also a tiny-n
//! explorer for the low-level Fourier conjectures on the cube.

use nalgebra::{DMatrix, DVector};
use num::{BigInt, BigRational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::{monotone_part_count, random_k_monotone, BooleanFunction, MonotoneSpec, MAX_TABLE_N};
use crate::combinatorics::slice_points;
use crate::error::{invalid, Error, Result};
use crate::seed;
use crate::slice_basis::{SliceIndex, TopSet};
use crate::slice_fourier::{ExpansionTerm, SliceExpansion, SliceFunction};

pub const MAX_BRUTE_SLICE_N: u32 = 8;
pub const MAX_BRUTE_CHAIN_N: u32 = 4;
pub const MAX_CUBE_N: u32 = 24;
pub const MAX_SCAN_N: u32 = 20;
pub const EVIDENCE_LABEL: &str = "evidence, not verification";

fn bit(x: u64, i: u32) -> i64 {
    (x >> (i - 1) & 1) as i64
}

/// `prod_i (x_{a_i} - x_{b_i})`.
pub fn chi_ab_direct(a: &[u32], b: &[u32], x: u64) -> i64 {
    a.iter().zip(b).map(|(&ai, &bi)| bit(x, ai) - bit(x, bi)).product()
}

/// Calls `visit` on every sequence of distinct elements of `[n]`, disjoint
/// from `b`, with `a_i < b_i` for all `i`.
fn for_each_below(n: u32, b: &[u32], visit: &mut impl FnMut(&[u32])) {
    fn go(n: u32, b: &[u32], a: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
        let i = a.len();
        if i == b.len() {
            visit(a);
            return;
        }
        for c in 1..b[i].min(n + 1) {
            if b.contains(&c) || a.contains(&c) {
                continue;
            }
            a.push(c);
            go(n, b, a, visit);
            a.pop();
        }
    }
    go(n, b, &mut Vec::with_capacity(b.len()), visit);
}

/// `chi_B(x)` as the sum of `chi_{A,B}` over every admissible `A`.
pub fn chi_b_direct(n: u32, b: &[u32], x: u64) -> i64 {
    let mut s = 0;
    for_each_below(n, b, &mut |a| s += chi_ab_direct(a, b, x));
    s
}

/// `chi_B` on `slice`, through the complement when `r > n/2`.
pub fn chi_on_slice_direct(b: &[u32], slice: SliceIndex, x: u64) -> i64 {
    let n = slice.n();
    let x = if 2 * slice.r() > n { !x & ((1u64 << n) - 1) } else { x };
    chi_b_direct(n, b, x)
}

/// Increasing sequences of length `d` in `[n]` admitting some disjoint `A`
/// with `A < B`, in lexicographic order.
pub fn brute_top_sets(n: u32, d: u32) -> Vec<Vec<u32>> {
    fn increasing(n: u32, d: u32, start: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == d as usize {
            out.push(cur.clone());
            return;
        }
        for c in start..=n {
            cur.push(c);
            increasing(n, d, c + 1, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    increasing(n, d, 1, &mut Vec::new(), &mut all);
    all.retain(|b| {
        let mut found = false;
        for_each_below(n, b, &mut |_| found = true);
        found
    });
    all
}

/// Every top set of degree `<= max_degree`, by degree then lexicographic.
pub fn brute_top_sets_up_to(n: u32, max_degree: u32) -> Vec<Vec<u32>> {
    (0..=max_degree).flat_map(|d| brute_top_sets(n, d)).collect()
}

/// `E_x chi_B(x)^2` over the slice, exactly.
pub fn brute_norm_sq(b: &[u32], slice: SliceIndex) -> BigRational {
    let pts = slice_points(slice.n(), slice.r());
    let s: i128 = pts
        .iter()
        .map(|&x| (chi_on_slice_direct(b, slice, x) as i128).pow(2))
        .sum();
    BigRational::new(BigInt::from(s), BigInt::from(pts.len()))
}

/// `sum_x chi_B(x) chi_C(x)` over the slice.
pub fn brute_inner_sum(b: &[u32], c: &[u32], slice: SliceIndex) -> i128 {
    slice_points(slice.n(), slice.r())
        .iter()
        .map(|&x| chi_on_slice_direct(b, slice, x) as i128 * chi_on_slice_direct(c, slice, x) as i128)
        .sum()
}

/// Expansion from the Gram system of raw basis evaluations.
pub fn brute_expand_slice(g: &SliceFunction) -> Result<SliceExpansion> {
    let slice = g.slice();
    let n = slice.n();
    if n > MAX_BRUTE_SLICE_N {
        return Err(Error::DimensionTooLarge {
            n,
            cap: MAX_BRUTE_SLICE_N,
        });
    }
    let max_degree = slice.r().min(n - slice.r());
    let basis = brute_top_sets_up_to(n, max_degree);
    let pts = slice_points(n, slice.r());
    let (rows, cols) = (pts.len(), basis.len());
    let m = DMatrix::from_fn(rows, cols, |i, j| chi_on_slice_direct(&basis[j], slice, pts[i]) as f64);
    let v = DVector::from_iterator(rows, g.values().iter().map(|&y| y as f64));
    let gram = m.transpose() * &m;
    let rhs = m.transpose() * &v;
    let coeffs = gram
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("singular Gram matrix".into()))?;
    let size = rows as f64;
    let terms = basis
        .into_iter()
        .enumerate()
        .map(|(j, b)| {
            Ok(ExpansionTerm {
                top_set: TopSet::new(b)?,
                inner: rhs[j] / size,
                coeff: coeffs[j],
                norm_sq: gram[(j, j)] / size,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SliceExpansion {
        slice,
        max_degree,
        terms,
    })
}

/// `a(f)` as a maximum over all `n!` maximal chains.
pub fn brute_alternating(f: &BooleanFunction) -> Result<u32> {
    let n = f.n();
    if n > MAX_BRUTE_CHAIN_N {
        return Err(Error::DimensionTooLarge {
            n,
            cap: MAX_BRUTE_CHAIN_N,
        });
    }
    let mut perm: Vec<u32> = (0..n).collect();
    let mut best = 0;
    loop {
        let mut x = 0u64;
        let mut flips = 0;
        for &i in &perm {
            let y = x | 1 << i;
            if f.value(x) != f.value(y) {
                flips += 1;
            }
            x = y;
        }
        best = best.max(flips);
        if !next_permutation(&mut perm) {
            return Ok(best);
        }
    }
}

fn next_permutation(p: &mut [u32]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Coefficients `f^(S) = E_x f(x) (-1)^{sum_{i in S} x_i}` indexed by the
/// subset mask of `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeExpansion {
    pub n: u32,
    pub coeffs: Vec<f64>,
}

impl CubeExpansion {
    pub fn coefficient(&self, set_mask: u64) -> f64 {
        self.coeffs[set_mask as usize]
    }

    pub fn parseval(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `f(x) = sum_S f^(S) chi_S(x)` at every point.
    pub fn inverse(&self) -> Vec<f64> {
        let mut v = self.coeffs.clone();
        fwht(&mut v);
        v
    }

    /// The inverse transform rounded back to a truth table.
    pub fn to_function(&self) -> Result<BooleanFunction> {
        let v = self.inverse();
        if let Some((x, w)) = v.iter().enumerate().find(|(_, w)| (w.abs() - 1.0).abs() > 1e-9) {
            return invalid(format!("inverse transform is {w} at x={x}, not +-1"));
        }
        BooleanFunction::from_fn(self.n, |x| if v[x as usize] < 0.0 { -1 } else { 1 })
    }
}

fn fwht(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for chunk in v.chunks_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

pub fn cube_expand(f: &BooleanFunction) -> Result<CubeExpansion> {
    let n = f.n();
    if n > MAX_CUBE_N {
        return Err(Error::DimensionTooLarge { n, cap: MAX_CUBE_N });
    }
    let mut v: Vec<f64> = f.signs().map(f64::from).collect();
    fwht(&mut v);
    let scale = 1.0 / v.len() as f64;
    v.iter_mut().for_each(|c| *c *= scale);
    Ok(CubeExpansion { n, coeffs: v })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    /// Truth-table index (exhaustive scans) or draw index.
    pub id: u64,
    pub seed: Option<u64>,
    pub k: u32,
    /// Monotone parts the function actually needs.
    pub parts: u32,
    /// `max_{|S| <= k} |f^(S)|`.
    pub max_low_level: f64,
    /// Same maximum over `1 <= |S| <= k`.
    pub max_low_level_nonempty: f64,
    /// `min { |S| : f^(S) != 0 }`.
    pub min_support: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub label: String,
    pub n: u32,
    pub k: u32,
    pub exhaustive: bool,
    pub scanned: u64,
    pub min_max_low_level: f64,
    pub min_max_low_level_nonempty: f64,
    pub max_min_support: u32,
    pub records: Vec<ScanRecord>,
}

/// Coefficients below this magnitude count as zero (they are multiples of
/// `2^-n` otherwise).
const ZERO_TOL: f64 = 1e-12;

fn scan_one(f: &BooleanFunction, k: u32, id: u64, seed: Option<u64>) -> Result<ScanRecord> {
    let e = cube_expand(f)?;
    let mut max_all: f64 = 0.0;
    let mut max_ne: f64 = 0.0;
    let mut min_support = u32::MAX;
    for (s, &c) in e.coeffs.iter().enumerate() {
        let size = (s as u64).count_ones();
        if size <= k {
            max_all = max_all.max(c.abs());
            if size >= 1 {
                max_ne = max_ne.max(c.abs());
            }
        }
        if c.abs() > ZERO_TOL {
            min_support = min_support.min(size);
        }
    }
    Ok(ScanRecord {
        id,
        seed,
        k,
        parts: monotone_part_count(f),
        max_low_level: max_all,
        max_low_level_nonempty: max_ne,
        min_support,
    })
}

/// Exhaustive over every function with at most `k` monotone parts when
/// `n <= 4`, otherwise `budget` draws of
/// [`random_k_monotone`](crate::boolfn::random_k_monotone) under `spec`.
pub fn conjecture_scan(n: u32, k: u32, budget: u64, master: u64, spec: &MonotoneSpec) -> Result<ScanReport> {
    if n > MAX_SCAN_N {
        return Err(Error::DimensionTooLarge { n, cap: MAX_SCAN_N });
    }
    if k == 0 {
        return invalid("conjecture_scan needs k >= 1");
    }
    let exhaustive = n <= MAX_BRUTE_CHAIN_N;
    let records: Vec<ScanRecord> = if exhaustive {
        let count = 1u64 << (1u64 << n);
        (0..count)
            .into_par_iter()
            .filter_map(|id| {
                let f = BooleanFunction::from_words(n, vec![id]).expect("table fits one word");
                (monotone_part_count(&f) <= k).then(|| scan_one(&f, k, id, None))
            })
            .collect::<Result<_>>()?
    } else {
        if budget == 0 {
            return invalid("sampled scan needs budget >= 1");
        }
        debug_assert!(n <= MAX_TABLE_N);
        (0..budget)
            .into_par_iter()
            .map(|i| {
                let s = seed::derive(master, 0, i);
                let f = random_k_monotone(n, k as usize, spec, s)?.into_combined();
                scan_one(&f, k, i, Some(s))
            })
            .collect::<Result<_>>()?
    };
    let fold = |g: fn(&ScanRecord) -> f64| records.iter().map(g).fold(f64::INFINITY, f64::min);
    Ok(ScanReport {
        label: EVIDENCE_LABEL.into(),
        n,
        k,
        exhaustive,
        scanned: records.len() as u64,
        min_max_low_level: fold(|r| r.max_low_level),
        min_max_low_level_nonempty: fold(|r| r.max_low_level_nonempty),
        max_min_support: records.iter().map(|r| r.min_support).max().unwrap_or(0),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{alternating_number, random_function};
    use crate::slice_basis::{chi_b, chi_norm_sq, top_sets_up_to};
    use crate::slice_fourier::{expand, restrict};
    use rand::Rng;

    #[test]
    fn top_sets_from_definition() {
        assert_eq!(brute_top_sets(4, 0), vec![Vec::<u32>::new()]);
        assert_eq!(brute_top_sets(4, 1), vec![vec![2], vec![3], vec![4]]);
        assert_eq!(brute_top_sets(4, 2), vec![vec![2, 4], vec![3, 4]]);
        for n in 0..=9 {
            for d in 0..=n / 2 {
                let fast: Vec<Vec<u32>> = top_sets_up_to(n, d)
                    .unwrap()
                    .into_iter()
                    .filter(|b| b.degree() == d)
                    .map(Vec::from)
                    .collect();
                assert_eq!(brute_top_sets(n, d), fast, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn direct_chi_agrees_with_product_form() {
        for n in 1..=8 {
            for b in brute_top_sets_up_to(n, n / 2) {
                let t = TopSet::new(b.clone()).unwrap();
                for x in 0..1u64 << n {
                    assert_eq!(chi_b_direct(n, &b, x) as i128, chi_b(&t, x), "n={n} b={b:?} x={x:b}");
                }
            }
        }
    }

    #[test]
    fn brute_norms_match_closed_form() {
        for n in 1..=7 {
            for r in 0..=n {
                let s = SliceIndex::new(n, r).unwrap();
                for b in brute_top_sets_up_to(n, r.min(n - r)) {
                    let t = TopSet::new(b.clone()).unwrap();
                    assert_eq!(brute_norm_sq(&b, s), chi_norm_sq(&t, s).unwrap());
                }
            }
        }
    }

    #[test]
    fn dual_path_expansion() {
        let mut rng = crate::seed::rng(13);
        for _ in 0..100 {
            let n = rng.random_range(1..=6);
            let r = rng.random_range(0..=n);
            let s = SliceIndex::new(n, r).unwrap();
            let g = SliceFunction::from_fn(s, |_| if rng.random::<bool>() { 1 } else { -1 }).unwrap();
            let fast = expand(&g).unwrap();
            let slow = brute_expand_slice(&g).unwrap();
            assert_eq!(fast.terms.len(), slow.terms.len());
            for t in &slow.terms {
                let c = fast.coefficient(&t.top_set).unwrap();
                assert!((c - t.coeff).abs() < 1e-9, "{c} vs {}", t.coeff);
            }
        }
        let s = SliceIndex::new(3, 1).unwrap();
        let e = brute_expand_slice(&SliceFunction::from_fn(s, |_| 1).unwrap()).unwrap();
        assert!((e.coefficient(&TopSet::empty()).unwrap() - 1.0).abs() < 1e-12);
        assert!(e.terms.iter().skip(1).all(|t| t.coeff.abs() < 1e-12));
        let d = BooleanFunction::dictator(2, 1).unwrap();
        let g = restrict(&d, 1).unwrap();
        let (a, b) = (expand(&g).unwrap(), brute_expand_slice(&g).unwrap());
        for (x, y) in a.terms.iter().zip(&b.terms) {
            assert_eq!(x.top_set, y.top_set);
            assert!((x.coeff - y.coeff).abs() < 1e-12);
        }
        let big = SliceFunction::from_fn(SliceIndex::new(9, 4).unwrap(), |_| 1).unwrap();
        assert!(brute_expand_slice(&big).is_err());
    }

    #[test]
    fn alternating_oracle() {
        assert_eq!(brute_alternating(&BooleanFunction::constant(3, 1).unwrap()).unwrap(), 0);
        assert_eq!(brute_alternating(&BooleanFunction::parity(2).unwrap()).unwrap(), 2);
        for id in 0..1u64 << 16 {
            let f = BooleanFunction::from_words(4, vec![id]).unwrap();
            assert_eq!(brute_alternating(&f).unwrap(), alternating_number(&f));
        }
        assert!(brute_alternating(&BooleanFunction::constant(5, 1).unwrap()).is_err());
    }

    #[test]
    fn cube_expansion() {
        let e = cube_expand(&BooleanFunction::constant(5, -1).unwrap()).unwrap();
        assert_eq!(e.coefficient(0), -1.0);
        // 1 - 2 x_1 is the character of {1}; its negation has coefficient -1
        let d = BooleanFunction::dictator(4, 1).unwrap();
        assert_eq!(cube_expand(&d).unwrap().coefficient(0b1), 1.0);
        assert_eq!(cube_expand(&d.negate()).unwrap().coefficient(0b1), -1.0);
        let f = random_function(12, 3).unwrap();
        let e = cube_expand(&f).unwrap();
        assert!((e.parseval() - 1.0).abs() < 1e-12);
        assert_eq!(e.to_function().unwrap(), f);
        let p = cube_expand(&BooleanFunction::parity(6).unwrap()).unwrap();
        assert_eq!(p.coefficient(0b111111), 1.0);
    }

    #[test]
    fn scan_examples() {
        let rep = conjecture_scan(4, 1, 0, 0, &MonotoneSpec::default()).unwrap();
        assert!(rep.exhaustive);
        // 168 monotone functions on 4 variables, as k = 1 with no negation
        assert_eq!(rep.scanned, 168);
        assert!(rep.min_max_low_level > 0.0);
        assert!(rep.records.iter().all(|r| r.parts <= 1));
        let rep = conjecture_scan(3, 2, 0, 0, &MonotoneSpec::default()).unwrap();
        let constant = rep.records.iter().find(|r| r.id == 0).unwrap();
        assert_eq!((constant.max_low_level, constant.min_support), (1.0, 0));
        let rep = conjecture_scan(8, 2, 25, 4, &MonotoneSpec::default()).unwrap();
        assert!(!rep.exhaustive && rep.scanned == 25);
        assert_eq!(rep.label, EVIDENCE_LABEL);
        assert_eq!(rep, conjecture_scan(8, 2, 25, 4, &MonotoneSpec::default()).unwrap());
        assert!(conjecture_scan(21, 2, 1, 0, &MonotoneSpec::default()).is_err());
    }
}

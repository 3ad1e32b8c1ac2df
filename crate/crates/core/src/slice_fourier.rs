//! Exact analysis of slice restrictions: Young-Fourier expansions, level
//! weights, pair and total influence, shadows, and the structural
//! inequalities that tie them together.

use std::ops::RangeInclusive;

use num::{BigInt, BigRational, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::boolfn::{BooleanFunction, KMonotoneFunction};
use crate::combinatorics::{binomial, rank_colex};
use crate::error::{invalid, Result};
use crate::slice_basis::{chi_norm_sq, SliceBasis, SliceIndex, TopSet};

/// Values of a ±1 function on one slice, indexed by colex rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceFunction {
    slice: SliceIndex,
    values: Vec<i8>,
}

impl SliceFunction {
    pub fn new(slice: SliceIndex, values: Vec<i8>) -> Result<Self> {
        if values.len() as u128 != slice.size() {
            return invalid(format!(
                "slice (n={}, r={}) has {} points, got {} values",
                slice.n(),
                slice.r(),
                slice.size(),
                values.len()
            ));
        }
        if values.iter().any(|&v| v != 1 && v != -1) {
            return invalid("slice values must be +1 or -1");
        }
        Ok(SliceFunction { slice, values })
    }

    pub fn from_fn(slice: SliceIndex, mut f: impl FnMut(u64) -> i8) -> Result<Self> {
        let values = slice.points().into_iter().map(&mut f).collect();
        Self::new(slice, values)
    }

    pub fn slice(&self) -> SliceIndex {
        self.slice
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Value at a point of the slice.
    pub fn at(&self, x: u64) -> i8 {
        debug_assert_eq!(x.count_ones(), self.slice.r());
        self.values[rank_colex(x) as usize]
    }

    /// Points (in rank order) where the value is `-1`.
    pub fn negative_set(&self) -> Vec<u64> {
        self.slice
            .points()
            .into_iter()
            .zip(&self.values)
            .filter(|(_, &v)| v < 0)
            .map(|(x, _)| x)
            .collect()
    }

    /// `mu(g^{-1}(-1))` as an exact fraction.
    pub fn density_exact(&self) -> BigRational {
        let neg = self.values.iter().filter(|&&v| v < 0).count();
        BigRational::new(neg.into(), self.values.len().into())
    }
}

pub fn restrict(f: &BooleanFunction, r: u32) -> Result<SliceFunction> {
    let slice = SliceIndex::new(f.n(), r)?;
    SliceFunction::from_fn(slice, |x| f.value(x))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionTerm {
    pub top_set: TopSet,
    /// `<g, chi_B>` (uniform slice average).
    pub inner: f64,
    /// `f^(B) = <g, chi_B> / ||chi_B||^2`.
    pub coeff: f64,
    pub norm_sq: f64,
}

impl ExpansionTerm {
    /// `f^(B)^2 ||chi_B||^2`.
    pub fn weight(&self) -> f64 {
        self.coeff * self.coeff * self.norm_sq
    }
}

/// Young-Fourier coefficients of one slice function, up to `max_degree`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceExpansion {
    pub slice: SliceIndex,
    pub max_degree: u32,
    pub terms: Vec<ExpansionTerm>,
}

fn inner_sums(g: &SliceFunction, basis: &SliceBasis) -> Vec<i128> {
    let pts = g.slice.points();
    (0..basis.len())
        .into_par_iter()
        .map(|i| {
            pts.iter()
                .zip(&g.values)
                .map(|(&x, &v)| v as i128 * basis.value(i, x))
                .sum()
        })
        .collect()
}

/// Expansion over every basis element of degree `<= min(degree, r, n-r)`.
pub fn expand_to_degree(g: &SliceFunction, degree: u32) -> Result<SliceExpansion> {
    let basis = SliceBasis::new(g.slice, degree)?;
    let size = g.values.len() as f64;
    let terms = inner_sums(g, &basis)
        .into_iter()
        .zip(basis.top_sets().iter().zip(basis.norms_sq()))
        .map(|(s, (b, &norm_sq))| {
            let inner = s as f64 / size;
            ExpansionTerm {
                top_set: b.clone(),
                inner,
                coeff: inner / norm_sq,
                norm_sq,
            }
        })
        .collect();
    Ok(SliceExpansion {
        slice: g.slice,
        max_degree: basis.max_degree(),
        terms,
    })
}

/// Full expansion; the dual basis is used automatically when `r > n/2`.
pub fn expand(g: &SliceFunction) -> Result<SliceExpansion> {
    expand_to_degree(g, g.slice.max_degree())
}

impl SliceExpansion {
    /// `sum_B f^(B) chi_B(x)` at every slice point, in rank order.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.slice
            .points()
            .into_par_iter()
            .map(|x| self.evaluate(x))
            .collect()
    }

    pub fn evaluate(&self, x: u64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * crate::slice_basis::basis_value(&t.top_set, self.slice, x) as f64)
            .sum()
    }

    pub fn coefficient(&self, b: &TopSet) -> Option<f64> {
        self.terms.iter().find(|t| &t.top_set == b).map(|t| t.coeff)
    }

    /// Keeps only terms of degree `<= d`.
    pub fn truncate(&self, d: u32) -> SliceExpansion {
        SliceExpansion {
            slice: self.slice,
            max_degree: self.max_degree.min(d),
            terms: self
                .terms
                .iter()
                .filter(|t| t.top_set.degree() <= d)
                .cloned()
                .collect(),
        }
    }
}

/// `W^d = sum over B of degree d of f^(B)^2 ||chi_B||^2`.
pub fn level_weight(e: &SliceExpansion, d: u32) -> f64 {
    e.terms
        .iter()
        .filter(|t| t.top_set.degree() == d)
        .map(ExpansionTerm::weight)
        .sum()
}

/// `W^0 ..= W^{max_degree}`.
pub fn level_weights(e: &SliceExpansion) -> Vec<f64> {
    let mut w = vec![0.0; e.max_degree as usize + 1];
    for t in &e.terms {
        w[t.top_set.degree() as usize] += t.weight();
    }
    w
}

/// `W^{>d}`.
pub fn weight_above(e: &SliceExpansion, d: u32) -> f64 {
    e.terms
        .iter()
        .filter(|t| t.top_set.degree() > d)
        .map(ExpansionTerm::weight)
        .sum()
}

/// `sum_B f^(B)^2 ||chi_B||^2` in exact rational arithmetic.
pub fn parseval_exact(g: &SliceFunction) -> Result<BigRational> {
    let basis = SliceBasis::full(g.slice)?;
    let size = BigInt::from(g.values.len());
    let mut total = BigRational::zero();
    for (s, b) in inner_sums(g, &basis).into_iter().zip(basis.top_sets()) {
        let inner = BigRational::new(BigInt::from(s), size.clone());
        total += &inner * &inner / chi_norm_sq(b, g.slice)?;
    }
    Ok(total)
}

fn check_pair(g: &SliceFunction, i: u32, j: u32) -> Result<()> {
    let n = g.slice.n();
    if i == j {
        return invalid("pair influence needs i != j");
    }
    if i == 0 || j == 0 || i > n || j > n {
        return invalid(format!("coordinates must lie in 1..={n}"));
    }
    Ok(())
}

/// Number of slice points whose value changes when `x_i` and `x_j` swap.
pub fn pair_disagreements(g: &SliceFunction, i: u32, j: u32) -> Result<u64> {
    check_pair(g, i, j)?;
    let swap = (1u64 << (i - 1)) | (1u64 << (j - 1));
    Ok(g.slice
        .points()
        .into_iter()
        .zip(&g.values)
        .filter(|(x, &v)| {
            let m = x & swap;
            m != 0 && m != swap && g.at(x ^ swap) != v
        })
        .count() as u64)
}

/// `I_ij = 2 Pr[g(x^{(i,j)}) != g(x)]`.
pub fn pair_influence(g: &SliceFunction, i: u32, j: u32) -> Result<f64> {
    Ok(2.0 * pair_disagreements(g, i, j)? as f64 / g.values.len() as f64)
}

/// `sum over i < j` of the pair disagreement counts.
pub fn total_disagreements(g: &SliceFunction) -> u64 {
    let n = g.slice.n();
    let full = crate::combinatorics::low_mask(n);
    g.slice
        .points()
        .into_par_iter()
        .zip(g.values.par_iter())
        .map(|(x, &v)| {
            let mut cnt = 0u64;
            let mut ones = x;
            while ones != 0 {
                let bi = ones & ones.wrapping_neg();
                ones ^= bi;
                let mut zeros = !x & full;
                while zeros != 0 {
                    let bj = zeros & zeros.wrapping_neg();
                    zeros ^= bj;
                    cnt += u64::from(g.at(x ^ bi ^ bj) != v);
                }
            }
            cnt
        })
        .sum()
}

/// `I[g] = (1/n) sum_{i<j} I_ij[g]`.
pub fn total_influence(g: &SliceFunction) -> f64 {
    let n = g.slice.n();
    if n == 0 {
        return 0.0;
    }
    2.0 * total_disagreements(g) as f64 / (n as f64 * g.values.len() as f64)
}

pub fn total_influence_exact(g: &SliceFunction) -> BigRational {
    let n = g.slice.n();
    if n == 0 {
        return BigRational::zero();
    }
    BigRational::new(
        BigInt::from(2 * total_disagreements(g)),
        BigInt::from(n as u128 * g.values.len() as u128),
    )
}

/// `sum_d d(n+1-d)/n * W^d`.
pub fn spectral_influence(e: &SliceExpansion) -> f64 {
    let n = e.slice.n() as f64;
    if n == 0.0 {
        return 0.0;
    }
    level_weights(e)
        .iter()
        .enumerate()
        .map(|(d, w)| d as f64 * (n + 1.0 - d as f64) / n * w)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// Size of a shadow together with the size of the slice it lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ShadowSize {
    pub count: u64,
    pub slice_size: u64,
}

impl ShadowSize {
    pub fn density(&self) -> f64 {
        self.count as f64 / self.slice_size as f64
    }

    pub fn density_exact(&self) -> BigRational {
        BigRational::new(self.count.into(), self.slice_size.into())
    }
}

/// `|∂^± A|` for a set `A` of points on `slice`.
pub fn shadow(points: &[u64], slice: SliceIndex, direction: Direction) -> Result<ShadowSize> {
    let (n, r) = (slice.n(), slice.r());
    let target = match direction {
        Direction::Up if r < n => r + 1,
        Direction::Down if r > 0 => r - 1,
        _ => return invalid(format!("no {direction:?} shadow from slice (n={n}, r={r})")),
    };
    if let Some(x) = points.iter().find(|x| x.count_ones() != r || (n < 64 && **x >> n != 0)) {
        return invalid(format!("point {x:#b} is not on slice (n={n}, r={r})"));
    }
    let slice_size = binomial(n, target) as u64;
    let mut hit = vec![false; slice_size as usize];
    let full = crate::combinatorics::low_mask(n);
    for &y in points {
        let mut free = match direction {
            Direction::Up => !y & full,
            Direction::Down => y,
        };
        while free != 0 {
            let b = free & free.wrapping_neg();
            free ^= b;
            hit[rank_colex(y ^ b) as usize] = true;
        }
    }
    Ok(ShadowSize {
        count: hit.iter().filter(|&&h| h).count() as u64,
        slice_size,
    })
}

/// `mu(∂^± A)` in its own slice.
pub fn shadow_density(points: &[u64], slice: SliceIndex, direction: Direction) -> Result<f64> {
    Ok(shadow(points, slice, direction)?.density())
}

/// Exact terms of `min(mu(∂+A), mu(∂-A)) >= mu(A) + I[g]/n` for
/// `A = g^{-1}(-1)` on a slice with `0 < r < n`.
#[derive(Clone, Debug)]
pub struct ShadowCheck {
    pub density: BigRational,
    pub upper: BigRational,
    pub lower: BigRational,
    pub influence: BigRational,
    pub holds: bool,
}

pub fn shadow_inequality(g: &SliceFunction) -> Result<ShadowCheck> {
    let slice = g.slice;
    if slice.r() == 0 || slice.r() == slice.n() {
        return invalid("shadow inequality needs 0 < r < n");
    }
    let a = g.negative_set();
    let upper = shadow(&a, slice, Direction::Up)?.density_exact();
    let lower = shadow(&a, slice, Direction::Down)?.density_exact();
    let density = g.density_exact();
    let influence = total_influence_exact(g);
    let rhs = &density + &influence / BigRational::from_integer(slice.n().into());
    let holds = upper.clone().min(lower.clone()) >= rhs;
    Ok(ShadowCheck {
        density,
        upper,
        lower,
        influence,
        holds,
    })
}

/// `mu(h|_{r+1}) >= mu(h|_r) + I[h|_r]/n` for every `r < n`, exactly.
/// Returns the first failing `r`, if any.
pub fn monotone_shadow_step(h: &BooleanFunction) -> Result<Option<u32>> {
    let n = h.n();
    let nn = BigRational::from_integer(n.into());
    let mut cur = restrict(h, 0)?;
    for r in 0..n {
        let next = restrict(h, r + 1)?;
        let rhs = cur.density_exact() + total_influence_exact(&cur) / &nn;
        if next.density_exact() < rhs {
            return Ok(Some(r));
        }
        cur = next;
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfluenceSumReport {
    pub n: u32,
    pub k: usize,
    /// `I[f|_r]` for `r = 0..n`.
    pub per_slice: Vec<f64>,
    pub sum: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `sum_{r=0}^{n-1} I[f|_r] <= k n`.
pub fn influence_sum_bound_check(f: &KMonotoneFunction) -> Result<InfluenceSumReport> {
    let n = f.n();
    let per_slice = (0..n)
        .map(|r| restrict(f.combined(), r).map(|g| total_influence(&g)))
        .collect::<Result<Vec<_>>>()?;
    let sum: f64 = per_slice.iter().sum();
    let bound = (f.k() as u32 * n) as f64;
    Ok(InfluenceSumReport {
        n,
        k: f.k(),
        per_slice,
        sum,
        bound,
        pass: sum <= bound + 1e-9,
    })
}

/// Integer slices `ceil(n/2 - t/2) ..= floor(n/2 + t/2)`.
pub fn slice_window(n: u32, t: u32) -> RangeInclusive<u32> {
    let t = t.min(n);
    (n - t).div_ceil(2)..=(n + t) / 2
}

/// Some `r` in the middle window with `W^{>d}(f|_r) < eps`.
pub fn concentration_witness(f: &BooleanFunction, t: u32, d: u32, eps: f64) -> Result<Option<u32>> {
    let n = f.n();
    if t <= 1 || t > n {
        return invalid(format!("window width t={t} must satisfy 1 < t <= n={n}"));
    }
    for r in slice_window(n, t) {
        if high_degree_weight(f, r, d)? < eps {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// `W^{>d}(f|_r)`, zero when `d >= min(r, n-r)`.
pub fn high_degree_weight(f: &BooleanFunction, r: u32, d: u32) -> Result<f64> {
    let g = restrict(f, r)?;
    if d >= g.slice.max_degree() {
        return Ok(0.0);
    }
    Ok(weight_above(&expand(&g)?, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{random_function, random_k_monotone, sign_of, MonotoneSpec};
    use crate::seed;
    use num::One;
    use rand::Rng;

    fn random_slice_function(n: u32, r: u32, s: u64) -> SliceFunction {
        let mut rng = seed::rng(s);
        SliceFunction::from_fn(SliceIndex::new(n, r).unwrap(), |_| sign_of(rng.random())).unwrap()
    }

    fn dictator_slice() -> SliceFunction {
        // f = x_1 on n=2, r=1: points 0b01 ("10") -> -1 and 0b10 ("01") -> +1
        restrict(&BooleanFunction::dictator(2, 1).unwrap(), 1).unwrap()
    }

    #[test]
    fn restrict_examples() {
        let g = dictator_slice();
        assert_eq!(g.values(), &[-1, 1]);
        let c = BooleanFunction::constant(5, -1).unwrap();
        assert!(restrict(&c, 2).unwrap().values().iter().all(|&v| v == -1));
        let f = random_function(6, 1).unwrap();
        assert_eq!(restrict(&f, 0).unwrap().values(), &[f.value(0)]);
        assert!(restrict(&f, 7).is_err());
    }

    #[test]
    fn expand_examples() {
        let c = restrict(&BooleanFunction::constant(6, 1).unwrap(), 3).unwrap();
        let e = expand(&c).unwrap();
        assert_eq!(e.terms[0].coeff, 1.0);
        assert!(e.terms[1..].iter().all(|t| t.coeff == 0.0));
        assert_eq!(level_weights(&e)[0], 1.0);
        assert!(level_weights(&e)[1..].iter().all(|&w| w == 0.0));

        let e = expand(&dictator_slice()).unwrap();
        assert_eq!(e.terms.len(), 2);
        assert_eq!(e.coefficient(&TopSet::empty()), Some(0.0));
        assert_eq!(e.coefficient(&TopSet::new(vec![2]).unwrap()), Some(-1.0));
        assert_eq!(level_weight(&e, 1), 1.0);
    }

    #[test]
    fn expansion_round_trips_and_parseval() {
        for s in 0..100u64 {
            let n = 2 + (s % 7) as u32;
            let r = (s / 7) as u32 % (n + 1);
            let g = random_slice_function(n, r, s);
            let e = expand(&g).unwrap();
            for (v, rec) in g.values().iter().zip(e.reconstruct()) {
                assert!((*v as f64 - rec).abs() < 1e-9);
            }
            let total: f64 = level_weights(&e).iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
            assert_eq!(parseval_exact(&g).unwrap(), BigRational::one());
        }
    }

    #[test]
    fn influence_examples() {
        let g = dictator_slice();
        assert_eq!(pair_influence(&g, 1, 2).unwrap(), 2.0);
        assert_eq!(total_influence(&g), 1.0);
        assert_eq!(spectral_influence(&expand(&g).unwrap()), 1.0);
        assert!(pair_influence(&g, 1, 1).is_err());

        let sym = restrict(&BooleanFunction::majority(7).unwrap(), 3).unwrap();
        for i in 1..=7 {
            for j in (i + 1)..=7 {
                assert_eq!(pair_influence(&sym, i, j).unwrap(), 0.0);
            }
        }
        assert_eq!(total_influence(&sym), 0.0);
    }

    #[test]
    fn total_influence_matches_pair_sum_and_spectrum() {
        for s in 0..200u64 {
            let n = 2 + (s % 7) as u32;
            let r = (s / 3) as u32 % (n + 1);
            let g = random_slice_function(n, r, 1000 + s);
            let mut pair_sum = 0.0;
            for i in 1..=n {
                for j in (i + 1)..=n {
                    pair_sum += pair_influence(&g, i, j).unwrap();
                }
            }
            let comb = total_influence(&g);
            assert!((pair_sum / n as f64 - comb).abs() < 1e-12);
            assert!((comb - spectral_influence(&expand(&g).unwrap())).abs() < 1e-9);
        }
    }

    #[test]
    fn shadow_examples() {
        let slice = SliceIndex::new(4, 2).unwrap();
        let all = slice.points();
        assert_eq!(shadow_density(&all, slice, Direction::Up).unwrap(), 1.0);
        assert_eq!(shadow_density(&all, slice, Direction::Down).unwrap(), 1.0);
        assert_eq!(shadow_density(&[], slice, Direction::Up).unwrap(), 0.0);
        // 1100 is x_1 = x_2 = 1
        let s = shadow(&[0b0011], slice, Direction::Up).unwrap();
        assert_eq!((s.count, s.slice_size), (2, 4));
        assert!(shadow(&[0b0111], slice, Direction::Up).is_err());
        let top = SliceIndex::new(4, 4).unwrap();
        assert!(shadow(&[0b1111], top, Direction::Up).is_err());
    }

    #[test]
    fn shadow_inequality_on_random_functions() {
        for s in 0..30 {
            let f = random_function(7, s).unwrap();
            for r in 1..7 {
                assert!(shadow_inequality(&restrict(&f, r).unwrap()).unwrap().holds);
            }
        }
    }

    #[test]
    fn influence_sum_and_subadditivity() {
        let c = KMonotoneFunction::new(6, vec![BooleanFunction::constant(6, 1).unwrap()], false).unwrap();
        let rep = influence_sum_bound_check(&c).unwrap();
        assert_eq!((rep.sum, rep.bound, rep.pass), (0.0, 6.0, true));

        let maj = KMonotoneFunction::new(9, vec![BooleanFunction::majority(9).unwrap()], false).unwrap();
        assert!(influence_sum_bound_check(&maj).unwrap().pass);

        for s in 0..20 {
            let km = random_k_monotone(8, 3, &MonotoneSpec::default(), s).unwrap();
            assert!(influence_sum_bound_check(&km).unwrap().pass);
            for r in 0..=8 {
                let lhs = total_influence(&restrict(km.combined(), r).unwrap());
                let rhs: f64 = km
                    .parts()
                    .iter()
                    .map(|h| total_influence(&restrict(h, r).unwrap()))
                    .sum();
                assert!(lhs <= rhs + 1e-12);
            }
            for h in km.parts() {
                assert_eq!(monotone_shadow_step(h).unwrap(), None);
            }
        }
    }

    #[test]
    fn window_bounds() {
        assert_eq!(slice_window(16, 13), 2..=14);
        assert_eq!(slice_window(12, 7), 3..=9);
        assert_eq!(slice_window(10, 2), 4..=6);
        assert_eq!(slice_window(9, 2), 4..=5);
    }

    #[test]
    fn concentration_witness_examples() {
        let c = BooleanFunction::constant(8, 1).unwrap();
        assert!(concentration_witness(&c, 4, 0, 0.5).unwrap().is_some());
        assert!(concentration_witness(&c, 1, 0, 0.5).is_err());
        // d * eps >= 2kn/t with k=1, n=10, t=10: d=4, eps=1/2
        for s in 0..10 {
            let km = random_k_monotone(10, 1, &MonotoneSpec::default(), s).unwrap();
            let r = concentration_witness(km.combined(), 10, 4, 0.5).unwrap().unwrap();
            assert!(high_degree_weight(km.combined(), r, 4).unwrap() < 0.5);
        }
    }

    #[test]
    fn random_functions_are_not_concentrated_at_degree_one() {
        let misses = (0..10)
            .filter(|&s| {
                let f = random_function(14, s).unwrap();
                concentration_witness(&f, 2, 1, 0.5).unwrap().is_none()
            })
            .count();
        assert!(misses >= 8, "{misses}");
    }
}

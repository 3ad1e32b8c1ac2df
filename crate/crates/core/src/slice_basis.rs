//! The Young-Fourier orthogonal basis on a slice `{x : |x| = r}`.
//!
//! Indices are 1-based: coordinate `i` of a point `x: u64` is bit `i - 1`.
//! For `r > n/2` every basis function is used in its dual form
//! `x -> chi_B(complement of x)`.

use num::{BigInt, BigRational, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{falling, low_mask};
use crate::error::{invalid, Error, Result};

/// Largest `n` for which integer basis values are guaranteed to fit in
/// `i128` (each of at most `n/2` factors is below `n`).
pub const MAX_BASIS_N: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SliceIndex {
    n: u32,
    r: u32,
}

impl SliceIndex {
    pub fn new(n: u32, r: u32) -> Result<Self> {
        if n > MAX_BASIS_N {
            return Err(Error::DimensionTooLarge { n, cap: MAX_BASIS_N });
        }
        if r > n {
            return invalid(format!("weight {r} exceeds n={n}"));
        }
        Ok(SliceIndex { n, r })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `true` when the dual basis is in use (`r > n/2`).
    pub fn is_dual(&self) -> bool {
        2 * self.r > self.n
    }

    /// Largest degree present on this slice: `min(r, n - r)`.
    pub fn max_degree(&self) -> u32 {
        self.r.min(self.n - self.r)
    }

    pub fn size(&self) -> u128 {
        crate::combinatorics::binomial(self.n, self.r)
    }

    pub fn points(&self) -> Vec<u64> {
        crate::combinatorics::slice_points(self.n, self.r)
    }

    /// `x` with all `n` bits flipped.
    pub fn complement(&self, x: u64) -> u64 {
        !x & low_mask(self.n)
    }
}

/// A sequence of distinct 1-based indices (order significant).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequence(Vec<u32>);

impl Sequence {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.iter().any(|&e| e == 0 || e > 64) {
            return invalid("sequence entries must lie in 1..=64");
        }
        let mask = entries.iter().fold(0u64, |m, &e| m | 1 << (e - 1));
        if mask.count_ones() as usize != entries.len() {
            return invalid("sequence entries must be distinct");
        }
        Ok(Sequence(entries))
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &e| m | 1 << (e - 1))
    }
}

/// An increasing sequence `b_1 < .. < b_d` with `b_i >= 2i`: exactly the
/// increasing sequences that admit a disjoint `A` with `a_i < b_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct TopSet(Vec<u32>);

impl TryFrom<Vec<u32>> for TopSet {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        TopSet::new(v)
    }
}

impl From<TopSet> for Vec<u32> {
    fn from(b: TopSet) -> Vec<u32> {
        b.0
    }
}

impl TopSet {
    pub fn empty() -> Self {
        TopSet(Vec::new())
    }

    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("top set {entries:?} is not strictly increasing"));
        }
        if let Some((i, b)) = entries.iter().enumerate().find(|(i, &b)| b < 2 * (*i as u32 + 1)) {
            return invalid(format!("top set entry b_{} = {b} is below {}", i + 1, 2 * (i + 1)));
        }
        if entries.last().is_some_and(|&b| b > 64) {
            return invalid("top set entries must lie in 1..=64");
        }
        Ok(TopSet(entries))
    }

    pub fn degree(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &e| m | 1 << (e - 1))
    }

    /// Dash-joined 1-based indices; the empty top set renders as `""`.
    pub fn label(&self) -> String {
        self.0.iter().map(u32::to_string).collect::<Vec<_>>().join("-")
    }

    pub fn parse_label(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(TopSet::empty());
        }
        let entries = s
            .split('-')
            .map(|p| p.parse::<u32>().map_err(|e| Error::Format(format!("bad top set {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        TopSet::new(entries)
    }

    /// Number of sequences `A < B` disjoint from `B`: `prod_i (b_i - 2i + 1)`.
    /// Bounds `max |chi_B|`.
    pub fn sup_norm_bound(&self) -> u128 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &b)| (b - 2 * i as u32 - 1) as u128)
            .product()
    }
}

/// All top sets of length `d` over `[n]`, in lexicographic order.
pub fn enumerate_top_sets(n: u32, d: u32) -> Result<Vec<TopSet>> {
    if 2 * d > n {
        return invalid(format!("degree {d} exceeds n/2 for n={n}"));
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d as usize);
    fn go(n: u32, d: u32, cur: &mut Vec<u32>, out: &mut Vec<TopSet>) {
        let i = cur.len() as u32;
        if i == d {
            out.push(TopSet(cur.clone()));
            return;
        }
        let lo = (2 * (i + 1)).max(cur.last().map_or(0, |b| b + 1));
        // leave room for the remaining d - i - 1 entries
        for b in lo..=n - (d - i - 1) {
            cur.push(b);
            go(n, d, cur, out);
            cur.pop();
        }
    }
    go(n, d, &mut cur, &mut out);
    Ok(out)
}

/// Top sets of every degree `0..=max_degree`, grouped by degree.
pub fn top_sets_up_to(n: u32, max_degree: u32) -> Result<Vec<TopSet>> {
    let mut all = Vec::new();
    for d in 0..=max_degree {
        all.extend(enumerate_top_sets(n, d)?);
    }
    Ok(all)
}

/// `prod_i (x_{a_i} - x_{b_i})`.
pub fn chi_pair(a: &Sequence, b: &Sequence, x: u64) -> Result<i64> {
    if a.0.len() != b.0.len() {
        return invalid("sequences differ in length");
    }
    if a.mask() & b.mask() != 0 {
        return invalid("sequences are not disjoint");
    }
    Ok(a.0
        .iter()
        .zip(&b.0)
        .map(|(&ai, &bi)| (x >> (ai - 1) & 1) as i64 - (x >> (bi - 1) & 1) as i64)
        .product())
}

/// `chi_B(x) = sum over A < B of chi_{A,B}(x)`.
///
/// The sum collapses to a product. Choosing `a_i` left to right, the factor
/// `x_{a_i} - x_{b_i}` is nonzero only when `x_{a_i} != x_{b_i}`, so `a_i`
/// must be a one below `b_i` (factor `+1`) when `x_{b_i} = 0` and a zero
/// below `b_i` (factor `-1`) otherwise. Earlier choices all lie below
/// `b_i`, so the number of options at step `i` is the count of such
/// positions outside `B` minus the earlier picks of the same kind.
pub fn chi_b(b: &TopSet, x: u64) -> i128 {
    let bmask = b.mask();
    let mut used_ones = 0u32;
    let mut used_zeros = 0u32;
    let mut acc: i128 = 1;
    for &bi in &b.0 {
        let below = low_mask(bi - 1) & !bmask;
        if x >> (bi - 1) & 1 == 0 {
            let avail = (x & below).count_ones() - used_ones;
            if avail == 0 {
                return 0;
            }
            acc *= avail as i128;
            used_ones += 1;
        } else {
            let avail = (!x & below).count_ones() - used_zeros;
            if avail == 0 {
                return 0;
            }
            acc *= -(avail as i128);
            used_zeros += 1;
        }
    }
    acc
}

/// Dual basis function `chi_B(complement of x)` for slices with `r > n/2`.
pub fn chi_dual(b: &TopSet, slice: SliceIndex, x: u64) -> Result<i128> {
    if !slice.is_dual() {
        return invalid(format!(
            "dual basis applies only to r > n/2 (n={}, r={})",
            slice.n, slice.r
        ));
    }
    if b.degree() > slice.max_degree() {
        return invalid(format!("degree {} exceeds n-r={}", b.degree(), slice.n - slice.r));
    }
    Ok(chi_b(b, slice.complement(x)))
}

/// Basis function for `B` on `slice`, dualized when `r > n/2`.
#[inline]
pub fn basis_value(b: &TopSet, slice: SliceIndex, x: u64) -> i128 {
    if slice.is_dual() {
        chi_b(b, slice.complement(x))
    } else {
        chi_b(b, x)
    }
}

/// Closed-form squared norm (uniform slice average of `chi_B^2`):
///
/// `prod_i (b_i - 2(i-1))(b_i - 2(i-1) - 1)/2 * 2^d r^(d) (n-r)^(d) / n^(2d)`
/// with `m^(j)` the falling factorial.
pub fn chi_norm_sq(b: &TopSet, slice: SliceIndex) -> Result<BigRational> {
    let d = b.degree() as u64;
    if b.degree() > slice.max_degree() {
        return invalid(format!(
            "degree {d} exceeds min(r, n-r) = {} on slice (n={}, r={})",
            slice.max_degree(),
            slice.n,
            slice.r
        ));
    }
    if b.0.last().is_some_and(|&e| e > slice.n) {
        return invalid(format!("top set {:?} exceeds n={}", b.0, slice.n));
    }
    let mut num = BigInt::from(1);
    for (i, &bi) in b.0.iter().enumerate() {
        let c = (bi - 2 * i as u32) as u64;
        num *= BigInt::from(c * (c - 1) / 2);
    }
    let (n, r) = (slice.n as u64, slice.r as u64);
    num *= BigInt::from(1u64 << d);
    num *= BigInt::from(falling(r, d));
    num *= BigInt::from(falling(n - r, d));
    let den = BigInt::from(falling(n, 2 * d));
    Ok(BigRational::new(num, den))
}

pub fn chi_norm_sq_f64(b: &TopSet, slice: SliceIndex) -> Result<f64> {
    Ok(chi_norm_sq(b, slice)?.to_f64().unwrap_or(f64::NAN))
}

/// The basis of one slice truncated at a degree, with closed-form norms.
#[derive(Clone, Debug)]
pub struct SliceBasis {
    slice: SliceIndex,
    max_degree: u32,
    top_sets: Vec<TopSet>,
    norms_sq: Vec<f64>,
}

impl SliceBasis {
    /// Basis elements of degree `<= min(degree, r, n - r)`.
    pub fn new(slice: SliceIndex, degree: u32) -> Result<Self> {
        let max_degree = degree.min(slice.max_degree());
        let top_sets = top_sets_up_to(slice.n, max_degree)?;
        let norms_sq = top_sets
            .iter()
            .map(|b| chi_norm_sq_f64(b, slice))
            .collect::<Result<Vec<_>>>()?;
        Ok(SliceBasis {
            slice,
            max_degree,
            top_sets,
            norms_sq,
        })
    }

    pub fn full(slice: SliceIndex) -> Result<Self> {
        Self::new(slice, slice.max_degree())
    }

    pub fn slice(&self) -> SliceIndex {
        self.slice
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.top_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.top_sets.is_empty()
    }

    pub fn top_sets(&self) -> &[TopSet] {
        &self.top_sets
    }

    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }

    #[inline]
    pub fn value(&self, index: usize, x: u64) -> i128 {
        basis_value(&self.top_sets[index], self.slice, x)
    }
}

//! Binomials and colexicographic ranking of fixed-weight bit patterns.
//!
//! An r-subset of `{0, .., n-1}` is stored as a `u64` mask. For masks of a
//! fixed weight, colexicographic order coincides with numeric order, so the
//! rank of `{c_1 < .. < c_r}` is `sum_i C(c_i, i)`.

/// Largest dimension for which slice points fit in a `u64` mask.
pub const MAX_POINT_N: u32 = 63;

pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc * (n as u128 - k as u128 + i) / i;
    }
    acc
}

/// `n (n-1) .. (n-k+1)`; zero when `k > n`.
pub fn falling(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128)
}

pub fn rank_colex(mut x: u64) -> u64 {
    let mut rank = 0u64;
    let mut i = 1u32;
    while x != 0 {
        let c = x.trailing_zeros();
        rank += binomial(c, i) as u64;
        x &= x - 1;
        i += 1;
    }
    rank
}

pub fn unrank_colex(n: u32, r: u32, mut rank: u64) -> u64 {
    let mut x = 0u64;
    let mut c = n;
    for i in (1..=r).rev() {
        // largest c with C(c, i) <= rank
        c -= 1;
        while binomial(c, i) as u64 > rank {
            c -= 1;
        }
        rank -= binomial(c, i) as u64;
        x |= 1 << c;
    }
    x
}

/// All weight-`r` masks over `n` bits in colex (= numeric) order.
#[derive(Clone, Debug)]
pub struct SlicePoints {
    limit: u64,
    next: Option<u64>,
}

impl SlicePoints {
    pub fn new(n: u32, r: u32) -> Self {
        assert!(n <= MAX_POINT_N && r <= n);
        let first = if r == 0 { 0 } else { (1u64 << r) - 1 };
        SlicePoints {
            limit: 1u64 << n,
            next: Some(first),
        }
    }
}

impl Iterator for SlicePoints {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let x = self.next?;
        self.next = if x == 0 {
            None
        } else {
            // Gosper's hack
            let c = x & x.wrapping_neg();
            let rr = x + c;
            let nx = (((rr ^ x) >> 2) / c) | rr;
            (nx < self.limit).then_some(nx)
        };
        Some(x)
    }
}

pub fn slice_points(n: u32, r: u32) -> Vec<u64> {
    SlicePoints::new(n, r).collect()
}

pub(crate) fn low_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

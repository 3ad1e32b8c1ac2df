//! Small-n invariant suite comparing the fast paths with the brute-force
//! oracles.

use num::{BigRational, FromPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boolfn::{alternating_number, decompose_k_alternating, random_function, BooleanFunction};
use crate::error::{invalid, Result};
use crate::oracle::{
    brute_alternating, brute_expand_slice, brute_inner_sum, brute_norm_sq, brute_top_sets, chi_b_direct, cube_expand,
    MAX_BRUTE_SLICE_N,
};
use crate::seed;
use crate::slice_basis::{chi_b, chi_norm_sq, enumerate_top_sets, SliceIndex, TopSet};
use crate::slice_fourier::{
    expand, level_weights, shadow_inequality, spectral_influence, total_influence, SliceFunction,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Largest dimension checked; at most 8.
    pub max_n: u32,
    /// Random functions per randomized check.
    pub samples: u32,
    pub seed: u64,
    /// Multiplies every closed-form norm by `1 + p` (sabotage fixture).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_perturbation: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_n: 7,
            samples: 50,
            seed: 0,
            norm_perturbation: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

struct Check {
    name: &'static str,
    cases: u64,
    failure: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            cases: 0,
            failure: None,
        }
    }

    fn case(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(detail());
        }
    }

    fn done(self) -> CheckResult {
        CheckResult {
            name: self.name.into(),
            passed: self.failure.is_none(),
            cases: self.cases,
            detail: self.failure,
        }
    }
}

fn random_slice_function(s: SliceIndex, rng: &mut seed::Rng) -> SliceFunction {
    SliceFunction::from_fn(s, |_| if rng.random::<bool>() { 1 } else { -1 }).expect("slice fits")
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.max_n > MAX_BRUTE_SLICE_N {
        return invalid(format!("max_n={} exceeds the oracle cap {MAX_BRUTE_SLICE_N}", opts.max_n));
    }
    let max_n = opts.max_n;
    let scale = BigRational::from_f64(1.0 + opts.norm_perturbation.unwrap_or(0.0))
        .ok_or_else(|| crate::Error::InvalidArgument("norm perturbation is not finite".into()))?;
    let mut rng = seed::rng(opts.seed);
    let mut checks = Vec::new();

    let mut c = Check::new("top sets match the definition");
    for n in 0..=max_n {
        for d in 0..=n / 2 {
            let fast: Vec<Vec<u32>> = enumerate_top_sets(n, d)?.into_iter().map(Vec::from).collect();
            c.case(fast == brute_top_sets(n, d), || format!("n={n} d={d}"));
        }
    }
    checks.push(c.done());

    let mut c = Check::new("product-form chi_B equals the defining sum");
    for n in 1..=max_n {
        for b in crate::oracle::brute_top_sets_up_to(n, n / 2) {
            let t = TopSet::new(b.clone())?;
            for x in 0..1u64 << n {
                c.case(chi_b(&t, x) == chi_b_direct(n, &b, x) as i128, || {
                    format!("n={n} B={b:?} x={x:#b}")
                });
            }
        }
    }
    checks.push(c.done());

    let mut norms = Check::new("closed-form norms equal slice averages");
    let mut orth = Check::new("basis is orthogonal and complete");
    for n in 1..=max_n {
        for r in 0..=n {
            let s = SliceIndex::new(n, r)?;
            let basis = crate::oracle::brute_top_sets_up_to(n, r.min(n - r));
            orth.case(basis.len() as u128 == s.size(), || format!("n={n} r={r}: {} elements", basis.len()));
            for (i, b) in basis.iter().enumerate() {
                let closed = chi_norm_sq(&TopSet::new(b.clone())?, s)? * &scale;
                norms.case(closed == brute_norm_sq(b, s), || format!("n={n} r={r} B={b:?}"));
                for c2 in &basis[i + 1..] {
                    orth.case(brute_inner_sum(b, c2, s) == 0, || format!("n={n} r={r} {b:?} vs {c2:?}"));
                }
            }
        }
    }
    checks.push(norms.done());
    checks.push(orth.done());

    let mut dual = Check::new("fast expansion equals the Gram solve");
    let mut pars = Check::new("Parseval on slices");
    let mut infl = Check::new("spectral influence equals pair influence");
    let mut shadow = Check::new("shadow inequality");
    for _ in 0..opts.samples {
        let n = rng.random_range(1..=max_n.max(1));
        let r = rng.random_range(0..=n);
        let s = SliceIndex::new(n, r)?;
        let g = random_slice_function(s, &mut rng);
        let fast = expand(&g)?;
        let slow = brute_expand_slice(&g)?;
        let worst = slow
            .terms
            .iter()
            .map(|t| fast.coefficient(&t.top_set).map_or(f64::INFINITY, |c| (c - t.coeff).abs()))
            .fold(0.0, f64::max);
        dual.case(worst <= 1e-9 && fast.terms.len() == slow.terms.len(), || {
            format!("n={n} r={r}: max discrepancy {worst:e}")
        });
        let p = 1.0 + opts.norm_perturbation.unwrap_or(0.0);
        let total: f64 = level_weights(&fast).iter().sum::<f64>() * p;
        pars.case((total - 1.0).abs() <= 1e-9, || format!("n={n} r={r}: sum W^d = {total}"));
        let (a, b) = (total_influence(&g), spectral_influence(&fast) * p);
        infl.case((a - b).abs() <= 1e-9, || format!("n={n} r={r}: {a} vs {b}"));
        if 0 < r && r < n {
            let chk = shadow_inequality(&g)?;
            shadow.case(chk.holds, || format!("n={n} r={r}"));
        }
    }
    checks.push(dual.done());
    checks.push(pars.done());
    checks.push(infl.done());
    checks.push(shadow.done());

    let mut alt = Check::new("alternating number equals the chain maximum");
    let mut dec = Check::new("decomposition reproduces f");
    let chain_n = max_n.min(4);
    for id in 0..1u64 << (1u64 << chain_n) {
        let f = BooleanFunction::from_words(chain_n, vec![id])?;
        let a = alternating_number(&f);
        alt.case(brute_alternating(&f)? == a, || format!("n={chain_n} table={id:#x}"));
        let k = decompose_k_alternating(&f)?;
        dec.case(
            k.combined() == &f && k.parts().iter().all(BooleanFunction::is_monotone) && k.k() == a as usize,
            || format!("n={chain_n} table={id:#x}"),
        );
    }
    checks.push(alt.done());
    checks.push(dec.done());

    let mut cube = Check::new("cube transform is Parseval and invertible");
    for i in 0..opts.samples.min(20) {
        let f = random_function(max_n, seed::derive(opts.seed, 1, i as u64))?;
        let e = cube_expand(&f)?;
        let ok = (e.parseval() - 1.0).abs() <= 1e-12 && e.to_function().ok().as_ref() == Some(&f);
        cube.case(ok, || format!("draw {i}"));
    }
    checks.push(cube.done());

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        options: opts.clone(),
        passed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_suite_passes() {
        let rep = run(&VerifyOptions {
            max_n: 6,
            samples: 30,
            ..VerifyOptions::default()
        })
        .unwrap();
        assert!(rep.passed, "{:#?}", rep.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        assert!(rep.checks.iter().all(|c| c.cases > 0));
    }

    #[test]
    fn perturbed_norms_fail() {
        let rep = run(&VerifyOptions {
            max_n: 5,
            samples: 10,
            norm_perturbation: Some(1e-6),
            ..VerifyOptions::default()
        })
        .unwrap();
        assert!(!rep.passed);
        let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"closed-form norms equal slice averages"), "{failed:?}");
    }

    #[test]
    fn cap_is_enforced() {
        assert!(run(&VerifyOptions {
            max_n: 9,
            ..VerifyOptions::default()
        })
        .is_err());
    }
}

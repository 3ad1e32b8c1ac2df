//! Subcommands of the `kmono` binary.
//!
//! Every command takes its parameters from flags or from a JSON file given
//! by `--config`; flags win. Reports are JSON and embed the resolved
//! configuration and [`kmono::FORMAT_VERSION`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use kmono::boolfn::{
    alternating_number, random_function, random_k_monotone, BooleanFunction, MonotoneSpec,
};
use kmono::distinguisher;
use kmono::estimator::{Accuracy, Estimation, ExampleStream};
use kmono::io::{parse_function_file, table_to_bytes, write_kmonotone, FunctionFile};
use kmono::learner::{self, error_decomposition, evaluate_hypothesis, Hypothesis, LearnerParams};
use kmono::oracle::conjecture_scan;
use kmono::slice_fourier::{expand_to_degree, level_weights, restrict, spectral_influence, total_influence};
use kmono::{seed, verify, FORMAT_VERSION};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

/// Largest dimension `expand` accepts.
pub const EXPAND_MAX_N: u32 = 16;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::VerifyFailed(_) => EXIT_VERIFY,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::VerifyFailed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<kmono::Error> for CliError {
    fn from(e: kmono::Error) -> Self {
        match e {
            kmono::Error::InvalidArgument(_) | kmono::Error::DimensionTooLarge { .. } | kmono::Error::ConstantFunction => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "kmono", version, about = "Fourier analysis on hypercube slices and k-monotone learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a function file.
    Gen(GenArgs),
    /// Dump per-slice Young-Fourier expansions as CSV.
    Expand(ExpandArgs),
    /// Estimate the distinguishing advantage on a k-monotone family.
    Distinguish(DistinguishArgs),
    /// Run the weak learner and evaluate its hypotheses exactly.
    Learn(LearnArgs),
    /// Evaluate a stored hypothesis against a stored function.
    EvalHypothesis(EvalArgs),
    /// Scan low-level cube Fourier coefficients of k-monotone functions.
    ScanConjecture(ScanArgs),
    /// Run the small-n invariant suite against the brute-force oracles.
    Verify(VerifyArgs),
}

fn parse_json<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

fn parse_spec(s: &str) -> Result<MonotoneSpec, String> {
    parse_json(s)
}

/// `desk-scale`, `absolute:EPS` or `asymptotic:C`.
pub fn parse_accuracy(s: &str) -> Result<Accuracy, String> {
    let (mode, arg) = s.split_once(':').unwrap_or((s, ""));
    let num = || arg.parse::<f64>().map_err(|e| format!("bad accuracy value {arg:?}: {e}"));
    match mode {
        "desk-scale" if arg.is_empty() => Ok(Accuracy::DeskScale),
        "absolute" => Ok(Accuracy::Absolute { epsilon: num()? }),
        "asymptotic" => Ok(Accuracy::Asymptotic { c: num()? }),
        _ => Err(format!("unknown accuracy {s:?}; use desk-scale, absolute:EPS or asymptotic:C")),
    }
}

fn parse_estimation(s: &str) -> Result<Estimation, String> {
    parse_json(&format!("{s:?}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    KMonotone,
    Random,
    Majority,
    Parity,
    Constant,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<GenKind>,
    /// Monotone family as JSON, e.g. '{"kind":"monotone-dnf","clauses":4,"width":3}'.
    #[arg(long, value_parser = parse_spec)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<MonotoneSpec>,
    /// Sign of the constant function.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Highest degree kept; defaults to the full expansion.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    /// Slices to expand; defaults to all.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slices: Option<Vec<u32>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    KMonotone,
    Constant,
    Random,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistinguishArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[arg(long, value_parser = parse_spec)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<MonotoneSpec>,
    /// `desk-scale`, `absolute:EPS` or `asymptotic:C`.
    #[arg(long, value_parser = parse_accuracy)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<Accuracy>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// `exact` or `sampled`.
    #[arg(long, value_parser = parse_estimation)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimation: Option<Estimation>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accept_threshold: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnArgs {
    /// Learn one stored function instead of generated draws.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_spec)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<MonotoneSpec>,
    #[arg(long, value_parser = parse_accuracy)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<Accuracy>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long, value_parser = parse_estimation)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimation: Option<Estimation>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Where to store the hypothesis (single-function runs only).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Functions drawn when the scan is not exhaustive.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_spec)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<MonotoneSpec>,
    /// CSV of per-function records.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// JSON summary.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Test fixture: scale the closed-form norms by `1 + p`.
    #[arg(long, hide = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_perturbation: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Lays the flags over the `--config` file.
pub fn resolve<T: Serialize + DeserializeOwned>(args: &T, config: Option<&Path>) -> CliResult<T> {
    let mut base = match config {
        Some(p) => {
            let s = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<Value>(&s).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => json!({}),
    };
    let Some(obj) = base.as_object_mut() else {
        return Err(CliError::Usage("config file must hold a JSON object".into()));
    };
    if let Value::Object(flags) = serde_json::to_value(args).map_err(runtime)? {
        obj.extend(flags);
    }
    serde_json::from_value(base).map_err(|e| CliError::Usage(format!("config: {e}")))
}

fn need<T: Copy>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("--{name} is required")))
}

fn need_ref<'a, T>(v: &'a Option<T>, name: &str) -> CliResult<&'a T> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("--{name} is required")))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(runtime),
    }
}

fn emit_json(out: Option<&Path>, v: &Value) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(runtime)?;
    s.push('\n');
    emit(out, s.as_bytes())
}

fn load_function(p: &Path) -> CliResult<FunctionFile> {
    let bytes = fs::read(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
    Ok(parse_function_file(&bytes)?)
}

fn report(command: &str, config: &impl Serialize, body: Value) -> CliResult<Value> {
    Ok(json!({
        "format_version": FORMAT_VERSION,
        "command": command,
        "config": serde_json::to_value(config).map_err(runtime)?,
        "result": body,
    }))
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&resolve(&a, a.config.as_deref())?),
        Command::Expand(a) => cmd_expand(&resolve(&a, a.config.as_deref())?),
        Command::Distinguish(a) => cmd_distinguish(&resolve(&a, a.config.as_deref())?),
        Command::Learn(a) => cmd_learn(&resolve(&a, a.config.as_deref())?),
        Command::EvalHypothesis(a) => cmd_eval(&resolve(&a, a.config.as_deref())?),
        Command::ScanConjecture(a) => cmd_scan(&resolve(&a, a.config.as_deref())?),
        Command::Verify(a) => cmd_verify(&resolve(&a, a.config.as_deref())?),
    }
}

pub fn cmd_gen(a: &GenArgs) -> CliResult<()> {
    let n = need(a.n, "n")?;
    let seed = need(a.seed, "seed")?;
    let out = need_ref(&a.out, "out")?;
    let kind = a.kind.unwrap_or(GenKind::KMonotone);
    let (bytes, summary) = match kind {
        GenKind::KMonotone => {
            let k = need(a.k, "k")?;
            let spec = a.spec.clone().unwrap_or_default();
            let f = random_k_monotone(n, k, &spec, seed)?;
            let mut buf = Vec::new();
            write_kmonotone(&mut buf, &f, Some(&spec), Some(seed))?;
            let a_f = alternating_number(f.combined());
            (buf, json!({ "n": n, "k": k, "alternating_number": a_f }))
        }
        other => {
            let f = match other {
                GenKind::Random => random_function(n, seed)?,
                GenKind::Majority => BooleanFunction::majority(n)?,
                GenKind::Parity => BooleanFunction::parity(n)?,
                GenKind::Constant => {
                    let s = a.sign.unwrap_or(1);
                    if s != 1 && s != -1 {
                        return Err(CliError::Usage(format!("--sign must be 1 or -1, got {s}")));
                    }
                    BooleanFunction::constant(n, s)?
                }
                GenKind::KMonotone => unreachable!(),
            };
            let a_f = alternating_number(&f);
            (table_to_bytes(&f), json!({ "n": n, "alternating_number": a_f }))
        }
    };
    emit(Some(out), &bytes)?;
    let mut s = serde_json::to_string(&summary).map_err(runtime)?;
    s.push('\n');
    emit(None, s.as_bytes())
}

#[derive(Serialize)]
struct ExpandRow {
    kind: &'static str,
    r: u32,
    degree: Option<u32>,
    top_set: String,
    coefficient: Option<f64>,
    norm_sq: Option<f64>,
    weight: f64,
}

pub fn cmd_expand(a: &ExpandArgs) -> CliResult<()> {
    let input = need_ref(&a.input, "input")?;
    let file = load_function(input)?;
    let f = file.function();
    let n = f.n();
    if n > EXPAND_MAX_N {
        return Err(CliError::Usage(format!("expand supports n <= {EXPAND_MAX_N}, file has n={n}")));
    }
    let slices: Vec<u32> = a.slices.clone().unwrap_or_else(|| (0..=n).collect());
    if let Some(r) = slices.iter().find(|&&r| r > n) {
        return Err(CliError::Usage(format!("slice {r} exceeds n={n}")));
    }
    let expansions = slices
        .par_iter()
        .map(|&r| {
            let g = restrict(f, r)?;
            let e = expand_to_degree(&g, a.degree.unwrap_or(n))?;
            Ok((r, total_influence(&g), e))
        })
        .collect::<kmono::Result<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for (r, infl, e) in &expansions {
        for t in &e.terms {
            w.serialize(ExpandRow {
                kind: "coeff",
                r: *r,
                degree: Some(t.top_set.degree()),
                top_set: t.top_set.label(),
                coefficient: Some(t.coeff),
                norm_sq: Some(t.norm_sq),
                weight: t.weight(),
            })
            .map_err(runtime)?;
        }
        for (d, wd) in level_weights(e).iter().enumerate() {
            w.serialize(ExpandRow {
                kind: "level",
                r: *r,
                degree: Some(d as u32),
                top_set: String::new(),
                coefficient: None,
                norm_sq: None,
                weight: *wd,
            })
            .map_err(runtime)?;
        }
        let full = e.max_degree == e.slice.max_degree();
        w.serialize(ExpandRow {
            kind: "influence",
            r: *r,
            degree: None,
            top_set: String::new(),
            coefficient: full.then(|| spectral_influence(e)),
            norm_sq: None,
            weight: *infl,
        })
        .map_err(runtime)?;
    }
    let bytes = w.into_inner().map_err(runtime)?;
    emit(a.out.as_deref(), &bytes)
}

pub fn cmd_distinguish(a: &DistinguishArgs) -> CliResult<()> {
    let n = need(a.n, "n")?;
    let seed = need(a.seed, "seed")?;
    let trials = need(a.trials, "trials")?;
    let k = a.k.unwrap_or(1);
    let mut p = distinguisher::k_monotone_params(n, k)?;
    p.t = a.t.unwrap_or(p.t);
    p.d = a.d.unwrap_or(p.d);
    p.accuracy = a.accuracy.unwrap_or(p.accuracy);
    p.delta = a.delta.unwrap_or(p.delta);
    p.estimation = a.estimation.unwrap_or(p.estimation);
    p.accept_threshold = a.accept_threshold.unwrap_or(p.accept_threshold);
    p.seed = seed;
    let family = a.family.unwrap_or(Family::KMonotone);
    let spec = a.spec.clone().unwrap_or_default();
    let rep = distinguisher::advantage(
        n,
        |s| match family {
            Family::KMonotone => Ok(random_k_monotone(n, k as usize, &spec, s)?.into_combined()),
            Family::Constant => BooleanFunction::constant(n, 1),
            Family::Random => random_function(n, s),
        },
        &p,
        trials,
        seed,
    )?;
    let body = json!({ "params": p, "advantage": rep });
    emit_json(a.out.as_deref(), &report("distinguish", a, body)?)
}

#[derive(Serialize)]
struct LearnTrial {
    index: u64,
    function_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<learner::ErrorDecomposition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<learner::LearnerReport>,
}

pub fn cmd_learn(a: &LearnArgs) -> CliResult<()> {
    let seed = need(a.seed, "seed")?;
    let spec = a.spec.clone().unwrap_or_default();
    let (n, k, functions): (u32, u32, Vec<(Option<u64>, BooleanFunction)>) = match &a.input {
        Some(p) => {
            let file = load_function(p)?;
            let k = match &file {
                FunctionFile::KMonotone(h, _) => a.k.unwrap_or(h.k.max(1) as u32),
                FunctionFile::Table(_) => a.k.unwrap_or(1),
            };
            let f = file.function().clone();
            (f.n(), k, vec![(None, f)])
        }
        None => {
            let n = need(a.n, "n")?;
            let k = need(a.k, "k")?;
            let trials = a.trials.unwrap_or(1);
            let fs = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let s = seed::derive(seed, 10, i);
                    Ok((Some(s), random_k_monotone(n, k as usize, &spec, s)?.into_combined()))
                })
                .collect::<kmono::Result<Vec<_>>>()?;
            (n, k, fs)
        }
    };
    let mut p = LearnerParams::for_k_monotone(n, k)?;
    p.t = a.t.unwrap_or(p.t);
    p.d = a.d.unwrap_or(p.d);
    p.accuracy = a.accuracy.unwrap_or(p.accuracy);
    p.delta = a.delta.unwrap_or(p.delta);
    p.estimation = a.estimation.unwrap_or(p.estimation);
    p.validate(n)?;
    let results: Vec<(LearnTrial, Option<Hypothesis>)> = functions
        .into_par_iter()
        .enumerate()
        .map(|(i, (fs, f))| {
            let i = i as u64;
            let mut trial_p = p;
            trial_p.seed = seed::derive(seed, 12, i);
            let mut stream = ExampleStream::from_table(Arc::new(f.clone()), seed::derive(seed, 11, i));
            match learner::learn(&mut stream, &trial_p).and_then(|rep| {
                let err = evaluate_hypothesis(&rep.hypothesis, &f)?;
                let dec = error_decomposition(&rep.hypothesis, &f)?;
                Ok((rep, err, dec))
            }) {
                Ok((rep, err, dec)) => {
                    let h = rep.hypothesis.clone();
                    (
                        LearnTrial {
                            index: i,
                            function_seed: fs,
                            error: None,
                            exact_error: Some(err),
                            decomposition: Some(dec),
                            report: Some(rep),
                        },
                        Some(h),
                    )
                }
                Err(e) => (
                    LearnTrial {
                        index: i,
                        function_seed: fs,
                        error: Some(e.to_string()),
                        exact_error: None,
                        decomposition: None,
                        report: None,
                    },
                    None,
                ),
            }
        })
        .collect();
    let bound = learner::weak_learning_bound(n, p.t);
    let errors: Vec<f64> = results.iter().filter_map(|(t, _)| t.exact_error).collect();
    let below = errors.iter().filter(|&&e| e <= bound).count();
    let mean = if errors.is_empty() {
        None
    } else {
        Some(errors.iter().sum::<f64>() / errors.len() as f64)
    };
    if let Some(path) = &a.hypothesis_out {
        if results.len() != 1 {
            return Err(CliError::Usage("--hypothesis-out needs a single function".into()));
        }
        let h = results[0]
            .1
            .as_ref()
            .ok_or_else(|| runtime(results[0].0.error.clone().unwrap_or_default()))?;
        emit(Some(path), h.to_json()?.as_bytes())?;
    }
    let trials: Vec<&LearnTrial> = results.iter().map(|(t, _)| t).collect();
    let body = json!({
        "params": p,
        "bound": bound,
        "runs": trials.len(),
        "completed": errors.len(),
        "below_bound": below,
        "mean_error": mean,
        "trials": trials,
    });
    emit_json(a.out.as_deref(), &report("learn", a, body)?)
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let hp = need_ref(&a.hypothesis, "hypothesis")?;
    let input = need_ref(&a.input, "input")?;
    let s = fs::read_to_string(hp).map_err(|e| runtime(format!("{}: {e}", hp.display())))?;
    let h = Hypothesis::from_json(&s)?;
    let file = load_function(input)?;
    let f = file.function();
    let body = json!({
        "error": evaluate_hypothesis(&h, f)?,
        "decomposition": error_decomposition(&h, f)?,
    });
    emit_json(a.out.as_deref(), &report("eval-hypothesis", a, body)?)
}

pub fn cmd_scan(a: &ScanArgs) -> CliResult<()> {
    let n = need(a.n, "n")?;
    let k = need(a.k, "k")?;
    let seed = need(a.seed, "seed")?;
    let spec = a.spec.clone().unwrap_or_default();
    let rep = conjecture_scan(n, k, a.budget.unwrap_or(100), seed, &spec)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rep.records {
        w.serialize(r).map_err(runtime)?;
    }
    let mut bytes = format!("# {}\n", rep.label).into_bytes();
    bytes.extend(w.into_inner().map_err(runtime)?);
    emit(a.out.as_deref(), &bytes)?;
    let body = json!({
        "label": rep.label,
        "n": rep.n,
        "k": rep.k,
        "exhaustive": rep.exhaustive,
        "scanned": rep.scanned,
        "min_max_low_level": rep.min_max_low_level,
        "min_max_low_level_nonempty": rep.min_max_low_level_nonempty,
        "max_min_support": rep.max_min_support,
    });
    if let Some(p) = &a.summary {
        emit_json(Some(p), &report("scan-conjecture", a, body)?)?;
    }
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs) -> CliResult<()> {
    let defaults = verify::VerifyOptions::default();
    let opts = verify::VerifyOptions {
        max_n: a.max_n.unwrap_or(defaults.max_n),
        samples: a.samples.unwrap_or(defaults.samples),
        seed: a.seed.unwrap_or(defaults.seed),
        norm_perturbation: a.norm_perturbation,
    };
    let rep = verify::run(&opts)?;
    let mut text = String::new();
    for c in &rep.checks {
        text.push_str(&format!(
            "{} {} ({} cases){}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.detail.as_ref().map(|d| format!(": {d}")).unwrap_or_default()
        ));
    }
    eprint!("{text}");
    if let Some(p) = &a.out {
        emit_json(Some(p), &report("verify", a, serde_json::to_value(&rep).map_err(runtime)?)?)?;
    }
    if rep.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::VerifyFailed(failed.join(", ")))
    }
}

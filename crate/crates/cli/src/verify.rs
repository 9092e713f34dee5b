//! Randomized and file-driven differential verification.

use std::fmt::Write as _;
use std::path::Path;

use drmmm_core::hw::{hw_run, Fault, HwConfig};
use drmmm_core::{
    check_quotient_consistency, classical_mmm, drmmm_mul, make_context, montgomery_oracle,
    MontgomeryContext, Natural,
};
use num_bigint::RandBigInt;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::VerifyArgs;
use crate::error::{CliError, CliResult, ErrorCode};
use crate::hexio::{parse_hex, to_hex};

/// Radices used for the quotient-consistency cross check.
const CONSISTENCY_RADICES: [usize; 4] = [2, 4, 8, 16];

/// One line of a vector file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorRecord {
    #[serde(rename = "M")]
    pub m: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    pub k: usize,
    pub t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
}

/// Parses JSON lines; blank lines are skipped.
pub fn parse_vector_file(text: &str) -> CliResult<Vec<VectorRecord>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: VectorRecord = serde_json::from_str(line)
            .map_err(|e| CliError::new(ErrorCode::Parse, format!("vectors line {}: {e}", n + 1)))?;
        let field = |name: &str| format!("vectors line {} {name}", n + 1);
        parse_hex(&field("M"), &rec.m)?;
        parse_hex(&field("A"), &rec.a)?;
        parse_hex(&field("B"), &rec.b)?;
        if let Some(e) = &rec.expected {
            parse_hex(&field("expected"), e)?;
        }
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: usize,
    pub widths: Vec<usize>,
    pub ks: Vec<usize>,
    pub ts: Vec<usize>,
    pub vectors: Vec<VectorRecord>,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl VerifyOptions {
    pub fn from_args(args: &VerifyArgs, seed: u64) -> CliResult<Self> {
        let vectors = match &args.vectors {
            Some(path) => parse_vector_file(&read(path)?)?,
            None => Vec::new(),
        };
        Ok(Self {
            seed,
            trials: args.trials,
            widths: args.widths.clone(),
            ks: args.k.clone(),
            ts: args.t.clone(),
            vectors,
            fault: None,
        })
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(ErrorCode::Io, format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    /// `trial N` or `vector N`.
    pub case: String,
    pub bits: usize,
    pub k: usize,
    pub t: usize,
    pub modulus: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub vectors: usize,
    pub passed: usize,
    pub failed: usize,
    /// Position-weighted sum of the low 64 bits of every passing output, as
    /// 16 hex digits; any change in any result changes it.
    pub digest: String,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    pub fn render_text(&self, opts: &VerifyOptions) -> String {
        let list = |v: &[usize]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = format!(
            "verify seed={} trials={} widths={} k={} t={} vectors={}\n",
            self.seed,
            self.trials,
            list(&opts.widths),
            list(&opts.ks),
            list(&opts.ts),
            self.vectors
        );
        for f in &self.failures {
            writeln!(
                out,
                "FAIL {} bits={} k={} t={} M={}: {}",
                f.case, f.bits, f.k, f.t, f.modulus, f.reason
            )
            .unwrap();
        }
        writeln!(out, "digest {}", self.digest).unwrap();
        writeln!(
            out,
            "result {}/{} pass, {} fail",
            self.passed,
            self.trials + self.vectors,
            self.failed
        )
        .unwrap();
        out
    }
}

struct Case {
    ctx: MontgomeryContext,
    a: Natural,
    b: Natural,
    radices: (usize, usize),
    expected: Option<Natural>,
}

/// Runs every model and check on one case; `Err` carries the reason.
fn check_case(case: &Case, config: &HwConfig) -> Result<Natural, String> {
    let Case { ctx, a, b, .. } = case;
    let want = montgomery_oracle(ctx, a, b);
    if let Some(e) = &case.expected {
        if e != &want {
            return Err(format!(
                "oracle {} differs from expected {}",
                to_hex(&want),
                to_hex(e)
            ));
        }
    }
    let classical = classical_mmm(ctx, a, b).map_err(|e| format!("classical: {e}"))?;
    if classical.output != want {
        return Err("classical output differs from the oracle".to_string());
    }
    let (pipelined, _) = drmmm_mul(ctx, a, b).map_err(|e| format!("drmmm: {e}"))?;
    if pipelined.output != want {
        return Err("drmmm output differs from the oracle".to_string());
    }
    if pipelined.quotients != classical.quotients {
        return Err("drmmm quotient digits differ from the classical trace".to_string());
    }
    let (hw, _, _) = hw_run(ctx, a, b, config).map_err(|e| format!("hw: {e}"))?;
    if hw.output != want {
        return Err("hw output differs from the oracle".to_string());
    }
    let (k1, k2) = case.radices;
    match check_quotient_consistency(ctx.modulus(), a, b, k1, k2) {
        Ok(true) => Ok(want),
        Ok(false) => Err(format!("quotient sums differ between k={k1} and k={k2}")),
        Err(e) => Err(format!("quotient consistency: {e}")),
    }
}

fn random_case(opts: &VerifyOptions, trial: usize) -> CliResult<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(trial as u64);
    let pick = |rng: &mut ChaCha8Rng, v: &[usize]| *v.choose(rng).expect("non-empty");
    let bits = pick(&mut rng, &opts.widths);
    let k = pick(&mut rng, &opts.ks);
    let t = pick(&mut rng, &opts.ts);
    let k1 = pick(&mut rng, &CONSISTENCY_RADICES);
    let k2 = pick(&mut rng, &CONSISTENCY_RADICES);
    let m = rng.gen_biguint(bits as u64) | Natural::one() | (Natural::one() << (bits - 1));
    let a = rng.gen_biguint_below(&m);
    let b = rng.gen_biguint_below(&m);
    Ok(Case {
        ctx: make_context(m, k, t)?,
        a,
        b,
        radices: (k1, k2),
        expected: None,
    })
}

fn vector_case(rec: &VectorRecord) -> CliResult<Case> {
    let ctx = make_context(parse_hex("M", &rec.m)?, rec.k, rec.t)?;
    let a = parse_hex("A", &rec.a)?;
    let b = parse_hex("B", &rec.b)?;
    let expected = rec
        .expected
        .as_deref()
        .map(|e| parse_hex("expected", e))
        .transpose()?;
    Ok(Case {
        ctx,
        a,
        b,
        radices: (rec.k, 2),
        expected,
    })
}

fn validate(opts: &VerifyOptions) -> CliResult<()> {
    let bad = |msg: String| Err(CliError::new(ErrorCode::Param, msg));
    if opts.trials > 0 {
        if opts.widths.is_empty() || opts.ks.is_empty() || opts.ts.is_empty() {
            return bad("widths, k and t sets must be non-empty".to_string());
        }
        if let Some(w) = opts.widths.iter().find(|&&w| w < 2) {
            return bad(format!("width {w} is below 2 bits"));
        }
        // Surface parameter errors once instead of once per trial.
        for &k in &opts.ks {
            for &t in &opts.ts {
                make_context(Natural::from(3u32), k, t)?;
            }
        }
    }
    Ok(())
}

fn config_for(ctx: &MontgomeryContext, fault: Option<Fault>) -> HwConfig {
    let config = if ctx.k() == 4 && ctx.t() == 1 {
        HwConfig::merged()
    } else {
        HwConfig::default()
    };
    match fault {
        Some(f) => config.with_fault(f),
        None => config,
    }
}

pub fn run_verify(opts: &VerifyOptions) -> CliResult<VerifyReport> {
    validate(opts)?;
    let trial_results: Vec<Outcome> = (0..opts.trials)
        .into_par_iter()
        .map(|i| {
            let case = random_case(opts, i);
            outcome(format!("trial {i}"), case, opts.fault)
        })
        .collect();
    let vector_results: Vec<Outcome> = opts
        .vectors
        .par_iter()
        .enumerate()
        .map(|(i, rec)| outcome(format!("vector {}", i + 1), vector_case(rec), opts.fault))
        .collect();

    let mut digest = 0u64;
    let mut failures = Vec::new();
    for (i, r) in trial_results.into_iter().chain(vector_results).enumerate() {
        match r {
            Ok(low) => digest = digest.wrapping_add(low.wrapping_mul(2 * i as u64 + 1)),
            Err(f) => failures.push(f),
        }
    }
    let total = opts.trials + opts.vectors.len();
    Ok(VerifyReport {
        seed: opts.seed,
        trials: opts.trials,
        vectors: opts.vectors.len(),
        passed: total - failures.len(),
        failed: failures.len(),
        digest: format!("{digest:016x}"),
        failures,
    })
}

type Outcome = Result<u64, Failure>;

fn outcome(name: String, case: CliResult<Case>, fault: Option<Fault>) -> Outcome {
    match case {
        Ok(case) => match check_case(&case, &config_for(&case.ctx, fault)) {
            Ok(out) => Ok(out.iter_u64_digits().next().unwrap_or(0)),
            Err(reason) => Err(Failure {
                case: name,
                bits: case.ctx.modulus_bits(),
                k: case.ctx.k(),
                t: case.ctx.t(),
                modulus: to_hex(case.ctx.modulus()),
                reason,
            }),
        },
        Err(e) => Err(Failure {
            case: name,
            bits: 0,
            k: 0,
            t: 0,
            modulus: String::new(),
            reason: e.to_string(),
        }),
    }
}

/// Report text (or JSON) and whether every case passed.
pub fn cmd_verify(opts: &VerifyOptions, json: bool) -> CliResult<(String, bool)> {
    let report = run_verify(opts)?;
    let ok = report.failed == 0;
    let text = if json {
        format!(
            "{}\n",
            serde_json::to_string(&report).expect("report serializes")
        )
    } else {
        report.render_text(opts)
    };
    Ok((text, ok))
}

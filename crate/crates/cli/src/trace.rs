//! JSON trace documents.

use std::path::Path;

use drmmm_core::hw::{hw_run, HwConfig};
use drmmm_core::{classical_mmm_traced, drmmm_mul, MmmResult};
use serde::{Deserialize, Serialize};

use crate::args::{Mode, TraceArgs};
use crate::commands::{hw_config, parse_operands, CyclesJson, LevelsJson, Operands};
use crate::error::{CliError, CliResult, ErrorCode};
use crate::hexio::to_hex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    #[serde(rename = "M")]
    pub m: String,
    pub k: usize,
    pub t: usize,
    pub w: usize,
    pub w_prime: usize,
    pub mode: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceCarry {
    pub c_l: bool,
    pub c_m: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceIteration {
    pub i: usize,
    /// One term for the exact models, three for the datapath.
    pub z_terms: Vec<String>,
    pub q_hat: String,
    /// Datapath only.
    pub carry: Option<TraceCarry>,
    pub assertions_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub output: String,
    pub pre_reduction: String,
    /// Datapath only.
    pub cycles: Option<serde_json::Value>,
    /// Datapath only.
    pub levels: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub header: TraceHeader,
    pub iterations: Vec<TraceIteration>,
    pub summary: TraceSummary,
}

fn summary(res: &MmmResult) -> TraceSummary {
    TraceSummary {
        output: to_hex(&res.output),
        pre_reduction: to_hex(&res.pre_reduction),
        cycles: None,
        levels: None,
    }
}

fn single(i: usize, z: &drmmm_core::Natural, q: u64) -> TraceIteration {
    TraceIteration {
        i,
        z_terms: vec![to_hex(z)],
        q_hat: format!("{q:x}"),
        carry: None,
        assertions_passed: true,
    }
}

/// Every inline check aborts the run, so each recorded iteration passed.
pub fn build_trace(ops: &Operands, mode: Mode, config: &HwConfig) -> CliResult<TraceDocument> {
    let header = TraceHeader {
        m: to_hex(ops.ctx.modulus()),
        k: ops.ctx.k(),
        t: ops.ctx.t(),
        w: config.window,
        w_prime: config.window_inverse,
        mode: mode.name().to_string(),
    };
    let (iterations, summary) = match mode {
        Mode::Classical => {
            let (res, steps) = classical_mmm_traced(&ops.ctx, &ops.a, &ops.b)?;
            let its = steps.iter().map(|s| single(s.i, &s.z, s.q)).collect();
            (its, summary(&res))
        }
        Mode::Drmmm => {
            let (res, trace) = drmmm_mul(&ops.ctx, &ops.a, &ops.b)?;
            let its = trace
                .steps
                .iter()
                .map(|s| single(s.i, &s.z, s.q_hat))
                .collect();
            (its, summary(&res))
        }
        Mode::Hw => {
            let (res, cycles, trace) = hw_run(&ops.ctx, &ops.a, &ops.b, config)?;
            let its = trace
                .records
                .iter()
                .map(|r| TraceIteration {
                    i: r.i,
                    z_terms: r.z_terms.iter().map(to_hex).collect(),
                    q_hat: format!("{:x}", r.q_hat),
                    carry: Some(TraceCarry {
                        c_l: r.carry.low,
                        c_m: r.carry.high,
                    }),
                    assertions_passed: true,
                })
                .collect();
            let mut s = summary(&res);
            s.cycles = Some(serde_json::to_value(CyclesJson::from(&cycles)).expect("serializes"));
            s.levels =
                Some(serde_json::to_value(LevelsJson::from(&cycles.levels)).expect("serializes"));
            (its, s)
        }
    };
    Ok(TraceDocument {
        header,
        iterations,
        summary,
    })
}

pub fn cmd_trace(args: &TraceArgs) -> CliResult<String> {
    let ops = parse_operands(&args.operands)?;
    let doc = build_trace(&ops, args.operands.mode, &hw_config(&args.operands.hw))?;
    let mut text = serde_json::to_string_pretty(&doc).expect("trace serializes");
    text.push('\n');
    match &args.out {
        Some(path) => {
            write(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| CliError::new(ErrorCode::Io, format!("{}: {e}", path.display())))
}

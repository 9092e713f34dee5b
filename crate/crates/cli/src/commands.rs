//! `mul`, `tables` and `analyze`.

use std::fmt::Write as _;
use std::str::FromStr;

use drmmm_core::drmmm::{
    dependence_bound, estimate_t_max, latency_gain, latency_proposed, latency_serial,
    proposed_iteration_delay, serial_iteration_delay, LatencyParams,
};
use drmmm_core::hw::{
    build_encoding_table, carry_lut_inits, estimate_t_max_levels, format_init, lut_init_matrix,
    CycleReport, EncodingKind, HwConfig, LevelReport, QuotientEncoding,
};
use drmmm_core::reference::mont_mul_corrected;
use drmmm_core::{
    classical_mmm, drmmm_mul, hw_run, make_context, MmmResult, MontgomeryContext, Natural,
};
use num_traits::{One, Signed};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    AnalyzeArgs, Encoding, HwArgs, Mode, MulArgs, OperandArgs, TableFormat, TableKind, TablesArgs,
};
use crate::error::{CliError, CliResult, ErrorCode};
use crate::hexio::{parse_hex, to_hex};

pub(crate) type Rational = num_rational::BigRational;

pub fn hw_config(args: &HwArgs) -> HwConfig {
    let mut config = HwConfig::default().with_windows(args.window, args.window_inverse);
    if args.encoding == Encoding::Merged {
        config.encoding = QuotientEncoding::Merged;
    }
    config
}

pub struct Operands {
    pub ctx: MontgomeryContext,
    pub a: Natural,
    pub b: Natural,
}

pub fn parse_operands(args: &OperandArgs) -> CliResult<Operands> {
    let m = parse_hex("M", &args.m)?;
    let a = parse_hex("A", &args.a)?;
    let b = parse_hex("B", &args.b)?;
    let ctx = make_context(m, args.k, args.t)?;
    if &a >= ctx.modulus() || &b >= ctx.modulus() {
        return Err(drmmm_core::Error::OperandOutOfRange.into());
    }
    Ok(Operands { ctx, a, b })
}

pub fn run_mode(
    ops: &Operands,
    mode: Mode,
    config: &HwConfig,
) -> CliResult<(MmmResult, Option<CycleReport>)> {
    Ok(match mode {
        Mode::Classical => (classical_mmm(&ops.ctx, &ops.a, &ops.b)?, None),
        Mode::Drmmm => (drmmm_mul(&ops.ctx, &ops.a, &ops.b)?.0, None),
        Mode::Hw => {
            let (res, cycles, _) = hw_run(&ops.ctx, &ops.a, &ops.b, config)?;
            (res, Some(cycles))
        }
    })
}

pub fn cmd_mul(args: &MulArgs, json: bool) -> CliResult<String> {
    let ops = parse_operands(&args.operands)?;
    let (res, _) = run_mode(&ops, args.operands.mode, &hw_config(&args.operands.hw))?;
    let corrected = if args.corrected {
        Some(mont_mul_corrected(&ops.ctx, &ops.a, &ops.b)?)
    } else {
        None
    };
    if json {
        let mut doc = json!({ "output": to_hex(&res.output) });
        if let Some(c) = &corrected {
            doc["corrected"] = json!(to_hex(c));
        }
        return Ok(format!("{doc}\n"));
    }
    let mut out = format!("{}\n", to_hex(&res.output));
    if let Some(c) = &corrected {
        writeln!(out, "{}", to_hex(c)).unwrap();
    }
    Ok(out)
}

pub fn cmd_tables(args: &TablesArgs, json: bool) -> CliResult<String> {
    if args.carry_inits {
        let (low, high) = carry_lut_inits();
        return Ok(if json {
            format!(
                "{}\n",
                json!({ "c_l": format_init(low), "c_m": format_init(high) })
            )
        } else {
            format!("{}\n{}\n", format_init(low), format_init(high))
        });
    }
    let m_hex = args.m.as_deref().ok_or_else(|| {
        CliError::new(
            ErrorCode::Usage,
            "tables needs -M unless --carry-inits is given",
        )
    })?;
    let ctx = make_context(parse_hex("M", m_hex)?, args.k, args.t)?;
    let kind = match args.kind {
        TableKind::Im => EncodingKind::Modulus,
        TableKind::ImPrime => EncodingKind::Inverse,
        TableKind::Merged => EncodingKind::Merged,
    };
    let table = build_encoding_table(&ctx, args.window, kind)?;
    let lines: Vec<String> = match args.format {
        TableFormat::Hex => table.entries().iter().map(to_hex).collect(),
        TableFormat::Init => {
            let init = lut_init_matrix(&table);
            (0..init.rows().len()).map(|b| init.row_hex(b)).collect()
        }
    };
    if json {
        let key = match args.format {
            TableFormat::Hex => "entries",
            TableFormat::Init => "init_rows",
        };
        let doc = json!({ "kind": kind.name(), "window": args.window, key: lines });
        return Ok(format!("{doc}\n"));
    }
    Ok(match args.format {
        TableFormat::Hex => lines.iter().map(|l| format!("{l}\n")).collect(),
        TableFormat::Init => lines
            .iter()
            .enumerate()
            .map(|(b, l)| format!("INIT_{b}={l}\n"))
            .collect(),
    })
}

fn parse_delay(field: &str, s: &str) -> CliResult<Rational> {
    let v = Rational::from_str(s)
        .map_err(|_| CliError::new(ErrorCode::Parse, format!("{field}: not a rational: {s:?}")))?;
    if v.is_negative() {
        return Err(CliError::new(
            ErrorCode::Param,
            format!("{field}: delays must be non-negative"),
        ));
    }
    Ok(v)
}

#[derive(Debug, Serialize)]
struct StageJson {
    stage: usize,
    ops: Vec<String>,
    levels: usize,
    budget: Option<usize>,
}

#[derive(Debug, Serialize)]
pub(crate) struct LevelsJson {
    iteration_levels: usize,
    update_inputs: usize,
    update_tree: usize,
    stages: Vec<StageJson>,
    violations: Vec<String>,
    notes: Vec<String>,
}

impl From<&LevelReport> for LevelsJson {
    fn from(r: &LevelReport) -> Self {
        Self {
            iteration_levels: r.iteration_levels,
            update_inputs: r.update_inputs,
            update_tree: r.update_tree,
            stages: r
                .stages
                .iter()
                .map(|s| StageJson {
                    stage: s.stage,
                    ops: s.ops.iter().map(ToString::to_string).collect(),
                    levels: s.levels,
                    budget: s.budget,
                })
                .collect(),
            violations: r.violations.clone(),
            notes: r.notes.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub(crate) struct CyclesJson {
    iterations: usize,
    epilogue_cycles: usize,
    epilogue: &'static str,
    total_cycles: usize,
}

impl From<&CycleReport> for CyclesJson {
    fn from(c: &CycleReport) -> Self {
        Self {
            iterations: c.iterations,
            epilogue_cycles: c.epilogue_cycles,
            epilogue: if c.epilogue_fitted { "fitted" } else { "given" },
            total_cycles: c.total_cycles,
        }
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs, json: bool) -> CliResult<String> {
    if args.bits < 2 {
        return Err(CliError::new(ErrorCode::Param, "--bits must be at least 2"));
    }
    // Only the widths matter to the analysis, so any odd modulus of the
    // requested width will do.
    let m = (Natural::one() << (args.bits - 1)) | Natural::one();
    let ctx = make_context(m, args.k, args.t)?;
    let d = ctx.d() as u64;
    let t = ctx.t() as u64;

    let mut p = LatencyParams::new(0, 0, 0);
    p.t_m = parse_delay("--tm", &args.t_m)?;
    p.t_a = parse_delay("--ta", &args.t_a)?;
    p.t_red = parse_delay("--tred", &args.t_red)?;
    let delay_t_max = match (&args.t_u, &args.t_q) {
        (Some(u), Some(q)) => {
            let p = p
                .clone()
                .with_pipeline(parse_delay("--tu", u)?, parse_delay("--tq", q)?);
            Some(estimate_t_max(&p)?)
        }
        _ => None,
    };

    let mut config = HwConfig::default().with_windows(args.window, args.window_inverse);
    if let Some(e) = args.epilogue {
        config.epilogue_cycles = e;
        config.epilogue_fitted = false;
    }
    let cycles = CycleReport::new(&ctx, &config)?;
    let level_t_max = estimate_t_max_levels(args.k, args.window, args.window_inverse)?;

    let t_c = serial_iteration_delay(&p);
    let t_i = proposed_iteration_delay(&p);
    let serial = latency_serial(&p, d);
    let proposed = latency_proposed(&p, d, t);
    let gain = latency_gain(&p, d, t as i64);
    let bound = dependence_bound(ctx.modulus_bits(), ctx.k());

    if json {
        let doc = json!({
            "n_m": ctx.modulus_bits(),
            "k": ctx.k(),
            "t": ctx.t(),
            "d": d,
            "t_c": t_c.to_string(),
            "t_serial": serial.to_string(),
            "t_i": t_i.to_string(),
            "t_proposed": proposed.to_string(),
            "gain": gain.to_string(),
            "eta_bound": bound.to_string(),
            "t_max_levels": level_t_max,
            "t_max_delays": delay_t_max,
            "levels": LevelsJson::from(&cycles.levels),
            "cycles": CyclesJson::from(&cycles),
        });
        return Ok(format!("{doc}\n"));
    }

    let mut out = String::new();
    let w = &mut out;
    writeln!(
        w,
        "N_M = {}, k = {}, t = {}",
        ctx.modulus_bits(),
        ctx.k(),
        ctx.t()
    )
    .unwrap();
    writeln!(w, "d = {d}").unwrap();
    writeln!(w, "iterations = {} (d + t)", cycles.iterations).unwrap();
    writeln!(w, "t_c = 3T_m + 2T_a = {t_c}").unwrap();
    writeln!(w, "T_serial = d*t_c + T_red = {serial}").unwrap();
    writeln!(w, "t_i = T_m + 2T_a = {t_i}").unwrap();
    writeln!(w, "T_proposed = (d+t+1)*t_i + T_red = {proposed}").unwrap();
    writeln!(w, "gain = 2d*T_m - (t+1)(T_m+2T_a) = {gain}").unwrap();
    writeln!(w, "eta bound = 1 - 1/d = {bound}").unwrap();
    writeln!(w, "t_max (level model) = {level_t_max}").unwrap();
    if let Some(tm) = delay_t_max {
        writeln!(w, "t_max (T_q <= (t-1)T_u) = {tm}").unwrap();
    }
    let levels = &cycles.levels;
    writeln!(
        w,
        "update path = {} levels ({} terms to 3 in {} levels)",
        levels.iteration_levels, levels.update_inputs, levels.update_tree
    )
    .unwrap();
    for s in &levels.stages {
        let ops: Vec<String> = s.ops.iter().map(ToString::to_string).collect();
        let budget = s.budget.map_or("none".to_string(), |b| b.to_string());
        writeln!(
            w,
            "stage {} [{}] levels={} budget={budget}",
            s.stage,
            ops.join(", "),
            s.levels
        )
        .unwrap();
    }
    for note in &levels.notes {
        writeln!(w, "note: {note}").unwrap();
    }
    if levels.violations.is_empty() {
        writeln!(w, "violations: none").unwrap();
    }
    for v in &levels.violations {
        writeln!(w, "violation: {v}").unwrap();
    }
    writeln!(
        w,
        "cycles = {} ({} iterations + {} epilogue, {})",
        cycles.total_cycles,
        cycles.iterations,
        cycles.epilogue_cycles,
        if cycles.epilogue_fitted {
            "fitted"
        } else {
            "given"
        }
    )
    .unwrap();
    Ok(out)
}

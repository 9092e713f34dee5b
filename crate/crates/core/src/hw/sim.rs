//! Cycle-by-cycle simulation of the datapath.

use num_traits::ToPrimitive;

use super::carry::{carry_bits, carry_index};
use super::compressor::compress_terms;
use super::encoding::{build_encoding_table, gen_temp_pps, EncodingKind};
use super::levels::CycleReport;
use super::pipeline::{emitted_digit, PipelineTables, QuotientPipeline, Schedule};
use super::{residue_width, CarryPair, Fault, HwConfig, QuotientEncoding, RedundantResidue};
use crate::context::{low_bits, to_digits, DigitVector, MontgomeryContext, Natural};
use crate::drmmm::{drmmm_mul, q_hat};
use crate::error::{Error, Result};
use crate::reference::{final_reduce, MmmResult, QuotientTrace};

/// Registered state between clock edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HwState {
    pub residue: RedundantResidue,
    pub pipeline: QuotientPipeline,
    /// Iterations completed so far.
    pub iteration: usize,
}

/// Everything that stays fixed for one multiplication.
#[derive(Debug, Clone)]
pub struct HwDatapath {
    ctx: MontgomeryContext,
    config: HwConfig,
    tables: PipelineTables,
    schedule: Schedule,
    b: Natural,
    digits: DigitVector,
    width: usize,
}

impl HwDatapath {
    pub fn new(
        ctx: &MontgomeryContext,
        a: &Natural,
        b: &Natural,
        config: &HwConfig,
    ) -> Result<Self> {
        ctx.check_operand(a)?;
        ctx.check_operand(b)?;
        let tables = match config.encoding {
            QuotientEncoding::TwoStep => PipelineTables {
                quotient: build_encoding_table(ctx, config.window, EncodingKind::Modulus)?,
                inverse: Some(build_encoding_table(
                    ctx,
                    config.window_inverse,
                    EncodingKind::Inverse,
                )?),
            },
            QuotientEncoding::Merged => PipelineTables {
                quotient: build_encoding_table(ctx, config.window, EncodingKind::Merged)?,
                inverse: None,
            },
        };
        let schedule = match &config.schedule {
            Some(s) => s.clone(),
            None => Schedule::greedy(ctx, config),
        };
        schedule.validate(ctx, config)?;
        Ok(Self {
            ctx: ctx.clone(),
            config: config.clone(),
            tables,
            schedule,
            b: b.clone(),
            digits: to_digits(a, ctx)?,
            width: residue_width(ctx, config.guard_bits),
        })
    }

    pub fn context(&self) -> &MontgomeryContext {
        &self.ctx
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// Bit width of each residue term.
    pub fn width(&self) -> usize {
        self.width
    }

    /// State after reset.
    pub fn initial_state(&self) -> Result<HwState> {
        Ok(HwState {
            residue: RedundantResidue::zero(),
            pipeline: QuotientPipeline::reset(&self.ctx, &self.schedule, &self.tables)?,
            iteration: 0,
        })
    }
}

/// What happened during one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HwIterationRecord {
    pub i: usize,
    /// Triple after the shift.
    pub z_terms: [Natural; 3],
    /// Carry LUT index read from the dropped window.
    pub carry_index: u8,
    /// Carries recovered from the dropped window.
    pub carry: CarryPair,
    /// Quotient digit consumed this iteration.
    pub q_hat: u64,
    /// Terms entering the update compression.
    pub update_terms: usize,
    /// Levels the update compression took.
    pub update_levels: usize,
}

impl HwIterationRecord {
    pub fn value(&self) -> Natural {
        self.z_terms.iter().sum::<Natural>() + self.carry.value()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HwTrace {
    pub records: Vec<HwIterationRecord>,
}

/// One clock cycle: advance the quotient pipeline, compress the update and
/// shift the triple by `k`, recovering the carries out of the dropped window.
pub fn hw_step(state: &HwState, dp: &HwDatapath) -> Result<(HwState, HwIterationRecord)> {
    let i = state.iteration;
    step(state, dp).map_err(|e| e.at(i))
}

fn step(state: &HwState, dp: &HwDatapath) -> Result<(HwState, HwIterationRecord)> {
    let ctx = &dp.ctx;
    let k = ctx.k();
    let i = state.iteration;

    let (pipeline, emitted) =
        state
            .pipeline
            .advance(&state.residue, ctx, &dp.schedule, &dp.tables)?;
    let expected = q_hat(ctx, &emitted.launched);
    let q = emitted_digit(&emitted.products, ctx.modulus())
        .filter(|&q| q == expected)
        .ok_or(Error::PipelineMismatch { iteration: i })?;

    let mut terms: Vec<Natural> = Vec::with_capacity(5 + k + emitted.products.len());
    terms.extend(state.residue.terms.iter().cloned());
    terms.push(Natural::from(u8::from(state.residue.carry.low)));
    terms.push(Natural::from(u8::from(state.residue.carry.high)));
    terms.extend(gen_temp_pps(dp.digits.digit(i), &dp.b, ctx));
    terms.extend(emitted.products);
    let update_terms = terms.len();

    let compressed = compress_terms(&terms, 3, dp.width)?;
    let mut triple: [Natural; 3] = Default::default();
    for (slot, term) in triple.iter_mut().zip(compressed.terms) {
        *slot = term;
    }

    let low = |z: &Natural| low_bits(z, k).to_u64().expect("window fits u64");
    let (l0, l1, l2) = (low(&triple[0]), low(&triple[1]), low(&triple[2]));
    let mut carry = match carry_bits(l0, l1, l2, k) {
        Ok(c) => c,
        Err(Error::CarryWindow { .. }) => return Err(Error::CarryPrecondition { iteration: i }),
        Err(e) => return Err(e),
    };
    let index = carry_index(l0, l1, l2, k);
    let flip = (index >> 3).count_ones() == 1 && (index & 0b111).count_ones() == 1;
    if dp.config.fault == Some(Fault::FlipCarryCase) && flip {
        carry.high = true;
    }
    for z in triple.iter_mut() {
        *z >>= k;
    }

    let record = HwIterationRecord {
        i,
        z_terms: triple.clone(),
        carry_index: index,
        carry,
        q_hat: q,
        update_terms,
        update_levels: compressed.levels,
    };
    Ok((
        HwState {
            residue: RedundantResidue {
                terms: triple,
                carry,
            },
            pipeline,
            iteration: i + 1,
        },
        record,
    ))
}

/// Runs the `d + t` iterations in lockstep with [`drmmm_mul`], then the
/// epilogue (exact sum and conditional subtraction).
pub fn hw_run(
    ctx: &MontgomeryContext,
    a: &Natural,
    b: &Natural,
    config: &HwConfig,
) -> Result<(MmmResult, CycleReport, HwTrace)> {
    let dp = HwDatapath::new(ctx, a, b, config)?;
    let (exact, exact_trace) = drmmm_mul(ctx, a, b)?;
    let mut state = dp.initial_state()?;
    let mut trace = HwTrace::default();
    for expected in &exact_trace.steps {
        let (next, record) = hw_step(&state, &dp)?;
        if next.residue.value() != expected.z || record.q_hat != expected.q_hat {
            return Err(Error::LockstepMismatch {
                iteration: record.i,
            });
        }
        trace.records.push(record);
        state = next;
    }

    let pre_reduction = state.residue.value();
    let output = final_reduce(&pre_reduction, ctx.modulus())?;
    let t = ctx.t();
    let result = MmmResult {
        output,
        pre_reduction,
        quotients: QuotientTrace {
            k: ctx.k(),
            digits: trace.records[t..].iter().map(|r| r.q_hat).collect(),
        },
    };
    debug_assert_eq!(result, exact);
    Ok((result, CycleReport::new(ctx, config)?, trace))
}

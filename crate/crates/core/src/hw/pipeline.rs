//! The `t`-stage quotient pipeline.
//!
//! Stage 1 reads the registered residue triple, stage `s > 1` reads the
//! register written by stage `s-1` on the previous cycle, and the last stage
//! hands `q̂ * M` partial products straight to the update compression. A
//! value launched from `Ẑ_(i-1)` therefore reaches the update at iteration
//! `i + t - 1`.

use std::fmt;

use num_traits::ToPrimitive;

use super::compressor::{compress_layers_wrapping, layer_output_count};
use super::encoding::{encode_windows, EncodingTable, PartialProduct};
use super::levels::{iteration_levels, CARRY_LEVELS};
use super::{HwConfig, QuotientEncoding, RedundantResidue};
use crate::context::{low_bits, MontgomeryContext, Natural};
use crate::error::{Error, Result};

/// One unit of work inside a pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PipelineOp {
    /// `iM'` lookups over the low `k*t` bits of the triple, plus one lookup
    /// for the pending carries.
    EncodeInverse,
    /// Layers of 6-to-3 compression (3-to-2 once three terms remain),
    /// modulo `2^(k*t)`.
    Compress { layers: usize },
    /// Carry-propagate sum modulo `2^(k*t)`.
    CarryPropagate,
    /// Top digit of the sum through the `iM` layer.
    EncodeModulus,
    /// Low digit through the merged table.
    EncodeMerged,
}

impl fmt::Display for PipelineOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineOp::EncodeInverse => write!(f, "encode-im-prime"),
            PipelineOp::Compress { layers } => write!(f, "compress-{layers}"),
            PipelineOp::CarryPropagate => write!(f, "carry-propagate"),
            PipelineOp::EncodeModulus => write!(f, "encode-im"),
            PipelineOp::EncodeMerged => write!(f, "encode-merged"),
        }
    }
}

/// Shape of the data between ops, used for validation and level counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Shape {
    Residue,
    Terms(usize),
    Value,
    Products(usize),
}

pub(crate) fn inverse_encode_terms(ctx: &MontgomeryContext, window_inverse: usize) -> usize {
    3 * ctx.span_bits().div_ceil(window_inverse) + 1
}

pub(crate) fn quotient_product_terms(ctx: &MontgomeryContext, config: &HwConfig) -> usize {
    match config.encoding {
        QuotientEncoding::TwoStep => ctx.k().div_ceil(config.window),
        QuotientEncoding::Merged => 1,
    }
}

pub(crate) fn apply_shape(
    op: PipelineOp,
    shape: Shape,
    ctx: &MontgomeryContext,
    config: &HwConfig,
) -> Result<Shape> {
    let bad = |why: &str| Err(Error::InvalidSchedule(format!("{op} {why}")));
    match (op, shape) {
        (PipelineOp::EncodeInverse, Shape::Residue) => {
            if config.encoding != QuotientEncoding::TwoStep {
                return bad("needs the two-step encoding");
            }
            Ok(Shape::Terms(inverse_encode_terms(
                ctx,
                config.window_inverse,
            )))
        }
        (PipelineOp::EncodeInverse, _) => bad("must read the residue triple"),
        (PipelineOp::Compress { layers }, Shape::Terms(mut n)) => {
            for _ in 0..layers {
                n = layer_output_count(n, true);
            }
            Ok(Shape::Terms(n))
        }
        (PipelineOp::Compress { .. }, _) => bad("needs partial products"),
        (PipelineOp::CarryPropagate, Shape::Residue | Shape::Terms(_)) => Ok(Shape::Value),
        (PipelineOp::CarryPropagate, _) => bad("needs terms to add"),
        (PipelineOp::EncodeModulus, Shape::Value) => {
            if config.encoding != QuotientEncoding::TwoStep {
                return bad("needs the two-step encoding");
            }
            Ok(Shape::Products(quotient_product_terms(ctx, config)))
        }
        (PipelineOp::EncodeMerged, Shape::Value) => {
            if config.encoding != QuotientEncoding::Merged {
                return bad("needs the merged encoding");
            }
            if ctx.t() != 1 {
                return bad("is a single-digit mapping and needs t = 1");
            }
            Ok(Shape::Products(1))
        }
        (PipelineOp::EncodeModulus | PipelineOp::EncodeMerged, _) => {
            bad("needs a single carry-propagated value")
        }
    }
}

/// Assignment of work to the `t` pipeline stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    stages: Vec<Vec<PipelineOp>>,
}

impl Schedule {
    pub fn new(stages: Vec<Vec<PipelineOp>>) -> Self {
        Self { stages }
    }

    pub fn stages(&self) -> &[Vec<PipelineOp>] {
        &self.stages
    }

    /// Checks stage count and data flow from the residue to `q̂ * M`.
    pub fn validate(&self, ctx: &MontgomeryContext, config: &HwConfig) -> Result<()> {
        if self.stages.len() != ctx.t() {
            return Err(Error::InvalidSchedule(format!(
                "{} stages for t = {}",
                self.stages.len(),
                ctx.t()
            )));
        }
        if config.encoding == QuotientEncoding::Merged {
            if ctx.k() != 4 || config.window != 4 {
                return Err(Error::MergeUnsupported {
                    k: ctx.k(),
                    w: config.window,
                });
            }
            if ctx.t() != 1 {
                return Err(Error::InvalidSchedule(
                    "merged encoding needs t = 1".to_string(),
                ));
            }
        }
        let mut shape = Shape::Residue;
        for op in self.stages.iter().flatten() {
            if matches!(shape, Shape::Products(_)) {
                return Err(Error::InvalidSchedule(format!(
                    "{op} after the final lookup"
                )));
            }
            shape = apply_shape(*op, shape, ctx, config)?;
        }
        match shape {
            Shape::Products(_) => Ok(()),
            _ => Err(Error::InvalidSchedule(
                "pipeline never produces q̂*M".to_string(),
            )),
        }
    }

    /// Packs the quotient work into stages front to back.
    ///
    /// Stage 1 gets the iteration budget minus the carry module, middle
    /// stages the full budget, a carry-propagate add occupies a stage of its
    /// own and the final lookup always sits in the last stage.
    pub fn greedy(ctx: &MontgomeryContext, config: &HwConfig) -> Self {
        let t = ctx.t();
        let (work, last): (Vec<PipelineOp>, PipelineOp) = match config.encoding {
            QuotientEncoding::Merged => {
                (vec![PipelineOp::CarryPropagate], PipelineOp::EncodeMerged)
            }
            QuotientEncoding::TwoStep => {
                let mut work = vec![PipelineOp::EncodeInverse];
                let mut n = inverse_encode_terms(ctx, config.window_inverse);
                while n > 2 {
                    n = layer_output_count(n, true);
                    work.push(PipelineOp::Compress { layers: 1 });
                }
                work.push(PipelineOp::CarryPropagate);
                (work, PipelineOp::EncodeModulus)
            }
        };

        if t == 1 {
            let mut stage = work;
            stage.push(last);
            return Self::new(vec![merge_layers(stage)]);
        }

        let budget = iteration_levels(ctx, config);
        let mut stages: Vec<Vec<PipelineOp>> = vec![Vec::new(); t];
        let mut current = 0usize;
        let mut used = 0usize;
        let stage_budget = |s: usize| {
            if s == 0 {
                budget.saturating_sub(CARRY_LEVELS)
            } else {
                budget
            }
        };
        for op in work {
            // Anything that no longer fits before the last stage lands in it.
            if current >= t - 1 {
                stages[t - 1].push(op);
                continue;
            }
            if op == PipelineOp::CarryPropagate {
                if !stages[current].is_empty() {
                    current += 1;
                }
                if current >= t - 1 {
                    stages[t - 1].push(op);
                    continue;
                }
                stages[current].push(op);
                current += 1;
                used = 0;
                continue;
            }
            if used + 1 > stage_budget(current) && !stages[current].is_empty() {
                current += 1;
                used = 0;
                if current >= t - 1 {
                    stages[t - 1].push(op);
                    continue;
                }
            }
            stages[current].push(op);
            used += 1;
        }
        stages[t - 1].push(last);
        Self::new(stages.into_iter().map(merge_layers).collect())
    }
}

fn merge_layers(ops: Vec<PipelineOp>) -> Vec<PipelineOp> {
    let mut out: Vec<PipelineOp> = Vec::with_capacity(ops.len());
    for op in ops {
        match (out.last_mut(), op) {
            (Some(PipelineOp::Compress { layers }), PipelineOp::Compress { layers: more }) => {
                *layers += more;
            }
            _ => out.push(op),
        }
    }
    out
}

/// Data held between ops and in pipeline registers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum StageData {
    Residue(RedundantResidue),
    Terms(Vec<Natural>),
    Value(Natural),
    Products(Vec<Natural>),
}

/// Lookup tables used by the pipeline.
#[derive(Debug, Clone)]
pub(crate) struct PipelineTables {
    /// `iM` table, or the merged table.
    pub quotient: EncodingTable,
    /// `iM'` table (two-step encoding only).
    pub inverse: Option<EncodingTable>,
}

fn run_op(
    op: PipelineOp,
    data: StageData,
    ctx: &MontgomeryContext,
    tables: &PipelineTables,
) -> Result<StageData> {
    let span = ctx.span_bits();
    let mismatch = || Error::InvalidSchedule(format!("{op} received incompatible data"));
    Ok(match (op, data) {
        (PipelineOp::EncodeInverse, StageData::Residue(r)) => {
            let table = tables.inverse.as_ref().ok_or_else(mismatch)?;
            let mut terms: Vec<Natural> = encode_windows(&r.terms, span, table)
                .iter()
                .map(|pp| low_bits(&pp.value(), span))
                .collect();
            terms.push(low_bits(&(ctx.m_prime_wide() * r.carry.value()), span));
            StageData::Terms(terms)
        }
        (PipelineOp::Compress { layers }, StageData::Terms(terms)) => {
            StageData::Terms(compress_layers_wrapping(&terms, layers, span).terms)
        }
        (PipelineOp::CarryPropagate, StageData::Residue(r)) => {
            StageData::Value(low_bits(&r.value(), span))
        }
        (PipelineOp::CarryPropagate, StageData::Terms(terms)) => {
            StageData::Value(low_bits(&terms.iter().sum::<Natural>(), span))
        }
        (PipelineOp::EncodeModulus, StageData::Value(v)) => {
            let q = &v >> (ctx.k() * (ctx.t() - 1));
            StageData::Products(products(&q, ctx.k(), &tables.quotient))
        }
        (PipelineOp::EncodeMerged, StageData::Value(v)) => {
            StageData::Products(products(&v, ctx.k(), &tables.quotient))
        }
        _ => return Err(mismatch()),
    })
}

fn products(value: &Natural, width: usize, table: &EncodingTable) -> Vec<Natural> {
    encode_windows(std::slice::from_ref(value), width, table)
        .iter()
        .map(PartialProduct::value)
        .collect()
}

fn run_stage(
    ops: &[PipelineOp],
    mut data: StageData,
    ctx: &MontgomeryContext,
    tables: &PipelineTables,
) -> Result<StageData> {
    for &op in ops {
        data = run_op(op, data, ctx, tables)?;
    }
    Ok(data)
}

/// Register contents plus the residue value it was launched from. The
/// launch value is bookkeeping for the model's checks, not datapath state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct StageRegister {
    pub data: StageData,
    pub launched: Natural,
}

/// Registers between consecutive stages (`t - 1` of them).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientPipeline {
    registers: Vec<StageRegister>,
}

/// What the last stage hands to the update this cycle.
#[derive(Debug, Clone)]
pub(crate) struct Emitted {
    pub products: Vec<Natural>,
    pub launched: Natural,
}

impl QuotientPipeline {
    /// Registers as they are after reset: every stage holds the result of a
    /// zero residue.
    pub(crate) fn reset(
        ctx: &MontgomeryContext,
        schedule: &Schedule,
        tables: &PipelineTables,
    ) -> Result<Self> {
        let mut registers = Vec::with_capacity(ctx.t() - 1);
        let mut data = StageData::Residue(RedundantResidue::zero());
        for ops in &schedule.stages()[..ctx.t() - 1] {
            data = run_stage(ops, data, ctx, tables)?;
            registers.push(StageRegister {
                data: data.clone(),
                launched: Natural::default(),
            });
        }
        Ok(Self { registers })
    }

    pub fn depth(&self) -> usize {
        self.registers.len() + 1
    }

    /// Residue value each register was launched from, stage 1 first.
    pub fn launched(&self) -> Vec<&Natural> {
        self.registers.iter().map(|r| &r.launched).collect()
    }

    /// One clock edge: every stage reads the previous cycle's registers.
    pub(crate) fn advance(
        &self,
        residue: &RedundantResidue,
        ctx: &MontgomeryContext,
        schedule: &Schedule,
        tables: &PipelineTables,
    ) -> Result<(Self, Emitted)> {
        let stages = schedule.stages();
        let t = stages.len();
        let residue_in = StageRegister {
            data: StageData::Residue(residue.clone()),
            launched: residue.value(),
        };
        let input = |s: usize| -> &StageRegister {
            if s == 0 {
                &residue_in
            } else {
                &self.registers[s - 1]
            }
        };

        let mut next = Vec::with_capacity(t - 1);
        for (s, ops) in stages[..t - 1].iter().enumerate() {
            let src = input(s);
            next.push(StageRegister {
                data: run_stage(ops, src.data.clone(), ctx, tables)?,
                launched: src.launched.clone(),
            });
        }
        let src = input(t - 1);
        let out = run_stage(&stages[t - 1], src.data.clone(), ctx, tables)?;
        let StageData::Products(products) = out else {
            return Err(Error::InvalidSchedule(
                "last stage did not produce q̂*M".to_string(),
            ));
        };
        Ok((
            Self { registers: next },
            Emitted {
                products,
                launched: src.launched.clone(),
            },
        ))
    }
}

/// Quotient digit recovered from an emitted product set.
pub(crate) fn emitted_digit(products: &[Natural], m: &Natural) -> Option<u64> {
    let sum: Natural = products.iter().sum();
    let (q, rem) = num_integer::Integer::div_rem(&sum, m);
    if rem != Natural::default() {
        return None;
    }
    q.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::make_context;

    fn ctx(k: usize, t: usize) -> MontgomeryContext {
        let m = (Natural::from(1u32) << 1023) | Natural::from(0x9e37_79b9u32);
        make_context(m | Natural::from(1u32), k, t).unwrap()
    }

    #[test]
    fn radix_16_four_stage_default() {
        let c = ctx(16, 4);
        let s = Schedule::greedy(&c, &HwConfig::default());
        assert_eq!(
            s.stages(),
            &[
                vec![
                    PipelineOp::EncodeInverse,
                    PipelineOp::Compress { layers: 2 }
                ],
                vec![PipelineOp::Compress { layers: 3 }],
                vec![PipelineOp::CarryPropagate],
                vec![PipelineOp::EncodeModulus],
            ]
        );
        s.validate(&c, &HwConfig::default()).unwrap();
    }

    #[test]
    fn greedy_is_valid_everywhere() {
        for k in [2usize, 4, 8, 16] {
            for t in 1..=6 {
                for (w, wp) in [(4, 4), (5, 6), (6, 6)] {
                    let c = ctx(k, t);
                    let cfg = HwConfig::default().with_windows(w, wp);
                    Schedule::greedy(&c, &cfg).validate(&c, &cfg).unwrap();
                }
            }
        }
        let c = ctx(4, 1);
        let cfg = HwConfig::merged();
        let s = Schedule::greedy(&c, &cfg);
        assert_eq!(
            s.stages(),
            &[vec![PipelineOp::CarryPropagate, PipelineOp::EncodeMerged]]
        );
        s.validate(&c, &cfg).unwrap();
    }

    #[test]
    fn rejects_malformed_schedules() {
        let c = ctx(16, 2);
        let cfg = HwConfig::default();
        let short = Schedule::new(vec![vec![PipelineOp::EncodeInverse]]);
        assert!(matches!(
            short.validate(&c, &cfg),
            Err(Error::InvalidSchedule(_))
        ));
        let no_products = Schedule::new(vec![
            vec![PipelineOp::EncodeInverse],
            vec![PipelineOp::CarryPropagate],
        ]);
        assert!(no_products.validate(&c, &cfg).is_err());
        let wrong_order = Schedule::new(vec![
            vec![PipelineOp::EncodeModulus],
            vec![PipelineOp::CarryPropagate],
        ]);
        assert!(wrong_order.validate(&c, &cfg).is_err());
        let merged_deep = ctx(4, 2);
        assert!(Schedule::greedy(&merged_deep, &HwConfig::merged())
            .validate(&merged_deep, &HwConfig::merged())
            .is_err());
    }
}

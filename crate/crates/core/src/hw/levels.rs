//! LUT-level and cycle accounting.
//!
//! One LUT level is a 6-input LUT: a window lookup, a 6-to-3 or 3-to-2
//! layer, or the carry logic. The iteration period is set by the update
//! path: partial-product generation (in parallel with the carry logic)
//! followed by the update compression tree down to three terms.
//!
//! A carry-propagate add is not counted in levels: it is given a whole
//! cycle of its own and reported as such.

use super::compressor::{layer_output_count, tree_levels};
use super::pipeline::{inverse_encode_terms, quotient_product_terms, PipelineOp, Schedule};
use super::{HwConfig, QuotientEncoding};
use crate::context::{MontgomeryContext, MAX_PIPELINE_SPAN};
use crate::error::{Error, Result};

/// Levels of a window lookup.
pub const PP_GEN_LEVELS: usize = 1;
/// Levels of the carry recovery logic.
pub const CARRY_LEVELS: usize = 1;

/// Terms entering the update compression: the triple, two pending carries,
/// `k` rows of `a_i * B` and the `q̂ * M` products.
pub fn update_inputs(ctx: &MontgomeryContext, config: &HwConfig) -> usize {
    3 + 2 + ctx.k() + quotient_product_terms(ctx, config)
}

pub(crate) fn iteration_levels(ctx: &MontgomeryContext, config: &HwConfig) -> usize {
    PP_GEN_LEVELS.max(CARRY_LEVELS) + tree_levels(update_inputs(ctx, config), 3)
}

fn op_levels(op: PipelineOp, cycle: usize) -> usize {
    match op {
        PipelineOp::EncodeInverse | PipelineOp::EncodeModulus | PipelineOp::EncodeMerged => {
            PP_GEN_LEVELS
        }
        PipelineOp::Compress { layers } => layers,
        PipelineOp::CarryPropagate => cycle,
    }
}

/// Levels used by one stage against its budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageLevels {
    pub stage: usize,
    pub ops: Vec<PipelineOp>,
    pub levels: usize,
    /// `None` when the stage shares its cycle with the update (`t = 1`).
    pub budget: Option<usize>,
}

impl StageLevels {
    pub fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.levels <= b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelReport {
    pub pp_gen: usize,
    pub carry: usize,
    pub update_inputs: usize,
    pub update_tree: usize,
    /// Levels of one iteration (the clock period).
    pub iteration_levels: usize,
    pub stages: Vec<StageLevels>,
    /// Total quotient-path levels, a carry-propagate add counted as a cycle.
    pub quotient_levels: usize,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl LevelReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleReport {
    /// `d + t`.
    pub iterations: usize,
    pub epilogue_cycles: usize,
    pub epilogue_fitted: bool,
    pub total_cycles: usize,
    pub levels: LevelReport,
}

impl CycleReport {
    pub fn new(ctx: &MontgomeryContext, config: &HwConfig) -> Result<Self> {
        let levels = level_budget_report(ctx, config)?;
        let iterations = ctx.d() + ctx.t();
        Ok(Self {
            iterations,
            epilogue_cycles: config.epilogue_cycles,
            epilogue_fitted: config.epilogue_fitted,
            total_cycles: iterations + config.epilogue_cycles,
            levels,
        })
    }
}

/// Per-stage level usage of the configured (or greedy) schedule.
///
/// Stage 1 starts after the carry logic, so it gets the iteration budget
/// minus the carry levels; the last stage feeds the update tree next to the
/// `a_i * B` products, so it gets the partial-product generation levels.
pub fn level_budget_report(ctx: &MontgomeryContext, config: &HwConfig) -> Result<LevelReport> {
    let schedule = match &config.schedule {
        Some(s) => s.clone(),
        None => Schedule::greedy(ctx, config),
    };
    schedule.validate(ctx, config)?;

    let inputs = update_inputs(ctx, config);
    let update_tree = tree_levels(inputs, 3);
    let cycle = PP_GEN_LEVELS.max(CARRY_LEVELS) + update_tree;
    let t = ctx.t();
    let mut notes = vec![format!(
        "update compresses {inputs} terms to 3 in {update_tree} levels"
    )];
    let mut violations = Vec::new();

    let mut stages = Vec::with_capacity(t);
    for (s, ops) in schedule.stages().iter().enumerate() {
        let levels = ops.iter().map(|&op| op_levels(op, cycle)).sum();
        let budget = if t == 1 {
            None
        } else if s == 0 {
            Some(cycle - CARRY_LEVELS)
        } else if s == t - 1 {
            Some(PP_GEN_LEVELS)
        } else {
            Some(cycle)
        };
        if ops.contains(&PipelineOp::CarryPropagate) {
            notes.push(format!(
                "stage {}: carry-propagate add assumed to take one full cycle",
                s + 1
            ));
            if ops.len() > 1 && t > 1 {
                violations.push(format!(
                    "stage {}: carry-propagate add shares its cycle with other work",
                    s + 1
                ));
            }
        }
        let stage = StageLevels {
            stage: s + 1,
            ops: ops.clone(),
            levels,
            budget,
        };
        if !stage.within_budget() {
            violations.push(format!(
                "stage {}: {} levels over a budget of {}",
                s + 1,
                levels,
                budget.unwrap_or_default()
            ));
        }
        stages.push(stage);
    }
    if t == 1 {
        notes.push("t = 1: the quotient path is in series with the update".to_string());
    }

    let quotient_levels = stages.iter().map(|s| s.levels).sum();
    Ok(LevelReport {
        pp_gen: PP_GEN_LEVELS,
        carry: CARRY_LEVELS,
        update_inputs: inputs,
        update_tree,
        iteration_levels: if t == 1 {
            CARRY_LEVELS + quotient_levels + update_tree
        } else {
            cycle
        },
        stages,
        quotient_levels,
        violations,
        notes,
    })
}

/// Smallest `t` whose two-step quotient path fits in the `t - 1` cycles
/// available before its digit is consumed.
///
/// The path is the `iM'` lookup, the compression to two terms, one
/// carry-propagate cycle and the `iM` lookup.
pub fn estimate_t_max_levels(k: usize, window: usize, window_inverse: usize) -> Result<usize> {
    for w in [window, window_inverse] {
        if !(super::MIN_WINDOW..=super::MAX_WINDOW).contains(&w) {
            return Err(Error::WindowOutOfRange(w));
        }
    }
    if !(2..=crate::context::MAX_RADIX_BITS).contains(&k) {
        return Err(Error::RadixOutOfRange(k));
    }
    let t_u = PP_GEN_LEVELS.max(CARRY_LEVELS) + tree_levels(3 + 2 + k + k.div_ceil(window), 3);
    let mut t = 1;
    loop {
        let mut n = 3 * (k * t).div_ceil(window_inverse) + 1;
        let mut layers = 0;
        while n > 2 {
            n = layer_output_count(n, true);
            layers += 1;
        }
        let t_q = PP_GEN_LEVELS + layers + t_u + PP_GEN_LEVELS;
        if t_q <= (t - 1) * t_u {
            return Ok(t);
        }
        if k * (t + 1) > MAX_PIPELINE_SPAN {
            return Err(Error::SpanTooWide(k * (t + 1)));
        }
        t += 1;
    }
}

/// Term count after the `iM'` layer of a two-step pipeline.
pub fn inverse_layer_terms(ctx: &MontgomeryContext, config: &HwConfig) -> Option<usize> {
    (config.encoding == QuotientEncoding::TwoStep)
        .then(|| inverse_encode_terms(ctx, config.window_inverse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{make_context, Natural};

    fn ctx(k: usize, t: usize) -> MontgomeryContext {
        let m = (Natural::from(1u32) << 1023) | Natural::from(0x1234_5677u32);
        make_context(m, k, t).unwrap()
    }

    #[test]
    fn radix_16_four_stages() {
        let c = ctx(16, 4);
        let cfg = HwConfig::default();
        let r = level_budget_report(&c, &cfg).unwrap();
        assert_eq!(r.update_inputs, 24);
        assert_eq!(r.update_tree, 3);
        assert_eq!(r.iteration_levels, 4);
        assert!(r.is_feasible(), "{:?}", r.violations);
        assert!(r.stages.iter().all(|s| s.levels <= 4));
        assert_eq!(inverse_layer_terms(&c, &cfg), Some(34));
        assert_eq!(tree_levels(34, 9), 2);

        let cycles = CycleReport::new(&c, &cfg).unwrap();
        assert_eq!(cycles.iterations, 68);
        assert_eq!(cycles.total_cycles, 74);
        assert!(cycles.epilogue_fitted);
    }

    #[test]
    fn t_max_from_levels() {
        assert_eq!(estimate_t_max_levels(16, 6, 6).unwrap(), 4);
        assert!(estimate_t_max_levels(16, 3, 6).is_err());
    }

    #[test]
    fn shallow_pipeline_is_flagged() {
        let c = ctx(16, 2);
        let r = level_budget_report(&c, &HwConfig::default()).unwrap();
        assert!(!r.is_feasible());
    }

    #[test]
    fn single_stage_is_serial() {
        let c = ctx(4, 1);
        let r = level_budget_report(&c, &HwConfig::merged()).unwrap();
        assert!(r.is_feasible());
        assert_eq!(r.update_inputs, 3 + 2 + 4 + 1);
        assert!(r.iteration_levels > r.update_tree + PP_GEN_LEVELS);
    }
}

//! Bit-accurate model of the pipelined multiplier datapath.
//!
//! The residue is held as three full-width terms plus two pending carry bits.
//! Every cycle the triple, the `a_i * B` partial products, the pending carries
//! and the `q̂ * M` partial products leaving the quotient pipeline are
//! compressed back to three terms; the low `k` columns are then dropped and
//! replaced by the two recovered carry bits.

mod carry;
mod compressor;
mod encoding;
mod levels;
mod pipeline;
mod sim;

pub use carry::{
    carry_bits, carry_from_index, carry_index, carry_lut_inits, format_init, CarryPair,
};
pub use compressor::{
    compress_6to3, compress_6to3_words, compress_layers_wrapping, compress_terms, csa_3to2,
    layer_output_count, tree_levels, Compressed,
};
pub use encoding::{
    build_encoding_table, encode_windows, gen_temp_pps, lut_init_matrix, EncodingKind,
    EncodingTable, LutInitMatrix, PartialProduct, MAX_WINDOW, MIN_WINDOW,
};
pub use levels::{
    estimate_t_max_levels, inverse_layer_terms, level_budget_report, update_inputs, CycleReport,
    LevelReport, StageLevels, CARRY_LEVELS, PP_GEN_LEVELS,
};
pub use pipeline::{PipelineOp, QuotientPipeline, Schedule};
pub use sim::{hw_run, hw_step, HwDatapath, HwIterationRecord, HwState, HwTrace};

use num_traits::Zero;

use crate::context::{MontgomeryContext, Natural};

/// Default guard bits on top of `k*t + N_M + k`.
pub const DEFAULT_GUARD_BITS: usize = 3;

/// Epilogue cycles fitted so that `k=16, t=4, N_M=1024` totals 74 cycles.
pub const FITTED_EPILOGUE_CYCLES: usize = 6;

/// Three-term redundant residue with its two pending carry bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedundantResidue {
    pub terms: [Natural; 3],
    pub carry: CarryPair,
}

impl RedundantResidue {
    pub fn zero() -> Self {
        Self {
            terms: [Natural::zero(), Natural::zero(), Natural::zero()],
            carry: CarryPair::default(),
        }
    }

    /// `z0 + z1 + z2 + C_l + C_m`.
    pub fn value(&self) -> Natural {
        self.terms.iter().sum::<Natural>() + self.carry.value()
    }
}

/// Width `k*t + N_M + k + guard` of each residue term.
pub fn residue_width(ctx: &MontgomeryContext, guard_bits: usize) -> usize {
    ctx.span_bits() + ctx.modulus_bits() + ctx.k() + guard_bits
}

/// How the quotient pipeline turns `q̂` into multiples of `M`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum QuotientEncoding {
    /// `iM'` layer, compression, carry-propagate add, then the `iM` layer.
    #[default]
    TwoStep,
    /// Single merged `(i*M' mod 2^w) * M` lookup; needs `k = w = 4`, `t = 1`.
    Merged,
}

/// Test hook for mutation checks of the verification harness.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Forces `C_m = 1` in the `n_m = 1, n_l = 1` case, the one the datapath
    /// reaches most often.
    FlipCarryCase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HwConfig {
    /// Window of the `iM` (or merged) layer.
    pub window: usize,
    /// Window of the `iM'` layer.
    pub window_inverse: usize,
    pub encoding: QuotientEncoding,
    /// Explicit stage schedule; `None` packs the work greedily.
    pub schedule: Option<Schedule>,
    pub epilogue_cycles: usize,
    /// Whether `epilogue_cycles` was fitted rather than derived.
    pub epilogue_fitted: bool,
    pub guard_bits: usize,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for HwConfig {
    fn default() -> Self {
        Self {
            window: 6,
            window_inverse: 6,
            encoding: QuotientEncoding::TwoStep,
            schedule: None,
            epilogue_cycles: FITTED_EPILOGUE_CYCLES,
            epilogue_fitted: true,
            guard_bits: DEFAULT_GUARD_BITS,
            fault: None,
        }
    }
}

impl HwConfig {
    pub fn with_windows(mut self, window: usize, window_inverse: usize) -> Self {
        self.window = window;
        self.window_inverse = window_inverse;
        self
    }

    pub fn merged() -> Self {
        Self {
            window: 4,
            window_inverse: 4,
            encoding: QuotientEncoding::Merged,
            ..Self::default()
        }
    }

    #[doc(hidden)]
    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self
    }
}

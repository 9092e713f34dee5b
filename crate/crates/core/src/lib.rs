//! Montgomery modular multiplication at radix `2^k`.
//!
//! Three models of the same product `A * B * 2^(-k*d) mod M` are provided:
//!
//! * [`reference`]: the classical iteration with one quotient digit per step.
//! * [`drmmm`]: the different-radix iteration, where each quotient digit is
//!   the top radix-`2^k` digit of a radix-`2^(k*t)` quotient and is consumed
//!   `t - 1` iterations after it was launched.
//! * [`hw`]: a bit-accurate model of a pipelined datapath that realises the
//!   different-radix iteration with a redundant residue, 6-to-3 counters,
//!   a two-bit carry recovery and LUT-based multiple tables.

pub mod context;
pub mod drmmm;
pub mod error;
pub mod hw;
pub mod reference;

pub use context::{make_context, to_digits, DigitVector, MontgomeryContext, Natural};
pub use drmmm::{drmmm_mul, q_hat, DrmmmStep, DrmmmTrace};
pub use error::{Error, Result};
pub use hw::{hw_run, HwConfig};
pub use reference::{
    check_quotient_consistency, classical_mmm, classical_mmm_traced, final_reduce, modmul_oracle,
    montgomery_oracle, MmmResult, QuotientTrace,
};

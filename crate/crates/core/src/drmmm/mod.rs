//! Different-radix Montgomery multiplication: the main recurrence runs at
//! radix `2^k` while each quotient digit is taken from a radix-`2^(k*t)`
//! quotient, so its computation can span `t` iterations.

mod analysis;

pub use analysis::{
    dependence_bound, dependence_degree, dependence_ratio, estimate_t_max, latency_gain,
    latency_proposed, latency_serial, proposed_iteration_delay, serial_iteration_delay,
    DependenceDegree, LatencyParams,
};

use std::collections::VecDeque;

use num_traits::{ToPrimitive, Zero};

use crate::context::{low_bits, to_digits, MontgomeryContext, Natural};
use crate::error::{Error, Result};
use crate::reference::{final_reduce, low_digit, MmmResult, QuotientTrace};

/// One iteration of the exact recurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrmmmStep {
    pub i: usize,
    /// `Ẑ_(i)` after the shift.
    pub z: Natural,
    /// Quotient digit added this iteration, `q_hat(Ẑ_(i-t))`.
    pub q_hat: u64,
    /// Multiplier digit `a_i` (zero for `i >= d`).
    pub a: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrmmmTrace {
    pub steps: Vec<DrmmmStep>,
}

impl DrmmmTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// Top radix-`2^k` digit of `((Z mod 2^(kt)) * M') mod 2^(kt)`.
pub fn q_hat(ctx: &MontgomeryContext, z_prev: &Natural) -> u64 {
    let span = ctx.span_bits();
    let wide = low_bits(&(low_bits(z_prev, span) * ctx.m_prime_wide()), span);
    (wide >> (ctx.k() * (ctx.t() - 1)))
        .to_u64()
        .expect("top digit has k <= 64 bits")
}

/// Runs `d + t` iterations of
/// `Ẑ_(i) = (Ẑ_(i-1) + a_i * B * 2^(kt) + q_hat(Ẑ_(i-t)) * M) / 2^k`.
///
/// The quotient digit launched from `Ẑ_(i-1)` is consumed `t - 1`
/// iterations later; with `t = 1` it is used in the same iteration.
pub fn drmmm_mul(
    ctx: &MontgomeryContext,
    a: &Natural,
    b: &Natural,
) -> Result<(MmmResult, DrmmmTrace)> {
    ctx.check_operand(a)?;
    ctx.check_operand(b)?;
    let k = ctx.k();
    let t = ctx.t();
    let m = ctx.modulus();
    let digits = to_digits(a, ctx)?;
    let b_shifted = b << ctx.span_bits();

    let total = ctx.d() + t;
    let mut in_flight: VecDeque<u64> = std::iter::repeat_n(0, t - 1).collect();
    let mut z = Natural::zero();
    let mut steps = Vec::with_capacity(total);
    for i in 0..total {
        in_flight.push_back(q_hat(ctx, &z));
        let q = in_flight.pop_front().expect("queue holds t entries");
        let a_i = digits.digit(i);
        z += &b_shifted * a_i;
        z += m * q;
        if low_digit(&z, k) != 0 {
            return Err(Error::ShiftInvalid { iteration: i, k });
        }
        z >>= k;
        steps.push(DrmmmStep {
            i,
            z: z.clone(),
            q_hat: q,
            a: a_i,
        });
    }

    let output = final_reduce(&z, m)?;
    // The first t digits consumed are the zero-initialised pipeline.
    let quotients = steps[t..].iter().map(|s| s.q_hat).collect();
    Ok((
        MmmResult {
            output,
            pre_reduction: z,
            quotients: QuotientTrace {
                k,
                digits: quotients,
            },
        },
        DrmmmTrace { steps },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::make_context;
    use crate::reference::{classical_mmm, montgomery_oracle};
    use num_bigint::RandBigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn q_hat_examples() {
        let ctx = make_context(nat(13), 2, 2).unwrap();
        assert_eq!(q_hat(&ctx, &nat(0)), 0);
        // (7 * 11 mod 16) >> 2 = 13 >> 2 = 3
        assert_eq!(q_hat(&ctx, &nat(7)), 3);

        let ctx1 = make_context(nat(13), 2, 1).unwrap();
        for z in 0..64u64 {
            let classical = ((z % 4) * ctx1.m_prime_digit()) % 4;
            assert_eq!(q_hat(&ctx1, &nat(z)), classical);
        }
    }

    #[test]
    fn small_worked_case() {
        let ctx = make_context(nat(13), 2, 2).unwrap();
        let (res, trace) = drmmm_mul(&ctx, &nat(7), &nat(9)).unwrap();
        assert_eq!(res.output, nat(8));
        assert_eq!(trace.iterations(), 4);
        let classical = classical_mmm(&ctx, &nat(7), &nat(9)).unwrap();
        assert_eq!(res.quotients, classical.quotients);
        assert_eq!(res.pre_reduction, classical.pre_reduction);
    }

    #[test]
    fn zero_operand() {
        let ctx = make_context(nat(13), 2, 3).unwrap();
        let (res, trace) = drmmm_mul(&ctx, &nat(0), &nat(11)).unwrap();
        assert_eq!(res.output, nat(0));
        assert!(trace.steps.iter().all(|s| s.z.is_zero() && s.q_hat == 0));
    }

    #[test]
    fn corrupted_inverse_is_caught() {
        let ctx = make_context(nat(13), 2, 2)
            .unwrap()
            .with_corrupted_inverse();
        let err = drmmm_mul(&ctx, &nat(7), &nat(9)).unwrap_err();
        assert!(matches!(err, Error::ShiftInvalid { .. }));
    }

    #[test]
    fn randomized_against_classical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let bits = [8u64, 16, 64, 256][rng.gen_range(0..4)];
            let k = [2usize, 4, 8, 16][rng.gen_range(0..4)];
            let t = rng.gen_range(1..=6);
            let mut m = rng.gen_biguint(bits);
            m.set_bit(0, true);
            m.set_bit(bits - 1, true);
            let a = rng.gen_biguint_below(&m);
            let b = rng.gen_biguint_below(&m);
            let ctx = make_context(m, k, t).unwrap();
            let classical = classical_mmm(&ctx, &a, &b).unwrap();
            let (res, trace) = drmmm_mul(&ctx, &a, &b).unwrap();
            assert_eq!(res.output, classical.output);
            assert_eq!(res.output, montgomery_oracle(&ctx, &a, &b));
            assert_eq!(res.quotients, classical.quotients);
            assert!(trace.steps[..t].iter().all(|s| s.q_hat == 0));
            assert_eq!(trace.iterations(), ctx.d() + t);
        }
    }
}

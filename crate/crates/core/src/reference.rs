//! Classical radix-2^k Montgomery multiplication, plain-arithmetic oracles
//! and Montgomery-domain helpers.

use num_traits::{One, Zero};

use crate::context::{low_bits, MontgomeryContext, Natural};
use crate::error::{Error, Result};

/// Quotient digits in iteration order, least significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientTrace {
    pub k: usize,
    pub digits: Vec<u64>,
}

impl QuotientTrace {
    /// `sum(q_j * 2^(k*j)) mod 2^bits`.
    pub fn sum_mod_pow2(&self, bits: usize) -> Natural {
        let sum = self
            .digits
            .iter()
            .enumerate()
            .fold(Natural::zero(), |acc, (j, &q)| {
                acc + (Natural::from(q) << (self.k * j))
            });
        low_bits(&sum, bits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmmResult {
    /// Reduced result, below `M`.
    pub output: Natural,
    /// Value before the conditional subtraction, below `2M`.
    pub pre_reduction: Natural,
    pub quotients: QuotientTrace,
}

/// State of one classical iteration, after the shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalStep {
    pub i: usize,
    pub z: Natural,
    pub q: u64,
}

/// `A * B mod M` by direct multiply-and-remainder.
pub fn modmul_oracle(a: &Natural, b: &Natural, m: &Natural) -> Result<Natural> {
    if m.is_zero() {
        return Err(Error::ZeroModulus);
    }
    Ok((a * b) % m)
}

/// `A * B * 2^(-k*d) mod M` through a modular inverse; independent of every
/// iterative model in this crate.
pub fn montgomery_oracle(ctx: &MontgomeryContext, a: &Natural, b: &Natural) -> Natural {
    let m = ctx.modulus();
    let r_d = (Natural::one() << (ctx.k() * ctx.d())) % m;
    let inv = r_d.modinv(m).expect("odd modulus is coprime to 2");
    (a * b % m) * inv % m
}

/// Single conditional subtraction.
pub fn final_reduce(z: &Natural, m: &Natural) -> Result<Natural> {
    if z >= &(m << 1u32) {
        return Err(Error::ReductionBound);
    }
    Ok(if z >= m { z - m } else { z.clone() })
}

pub fn classical_mmm(ctx: &MontgomeryContext, a: &Natural, b: &Natural) -> Result<MmmResult> {
    run_classical(ctx, a, b, None)
}

/// [`classical_mmm`] that also records the state after every iteration.
pub fn classical_mmm_traced(
    ctx: &MontgomeryContext,
    a: &Natural,
    b: &Natural,
) -> Result<(MmmResult, Vec<ClassicalStep>)> {
    let mut steps = Vec::with_capacity(ctx.d());
    let result = run_classical(ctx, a, b, Some(&mut steps))?;
    Ok((result, steps))
}

fn run_classical(
    ctx: &MontgomeryContext,
    a: &Natural,
    b: &Natural,
    mut steps: Option<&mut Vec<ClassicalStep>>,
) -> Result<MmmResult> {
    ctx.check_operand(a)?;
    ctx.check_operand(b)?;
    let k = ctx.k();
    let m = ctx.modulus();
    let m_prime = u128::from(ctx.m_prime_digit());
    let mask = u128::from(ctx.digit_mask());
    let digits = crate::context::to_digits(a, ctx)?;

    let mut z = Natural::zero();
    let mut quotients = Vec::with_capacity(ctx.d());
    for i in 0..ctx.d() {
        z += b * digits.digit(i);
        let low = low_digit(&z, k);
        let q = ((low * m_prime) & mask) as u64;
        z += m * q;
        if low_digit(&z, k) != 0 {
            return Err(Error::ShiftInvalid { iteration: i, k });
        }
        z >>= k;
        quotients.push(q);
        if let Some(steps) = steps.as_deref_mut() {
            steps.push(ClassicalStep { i, z: z.clone(), q });
        }
    }
    let output = final_reduce(&z, m)?;
    Ok(MmmResult {
        output,
        pre_reduction: z,
        quotients: QuotientTrace {
            k,
            digits: quotients,
        },
    })
}

/// Low `k <= 64` bits of `x`.
pub(crate) fn low_digit(x: &Natural, k: usize) -> u128 {
    let word = x.iter_u64_digits().next().unwrap_or(0);
    if k == 64 {
        u128::from(word)
    } else {
        u128::from(word & ((1u64 << k) - 1))
    }
}

/// `A * R mod M` with `R = 2^(k*d)`.
pub fn mont_encode(ctx: &MontgomeryContext, a: &Natural) -> Result<Natural> {
    ctx.check_operand(a)?;
    let r = Natural::one() << (ctx.k() * ctx.d());
    modmul_oracle(a, &r, ctx.modulus())
}

/// `Â * R^{-1} mod M`, computed as `MMM(Â, 1)`.
pub fn mont_decode(ctx: &MontgomeryContext, a_hat: &Natural) -> Result<Natural> {
    Ok(classical_mmm(ctx, a_hat, &Natural::one())?.output)
}

/// `A * B mod M` as `MMM(MMM(A, B), R^2 mod M)`.
pub fn mont_mul_corrected(ctx: &MontgomeryContext, a: &Natural, b: &Natural) -> Result<Natural> {
    let r = Natural::one() << (ctx.k() * ctx.d());
    let r2 = modmul_oracle(&r, &r, ctx.modulus())?;
    let z = classical_mmm(ctx, a, b)?.output;
    Ok(classical_mmm(ctx, &z, &r2)?.output)
}

/// `A * B * M' mod 2^N_M` with `M' = -M^{-1} mod 2^N_M`: the radix-independent
/// value of the accumulated quotient.
pub fn quotient_sum_constant(ctx: &MontgomeryContext, a: &Natural, b: &Natural) -> Natural {
    low_bits(&(a * b * ctx.m_prime_full()), ctx.modulus_bits())
}

/// Runs the classical algorithm at radices `2^k1` and `2^k2` and checks that
/// both accumulated quotients agree with [`quotient_sum_constant`] modulo
/// `2^N_M`.
pub fn check_quotient_consistency(
    m: &Natural,
    a: &Natural,
    b: &Natural,
    k1: usize,
    k2: usize,
) -> Result<bool> {
    let ctx1 = MontgomeryContext::new(m.clone(), k1, 1)?;
    let ctx2 = MontgomeryContext::new(m.clone(), k2, 1)?;
    let bits = ctx1.modulus_bits();
    let s1 = classical_mmm(&ctx1, a, b)?.quotients.sum_mod_pow2(bits);
    let s2 = classical_mmm(&ctx2, a, b)?.quotients.sum_mod_pow2(bits);
    let constant = quotient_sum_constant(&ctx1, a, b);
    Ok(s1 == s2 && s1 == constant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::make_context;
    use num_bigint::RandBigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    fn random_modulus(rng: &mut ChaCha8Rng, bits: u64) -> Natural {
        let mut m = rng.gen_biguint(bits);
        m.set_bit(0, true);
        m.set_bit(bits - 1, true);
        m
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(modmul_oracle(&nat(7), &nat(9), &nat(13)).unwrap(), nat(11));
        assert_eq!(modmul_oracle(&nat(0), &nat(9), &nat(13)).unwrap(), nat(0));
        assert_eq!(modmul_oracle(&nat(1), &nat(29), &nat(13)).unwrap(), nat(3));
        assert_eq!(
            modmul_oracle(&nat(1), &nat(1), &nat(0)),
            Err(Error::ZeroModulus)
        );
    }

    #[test]
    fn small_worked_case() {
        let ctx = make_context(nat(13), 2, 2).unwrap();
        let res = classical_mmm(&ctx, &nat(7), &nat(9)).unwrap();
        // 16^{-1} ≡ 9 (mod 13), 63 * 9 = 567 ≡ 8.
        assert_eq!(res.output, nat(8));
        assert_eq!(res.quotients.digits.len(), 2);
        // 63 * 11 mod 16 = 5.
        assert_eq!(quotient_sum_constant(&ctx, &nat(7), &nat(9)), nat(5));
        assert_eq!(res.quotients.sum_mod_pow2(4), nat(5));
    }

    #[test]
    fn zero_operand_gives_zero_quotients() {
        let ctx = make_context(nat(13), 2, 2).unwrap();
        let res = classical_mmm(&ctx, &nat(0), &nat(12)).unwrap();
        assert_eq!(res.output, nat(0));
        assert!(res.quotients.digits.iter().all(|&q| q == 0));
        assert_eq!(quotient_sum_constant(&ctx, &nat(0), &nat(12)), nat(0));
    }

    #[test]
    fn rejects_operands_at_or_above_modulus() {
        let ctx = make_context(nat(13), 2, 2).unwrap();
        assert_eq!(
            classical_mmm(&ctx, &nat(13), &nat(1)),
            Err(Error::OperandOutOfRange)
        );
        assert_eq!(
            classical_mmm(&ctx, &nat(1), &nat(20)),
            Err(Error::OperandOutOfRange)
        );
    }

    #[test]
    fn final_reduce_branches() {
        assert_eq!(final_reduce(&nat(15), &nat(13)).unwrap(), nat(2));
        assert_eq!(final_reduce(&nat(5), &nat(13)).unwrap(), nat(5));
        assert_eq!(final_reduce(&nat(26), &nat(13)), Err(Error::ReductionBound));
    }

    #[test]
    fn domain_helpers() {
        let ctx = make_context(nat(13), 2, 2).unwrap();
        assert_eq!(mont_encode(&ctx, &nat(7)).unwrap(), nat(8));
        assert_eq!(mont_encode(&ctx, &nat(0)).unwrap(), nat(0));
        for a in 0..13u64 {
            let enc = mont_encode(&ctx, &nat(a)).unwrap();
            assert_eq!(mont_decode(&ctx, &enc).unwrap(), nat(a));
        }
        assert_eq!(mont_mul_corrected(&ctx, &nat(7), &nat(9)).unwrap(), nat(11));
        assert_eq!(mont_mul_corrected(&ctx, &nat(7), &nat(0)).unwrap(), nat(0));
    }

    #[test]
    fn quotient_consistency_small() {
        assert!(check_quotient_consistency(&nat(13), &nat(7), &nat(9), 2, 4).unwrap());
        assert!(check_quotient_consistency(&nat(13), &nat(0), &nat(9), 2, 4).unwrap());
    }

    #[test]
    fn corrupted_inverse_trips_shift_check() {
        let ctx = make_context(nat(13), 2, 1)
            .unwrap()
            .with_corrupted_inverse();
        let err = classical_mmm(&ctx, &nat(7), &nat(9)).unwrap_err();
        assert!(matches!(err, Error::ShiftInvalid { iteration: 0, .. }));
    }

    #[test]
    fn randomized_against_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let bits = [8u64, 16, 64, 256, 1024][rng.gen_range(0..5)];
            let k = [2usize, 4, 8, 16][rng.gen_range(0..4)];
            let m = random_modulus(&mut rng, bits);
            let a = rng.gen_biguint_below(&m);
            let b = rng.gen_biguint_below(&m);
            let ctx = make_context(m.clone(), k, 1).unwrap();
            let res = classical_mmm(&ctx, &a, &b).unwrap();
            assert_eq!(res.output, montgomery_oracle(&ctx, &a, &b));
            assert!(res.pre_reduction < (&m << 1u32));
            assert_eq!(
                res.quotients.sum_mod_pow2(ctx.modulus_bits()),
                quotient_sum_constant(&ctx, &a, &b)
            );
            if bits <= 256 {
                assert_eq!(
                    mont_mul_corrected(&ctx, &a, &b).unwrap(),
                    modmul_oracle(&a, &b, &m).unwrap()
                );
            }
        }
    }
}

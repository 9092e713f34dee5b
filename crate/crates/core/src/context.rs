//! Validated Montgomery parameters and the shared arithmetic vocabulary.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision unsigned integer used for every operand and residue.
pub type Natural = BigUint;

/// Largest supported radix exponent; digits must fit a `u64`.
pub const MAX_RADIX_BITS: usize = 64;

/// Largest supported `k * t`; bounds the quotient pipeline and its tables.
pub const MAX_PIPELINE_SPAN: usize = 4096;

/// `2^bits - 1`.
pub fn low_mask(bits: usize) -> Natural {
    (Natural::one() << bits) - 1u32
}

/// `x mod 2^bits`.
pub fn low_bits(x: &Natural, bits: usize) -> Natural {
    if x.bits() <= bits as u64 {
        x.clone()
    } else {
        x & low_mask(bits)
    }
}

/// `-m^{-1} mod 2^bits` for odd `m`, via extended Euclid.
pub fn neg_inverse_mod_pow2(m: &Natural, bits: usize) -> Natural {
    debug_assert!(m.is_odd());
    let modulus = BigInt::from_biguint(Sign::Plus, Natural::one() << bits);
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    let egcd = m.extended_gcd(&modulus);
    debug_assert!(egcd.gcd.is_one());
    // x * m ≡ 1, so -x is the negated inverse.
    let neg = (-egcd.x).mod_floor(&modulus);
    neg.to_biguint().expect("mod_floor is non-negative")
}

/// Parameter bundle for one modulus, radix and pipeline depth.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MontgomeryContext {
    modulus: Natural,
    modulus_bits: usize,
    k: usize,
    t: usize,
    d: usize,
    m_prime_digit: u64,
    m_prime_wide: Natural,
    m_prime_full: Natural,
}

impl MontgomeryContext {
    pub fn new(modulus: Natural, k: usize, t: usize) -> Result<Self> {
        if modulus.is_zero() {
            return Err(Error::ZeroModulus);
        }
        if modulus.is_even() {
            return Err(Error::EvenModulus);
        }
        if modulus < Natural::from(3u32) {
            return Err(Error::ModulusTooSmall);
        }
        if !(2..=MAX_RADIX_BITS).contains(&k) {
            return Err(Error::RadixOutOfRange(k));
        }
        if t < 1 {
            return Err(Error::StagesOutOfRange(t));
        }
        if k * t > MAX_PIPELINE_SPAN {
            return Err(Error::SpanTooWide(k * t));
        }
        let modulus_bits = modulus.bits() as usize;
        let d = modulus_bits.div_ceil(k);
        let m_prime_digit = neg_inverse_mod_pow2(&modulus, k).to_u64().expect("k <= 64");
        let m_prime_wide = neg_inverse_mod_pow2(&modulus, k * t);
        let m_prime_full = neg_inverse_mod_pow2(&modulus, modulus_bits);
        Ok(Self {
            modulus,
            modulus_bits,
            k,
            t,
            d,
            m_prime_digit,
            m_prime_wide,
            m_prime_full,
        })
    }

    pub fn modulus(&self) -> &Natural {
        &self.modulus
    }

    /// Exact bit length `N_M` of the modulus.
    pub fn modulus_bits(&self) -> usize {
        self.modulus_bits
    }

    /// Radix exponent.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Quotient pipeline stage count.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Classical iteration count `ceil(N_M / k)`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Radix `2^k`.
    pub fn r(&self) -> Natural {
        Natural::one() << self.k
    }

    /// Width `k * t` of the pipelined quotient computation.
    pub fn span_bits(&self) -> usize {
        self.k * self.t
    }

    /// `-M^{-1} mod 2^k`.
    pub fn m_prime_digit(&self) -> u64 {
        self.m_prime_digit
    }

    /// `-M^{-1} mod 2^(k*t)`.
    pub fn m_prime_wide(&self) -> &Natural {
        &self.m_prime_wide
    }

    /// `-M^{-1} mod 2^N_M`.
    pub fn m_prime_full(&self) -> &Natural {
        &self.m_prime_full
    }

    pub fn digit_mask(&self) -> u64 {
        if self.k == 64 {
            u64::MAX
        } else {
            (1u64 << self.k) - 1
        }
    }

    /// Same context with a different stage count.
    pub fn with_stages(&self, t: usize) -> Result<Self> {
        Self::new(self.modulus.clone(), self.k, t)
    }

    /// Same modulus with a different radix, keeping the stage count.
    pub fn with_radix(&self, k: usize) -> Result<Self> {
        Self::new(self.modulus.clone(), k, self.t)
    }

    /// Test hook: flips bit 1 of every stored `M'`, so quotient digits no
    /// longer clear the low window.
    #[doc(hidden)]
    pub fn with_corrupted_inverse(&self) -> Self {
        let flip = Natural::from(2u32);
        Self {
            m_prime_digit: self.m_prime_digit ^ 2,
            m_prime_wide: &self.m_prime_wide ^ &flip,
            m_prime_full: &self.m_prime_full ^ &flip,
            ..self.clone()
        }
    }

    pub(crate) fn check_operand(&self, x: &Natural) -> Result<()> {
        if x >= &self.modulus {
            Err(Error::OperandOutOfRange)
        } else {
            Ok(())
        }
    }
}

/// Convenience constructor mirroring [`MontgomeryContext::new`].
pub fn make_context(modulus: Natural, k: usize, t: usize) -> Result<MontgomeryContext> {
    MontgomeryContext::new(modulus, k, t)
}

/// Little-endian base-`2^k` digits of an operand, followed by `t + 1` zero
/// padding digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitVector {
    k: usize,
    significant: usize,
    digits: Vec<u64>,
}

impl DigitVector {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of non-padding digits (`d`).
    pub fn significant_len(&self) -> usize {
        self.significant
    }

    /// All digits including padding.
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// Digit `i`, zero past the end.
    pub fn digit(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(0)
    }

    pub fn recompose(&self) -> Natural {
        self.digits.iter().rev().fold(Natural::zero(), |acc, &dg| {
            (acc << self.k) + Natural::from(dg)
        })
    }
}

pub fn to_digits(x: &Natural, ctx: &MontgomeryContext) -> Result<DigitVector> {
    let limit = (ctx.k() * ctx.d()) as u64;
    if x.bits() > limit {
        return Err(Error::OperandTooWide {
            bits: x.bits(),
            limit,
        });
    }
    let mask = Natural::from(ctx.digit_mask());
    let mut digits = Vec::with_capacity(ctx.d() + ctx.t() + 1);
    for i in 0..ctx.d() {
        let digit = (x >> (i * ctx.k())) & &mask;
        digits.push(digit.to_u64().expect("masked to k <= 64 bits"));
    }
    digits.resize(ctx.d() + ctx.t() + 1, 0);
    Ok(DigitVector {
        k: ctx.k(),
        significant: ctx.d(),
        digits,
    })
}

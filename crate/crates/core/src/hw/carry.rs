//! Carry recovery for the shift of the redundant triple.
//!
//! The low `k` bits of the three terms always sum to a multiple of `2^k`,
//! so the carry out of the window is 0, 1 or 2 and depends only on bits
//! `k-1` and `k-2` of each term. It is produced in unary as two bits of
//! equal weight: `carry = C_l + C_m`.

use crate::error::{Error, Result};

/// The two recovered carry bits, both of weight `2^k` before the shift.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CarryPair {
    /// `C_l`: set whenever the window sum is non-zero.
    pub low: bool,
    /// `C_m`: set when the window sum is `2^(k+1)`.
    pub high: bool,
}

impl CarryPair {
    pub fn value(self) -> u32 {
        u32::from(self.low) + u32::from(self.high)
    }
}

/// LUT index, bit 5 down to bit 0:
/// `z0[k-1], z1[k-1], z2[k-1], z0[k-2], z1[k-2], z2[k-2]`.
pub fn carry_index(z0: u64, z1: u64, z2: u64, k: usize) -> u8 {
    let bit = |z: u64, p: usize| ((z >> p) & 1) as u8;
    let (hi, lo) = (k - 1, k - 2);
    (bit(z0, hi) << 5)
        | (bit(z1, hi) << 4)
        | (bit(z2, hi) << 3)
        | (bit(z0, lo) << 2)
        | (bit(z1, lo) << 1)
        | bit(z2, lo)
}

/// Combinational carry logic on one LUT index.
pub fn carry_from_index(index: u8) -> CarryPair {
    let n_m = (index >> 3).count_ones();
    let n_l = (index & 0b111).count_ones();
    let high = match (n_m, n_l) {
        (3, _) => true,
        (2, 1..=3) => true,
        (2, 0) => false,
        (1, 3) => true,
        (1, 2) => false,
        _ => false,
    };
    CarryPair {
        low: index != 0,
        high,
    }
}

/// Carry bits for the low windows of a compressed triple.
///
/// Fails unless the window sum is a multiple of `2^k`.
pub fn carry_bits(z0_low: u64, z1_low: u64, z2_low: u64, k: usize) -> Result<CarryPair> {
    debug_assert!((2..=64).contains(&k));
    let sum = u128::from(z0_low) + u128::from(z1_low) + u128::from(z2_low);
    if sum & ((1u128 << k) - 1) != 0 {
        return Err(Error::CarryWindow { sum, k });
    }
    Ok(carry_from_index(carry_index(z0_low, z1_low, z2_low, k)))
}

/// Truth tables of the two carry LUTs, bit `i` holding the output for
/// index `i`.
pub fn carry_lut_inits() -> (u64, u64) {
    let mut init_low = 0u64;
    let mut init_high = 0u64;
    for index in 0u8..64 {
        let c = carry_from_index(index);
        init_low |= u64::from(c.low) << index;
        init_high |= u64::from(c.high) << index;
    }
    (init_low, init_high)
}

/// 64-bit INIT word as unprefixed lowercase hex, most significant first.
pub fn format_init(word: u64) -> String {
    format!("{word:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_words() {
        let (low, high) = carry_lut_inits();
        assert_eq!(low, 0xFFFF_FFFF_FFFF_FFFE);
        assert_eq!(high, 0xFFFE_FE80_FE80_8000);
        assert_eq!(format_init(low), "fffffffffffffffe");
        assert_eq!(format_init(high), "fffefe80fe808000");
        assert_eq!(carry_from_index(0), CarryPair::default());
    }

    #[test]
    fn examples() {
        assert_eq!(carry_bits(0, 0, 0, 4).unwrap().value(), 0);
        let c = carry_bits(0x8, 0x8, 0x0, 4).unwrap();
        assert_eq!((c.low, c.high), (true, false));
        let c = carry_bits(0xC, 0xC, 0x8, 4).unwrap();
        assert_eq!((c.low, c.high), (true, true));
        assert!(matches!(
            carry_bits(1, 0, 0, 4),
            Err(Error::CarryWindow { .. })
        ));
    }

    #[test]
    fn exhaustive_small_radices() {
        for k in 2..=8usize {
            let top = 1u64 << k;
            for z0 in 0..top {
                for z1 in 0..top {
                    let need = (top - (z0 + z1) % top) % top;
                    // z2 is forced by the precondition.
                    let z2 = need;
                    let carry = carry_bits(z0, z1, z2, k).unwrap();
                    let sum = z0 + z1 + z2;
                    assert_eq!(u64::from(carry.value()), sum / top, "k={k} {z0} {z1} {z2}");
                    assert!(carry.value() <= 2);
                }
            }
        }
    }
}

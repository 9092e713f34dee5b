//! Counter cells and column-wise parallel compression of partial products.
//!
//! A layer groups the current terms six at a time and applies one 6-to-3
//! counter per bit column: `O0` stays at weight `2^b`, `O1` moves to
//! `2^(b+1)` and `O2` to `2^(b+2)`. Trailing groups of four or five terms are
//! zero-padded into a cell; up to three leftovers pass through. When exactly
//! three terms remain and two are wanted, a carry-save (3-to-2) layer
//! finishes the job.

use num_traits::Zero;

use crate::context::Natural;
use crate::error::{Error, Result};

/// LUT-style 6-to-3 counter written as symmetric functions of its inputs:
/// `O0` is the parity, `O1` the parity of all pairwise products and `O2`
/// the disjunction of all four-input products.
pub fn compress_6to3(bits: [bool; 6]) -> (bool, bool, bool) {
    let o0 = bits.iter().fold(false, |acc, &b| acc ^ b);
    let mut o1 = false;
    for i in 0..6 {
        for j in i + 1..6 {
            o1 ^= bits[i] & bits[j];
        }
    }
    // Dropping a pair from six inputs leaves one of the C(6,4) products.
    let mut o2 = false;
    for i in 0..6 {
        for j in i + 1..6 {
            let rest = (0..6).filter(|&n| n != i && n != j).all(|n| bits[n]);
            o2 |= rest;
        }
    }
    (o0, o1, o2)
}

/// Carry-save adder cell: `S = X ^ Y ^ Z`, `C = XY | YZ | XZ`.
pub fn csa_3to2(x: bool, y: bool, z: bool) -> (bool, bool) {
    (x ^ y ^ z, (x & y) | (y & z) | (x & z))
}

/// 64 independent 6-to-3 counters, one per bit lane.
pub fn compress_6to3_words(w: [u64; 6]) -> [u64; 3] {
    let (s1, c1) = full_add(w[0], w[1], w[2]);
    let (s2, c2) = full_add(w[3], w[4], w[5]);
    let o0 = s1 ^ s2;
    let c3 = s1 & s2;
    let (o1, o2) = full_add(c1, c2, c3);
    [o0, o1, o2]
}

fn full_add(x: u64, y: u64, z: u64) -> (u64, u64) {
    (x ^ y ^ z, (x & y) | (y & z) | (x & z))
}

/// Output of [`compress_terms`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compressed {
    pub terms: Vec<Natural>,
    pub levels: usize,
}

/// Term count after one layer.
pub fn layer_output_count(n: usize, finish_pair: bool) -> usize {
    if n > 3 {
        let rem = n % 6;
        3 * (n / 6) + if rem > 3 { 3 } else { rem }
    } else if n == 3 && finish_pair {
        2
    } else {
        n
    }
}

/// Number of layers needed to bring `n` terms down to at most `target`.
pub fn tree_levels(mut n: usize, target: usize) -> usize {
    let mut levels = 0;
    while n > target.max(2) {
        n = layer_output_count(n, target <= 2);
        levels += 1;
    }
    levels
}

/// Compresses `terms` to at most `target` terms, preserving the exact sum.
/// Fails if any produced term is wider than `width` bits.
pub fn compress_terms(terms: &[Natural], target: usize, width: usize) -> Result<Compressed> {
    if target < 2 {
        return Err(Error::CompressionTarget(target));
    }
    let mut tree = LimbTerms::new(terms);
    let mut levels = 0;
    while tree.len() > target {
        tree.layer(target == 2);
        levels += 1;
    }
    let terms = tree.into_naturals();
    check_width(&terms, width)?;
    Ok(Compressed { terms, levels })
}

/// Applies exactly `layers` layers (aiming at two terms) and reduces every
/// term modulo `2^width`; the sum is preserved modulo `2^width`.
pub fn compress_layers_wrapping(terms: &[Natural], layers: usize, width: usize) -> Compressed {
    let mut tree = LimbTerms::new(terms);
    for _ in 0..layers {
        tree.layer(true);
        tree.truncate_bits(width);
    }
    tree.truncate_bits(width);
    Compressed {
        terms: tree.into_naturals(),
        levels: layers,
    }
}

pub(crate) fn check_width(terms: &[Natural], width: usize) -> Result<()> {
    for term in terms {
        if term.bits() > width as u64 {
            return Err(Error::WidthOverflow {
                bits: term.bits(),
                width,
            });
        }
    }
    Ok(())
}

/// Equal-length little-endian limb vectors.
struct LimbTerms {
    limbs: usize,
    terms: Vec<Vec<u64>>,
}

impl LimbTerms {
    fn new(terms: &[Natural]) -> Self {
        let limbs = terms
            .iter()
            .map(|t| t.iter_u64_digits().len())
            .max()
            .unwrap_or(0)
            .max(1);
        let terms = terms
            .iter()
            .map(|t| {
                let mut v: Vec<u64> = t.iter_u64_digits().collect();
                v.resize(limbs, 0);
                v
            })
            .collect();
        Self { limbs, terms }
    }

    fn len(&self) -> usize {
        self.terms.len()
    }

    fn layer(&mut self, finish_pair: bool) {
        let n = self.terms.len();
        if n <= 3 && !(n == 3 && finish_pair) {
            return;
        }
        // Outputs shifted by up to two bits may spill into a new limb.
        let out_limbs = self.limbs + 1;
        let mut next = Vec::with_capacity(layer_output_count(n, finish_pair));
        if n == 3 {
            let mut sum = vec![0u64; out_limbs];
            let mut carry = vec![0u64; self.limbs];
            for j in 0..self.limbs {
                let (s, c) = full_add(self.terms[0][j], self.terms[1][j], self.terms[2][j]);
                sum[j] = s;
                carry[j] = c;
            }
            next.push(sum);
            next.push(shift_left(&carry, 1, out_limbs));
        } else {
            for group in self.terms.chunks(6) {
                if group.len() <= 3 {
                    for term in group {
                        let mut t = term.clone();
                        t.resize(out_limbs, 0);
                        next.push(t);
                    }
                    continue;
                }
                let mut o0 = vec![0u64; out_limbs];
                let mut o1 = vec![0u64; self.limbs];
                let mut o2 = vec![0u64; self.limbs];
                for j in 0..self.limbs {
                    let mut lane = [0u64; 6];
                    for (slot, term) in lane.iter_mut().zip(group) {
                        *slot = term[j];
                    }
                    let [a, b, c] = compress_6to3_words(lane);
                    o0[j] = a;
                    o1[j] = b;
                    o2[j] = c;
                }
                next.push(o0);
                next.push(shift_left(&o1, 1, out_limbs));
                next.push(shift_left(&o2, 2, out_limbs));
            }
        }
        self.limbs = out_limbs;
        self.terms = next;
    }

    fn truncate_bits(&mut self, width: usize) {
        let keep = width.div_ceil(64).max(1);
        let top_bits = width % 64;
        for term in &mut self.terms {
            term.truncate(keep);
            term.resize(keep, 0);
            if top_bits != 0 {
                term[keep - 1] &= (1u64 << top_bits) - 1;
            }
            if width == 0 {
                term[0] = 0;
            }
        }
        self.limbs = keep;
    }

    fn into_naturals(self) -> Vec<Natural> {
        self.terms
            .into_iter()
            .map(|t| limbs_to_natural(&t))
            .collect()
    }
}

fn shift_left(v: &[u64], s: u32, out_limbs: usize) -> Vec<u64> {
    let mut out = vec![0u64; out_limbs];
    let mut carry = 0u64;
    for (j, &word) in v.iter().enumerate() {
        out[j] = (word << s) | carry;
        carry = word >> (64 - s);
    }
    if v.len() < out_limbs {
        out[v.len()] = carry;
    }
    out
}

pub(crate) fn limbs_to_natural(limbs: &[u64]) -> Natural {
    let halves: Vec<u32> = limbs
        .iter()
        .flat_map(|&l| [l as u32, (l >> 32) as u32])
        .collect();
    let n = Natural::new(halves);
    if n.is_zero() {
        Natural::zero()
    } else {
        n
    }
}

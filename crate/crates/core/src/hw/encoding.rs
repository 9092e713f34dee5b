//! Precomputed window tables (`iM`, `iM'`, merged) and their LUT INIT view.

use num_traits::{ToPrimitive, Zero};

use crate::context::{low_bits, MontgomeryContext, Natural};
use crate::error::{Error, Result};

pub const MIN_WINDOW: usize = 4;
pub const MAX_WINDOW: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingKind {
    /// `entry[i] = i * M`.
    Modulus,
    /// `entry[i] = i * M' mod 2^(kt)`.
    Inverse,
    /// `entry[i] = (i * M' mod 2^w) * M`, a quotient digit straight to its
    /// multiple of `M`.
    Merged,
}

impl EncodingKind {
    pub fn name(self) -> &'static str {
        match self {
            EncodingKind::Modulus => "im",
            EncodingKind::Inverse => "im-prime",
            EncodingKind::Merged => "merged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingTable {
    kind: EncodingKind,
    window: usize,
    output_bits: usize,
    entries: Vec<Natural>,
}

fn check_window(w: usize) -> Result<()> {
    if (MIN_WINDOW..=MAX_WINDOW).contains(&w) {
        Ok(())
    } else {
        Err(Error::WindowOutOfRange(w))
    }
}

impl EncodingTable {
    /// `entry[i] = i * base`, optionally reduced modulo `2^reduce_bits`.
    pub fn multiples(
        kind: EncodingKind,
        base: &Natural,
        w: usize,
        reduce_bits: Option<usize>,
    ) -> Result<Self> {
        check_window(w)?;
        let entries: Vec<Natural> = (0..1u64 << w)
            .map(|i| {
                let e = base * i;
                match reduce_bits {
                    Some(bits) => low_bits(&e, bits),
                    None => e,
                }
            })
            .collect();
        Ok(Self::from_entries(kind, w, entries, reduce_bits))
    }

    fn from_entries(
        kind: EncodingKind,
        window: usize,
        entries: Vec<Natural>,
        fixed_bits: Option<usize>,
    ) -> Self {
        let widest = entries.iter().map(|e| e.bits() as usize).max().unwrap_or(0);
        let output_bits = fixed_bits.unwrap_or(widest).max(1);
        Self {
            kind,
            window,
            output_bits,
            entries,
        }
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Width of every entry, i.e. the number of LUTs in the layer.
    pub fn output_bits(&self) -> usize {
        self.output_bits
    }

    pub fn entries(&self) -> &[Natural] {
        &self.entries
    }

    pub fn lookup(&self, index: u64) -> &Natural {
        &self.entries[index as usize]
    }
}

/// Builds the table of `kind` for the context's modulus.
///
/// The merged table exists only for `k = w = 4`.
pub fn build_encoding_table(
    ctx: &MontgomeryContext,
    w: usize,
    kind: EncodingKind,
) -> Result<EncodingTable> {
    match kind {
        EncodingKind::Modulus => EncodingTable::multiples(kind, ctx.modulus(), w, None),
        EncodingKind::Inverse => {
            EncodingTable::multiples(kind, ctx.m_prime_wide(), w, Some(ctx.span_bits()))
        }
        EncodingKind::Merged => {
            check_window(w)?;
            if ctx.k() != 4 || w != 4 {
                return Err(Error::MergeUnsupported { k: ctx.k(), w });
            }
            let m_prime = ctx.m_prime_digit();
            let entries = (0..1u64 << w)
                .map(|i| ctx.modulus() * ((i * m_prime) & ((1 << w) - 1)))
                .collect();
            Ok(EncodingTable::from_entries(kind, w, entries, None))
        }
    }
}

/// Bit-transposed table: row `b` holds bit `b` of every entry, entry `i`
/// at bit position `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LutInitMatrix {
    window: usize,
    rows: Vec<Natural>,
}

impl LutInitMatrix {
    pub fn rows(&self) -> &[Natural] {
        &self.rows
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Reads entry `i` back out of the rows.
    pub fn column(&self, i: usize) -> Natural {
        let mut value = Natural::zero();
        for (b, row) in self.rows.iter().enumerate() {
            if row.bit(i as u64) {
                value.set_bit(b as u64, true);
            }
        }
        value
    }

    /// Row `b` as a `2^w`-bit hex word, most significant nibble first.
    pub fn row_hex(&self, b: usize) -> String {
        let digits = (1usize << self.window) / 4;
        format!("{:0>width$x}", self.rows[b], width = digits)
    }
}

pub fn lut_init_matrix(table: &EncodingTable) -> LutInitMatrix {
    let rows = (0..table.output_bits())
        .map(|b| {
            let mut row = Natural::zero();
            for (i, entry) in table.entries().iter().enumerate() {
                if entry.bit(b as u64) {
                    row.set_bit(i as u64, true);
                }
            }
            row
        })
        .collect();
    LutInitMatrix {
        window: table.window(),
        rows,
    }
}

/// One table lookup placed at a bit offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialProduct {
    pub window_value: u64,
    pub entry: Natural,
    pub shift: usize,
}

impl PartialProduct {
    pub fn value(&self) -> Natural {
        &self.entry << self.shift
    }
}

/// Slices the low `width_bits` of each term into `ceil(width_bits / w)`
/// windows and looks each window up in `table`.
pub fn encode_windows(
    terms: &[Natural],
    width_bits: usize,
    table: &EncodingTable,
) -> Vec<PartialProduct> {
    let w = table.window();
    let windows = width_bits.div_ceil(w);
    let mut out = Vec::with_capacity(terms.len() * windows);
    for term in terms {
        let slice = low_bits(term, width_bits);
        for j in 0..windows {
            let window_value = low_bits(&(&slice >> (j * w)), w)
                .to_u64()
                .expect("window fits u64");
            out.push(PartialProduct {
                window_value,
                entry: table.lookup(window_value).clone(),
                shift: j * w,
            });
        }
    }
    out
}

/// Array-multiplier partial products of `a_i * B`, each pre-shifted by
/// `k*t`: product `j` is `B << (kt + j)` when bit `j` of `a_i` is set.
pub fn gen_temp_pps(a_i: u64, b: &Natural, ctx: &MontgomeryContext) -> Vec<Natural> {
    let base = ctx.span_bits();
    (0..ctx.k())
        .map(|j| {
            if (a_i >> j) & 1 == 1 {
                b << (base + j)
            } else {
                Natural::zero()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::make_context;
    use proptest::prelude::*;

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn modulus_table() {
        let ctx = make_context(nat(13), 4, 1).unwrap();
        let table = build_encoding_table(&ctx, 4, EncodingKind::Modulus).unwrap();
        assert_eq!(table.entries().len(), 16);
        assert_eq!(table.lookup(3), &nat(39));
        assert_eq!(table.lookup(1), &nat(13));
        for kind in [
            EncodingKind::Modulus,
            EncodingKind::Inverse,
            EncodingKind::Merged,
        ] {
            assert!(build_encoding_table(&ctx, 4, kind)
                .unwrap()
                .lookup(0)
                .is_zero());
        }
        assert_eq!(
            build_encoding_table(&ctx, 3, EncodingKind::Modulus),
            Err(Error::WindowOutOfRange(3))
        );
        assert_eq!(
            build_encoding_table(&ctx, 7, EncodingKind::Modulus),
            Err(Error::WindowOutOfRange(7))
        );
    }

    #[test]
    fn merged_table() {
        let ctx = make_context(nat(13), 4, 1).unwrap();
        assert_eq!(ctx.m_prime_digit(), 11);
        let merged = build_encoding_table(&ctx, 4, EncodingKind::Merged).unwrap();
        // (2 * 11 mod 16) * 13 = 6 * 13
        assert_eq!(merged.lookup(2), &nat(78));

        let ctx8 = make_context(nat(13), 8, 1).unwrap();
        assert_eq!(
            build_encoding_table(&ctx8, 4, EncodingKind::Merged),
            Err(Error::MergeUnsupported { k: 8, w: 4 })
        );
        assert_eq!(
            build_encoding_table(&ctx, 5, EncodingKind::Merged),
            Err(Error::MergeUnsupported { k: 4, w: 5 })
        );
    }

    #[test]
    fn init_rows_of_modulus_table() {
        let ctx = make_context(nat(13), 4, 1).unwrap();
        let table = build_encoding_table(&ctx, 4, EncodingKind::Modulus).unwrap();
        let matrix = lut_init_matrix(&table);
        // i * 13 is odd exactly when i is odd.
        assert_eq!(matrix.rows()[0], nat(0xAAAA));
        assert_eq!(matrix.row_hex(0), "aaaa");
        assert_eq!(matrix.rows().len(), 8); // 15 * 13 = 195 needs 8 bits

        let zero = EncodingTable::multiples(EncodingKind::Modulus, &nat(0), 5, None).unwrap();
        let zm = lut_init_matrix(&zero);
        assert!(zm.rows().iter().all(Zero::is_zero));
        assert_eq!(zm.row_hex(0), "00000000");
    }

    #[test]
    fn temp_partial_products() {
        let ctx = make_context(nat(13), 4, 1).unwrap();
        assert!(gen_temp_pps(0, &nat(9), &ctx).iter().all(Zero::is_zero));
        let one = gen_temp_pps(1, &nat(9), &ctx);
        assert_eq!(one[0], nat(9 << 4));
        assert!(one[1..].iter().all(Zero::is_zero));
        let five: Natural = gen_temp_pps(5, &nat(9), &ctx).iter().sum();
        assert_eq!(five, nat(720));
    }

    #[test]
    fn single_window_is_a_lookup() {
        let ctx = make_context(nat(13), 4, 1).unwrap();
        let table = build_encoding_table(&ctx, 4, EncodingKind::Modulus).unwrap();
        let pps = encode_windows(&[nat(7)], 4, &table);
        assert_eq!(pps.len(), 1);
        assert_eq!(pps[0].value(), nat(91));
        let zeros = encode_windows(&[nat(0), nat(0)], 12, &table);
        assert_eq!(zeros.len(), 6);
        assert!(zeros.iter().all(|p| p.value().is_zero()));
    }

    #[test]
    fn radix_16_stage_one_count() {
        let m = (Natural::from(1u32) << 1023) | nat(0x1234_5679);
        let ctx = make_context(m, 16, 4).unwrap();
        let table = build_encoding_table(&ctx, 6, EncodingKind::Inverse).unwrap();
        let terms = [nat(u64::MAX), nat(0x0123_4567_89ab_cdef), nat(0xdead_beef)];
        let pps = encode_windows(&terms, 64, &table);
        assert_eq!(pps.len(), 33);
        let sum: Natural = pps.iter().map(PartialProduct::value).sum();
        let expect = terms.iter().sum::<Natural>() * ctx.m_prime_wide();
        assert_eq!(low_bits(&sum, 64), low_bits(&expect, 64));
    }

    proptest! {
        #[test]
        fn lut_matrix_round_trip(base in any::<u64>(), w in 4usize..=6, kind_sel in 0u8..2) {
            let kind = if kind_sel == 0 { EncodingKind::Modulus } else { EncodingKind::Inverse };
            let reduce = (kind == EncodingKind::Inverse).then_some(40);
            let table = EncodingTable::multiples(kind, &nat(base), w, reduce).unwrap();
            let matrix = lut_init_matrix(&table);
            for (i, entry) in table.entries().iter().enumerate() {
                prop_assert_eq!(&matrix.column(i), entry);
            }
        }

        #[test]
        fn windows_reproduce_products(
            m in any::<u64>(), terms in prop::collection::vec(any::<u64>(), 1..4),
            w in 4usize..=6, k in 2usize..=16, t in 1usize..=4,
        ) {
            let ctx = make_context(nat(m | 3), k, t).unwrap();
            let span = ctx.span_bits();
            let terms: Vec<Natural> = terms.into_iter().map(|x| low_bits(&nat(x), span)).collect();

            let im = build_encoding_table(&ctx, w, EncodingKind::Modulus).unwrap();
            let pps = encode_windows(&terms, span, &im);
            prop_assert_eq!(pps.len(), terms.len() * span.div_ceil(w));
            let sum: Natural = pps.iter().map(PartialProduct::value).sum();
            prop_assert_eq!(sum, terms.iter().sum::<Natural>() * ctx.modulus());

            let inv = build_encoding_table(&ctx, w, EncodingKind::Inverse).unwrap();
            let sum: Natural = encode_windows(&terms, span, &inv).iter().map(PartialProduct::value).sum();
            let expect = terms.iter().sum::<Natural>() * ctx.m_prime_wide();
            prop_assert_eq!(low_bits(&sum, span), low_bits(&expect, span));
        }
    }
}

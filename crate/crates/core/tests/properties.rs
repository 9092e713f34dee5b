use drmmm_core::drmmm::{latency_gain, latency_proposed, latency_serial, LatencyParams};
use drmmm_core::hw::{
    build_encoding_table, encode_windows, hw_run, lut_init_matrix, EncodingKind, HwConfig,
};
use drmmm_core::reference::quotient_sum_constant;
use drmmm_core::*;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn modulus(bits: usize) -> impl Strategy<Value = Natural> {
    proptest::collection::vec(any::<u32>(), bits.div_ceil(32)).prop_map(move |words| {
        let mut m = BigUint::new(words) & ((Natural::one() << bits) - 1u32);
        m |= Natural::one() | (Natural::one() << (bits - 1));
        m
    })
}

fn below(m: &Natural, seed: &[u32]) -> Natural {
    BigUint::new(seed.to_vec()) % m
}

fn case() -> impl Strategy<Value = (Natural, Natural, Natural, usize, usize)> {
    (
        prop::sample::select(vec![8usize, 16, 64, 256]),
        prop::sample::select(vec![2usize, 4, 8, 16]),
        prop::sample::select(vec![1usize, 2, 4, 6]),
    )
        .prop_flat_map(|(n, k, t)| {
            (
                modulus(n),
                proptest::collection::vec(any::<u32>(), 9),
                proptest::collection::vec(any::<u32>(), 9),
                Just(k),
                Just(t),
            )
        })
        .prop_map(|(m, a, b, k, t)| {
            let a = below(&m, &a);
            let b = below(&m, &b);
            (m, a, b, k, t)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn context_inverses((m, _, _, k, t) in case()) {
        let ctx = make_context(m.clone(), k, t).unwrap();
        let check = |inv: &Natural, bits: usize| {
            (&m * inv + 1u32) % (Natural::one() << bits) == Natural::zero()
        };
        prop_assert!(check(&Natural::from(ctx.m_prime_digit()), k));
        prop_assert!(check(ctx.m_prime_wide(), k * t));
        prop_assert!(check(ctx.m_prime_full(), ctx.modulus_bits()));
        prop_assert!(ctx.d() * k >= ctx.modulus_bits());
        prop_assert!((ctx.d() - 1) * k < ctx.modulus_bits());
    }

    #[test]
    fn digits_round_trip((m, a, _, k, t) in case()) {
        let ctx = make_context(m, k, t).unwrap();
        let v = to_digits(&a, &ctx).unwrap();
        prop_assert_eq!(v.recompose(), a);
        prop_assert!(v.digits().iter().all(|&d| u128::from(d) < 1u128 << k));
        prop_assert!(v.digits()[ctx.d()..].iter().all(|&d| d == 0));
    }

    #[test]
    fn three_models_agree((m, a, b, k, t) in case()) {
        let ctx = make_context(m.clone(), k, t).unwrap();
        let expected = montgomery_oracle(&ctx, &a, &b);
        let classical = classical_mmm(&ctx, &a, &b).unwrap();
        let (pipelined, trace) = drmmm_mul(&ctx, &a, &b).unwrap();
        let (hw, cycles, hw_trace) = hw_run(&ctx, &a, &b, &HwConfig::default()).unwrap();

        prop_assert_eq!(&classical.output, &expected);
        prop_assert_eq!(&pipelined.output, &expected);
        prop_assert_eq!(&hw.output, &expected);
        prop_assert!(classical.pre_reduction < &m * 2u32);
        let diff = &classical.pre_reduction - &classical.output;
        prop_assert!(diff.is_zero() || diff == m);

        prop_assert_eq!(&pipelined.pre_reduction, &classical.pre_reduction);
        prop_assert_eq!(&pipelined.quotients, &classical.quotients);
        prop_assert!(trace.steps[..t].iter().all(|s| s.q_hat == 0));
        prop_assert_eq!(trace.iterations(), ctx.d() + t);
        prop_assert_eq!(hw_trace.records.len(), ctx.d() + t);
        for (rec, step) in hw_trace.records.iter().zip(&trace.steps) {
            prop_assert_eq!(rec.value(), step.z.clone());
        }
        prop_assert_eq!(cycles.total_cycles, cycles.iterations + cycles.epilogue_cycles);
    }

    #[test]
    fn quotient_constant_is_radix_free((m, a, b, _, _) in case()) {
        let n = m.bits() as usize;
        let want = (&a * &b * make_context(m.clone(), 2, 1).unwrap().m_prime_full())
            % (Natural::one() << n);
        for k in [2usize, 4, 8, 16] {
            let ctx = make_context(m.clone(), k, 1).unwrap();
            let q = classical_mmm(&ctx, &a, &b).unwrap().quotients;
            prop_assert_eq!(q.digits.len(), ctx.d());
            prop_assert_eq!(q.sum_mod_pow2(n), want.clone());
            prop_assert_eq!(quotient_sum_constant(&ctx, &a, &b), want.clone());
        }
    }

    #[test]
    fn latency_gain_matches_difference(
        t_m in 0i64..1000, t_a in 0i64..1000, t_red in 0i64..1000, d in 1u64..300, t in 1u64..16,
    ) {
        let p = LatencyParams::new(t_m, t_a, t_red);
        let diff = latency_serial(&p, d) - latency_proposed(&p, d, t);
        prop_assert_eq!(&diff, &latency_gain(&p, d, t as i64));
        let lhs = BigRational::from_integer((2 * d as i64 * t_m).into());
        let rhs = BigRational::from_integer(((t as i64 + 1) * (t_m + 2 * t_a)).into());
        if lhs > rhs {
            prop_assert!(latency_proposed(&p, d, t) < latency_serial(&p, d));
        }
    }

    #[test]
    fn lut_columns_rebuild_entries((m, _, _, k, t) in case(), w in 4usize..=6) {
        let ctx = make_context(m, k, t).unwrap();
        for kind in [EncodingKind::Modulus, EncodingKind::Inverse] {
            let table = build_encoding_table(&ctx, w, kind).unwrap();
            prop_assert!(table.entries()[0].is_zero());
            let init = lut_init_matrix(&table);
            for (i, e) in table.entries().iter().enumerate() {
                prop_assert_eq!(&init.column(i), e);
            }
        }
    }

    #[test]
    fn windowed_products((m, a, _, k, t) in case(), w in 4usize..=6) {
        let ctx = make_context(m.clone(), k, t).unwrap();
        let span = ctx.span_bits();
        let table = build_encoding_table(&ctx, w, EncodingKind::Modulus).unwrap();
        let q = &a % (Natural::one() << span);
        let sum: Natural = encode_windows(std::slice::from_ref(&q), span, &table)
            .iter()
            .map(|p| p.value())
            .sum();
        prop_assert_eq!(sum, &q * &m);

        let inv = build_encoding_table(&ctx, w, EncodingKind::Inverse).unwrap();
        let sum: Natural = encode_windows(std::slice::from_ref(&a), span, &inv)
            .iter()
            .map(|p| p.value())
            .sum();
        let modulus = Natural::one() << span;
        prop_assert_eq!(sum % &modulus, (&a * ctx.m_prime_wide()) % &modulus);
    }
}

#[test]
fn worked_example() {
    let m = Natural::from(13u32);
    let ctx = make_context(m, 2, 2).unwrap();
    let (a, b) = (Natural::from(7u32), Natural::from(9u32));
    assert_eq!(
        classical_mmm(&ctx, &a, &b).unwrap().output,
        Natural::from(8u32)
    );
    assert_eq!(
        drmmm_mul(&ctx, &a, &b).unwrap().0.output,
        Natural::from(8u32)
    );
    assert_eq!(
        hw_run(&ctx, &a, &b, &HwConfig::default()).unwrap().0.output,
        Natural::from(8u32)
    );
    assert_eq!(
        modmul_oracle(&a, &b, ctx.modulus()).unwrap(),
        Natural::from(11u32)
    );
}

//! Cross-iteration dependence degree and abstract latency formulas.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::context::{MontgomeryContext, Natural};
use crate::error::{Error, Result};

/// Dependence degree of iteration `i` as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DependenceDegree {
    pub i: usize,
    pub value: Ratio<u64>,
}

/// `i / (i + 1)`, valid when all operands share the modulus width.
pub fn dependence_degree(i: usize, ctx: &MontgomeryContext) -> Result<DependenceDegree> {
    let max = ctx.d() - 1;
    if i > max {
        return Err(Error::IterationOutOfRange { index: i, max });
    }
    Ok(DependenceDegree {
        i,
        value: Ratio::new(i as u64, i as u64 + 1),
    })
}

/// Bit-length ratio `|(sum_{j<i} q_j r^j) * M| / |(sum_{j<=i} a_j r^j) * B|`
/// for arbitrary operand widths. `None` when the denominator is zero.
pub fn dependence_ratio(
    k: usize,
    quotients: &[u64],
    a_digits: &[u64],
    b: &Natural,
    m: &Natural,
    i: usize,
) -> Option<Ratio<u64>> {
    let weighted = |digits: &[u64], upto: usize| {
        digits
            .iter()
            .take(upto)
            .enumerate()
            .fold(Natural::zero(), |acc, (j, &q)| {
                acc + (Natural::from(q) << (k * j))
            })
    };
    let num = (weighted(quotients, i) * m).bits();
    let den = (weighted(a_digits, i + 1) * b).bits();
    (den != 0).then(|| Ratio::new(num, den))
}

/// `1 - 1 / ceil(N_M / k)`.
pub fn dependence_bound(modulus_bits: usize, k: usize) -> Ratio<u64> {
    let d = modulus_bits.div_ceil(k.max(1)).max(1) as u64;
    Ratio::new(d - 1, d)
}

/// Abstract delays in arbitrary time units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatencyParams {
    /// Multiplication.
    pub t_m: BigRational,
    /// Addition.
    pub t_a: BigRational,
    /// Final reduction.
    pub t_red: BigRational,
    /// Updating `Ẑ` once.
    pub t_u: BigRational,
    /// Computing one quotient digit end to end.
    pub t_q: BigRational,
}

impl LatencyParams {
    pub fn new(t_m: i64, t_a: i64, t_red: i64) -> Self {
        Self {
            t_m: int(t_m),
            t_a: int(t_a),
            t_red: int(t_red),
            t_u: BigRational::zero(),
            t_q: BigRational::zero(),
        }
    }

    pub fn with_pipeline(mut self, t_u: BigRational, t_q: BigRational) -> Self {
        self.t_u = t_u;
        self.t_q = t_q;
        self
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `t_c = 3 T_m + 2 T_a`.
pub fn serial_iteration_delay(p: &LatencyParams) -> BigRational {
    &p.t_m * int(3) + &p.t_a * int(2)
}

/// `t_i = T_m + 2 T_a`.
pub fn proposed_iteration_delay(p: &LatencyParams) -> BigRational {
    &p.t_m + &p.t_a * int(2)
}

/// `d * t_c + T_red`.
pub fn latency_serial(p: &LatencyParams, d: u64) -> BigRational {
    serial_iteration_delay(p) * int(d as i64) + &p.t_red
}

/// `(d + t + 1) * t_i + T_red`.
pub fn latency_proposed(p: &LatencyParams, d: u64, t: u64) -> BigRational {
    proposed_iteration_delay(p) * int((d + t + 1) as i64) + &p.t_red
}

/// `2 d T_m - (t + 1)(T_m + 2 T_a)`; `t` is signed so the expression can be
/// evaluated outside the physical range.
pub fn latency_gain(p: &LatencyParams, d: u64, t: i64) -> BigRational {
    &p.t_m * int(2 * d as i64) - proposed_iteration_delay(p) * int(t + 1)
}

/// Smallest `t >= 1` with `T_q <= (t - 1) T_u`.
pub fn estimate_t_max(p: &LatencyParams) -> Result<u64> {
    if !p.t_u.is_positive() {
        return Err(Error::ZeroUpdateDelay);
    }
    if !p.t_q.is_positive() {
        return Ok(1);
    }
    let ratio = &p.t_q / &p.t_u;
    let steps = ratio.ceil().to_integer();
    Ok(steps.to_u64().expect("stage count fits u64") + u64::one())
}

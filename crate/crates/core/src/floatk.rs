//! Nonnegative `k`-bit floating-point numbers with unbounded exponent.
//!
//! `F_k = { m * 2^z : 0 <= m <= 2^k - 1 }`. Every operation rounds its exact
//! result to the nearest element of `F_k`, ties away from zero, so each
//! result equals `exact * (1 + d)` with `|d| < 2^-k`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lmc::{InitialDistribution, Lmc};
use crate::rational::Rational;

/// `mantissa * 2^exponent` at precision `k`. Nonzero values are normalized,
/// `2^(k-1) <= mantissa < 2^k`; zero is `0 * 2^0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FloatK {
    mantissa: BigUint,
    exponent: BigInt,
    precision: u32,
}

impl FloatK {
    pub fn zero(k: u32) -> Self {
        assert!(k >= 1, "precision must be positive");
        Self {
            mantissa: BigUint::zero(),
            exponent: BigInt::zero(),
            precision: k,
        }
    }

    /// Canonical construction; rejects non-normalized parts.
    pub fn from_parts(mantissa: BigUint, exponent: BigInt, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("precision must be positive"));
        }
        if mantissa.is_zero() {
            if !exponent.is_zero() {
                return Err(Error::input("zero must have exponent 0"));
            }
        } else if mantissa.bits() != u64::from(k) {
            return Err(Error::input(format!(
                "mantissa {mantissa} is not normalized to {k} bits"
            )));
        }
        Ok(Self {
            mantissa,
            exponent,
            precision: k,
        })
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> &BigInt {
        &self.exponent
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Nearest element of `F_k` to `x >= 0`.
    ///
    /// # Panics
    /// If `x` is negative or `k` is zero.
    pub fn round(x: &Rational, k: u32) -> Self {
        assert!(!x.is_negative(), "cannot round a negative value");
        assert!(k >= 1, "precision must be positive");
        if x.is_zero() {
            return Self::zero(k);
        }
        let p = x.numer().magnitude();
        let q = x.denom().magnitude();
        let kk = i64::from(k);
        let mut z = p.bits() as i64 - q.bits() as i64 - kk;
        let (mut m, rem, den) = loop {
            let (num, den) = if z >= 0 {
                (p.clone(), q << (z as u64))
            } else {
                (p << ((-z) as u64), q.clone())
            };
            let (m, rem) = num.div_rem(&den);
            match m.bits().cmp(&(k as u64)) {
                Ordering::Greater => z += 1,
                Ordering::Less => z -= 1,
                Ordering::Equal => break (m, rem, den),
            }
        };
        if rem << 1u32 >= den {
            m += 1u32;
            if m.bits() > u64::from(k) {
                m >>= 1u32;
                z += 1;
            }
        }
        Self {
            mantissa: m,
            exponent: BigInt::from(z),
            precision: k,
        }
    }

    /// Rounds the exact value `n * 2^e`.
    fn from_scaled(n: BigUint, e: BigInt, k: u32) -> Self {
        if n.is_zero() {
            return Self::zero(k);
        }
        let len = n.bits();
        let k64 = u64::from(k);
        if len <= k64 {
            let shift = k64 - len;
            return Self {
                mantissa: n << shift,
                exponent: e - BigInt::from(shift),
                precision: k,
            };
        }
        let mut shift = len - k64;
        let round_up = n.bit(shift - 1);
        let mut m = n >> shift;
        if round_up {
            m += 1u32;
            if m.bits() > k64 {
                m >>= 1u32;
                shift += 1;
            }
        }
        Self {
            mantissa: m,
            exponent: e + BigInt::from(shift),
            precision: k,
        }
    }

    pub fn to_rational(&self) -> Rational {
        let m = Rational::from_integer(BigInt::from(self.mantissa.clone()));
        let z = self.exponent.to_i64().expect("exponent fits in i64");
        m * crate::rational::pow2(z)
    }

    fn check_precision(&self, other: &Self) -> Result<()> {
        if self.precision != other.precision {
            return Err(Error::input(format!(
                "precision mismatch: {} vs {}",
                self.precision, other.precision
            )));
        }
        Ok(())
    }

    /// Rounded sum; precisions must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_precision(other)?;
        Ok(self.add_unchecked(other))
    }

    /// Rounded product; precisions must agree.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_precision(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.precision);
        }
        Self::from_scaled(
            &self.mantissa * &other.mantissa,
            &self.exponent + &other.exponent,
            self.precision,
        )
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let (hi, lo) = if self.exponent >= other.exponent {
            (self, other)
        } else {
            (other, self)
        };
        let gap = &hi.exponent - &lo.exponent;
        // With gap > k the smaller operand is below half an ulp of the larger.
        if gap > BigInt::from(self.precision) {
            return hi.clone();
        }
        let gap = gap.to_u64().expect("small gap");
        Self::from_scaled(
            (&hi.mantissa << gap) + &lo.mantissa,
            lo.exponent.clone(),
            self.precision,
        )
    }

    /// Position of the leading bit, `exponent + k - 1`; meaningless for zero.
    fn top(&self) -> BigInt {
        &self.exponent + BigInt::from(self.mantissa.bits()) - 1
    }
}

impl Ord for FloatK {
    fn cmp(&self, other: &Self) -> Ordering {
        let by_value = match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.top().cmp(&other.top()).then_with(|| {
                // Same leading bit: align mantissas to a common width.
                let (a, b) = (self.mantissa.bits(), other.mantissa.bits());
                let lhs = &self.mantissa << b.saturating_sub(a);
                let rhs = &other.mantissa << a.saturating_sub(b);
                lhs.cmp(&rhs)
            }),
        };
        by_value.then(self.precision.cmp(&other.precision))
    }
}

impl PartialOrd for FloatK {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Debug form `m*2^z@k`.
impl fmt::Display for FloatK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}@{}", self.mantissa, self.exponent, self.precision)
    }
}

impl FromStr for FloatK {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse(format!("malformed float {s:?}, expected m*2^z@k"));
        let (m, rest) = s.split_once("*2^").ok_or_else(bad)?;
        let (z, k) = rest.split_once('@').ok_or_else(bad)?;
        let m: BigUint = m.parse().map_err(|_| bad())?;
        let z: BigInt = z.parse().map_err(|_| bad())?;
        let k: u32 = k.parse().map_err(|_| bad())?;
        Self::from_parts(m, z, k)
    }
}

pub fn round(x: &Rational, k: u32) -> FloatK {
    FloatK::round(x, k)
}

pub fn fp_add(a: &FloatK, b: &FloatK) -> Result<FloatK> {
    a.add(b)
}

pub fn fp_mul(a: &FloatK, b: &FloatK) -> Result<FloatK> {
    a.mul(b)
}

/// Number of rounding factors a word probability of length `<= n` passes
/// through when model entries are themselves rounded on entry: one for the
/// initial weight, then `q + 1` per matrix step and for the final dot product.
fn rounding_depth(n: u64, q: u64) -> u64 {
    (n + 1) * (q + 1) + 1
}

fn smallest_k(factors: u64, theta: &Rational) -> u32 {
    assert!(theta.is_positive(), "theta must be positive");
    // Smallest k >= 1 with 2^k >= 2 * factors / theta.
    let bound = Rational::from_integer(BigInt::from(2 * factors)) / theta;
    let mut k = 1u32;
    while crate::rational::pow2(i64::from(k)) < bound {
        k += 1;
    }
    k
}

/// Smallest `k` such that floating-point word probabilities for words of
/// length `<= n` over `q` states carry relative error at most `theta`, with
/// all model entries rounded to `F_k` on entry: `2^k >= 2 N / theta` for
/// `N = (n+1)(q+1) + 1`. Never less than 1.
pub fn precision_for(n: u64, q: u64, theta: &Rational) -> u32 {
    smallest_k(rounding_depth(n, q), theta)
}

/// The sharper requirement `2^k >= 2 (n+1) q / theta`, valid when every
/// entry of the initial distribution and model is already in `F_k`.
pub fn precision_for_exact_inputs(n: u64, q: u64, theta: &Rational) -> u32 {
    smallest_k((n + 1) * q, theta)
}

/// The parameters of a relative-error guarantee.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorBudget {
    pub k: u32,
    pub n: u64,
    pub q: u64,
    pub theta: Rational,
}

impl ErrorBudget {
    pub fn new(n: u64, q: u64, theta: Rational) -> Self {
        let k = precision_for(n, q, &theta);
        Self { k, n, q, theta }
    }

    /// `gamma_i = i 2^-k / (1 - i 2^-k)`, defined while `i 2^-k < 1`.
    pub fn gamma(&self, i: u64) -> Option<Rational> {
        let u = crate::rational::pow2(-i64::from(self.k));
        let iu = Rational::from_integer(BigInt::from(i)) * u;
        (iu < Rational::one()).then(|| &iu / (Rational::one() - &iu))
    }

    /// Whether `gamma_N <= theta` for the rounding depth of this budget.
    pub fn holds(&self) -> bool {
        self.gamma(rounding_depth(self.n, self.q))
            .is_some_and(|g| g <= self.theta)
    }
}

/// A chain with every probability rounded to `F_k`.
#[derive(Clone, Debug)]
pub struct FloatModel {
    k: u32,
    trans: Vec<Vec<Vec<(usize, FloatK)>>>,
    eow: Vec<FloatK>,
}

impl FloatModel {
    pub fn new(lmc: &Lmc, k: u32) -> Self {
        let trans = lmc
            .matrices()
            .iter()
            .map(|m| {
                (0..lmc.num_states())
                    .map(|i| {
                        m.row(i)
                            .iter()
                            .map(|(j, v)| (*j, FloatK::round(v, k)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let eow = lmc.eow().iter().map(|v| FloatK::round(v, k)).collect();
        Self { k, trans, eow }
    }

    pub fn precision(&self) -> u32 {
        self.k
    }

    pub fn round_distribution(&self, pi: &InitialDistribution) -> Vec<FloatK> {
        pi.weights().iter().map(|v| FloatK::round(v, self.k)).collect()
    }

    /// `v M(a)` with rounding after every scalar product and sum; each
    /// entry accumulates over source states in index order.
    pub fn step(&self, v: &[FloatK], label: usize) -> Vec<FloatK> {
        let mut out = vec![FloatK::zero(self.k); v.len()];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, m) in &self.trans[label][i] {
                let term = vi.mul_unchecked(m);
                out[*j] = out[*j].add_unchecked(&term);
            }
        }
        out
    }

    /// `v eow^T`, rounded the same way.
    pub fn stop(&self, v: &[FloatK]) -> FloatK {
        v.iter()
            .zip(&self.eow)
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .fold(FloatK::zero(self.k), |acc, (a, b)| {
                acc.add_unchecked(&a.mul_unchecked(b))
            })
    }
}

/// Floating-point evaluation of `pi M(a_1) ... M(a_m) eow^T`.
pub fn fp_word_probability(
    lmc: &Lmc,
    pi: &InitialDistribution,
    w: &[usize],
    k: u32,
) -> Result<FloatK> {
    if pi.len() != lmc.num_states() {
        return Err(Error::input("distribution length does not match the chain"));
    }
    if let Some(a) = w.iter().find(|&&a| a >= lmc.alphabet().len()) {
        return Err(Error::input(format!("unknown label index {a}")));
    }
    let model = FloatModel::new(lmc, k);
    let v = w
        .iter()
        .fold(model.round_distribution(pi), |v, &a| model.step(&v, a));
    Ok(model.stop(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, pow2, ratio};
    use proptest::prelude::*;

    fn f(x: i64, k: u32) -> FloatK {
        FloatK::round(&int(x), k)
    }

    #[test]
    fn round_examples() {
        assert_eq!(f(5, 3).to_rational(), int(5));
        // 9 sits halfway between 8 and 10.
        assert_eq!(f(9, 3).to_rational(), int(10));
        assert_eq!(FloatK::round(&ratio(1, 3), 1).to_rational(), ratio(1, 4));
        assert_eq!(FloatK::round(&int(7), 2).to_rational(), int(8));
        assert!(FloatK::round(&int(0), 4).is_zero());
    }

    #[test]
    fn third_is_nearer_to_quarter() {
        let x = ratio(1, 3);
        let d_low = &x - ratio(1, 4);
        let d_high = ratio(1, 2) - &x;
        assert!(d_low < d_high);
    }

    #[test]
    fn arithmetic_examples() {
        let k = 3;
        assert_eq!(fp_add(&f(7, k), &f(2, k)).unwrap().to_rational(), int(10));
        let x = FloatK::round(&ratio(5, 8), k);
        assert_eq!(fp_mul(&x, &f(1, k)).unwrap(), x);
        assert_eq!(fp_add(&x, &FloatK::zero(k)).unwrap(), x);
        assert_eq!(fp_add(&f(4, k), &f(2, k)).unwrap().to_rational(), int(6));
        assert!(matches!(fp_add(&f(4, 3), &f(4, 4)), Err(Error::Input(_))));
    }

    #[test]
    fn far_apart_addition_keeps_larger_operand() {
        let big = f(6, 3);
        let tiny = FloatK::round(&pow2(-40), 3);
        assert_eq!(big.add(&tiny).unwrap(), big);
        // Half an ulp of 4 at k = 3 is a tie, rounded up.
        let half = FloatK::round(&ratio(1, 2), 3);
        assert_eq!(f(4, 3).add(&half).unwrap().to_rational(), int(5));
    }

    #[test]
    fn display_and_parse() {
        let x = FloatK::round(&ratio(3, 16), 4);
        assert_eq!(x.to_string(), "12*2^-6@4");
        assert_eq!("12*2^-6@4".parse::<FloatK>().unwrap(), x);
        assert!("13*2^-6@3".parse::<FloatK>().is_err());
        assert!("0*2^1@3".parse::<FloatK>().is_err());
        assert!("garbage".parse::<FloatK>().is_err());
    }

    #[test]
    fn precision_examples() {
        assert_eq!(precision_for_exact_inputs(12, 3, &ratio(1, 8)), 10);
        assert_eq!(precision_for(12, 3, &ratio(1, 8)), 10);
        assert_eq!(precision_for(1, 1, &int(1000)), 1);
        for n in 0..20u64 {
            for q in 1..6u64 {
                for t in [ratio(1, 3), ratio(1, 50), ratio(7, 1000)] {
                    let k1 = precision_for(n, q, &t);
                    let k2 = precision_for(n, q, &(&t * int(2)));
                    assert!(k1 - k2 <= 1 && k2 <= k1);
                    assert!(ErrorBudget::new(n, q, t.clone()).holds());
                }
            }
        }
    }

    #[test]
    fn gamma_definition() {
        let b = ErrorBudget::new(2, 2, ratio(1, 4));
        assert_eq!(b.gamma(0), Some(int(0)));
        assert!(b.gamma(1u64 << b.k).is_none());
    }

    #[test]
    fn fp_word_probability_exact_when_representable() {
        let (lmc, p1, _) = fixtures::looping_pair();
        let w = lmc.parse_word("a b a").unwrap();
        let exact = lmc.word_probability(&p1, &w).unwrap();
        assert_eq!(fp_word_probability(&lmc, &p1, &w, 24).unwrap().to_rational(), exact);
    }

    #[test]
    fn fp_word_probability_of_impossible_word_is_zero() {
        let (lmc, p1, p2) = fixtures::split_vs_point();
        let w = lmc.parse_word("a a").unwrap();
        assert!(fp_word_probability(&lmc, &p1, &w, 8).unwrap().is_zero());
        let b = lmc.parse_word("b").unwrap();
        assert!(fp_word_probability(&lmc, &p2, &b, 8).unwrap().is_zero());
    }

    #[test]
    fn fp_word_probability_within_relative_bound() {
        let (lmc, _, p2) = fixtures::looping_pair();
        let w = lmc.parse_word("a a").unwrap();
        let exact = lmc.word_probability(&p2, &w).unwrap();
        let got = fp_word_probability(&lmc, &p2, &w, 20).unwrap().to_rational();
        let rel = ((&got - &exact) / &exact).abs();
        // (n+1)(q+1)+1 = 3*4+1 rounding factors at n = 2, q = 3.
        assert!(rel <= int(2 * 13) * pow2(-20));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (0u64..10_000, 1u64..10_000, -40i64..40).prop_map(|(p, q, e)| {
            Rational::new(BigInt::from(p), BigInt::from(q)) * pow2(e)
        })
    }

    proptest! {
        #[test]
        fn round_is_monotone(x in arb_rational(), y in arb_rational(), k in 1u32..12) {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(FloatK::round(&lo, k) <= FloatK::round(&hi, k));
        }

        #[test]
        fn round_is_idempotent(x in arb_rational(), k in 1u32..12) {
            let r = FloatK::round(&x, k);
            prop_assert_eq!(FloatK::round(&r.to_rational(), k), r);
        }

        #[test]
        fn round_relative_error(x in arb_rational(), k in 1u32..12) {
            let r = FloatK::round(&x, k).to_rational();
            let err = (&r - &x).abs();
            prop_assert!(err <= &x * pow2(-i64::from(k)));
            if r != x {
                prop_assert!(err < &x * pow2(-i64::from(k)));
            }
        }

        #[test]
        fn encode_decode_roundtrip(x in arb_rational(), k in 1u32..30) {
            let r = FloatK::round(&x, k);
            prop_assert_eq!(r.to_string().parse::<FloatK>().unwrap(), r);
        }

        #[test]
        fn operations_round_exact_results(x in arb_rational(), y in arb_rational(), k in 1u32..12) {
            let (a, b) = (FloatK::round(&x, k), FloatK::round(&y, k));
            let (ra, rb) = (a.to_rational(), b.to_rational());
            prop_assert_eq!(a.add(&b).unwrap(), FloatK::round(&(&ra + &rb), k));
            prop_assert_eq!(a.mul(&b).unwrap(), FloatK::round(&(&ra * &rb), k));
        }

        #[test]
        fn ordering_matches_values(x in arb_rational(), y in arb_rational(), k in 1u32..12) {
            let (a, b) = (FloatK::round(&x, k), FloatK::round(&y, k));
            prop_assert_eq!(a.cmp(&b), a.to_rational().cmp(&b.to_rational()));
        }
    }
}

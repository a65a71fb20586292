//! Exact rational numbers and the few transcendental bounds the crate needs.
//!
//! All probabilities are [`Rational`]s kept in lowest terms (num-rational
//! normalizes after every operation). Values that must be nonnegative are
//! checked at the boundaries (parsers, [`crate::lmc::Lmc`] validation);
//! internally signed values also occur, e.g. differences of distributions.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_biguint(n: BigUint) -> Rational {
    Rational::from_integer(BigInt::from_biguint(Sign::Plus, n))
}

/// Parses a probability as it appears in model files: `"num/den"` or an
/// integer. Decimal notation is rejected so files stay exact by construction.
pub fn parse_probability(text: &str) -> Result<Rational> {
    let t = text.trim();
    let value = match t.split_once('/') {
        Some((n, d)) => {
            let num = parse_natural(n, text)?;
            let den = parse_natural(d, text)?;
            if den.is_zero() {
                return Err(Error::parse(format!("zero denominator in {text:?}")));
            }
            Rational::new(num, den)
        }
        None => Rational::from_integer(parse_natural(t, text)?),
    };
    Ok(value)
}

/// Parses a user-supplied parameter: a fraction, an integer, or a plain
/// decimal such as `0.05` (converted exactly).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    if t.contains('/') || !t.contains('.') {
        return parse_probability(t);
    }
    let (whole, frac) = t.split_once('.').expect("checked above");
    let whole = if whole.is_empty() {
        BigInt::zero()
    } else {
        parse_natural(whole, text)?
    };
    if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(format!("malformed decimal {text:?}")));
    }
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    let frac: BigInt = frac
        .parse()
        .map_err(|_| Error::parse(format!("malformed decimal {text:?}")))?;
    Ok(Rational::new(whole * &scale + frac, scale))
}

fn parse_natural(part: &str, whole: &str) -> Result<BigInt> {
    let p = part.trim();
    if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(format!("malformed number {whole:?}")));
    }
    p.parse()
        .map_err(|_| Error::parse(format!("malformed number {whole:?}")))
}

/// `"num/den"`, or just `"num"` for integers.
pub fn fraction_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with `sig` significant digits, rounded half away from
/// zero. Positional notation for moderate magnitudes, `d.ddde-N` otherwise.
pub fn decimal_string(r: &Rational, sig: usize) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return if sig == 1 {
            "0".to_string()
        } else {
            format!("0.{}", "0".repeat(sig - 1))
        };
    }
    let negative = r.is_negative();
    let x = r.abs();
    let ten = BigInt::from(10u32);

    let mut e = x.numer().to_string().len() as i64 - x.denom().to_string().len() as i64;
    while pow10(e, &ten) > x {
        e -= 1;
    }
    while pow10(e + 1, &ten) <= x {
        e += 1;
    }
    let scaled = &x * pow10(sig as i64 - 1 - e, &ten);
    let half = ratio(1, 2);
    let mut m = (scaled + half).floor().to_integer();
    if m == ten.pow(sig as u32) {
        m /= &ten;
        e += 1;
    }
    let digits = m.to_string();
    debug_assert_eq!(digits.len(), sig);

    let body = if (-5..sig as i64).contains(&e) {
        if e >= 0 {
            let split = (e + 1) as usize;
            if split == digits.len() {
                digits
            } else {
                format!("{}.{}", &digits[..split], &digits[split..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
        }
    } else if digits.len() == 1 {
        format!("{digits}e{e}")
    } else {
        format!("{}.{}e{}", &digits[..1], &digits[1..], e)
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn pow10(e: i64, ten: &BigInt) -> Rational {
    if e >= 0 {
        Rational::from_integer(ten.pow(e as u32))
    } else {
        Rational::new(BigInt::one(), ten.pow((-e) as u32))
    }
}

/// Nearest `f64`, for human-facing summaries only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of the denominators of `values` (1 for none).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn ceil_to_natural(r: &Rational) -> BigUint {
    let c = r.ceil().to_integer();
    c.to_biguint().unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Certified natural logarithm
// ---------------------------------------------------------------------------

const LN_SERIES_TERMS: u32 = 40;
const LN_DYADIC_BITS: u64 = 96;

/// Rational enclosure `lo <= ln(x) <= hi` for `x > 0`, with width below 2^-90.
///
/// Uses `ln y = 2 atanh((y-1)/(y+1))` on `y = x / 2^e` in `[1, 2)`, with a
/// bounded geometric tail for the truncated series.
pub fn ln_bounds(x: &Rational) -> (Rational, Rational) {
    assert!(x.is_positive(), "ln of a nonpositive number");
    let (ln2_lo, ln2_hi) = atanh_enclosure(&ratio(1, 3));

    let mut e = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut y = x * pow2(-e);
    while y < Rational::one() {
        y *= int(2);
        e -= 1;
    }
    while y >= int(2) {
        y /= int(2);
        e += 1;
    }

    // Outward dyadic rounding of y keeps the series arithmetic small.
    let scale = pow2(LN_DYADIC_BITS as i64);
    let y_lo = (&y * &scale).floor() / &scale;
    let y_hi = (&y * &scale).ceil() / &scale;
    let t = |v: &Rational| (v - Rational::one()) / (v + Rational::one());
    let (lny_lo, _) = atanh_enclosure(&t(&y_lo));
    let (_, lny_hi) = atanh_enclosure(&t(&y_hi));

    let ee = int(e);
    let (lo, hi) = if e >= 0 {
        (&ee * &ln2_lo + lny_lo, &ee * &ln2_hi + lny_hi)
    } else {
        (&ee * &ln2_hi + lny_lo, &ee * &ln2_lo + lny_hi)
    };
    (lo, hi)
}

/// Certified upper bound on `ln(x)`.
pub fn ln_upper(x: &Rational) -> Rational {
    ln_bounds(x).1
}

/// Enclosure of `2 atanh(t)` for `0 <= t <= 1/3`.
fn atanh_enclosure(t: &Rational) -> (Rational, Rational) {
    debug_assert!(!t.is_negative() && *t <= ratio(1, 3));
    let t2 = t * t;
    let mut power = t.clone();
    let mut sum = Rational::zero();
    for i in 0..LN_SERIES_TERMS {
        sum += &power / int(2 * i as i64 + 1);
        power *= &t2;
    }
    // Remaining terms: sum_{i>=N} t^{2i+1}/(2i+1) <= t^{2N+1} / ((2N+1)(1-t^2)).
    let n = LN_SERIES_TERMS as i64;
    let tail = &power / (int(2 * n + 1) * (Rational::one() - &t2));
    let lo = &sum * int(2);
    let hi = (sum + tail) * int(2);
    (lo, hi)
}

pub(crate) fn pow2(e: i64) -> Rational {
    let two = BigInt::from(2u32);
    if e >= 0 {
        Rational::from_integer(two.pow(e as u32))
    } else {
        Rational::new(BigInt::one(), two.pow((-e) as u32))
    }
}

//! Exact rational arithmetic helpers.
//!
//! All probabilities and derived quantities in this crate are arbitrary
//! precision rationals. Nothing is ever rounded; equality of distributions
//! is decidable equality of reduced fractions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational number, auto-reduced on construction.
pub type Rational = BigRational;

/// Builds a rational from small integer parts. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Renders a rational in canonical `p/q` form, omitting `/q` when q = 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest `f64` to a rational, for display next to the exact value.
pub fn approx_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of lossy parts for magnitudes beyond f64
        // conversion of the integer components.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses `p`, `p/q`, or a decimal literal such as `0.25` into an exact
/// rational. Decimal literals convert exactly (`0.5` becomes `1/2`).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((numer, denom)) = text.split_once('/') {
        let n: BigInt = numer.trim().parse().ok()?;
        let d: BigInt = denom.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.trim_start().starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().ok()?
        };
        let f: BigInt = frac.parse().ok()?;
        let scale = BigInt::from(10u8).pow(frac.len() as u32);
        let frac_part = Rational::new(f, scale);
        let whole_part = Rational::from_integer(w);
        return Some(if negative {
            whole_part - frac_part
        } else {
            whole_part + frac_part
        });
    }
    let n: BigInt = text.parse().ok()?;
    Some(Rational::from_integer(n))
}

/// True when the rational lies in the closed unit interval.
pub fn is_probability(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

//! Exact rational helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_u64(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Parses `12`, `-3`, `2.345` or `1e3`-free decimal text exactly.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", whole, frac);
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let q = Rational::new(num, den);
    Some(if neg { -q } else { q })
}

/// Decimal digits needed to print `q` exactly, if it terminates.
fn terminating_places(q: &Rational) -> Option<usize> {
    let mut d = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d.is_one() {
        Some(twos.max(fives))
    } else {
        None
    }
}

/// Exact decimal text when the expansion terminates, `p/q` otherwise.
pub fn format(q: &Rational) -> String {
    if q.is_integer() {
        return q.numer().to_string();
    }
    match terminating_places(q) {
        Some(places) if places <= 40 => {
            let scaled = q * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
            let digits = scaled.to_integer().abs().to_string();
            let digits = format!("{:0>width$}", digits, width = places + 1);
            let (w, f) = digits.split_at(digits.len() - places);
            let sign = if q.is_negative() { "-" } else { "" };
            format!("{}{}.{}", sign, w, f.trim_end_matches('0'))
        }
        _ => format!("{}/{}", q.numer(), q.denom()),
    }
}

pub fn is_decimal_text(q: &Rational) -> bool {
    q.is_integer() || terminating_places(q).map_or(false, |p| p <= 40)
}

pub fn floor_u64(q: &Rational) -> Option<u64> {
    if q.is_negative() {
        return None;
    }
    q.floor().to_integer().to_u64()
}

pub fn ceil_nat(q: &Rational) -> u64 {
    if q.is_negative() {
        return 0;
    }
    q.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

pub fn lcm_denoms<'a>(it: impl Iterator<Item = &'a Rational>) -> BigInt {
    it.fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn signum(q: &Rational) -> std::cmp::Ordering {
    q.cmp(&Rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        for s in ["2.3", "-0.62", "16.502", "0.5", "12", "-3", "0.001"] {
            let q = parse_decimal(s).unwrap();
            assert_eq!(format(&q), s);
        }
        assert_eq!(format(&ratio(1, 3)), "1/3");
        assert_eq!(format(&parse_decimal("6.0").unwrap()), "6");
    }
}

//! Exact rational scalars.
//!
//! [`Rat`] is an arbitrary-precision rational kept in lowest terms with a
//! positive denominator. Helpers here cover parsing `p/q` strings, rounding
//! and the fixed 12-significant-digit decimal rendering used in reports.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

pub type Rat = BigRational;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn from_big(n: &BigInt) -> Rat {
    Rat::from_integer(n.clone())
}

/// Parses `p/q` or a bare integer. Rejects zero denominators and blanks.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty rational".into());
    }
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), Some(q.trim())),
        None => (t, None),
    };
    let num: BigInt = p.parse().map_err(|_| format!("invalid numerator {p:?}"))?;
    let den: BigInt = match q {
        Some(q) => q
            .parse()
            .map_err(|_| format!("invalid denominator {q:?}"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(Rat::new(num, den))
}

/// Canonical `p/q` string (bare `p` for integers).
pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Magnitudes outside f64 range.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Decimal rendering with 12 significant digits, trailing zeros trimmed.
pub fn fmt_decimal(r: &Rat) -> String {
    fmt_f64_sig(to_f64(r), 12)
}

pub fn fmt_f64_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", digits - 1, x);
    let v: f64 = s.parse().unwrap_or(x);
    let exp = v.abs().log10().floor() as i64;
    if (-5..15).contains(&exp) {
        let decimals = (digits as i64 - 1 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        s
    }
}

/// Nearest integer, ties rounded toward zero so that `±1/2` rounds to 0.
pub fn round_half_toward_zero(r: &Rat) -> BigInt {
    let fl = r.floor();
    let frac = r - &fl;
    let half = rat(1, 2);
    let base = fl.to_integer();
    if frac > half || (frac == half && r.is_negative()) {
        base + 1
    } else {
        base
    }
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

/// Serde adapter writing a [`Rat`] as its exact `p/q` string.
pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rat_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&fmt_rat(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| parse_rat(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod serde_rat_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&fmt_rat(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        v.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

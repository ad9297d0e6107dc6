//! Exact rational coefficients with a floating-point fallback.

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

pub type Rat = Ratio<i64>;

/// A numeric constant. Arithmetic stays exact while it fits in `i64`
/// numerators and denominators and degrades to `f64` otherwise.
#[derive(Clone, Copy, Debug)]
pub enum Number {
    Rat(Rat),
    Float(f64),
}

impl Number {
    pub const ZERO: Number = Number::Rat(Ratio::new_raw(0, 1));
    pub const ONE: Number = Number::Rat(Ratio::new_raw(1, 1));
    pub const MINUS_ONE: Number = Number::Rat(Ratio::new_raw(-1, 1));

    pub fn int(n: i64) -> Self {
        Number::Rat(Rat::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Number::Rat(Rat::new(n, d))
    }

    /// Floats with an exactly integral value are stored as rationals.
    pub fn float(x: f64) -> Self {
        if x.fract() == 0.0 && x.abs() < 1e15 {
            Number::int(x as i64)
        } else {
            Number::Float(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Number::Float(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rat(r) => r.is_zero(),
            Number::Float(x) => x == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Number::Rat(r) => r.is_one(),
            Number::Float(x) => x == 1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rat(r) => r.is_negative(),
            Number::Float(x) => x < 0.0,
        }
    }

    pub fn is_rational(self) -> bool {
        matches!(self, Number::Rat(_))
    }

    pub fn as_integer(self) -> Option<i64> {
        match self {
            Number::Rat(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    pub fn abs(self) -> Self {
        match self {
            Number::Rat(r) => Number::Rat(r.abs()),
            Number::Float(x) => Number::Float(x.abs()),
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Number::Rat(r) => match r.numer().checked_neg() {
                Some(n) => Number::Rat(Rat::new_raw(n, *r.denom())),
                None => Number::Float(-r.to_f64().unwrap_or(f64::NAN)),
            },
            Number::Float(x) => Number::Float(-x),
        }
    }

    pub fn add(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rat(a), Number::Rat(b)) => a
                .checked_add(&b)
                .map(Number::Rat)
                .unwrap_or_else(|| Number::float(self.to_f64() + other.to_f64())),
            _ => Number::float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn sub(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rat(a), Number::Rat(b)) => a
                .checked_sub(&b)
                .map(Number::Rat)
                .unwrap_or_else(|| Number::float(self.to_f64() - other.to_f64())),
            _ => Number::float(self.to_f64() - other.to_f64()),
        }
    }

    pub fn mul(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rat(a), Number::Rat(b)) => a
                .checked_mul(&b)
                .map(Number::Rat)
                .unwrap_or_else(|| Number::float(self.to_f64() * other.to_f64())),
            _ => Number::float(self.to_f64() * other.to_f64()),
        }
    }

    /// Reciprocal; `None` for zero.
    pub fn recip(self) -> Option<Number> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Number::Rat(r) => Number::Rat(r.recip()),
            Number::Float(x) => Number::Float(1.0 / x),
        })
    }

    /// `self^exp` when the result is representable exactly (or when either
    /// side is already a float). Returns `None` for irrational results such as
    /// `2^(1/2)`, and for zero raised to a negative power.
    pub fn pow(self, exp: Number) -> Option<Number> {
        if let Some(e) = exp.as_integer() {
            return self.powi(e);
        }
        match (self, exp) {
            (Number::Rat(b), Number::Rat(e)) => {
                if b.is_negative() {
                    return None;
                }
                let d = u32::try_from(*e.denom()).ok()?;
                let num = exact_root(*b.numer(), d)?;
                let den = exact_root(*b.denom(), d)?;
                Number::Rat(Rat::new(num, den)).powi(*e.numer())
            }
            _ => {
                let v = self.to_f64().powf(exp.to_f64());
                v.is_finite().then(|| Number::Float(v))
            }
        }
    }

    fn powi(self, e: i64) -> Option<Number> {
        if e < 0 {
            return self.powi(-e)?.recip();
        }
        match self {
            Number::Rat(r) => {
                let mut acc = Rat::one();
                for _ in 0..e {
                    match acc.checked_mul(&r) {
                        Some(v) => acc = v,
                        None => return Some(Number::Float(r.to_f64()?.powi(e as i32))),
                    }
                }
                Some(Number::Rat(acc))
            }
            Number::Float(x) => Some(Number::Float(x.powi(e as i32))),
        }
    }

    /// Parse a decimal literal such as `12`, `0.25` or `1e-3`, exactly when possible.
    pub fn parse_decimal(text: &str) -> Option<Number> {
        let (mantissa, exponent) = match text.find(['e', 'E']) {
            Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
            None => (text, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let digits = format!("{int_part}{frac_part}");
        let scale = exponent - frac_part.len() as i32;
        let exact = (|| {
            let n: i64 = digits.parse().ok()?;
            let p = 10i64.checked_pow(scale.unsigned_abs())?;
            if scale >= 0 {
                Some(Number::Rat(Rat::from_integer(n.checked_mul(p)?)))
            } else {
                Some(Number::Rat(Rat::new(n, p)))
            }
        })();
        exact.or_else(|| text.parse::<f64>().ok().map(Number::Float))
    }
}

fn exact_root(x: i64, d: u32) -> Option<i64> {
    if x < 0 {
        return None;
    }
    let guess = (x as f64).powf(1.0 / d as f64).round() as i64;
    for c in [guess - 1, guess, guess + 1] {
        if c >= 0 && c.checked_pow(d) == Some(x) {
            return Some(c);
        }
    }
    None
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Structural order: rationals before floats, then by value.
impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Number::Rat(a), Number::Rat(b)) => a.cmp(b),
            (Number::Float(a), Number::Float(b)) => a.total_cmp(b),
            (Number::Rat(_), Number::Float(_)) => Ordering::Less,
            (Number::Float(_), Number::Rat(_)) => Ordering::Greater,
        }
    }
}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Number::Rat(r) => {
                0u8.hash(state);
                r.hash(state);
            }
            Number::Float(x) => {
                1u8.hash(state);
                x.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rat(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            // Debug formatting of f64 is the shortest string that round-trips.
            Number::Float(x) => write!(f, "{x:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic() {
        let half = Number::ratio(1, 2);
        assert_eq!(half.add(half), Number::ONE);
        assert_eq!(half.mul(Number::int(4)), Number::int(2));
        assert_eq!(Number::int(4).pow(half), Some(Number::int(2)));
        assert_eq!(Number::int(2).pow(half), None);
        assert_eq!(
            Number::ratio(9, 4).pow(Number::ratio(-1, 2)),
            Some(Number::ratio(2, 3))
        );
    }

    #[test]
    fn overflow_falls_back_to_float() {
        let big = Number::int(i64::MAX / 2);
        assert!(matches!(big.mul(Number::int(4)), Number::Float(_)));
    }

    #[test]
    fn decimal_literals() {
        assert_eq!(Number::parse_decimal("0.25"), Some(Number::ratio(1, 4)));
        assert_eq!(Number::parse_decimal("1e-3"), Some(Number::ratio(1, 1000)));
        assert_eq!(Number::parse_decimal("2.5e2"), Some(Number::int(250)));
        assert!(matches!(
            Number::parse_decimal("1e300"),
            Some(Number::Float(_))
        ));
    }
}

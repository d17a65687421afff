//! Rotation frequencies on the flat hull.
//!
//! A frequency is a number in `[0, 1)`. Rational frequencies remember their
//! reduced ratio `p/q`, which lets orbits of rational rotations close exactly
//! (bit for bit) after one period.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frequency {
    value: f64,
    ratio: Option<(u64, u64)>,
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Frequency {
    /// Exact rational frequency `p/q`, reduced to lowest terms.
    pub fn ratio(p: u64, q: u64) -> Result<Self> {
        if q == 0 || p >= q {
            return Err(Error::InvalidSpec(format!(
                "frequency {p}/{q} must lie in [0, 1)"
            )));
        }
        let g = gcd(p, q).max(1);
        let (p, q) = (p / g, q / g);
        Ok(Frequency {
            value: p as f64 / q as f64,
            ratio: Some((p, q)),
        })
    }

    /// Floating-point frequency with no exact ratio attached.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&value) {
            return Err(Error::InvalidSpec(format!(
                "frequency {value} must lie in [0, 1)"
            )));
        }
        Ok(Frequency { value, ratio: None })
    }

    pub fn zero() -> Self {
        Frequency {
            value: 0.0,
            ratio: Some((0, 1)),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn as_ratio(&self) -> Option<(u64, u64)> {
        self.ratio
    }

    pub fn is_exact(&self) -> bool {
        self.ratio.is_some()
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio {
            Some((p, q)) => write!(f, "{p}/{q}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidSpec(format!("bad numerator in {s:?}: {e}")))?;
            let q = q
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::InvalidSpec(format!("bad denominator in {s:?}: {e}")))?;
            Frequency::ratio(p, q)
        } else {
            let v = s
                .parse::<f64>()
                .map_err(|e| Error::InvalidSpec(format!("bad frequency {s:?}: {e}")))?;
            Frequency::from_f64(v)
        }
    }
}

impl Serialize for Frequency {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self.ratio {
            Some((p, q)) => serializer.serialize_str(&format!("{p}/{q}")),
            None => serializer.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Frequency {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Frequency::from_f64(v).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// How the hull circle relates to the frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CircleScale {
    /// Circumference 1.
    Unit,
    /// Circumference `1 + alpha` (large circle of length 1 plus small circle of length alpha).
    Enlarged,
}

impl CircleScale {
    pub(crate) fn circumference(self, freq: Frequency) -> f64 {
        match (self, freq.ratio) {
            (CircleScale::Unit, _) => 1.0,
            (CircleScale::Enlarged, Some((p, q))) => (p + q) as f64 / q as f64,
            (CircleScale::Enlarged, None) => 1.0 + freq.value,
        }
    }

    /// Number of steps after which the rotation closes, for exact frequencies.
    pub(crate) fn orbit_period(self, freq: Frequency) -> Option<u64> {
        let (p, q) = freq.ratio?;
        Some(match self {
            CircleScale::Unit => q,
            CircleScale::Enlarged => p + q,
        })
    }

    pub(crate) fn reduce(self, freq: Frequency, x: f64) -> f64 {
        wrap(x, self.circumference(freq))
    }

    /// `x + n * alpha` reduced modulo the circumference. For exact
    /// frequencies the integer part of the shift is removed in integer
    /// arithmetic, so `rotate(x, n + period) == rotate(x, n)` bit for bit.
    pub(crate) fn rotate(self, freq: Frequency, x: f64, n: i64) -> f64 {
        let c = self.circumference(freq);
        match freq.ratio {
            Some((p, q)) => {
                let c_num = match self {
                    CircleScale::Unit => q,
                    CircleScale::Enlarged => p + q,
                } as i128;
                let steps = (n as i128).rem_euclid(c_num);
                let shift_num = (steps * p as i128).rem_euclid(c_num);
                let shift = shift_num as f64 / q as f64;
                let mut y = x + shift;
                if y >= c {
                    y -= c;
                }
                wrap(y, c)
            }
            None => wrap(x + n as f64 * freq.value, c),
        }
    }
}

/// Reduce `x` into `[0, c)`.
pub(crate) fn wrap(x: f64, c: f64) -> f64 {
    let y = x.rem_euclid(c);
    if y >= c {
        0.0
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_reduces() {
        let f = Frequency::ratio(6, 8).unwrap();
        assert_eq!(f.as_ratio(), Some((3, 4)));
        assert_eq!(f.value(), 0.75);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Frequency::ratio(1, 1).is_err());
        assert!(Frequency::from_f64(1.0).is_err());
        assert!(Frequency::from_f64(-0.1).is_err());
    }

    #[test]
    fn parses_ratio_and_float() {
        assert_eq!("21/34".parse::<Frequency>().unwrap().as_ratio(), Some((21, 34)));
        let f: Frequency = "0.25".parse().unwrap();
        assert!(!f.is_exact());
        assert_eq!(f.value(), 0.25);
    }

    #[test]
    fn exact_rotation_is_periodic_bitwise() {
        let f = Frequency::ratio(34, 55).unwrap();
        for scale in [CircleScale::Unit, CircleScale::Enlarged] {
            let period = scale.orbit_period(f).unwrap() as i64;
            for n in -60..60 {
                let a = scale.rotate(f, 0.123, n);
                let b = scale.rotate(f, 0.123, n + period);
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn enlarged_circle_period() {
        let f = Frequency::ratio(1, 2).unwrap();
        assert_eq!(CircleScale::Enlarged.orbit_period(f), Some(3));
        assert!((CircleScale::Enlarged.circumference(f) - 1.5).abs() < 1e-15);
    }
}

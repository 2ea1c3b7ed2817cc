use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Named irrational rotation numbers (fractional parts of classical
/// constants). Resonance is decided by the tag, never numerically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IrrationalTag {
    /// `√2 − 1`
    Sqrt2Minus1,
    /// `(√5 − 1)/2 = φ − 1`
    GoldenMinus1,
    /// `e − 2`
    EMinus2,
    /// `π − 3`
    PiMinus3,
    /// `√3 − 1`
    Sqrt3Minus1,
}

impl IrrationalTag {
    pub const ALL: [IrrationalTag; 5] = [
        IrrationalTag::Sqrt2Minus1,
        IrrationalTag::GoldenMinus1,
        IrrationalTag::EMinus2,
        IrrationalTag::PiMinus3,
        IrrationalTag::Sqrt3Minus1,
    ];

    /// Double-double representation `hi + lo`.
    fn parts(self) -> (f64, f64) {
        match self {
            IrrationalTag::Sqrt2Minus1 => (0.41421356237309503, 1.4349369327986523e-17),
            IrrationalTag::GoldenMinus1 => (0.6180339887498949, -5.432115203682506e-17),
            IrrationalTag::EMinus2 => (0.7182818284590452, 3.354238671040936e-17),
            IrrationalTag::PiMinus3 => (0.14159265358979323, 1.1442377452219664e-17),
            IrrationalTag::Sqrt3Minus1 => (0.7320508075688773, -1.0671460244446628e-17),
        }
    }

    pub fn literal(self) -> &'static str {
        match self {
            IrrationalTag::Sqrt2Minus1 => "sqrt2m1",
            IrrationalTag::GoldenMinus1 => "goldenm1",
            IrrationalTag::EMinus2 => "em2",
            IrrationalTag::PiMinus3 => "pim3",
            IrrationalTag::Sqrt3Minus1 => "sqrt3m1",
        }
    }
}

/// A rotation number in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Angle {
    /// `p/q` in lowest terms with `0 ≤ p < q`.
    Rational {
        p: i64,
        q: i64,
    },
    Irrational(IrrationalTag),
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

impl Angle {
    pub const ZERO: Angle = Angle::Rational { p: 0, q: 1 };

    /// Reduces `p/q` modulo 1 to lowest terms.
    pub fn rational(p: i64, q: i64) -> Result<Angle> {
        if q <= 0 {
            return Err(Error::Invalid(format!("angle denominator must be positive, got {q}")));
        }
        let p = p.rem_euclid(q);
        let g = gcd(p, q).max(1);
        Ok(Angle::Rational { p: p / g, q: q / g })
    }

    pub fn irrational(tag: IrrationalTag) -> Angle {
        Angle::Irrational(tag)
    }

    pub fn value(&self) -> f64 {
        match *self {
            Angle::Rational { p, q } => p as f64 / q as f64,
            Angle::Irrational(tag) => tag.parts().0,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Angle::Rational { .. })
    }

    /// Whether `k·α ∈ ℤ`.
    pub fn resonant(&self, k: i64) -> bool {
        match *self {
            Angle::Rational { q, .. } => k % q == 0,
            Angle::Irrational(_) => k == 0,
        }
    }

    /// Fractional part of `m·α`, in `[0, 1)`. Exact for rational angles;
    /// for tagged irrationals the absolute error is a few ulps for
    /// `|m| < 2^53`.
    pub fn phase(&self, m: i64) -> f64 {
        match *self {
            Angle::Rational { p, q } => {
                let r = (i128::from(m) * i128::from(p)).rem_euclid(i128::from(q));
                r as f64 / q as f64
            }
            Angle::Irrational(tag) => {
                let (hi, lo) = tag.parts();
                let x = m.unsigned_abs() as f64;
                let prod = x * hi;
                let err = x.mul_add(hi, -prod);
                let f = (prod - prod.floor()) + err + x * lo;
                let f = f.rem_euclid(1.0);
                let f = if m < 0 { (1.0 - f).rem_euclid(1.0) } else { f };
                // rem_euclid may round up to exactly 1.0
                if f >= 1.0 {
                    0.0
                } else {
                    f
                }
            }
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Rational { p, q } => write!(f, "{p}/{q}"),
            Angle::Irrational(tag) => f.write_str(tag.literal()),
        }
    }
}

impl FromStr for Angle {
    type Err = Error;

    /// Accepts `"p/q"`, a plain integer, or one of the tags
    /// `sqrt2m1`, `goldenm1`, `em2`, `pim3`, `sqrt3m1`.
    fn from_str(s: &str) -> Result<Angle> {
        let s = s.trim();
        if let Some(tag) = IrrationalTag::ALL.iter().find(|t| t.literal() == s) {
            return Ok(Angle::Irrational(*tag));
        }
        let bad = || Error::Parse(format!("malformed angle literal {s:?}"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p = p.trim().parse::<i64>().map_err(|_| bad())?;
                let q = q.trim().parse::<i64>().map_err(|_| bad())?;
                Angle::rational(p, q).map_err(|_| bad())
            }
            None => {
                let p = s.parse::<i64>().map_err(|_| bad())?;
                Angle::rational(p, 1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_is_reduced() {
        assert_eq!(Angle::rational(6, 8).unwrap(), Angle::Rational { p: 3, q: 4 });
        assert_eq!(Angle::rational(-1, 3).unwrap(), Angle::Rational { p: 2, q: 3 });
        assert_eq!(Angle::rational(5, 5).unwrap(), Angle::ZERO);
        assert!(Angle::rational(1, 0).is_err());
    }

    #[test]
    fn resonance_is_structural() {
        let half = Angle::rational(1, 2).unwrap();
        assert!(half.resonant(2) && half.resonant(-4) && !half.resonant(3));
        let g = Angle::irrational(IrrationalTag::GoldenMinus1);
        assert!(g.resonant(0) && !g.resonant(1) && !g.resonant(1_000_000));
    }

    #[test]
    fn phase_rational_exact() {
        let a = Angle::rational(1, 3).unwrap();
        assert_eq!(a.phase(3), 0.0);
        assert_eq!(a.phase(4), 1.0 / 3.0);
        assert_eq!(a.phase(-1), 2.0 / 3.0);
    }

    #[test]
    fn phase_irrational_accuracy() {
        // frac(10^7 (√2 − 1)) = frac(4142135.6237309504880…) = 0.6237309504880…
        let a = Angle::irrational(IrrationalTag::Sqrt2Minus1);
        assert!((a.phase(10_000_000) - 0.623_730_950_488_016_9).abs() < 1e-12);
        let p = a.phase(-10_000_000);
        assert!((p - (1.0 - 0.623_730_950_488_016_9)).abs() < 1e-12);
        for m in [1i64, 17, 12345, 9_999_991] {
            let v = a.phase(m);
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn literal_round_trip() {
        for s in ["1/3", "0/1", "sqrt2m1", "goldenm1", "em2", "pim3", "sqrt3m1"] {
            let a: Angle = s.parse().unwrap();
            assert_eq!(a.to_string(), s);
        }
        assert_eq!("0".parse::<Angle>().unwrap(), Angle::ZERO);
        assert!("1/x".parse::<Angle>().is_err());
        assert!("tau".parse::<Angle>().is_err());
    }
}

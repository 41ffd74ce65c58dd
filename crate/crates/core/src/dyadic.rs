//! Exact rationals with power-of-two denominators.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// `num / 2^exp`, kept normalized (odd numerator or `exp == 0`).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: impl Into<BigInt>, exp: u32) -> Self {
        let mut d = Dyadic {
            num: num.into(),
            exp,
        };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic::new(0, 0)
    }

    pub fn one() -> Self {
        Dyadic::new(1, 0)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        while self.exp > 0 && self.num.is_even() {
            self.num >>= 1;
            self.exp -= 1;
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &other.num, self.exp + other.exp)
    }

    pub fn pow(&self, e: u32) -> Dyadic {
        (0..e).fold(Dyadic::one(), |acc, _| acc.mul(self))
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::NAN);
        n / 2f64.powi(self.exp as i32)
    }

    /// `num/2^e`, the exact form printed by every report.
    pub fn exact_string(&self) -> String {
        format!("{}/2^{}", self.num, self.exp)
    }

    /// Same value written over a fixed denominator `2^exp`, if representable.
    pub fn numerator_over(&self, exp: u32) -> Option<BigInt> {
        (exp >= self.exp).then(|| &self.num << (exp - self.exp))
    }

    /// Whether `self <= base^(p/q)` for nonnegative `self`, `base`, compared
    /// exactly as `self^q <= base^p`.
    pub fn le_fractional_power(&self, base: &Dyadic, p: u32, q: u32) -> bool {
        assert!(q > 0);
        assert!(!self.num.is_negative() && !base.num.is_negative());
        self.pow(q) <= base.pow(p)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        let a: BigInt = &self.num << (e - self.exp);
        let b: BigInt = &other.num << (e - other.exp);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.exact_string())
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::new(v, 0)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes() {
        let d = Dyadic::new(12, 4);
        assert_eq!(d.exact_string(), "3/2^2");
        assert_eq!(Dyadic::new(0, 9).exact_string(), "0/2^0");
        assert_eq!(Dyadic::new(8, 3), Dyadic::one());
    }

    #[test]
    fn ordering_and_products() {
        assert!(Dyadic::new(1, 1) < Dyadic::new(3, 2));
        assert!(Dyadic::new(-1, 0) < Dyadic::zero());
        assert_eq!(Dyadic::new(3, 2).mul(&Dyadic::new(1, 1)), Dyadic::new(3, 3));
        assert_eq!(Dyadic::new(1, 1).pow(0), Dyadic::one());
        assert_eq!(Dyadic::new(-1, 1).abs(), Dyadic::new(1, 1));
    }

    #[test]
    fn fractional_power_comparison() {
        // (1/4) <= (1/2)^(3/2) ~ 0.354
        assert!(Dyadic::new(1, 2).le_fractional_power(&Dyadic::new(1, 1), 3, 2));
        // (1/2) > (1/2)^(3/2)
        assert!(!Dyadic::new(1, 1).le_fractional_power(&Dyadic::new(1, 1), 3, 2));
        // anything nonnegative <= base^0 = 1 when <= 1
        assert!(Dyadic::one().le_fractional_power(&Dyadic::zero(), 0, 1));
    }
}

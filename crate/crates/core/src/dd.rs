//! Minimal double-double arithmetic for distance evaluation.

use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleDouble {
    pub fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    /// Exact for `|v| < 2^106`.
    pub fn from_i128(v: i128) -> Self {
        let hi = v as f64;
        let lo = (v - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    /// Multiplies by `2^e`; exact barring underflow.
    pub fn ldexp(self, e: i32) -> Self {
        let s = 2f64.powi(e);
        Self { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }

    pub fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p) + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn cmp(&self, o: &Self) -> Ordering {
        self.hi.total_cmp(&o.hi).then(self.lo.total_cmp(&o.lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_integer_roundtrip() {
        let v: i128 = (1i128 << 100) + 12345;
        let d = DoubleDouble::from_i128(v);
        assert_eq!(d.hi as i128 + d.lo as i128, v);
    }

    #[test]
    fn cancellation_is_resolved() {
        let big = DoubleDouble::from_i128(1i128 << 80);
        let one = DoubleDouble::from_f64(1.0);
        let diff = big.add(one).sub(big);
        assert_eq!(diff.to_f64(), 1.0);
    }
}

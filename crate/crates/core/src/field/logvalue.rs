use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Nonnegative real stored through its natural logarithm, so that weights
/// like `ρ^(-2τ)` at large `τ` never overflow.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    ln: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { ln: f64::NEG_INFINITY };
    pub const ONE: LogValue = LogValue { ln: 0.0 };

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        Self { ln }
    }

    /// Panics on negative input in debug builds; negative values have no log.
    pub fn from_f64(v: f64) -> Self {
        debug_assert!(v >= 0.0, "LogValue of negative {v}");
        Self { ln: v.ln() }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    /// Value as a float; saturates to `inf` or `0` outside the f64 range.
    pub fn to_f64(self) -> f64 {
        self.ln.exp()
    }

    /// `(mantissa, exponent)` with value `= mantissa · e^exponent`,
    /// `mantissa ∈ [1, 2)` and `exponent` an integer multiple of `ln 2`;
    /// `(0, 0)` for zero.
    pub fn parts(self) -> (f64, f64) {
        if self.is_zero() {
            return (0.0, 0.0);
        }
        let ln2 = std::f64::consts::LN_2;
        let mut k = (self.ln / ln2).floor();
        let mut m = (self.ln - k * ln2).exp();
        if m >= 2.0 {
            k += 1.0;
            m = (self.ln - k * ln2).exp();
        } else if m < 1.0 {
            k -= 1.0;
            m = (self.ln - k * ln2).exp();
        }
        (m.clamp(1.0, f64::from_bits(2.0f64.to_bits() - 1)), k * ln2)
    }

    pub fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::ZERO;
        }
        Self { ln: self.ln + o.ln }
    }

    /// `self / o`; dividing by zero yields `+inf` in log form.
    pub fn div(self, o: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self { ln: self.ln - o.ln }
    }

    pub fn add(self, o: Self) -> Self {
        let (hi, lo) = if self.ln >= o.ln { (self, o) } else { (o, self) };
        if lo.is_zero() {
            return hi;
        }
        Self { ln: hi.ln + (lo.ln - hi.ln).exp().ln_1p() }
    }

    pub fn scale(self, c: f64) -> Self {
        self.mul(Self::from_f64(c))
    }

    pub fn powf(self, p: f64) -> Self {
        if self.is_zero() {
            return if p == 0.0 { Self::ONE } else { Self::ZERO };
        }
        Self { ln: self.ln * p }
    }

    /// Sum of `e^{l}` over the given logarithms: shift by the maximum, then a
    /// Neumaier-compensated sum of the (≤ 1) shifted terms.
    pub fn sum_ln<I: IntoIterator<Item = f64>>(lns: I) -> Self
    where
        I::IntoIter: Clone,
    {
        let it = lns.into_iter();
        let max = it.clone().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let mut sum = NeumaierSum::default();
        for l in it {
            sum.add((l - max).exp());
        }
        Self { ln: max + sum.total().ln() }
    }

    pub fn sum<I: IntoIterator<Item = LogValue>>(vals: I) -> Self
    where
        I::IntoIter: Clone,
    {
        Self::sum_ln(vals.into_iter().map(|v| v.ln))
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln.partial_cmp(&other.ln)
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (m, e) = self.parts();
        write!(f, "{m}·e^{e}")
    }
}

/// Compensated summation (Kahan–Babuška–Neumaier).
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

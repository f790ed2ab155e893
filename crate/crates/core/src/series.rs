//! Truncated power series in a local variable `ε`.
//!
//! Used for Taylor/Laurent coefficient matching at higher-order poles.

use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Series(pub Vec<C64>);

impl Series {
    pub fn zero(len: usize) -> Self {
        Series(vec![C64::new(0.0, 0.0); len])
    }

    pub fn constant(c: C64, len: usize) -> Self {
        let mut s = Self::zero(len);
        if len > 0 {
            s.0[0] = c;
        }
        s
    }

    /// `c + ε` truncated to `len` terms.
    pub fn linear(c: C64, len: usize) -> Self {
        let mut s = Self::constant(c, len);
        if len > 1 {
            s.0[1] = C64::new(1.0, 0.0);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.0.get(k).copied().unwrap_or_default()
    }

    pub fn mul(&self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        let mut out = Self::zero(n);
        for i in 0..n {
            if self.0[i] == C64::default() {
                continue;
            }
            for j in 0..n - i {
                out.0[i + j] += self.0[i] * o.0[j];
            }
        }
        out
    }

    pub fn add(&self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        Series((0..n).map(|k| self.0[k] + o.0[k]).collect())
    }

    pub fn scale(&self, s: C64) -> Series {
        Series(self.0.iter().map(|z| z * s).collect())
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn recip(&self) -> Series {
        let n = self.len();
        let mut out = Self::zero(n);
        if n == 0 {
            return out;
        }
        let a0 = self.0[0];
        out.0[0] = 1.0 / a0;
        for k in 1..n {
            let mut acc = C64::default();
            for j in 1..=k {
                acc += self.0[j] * out.0[k - j];
            }
            out.0[k] = -acc / a0;
        }
        out
    }

    pub fn div(&self, o: &Series) -> Series {
        self.mul(&o.recip())
    }

    /// `exp` of the series, `g' = h' g`.
    pub fn exp(&self) -> Series {
        let n = self.len();
        let mut out = Self::zero(n);
        if n == 0 {
            return out;
        }
        out.0[0] = self.0[0].exp();
        for k in 1..n {
            let mut acc = C64::default();
            for j in 1..=k {
                acc += (j as f64) * self.0[j] * out.0[k - j];
            }
            out.0[k] = acc / (k as f64);
        }
        out
    }

    /// `(c + ε)^p` for integer `p`, with `c ≠ 0` when `p < 0`.
    pub fn linear_pow(c: C64, p: i64, len: usize) -> Series {
        let mut out = Self::zero(len);
        let mut binom = C64::new(1.0, 0.0);
        for k in 0..len {
            if p >= 0 && k as i64 > p {
                break;
            }
            out.0[k] = binom * c.powi((p - k as i64) as i32);
            binom *= (p - k as i64) as f64 / (k as f64 + 1.0);
        }
        out
    }

    /// Series of a polynomial given by Taylor data `β_j / j!`.
    pub fn from_taylor_derivatives(derivs: &[C64], len: usize) -> Series {
        let mut out = Self::zero(len);
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().take(len) {
            if k > 0 {
                fact *= k as f64;
            }
            out.0[k] = d / fact;
        }
        out
    }

    pub fn eval(&self, eps: C64) -> C64 {
        self.0.iter().rev().fold(C64::default(), |acc, &a| acc * eps + a)
    }
}

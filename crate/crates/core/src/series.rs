//! Truncated power series in `h = x - c`.
//!
//! Taylor coefficients of the target functions come from the classical
//! recurrences for `exp`, `sin`/`cos`, `ln` and division applied to the
//! series of the argument. This stays stable at degree 75, where symbolic
//! differentiation would not.

use std::ops::{Add, Mul, Neg};

#[derive(Debug, Clone, PartialEq)]
pub struct Series(pub Vec<f64>);

impl Series {
    /// The identity `x = c + h`, truncated at `degree`.
    pub fn variable(c: f64, degree: usize) -> Self {
        let mut a = vec![0.0; degree + 1];
        a[0] = c;
        if degree >= 1 {
            a[1] = 1.0;
        }
        Series(a)
    }

    pub fn constant(v: f64, degree: usize) -> Self {
        let mut a = vec![0.0; degree + 1];
        a[0] = v;
        Series(a)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Series(self.0.iter().map(|a| a * s).collect())
    }

    pub fn exp(&self) -> Self {
        let a = &self.0;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Series(b)
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let a = &self.0;
        let n = a.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for k in 1..n {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                let ja = j as f64 * a[j];
                ds += ja * c[k - j];
                dc -= ja * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = dc / k as f64;
        }
        (Series(s), Series(c))
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    /// Natural log; `None` unless the constant term is positive.
    pub fn ln(&self) -> Option<Self> {
        let a = &self.0;
        if a[0] <= 0.0 {
            return None;
        }
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].ln();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * a[k - j]).sum();
            b[k] = (a[k] - s / k as f64) / a[0];
        }
        Some(Series(b))
    }

    /// `self / other`; `None` if `other` has a zero constant term.
    pub fn div(&self, other: &Series) -> Option<Self> {
        let (a, b) = (&self.0, &other.0);
        if b[0] == 0.0 {
            return None;
        }
        let n = a.len().min(b.len());
        let mut q = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (1..=k).map(|j| b[j] * q[k - j]).sum();
            q[k] = (a[k] - s) / b[0];
        }
        Some(Series(q))
    }

    pub fn recip(&self) -> Option<Self> {
        Series::constant(1.0, self.degree()).div(self)
    }

    /// Divides by `h` termwise: requires a zero constant term and drops the
    /// top coefficient.
    pub fn shift_down(&self) -> Option<Self> {
        if self.0[0] != 0.0 || self.0.len() < 2 {
            return None;
        }
        Some(Series(self.0[1..].to_vec()))
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        Series(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.0.len().min(rhs.0.len());
        let mut c = vec![0.0; n];
        for (i, a) in self.0.iter().take(n).enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in rhs.0.iter().take(n - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        Series(c)
    }
}

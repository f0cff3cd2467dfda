//! Correctly rounded sums and dot products.
//!
//! Every unit in a [`NetworkGraph`](crate::netcore::NetworkGraph) computes its
//! pre-activation as the correctly rounded value of `bias + Σ wᵢ·xᵢ`. Products
//! are split exactly with an FMA and the pieces are accumulated with
//! Shewchuk's non-overlapping partials (the algorithm behind Python's
//! `math.fsum`). The result is independent of summation order.

/// Accumulator holding a non-overlapping expansion of the running sum.
#[derive(Debug, Default, Clone)]
pub struct ExactSum {
    partials: Vec<f64>,
    naive: f64,
    non_finite: bool,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.partials.clear();
        self.naive = 0.0;
        self.non_finite = false;
    }

    pub fn add(&mut self, x: f64) {
        self.naive += x;
        if !x.is_finite() {
            self.non_finite = true;
            return;
        }
        let mut x = x;
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        if !x.is_finite() {
            // intermediate overflow
            self.non_finite = true;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// Adds `w·x` exactly (barring overflow/underflow of the product).
    pub fn add_product(&mut self, w: f64, x: f64) {
        let p = w * x;
        if !p.is_finite() {
            self.add(p);
            return;
        }
        let e = w.mul_add(x, -p);
        self.add(p);
        if e != 0.0 {
            self.add(e);
        }
    }

    /// Correctly rounded (round-half-even) value of the accumulated sum.
    pub fn value(&self) -> f64 {
        if self.non_finite {
            return self.naive;
        }
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Half-way case: the remaining partials decide the rounding direction.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

/// Correctly rounded sum of `xs`.
pub fn fsum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = ExactSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Correctly rounded `bias + Σ weights[i]·inputs[i]`.
pub fn affine(acc: &mut ExactSum, bias: f64, terms: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    acc.clear();
    acc.add(bias);
    for (w, x) in terms {
        acc.add_product(w, x);
    }
    acc.value()
}

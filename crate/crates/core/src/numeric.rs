//! Log-domain helpers for binomial sums.

use std::f64::consts::LN_2;

/// Table of `ln(i!)` for `i = 0..=n`.
#[derive(Clone, Debug)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let mut acc = 0.0f64;
        for i in 1..=n {
            acc += (i as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn ln_factorial(&self, i: usize) -> f64 {
        self.table[i]
    }

    /// `ln C(n, k)`, or `-inf` when `k > n`.
    #[inline]
    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        if k > n {
            f64::NEG_INFINITY
        } else {
            self.table[n] - self.table[k] - self.table[n - k]
        }
    }
}

/// `ln(x)` that maps `0` to `-inf`.
#[inline]
pub fn ln_or_neg_inf(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// `ln(sum(exp(x_i)))`, `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Streaming log-sum-exp accumulator.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `ln(p^t (1-p)^(n-t))` with `0^0 = 1`.
#[inline]
pub fn ln_bernoulli_weight(p: f64, t: usize, n: usize) -> f64 {
    let a = if t == 0 { 0.0 } else { t as f64 * ln_or_neg_inf(p) };
    let b = if n == t {
        0.0
    } else if p >= 1.0 {
        f64::NEG_INFINITY
    } else {
        (n - t) as f64 * (-p).ln_1p()
    };
    a + b
}

/// `ln P(Bin(n, p) >= t0)`.
pub fn ln_binomial_tail(lf: &LnFactorial, n: usize, p: f64, t0: usize) -> f64 {
    let mut acc = LogSum::new();
    for t in t0..=n {
        acc.add(lf.ln_choose(n, t) + ln_bernoulli_weight(p, t, n));
    }
    acc.value()
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

#[inline]
pub fn ln_to_log2(x: f64) -> f64 {
    x / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choose_small() {
        let lf = LnFactorial::new(40);
        assert!((lf.ln_choose(10, 3).exp() - 120.0).abs() < 1e-9);
        assert_eq!(lf.ln_choose(5, 0), 0.0);
        assert_eq!(lf.ln_choose(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn logsum_matches_direct() {
        let xs = [-1.0, -3.0, 0.5, f64::NEG_INFINITY];
        let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
        let mut s = LogSum::new();
        for x in xs {
            s.add(x);
        }
        assert!((s.value() - direct).abs() < 1e-14);
        assert_eq!(LogSum::new().value(), f64::NEG_INFINITY);
    }

    #[test]
    fn binomial_tail_edges() {
        let lf = LnFactorial::new(20);
        assert!((ln_binomial_tail(&lf, 20, 0.3, 0)).abs() < 1e-12);
        assert_eq!(ln_binomial_tail(&lf, 20, 0.0, 1), f64::NEG_INFINITY);
        assert_eq!(ln_binomial_tail(&lf, 20, 0.0, 0), 0.0);
        let p: f64 = 0.2;
        assert!((ln_binomial_tail(&lf, 20, p, 20) - 20.0 * p.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }
}

//! Closed forms for the geometric-polynomial series that appear in staircase
//! normalisers and profile tails.
//!
//! `Σ_{k≥0} k^m x^k` with `x = e^{-rate}` is evaluated through Eulerian
//! numbers, `x·A_m(x)/(1-x)^{m+1}`, entirely in log space. Every term is
//! positive so nothing cancels.

use statrs::function::factorial::ln_binomial;

pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let v: Vec<f64> = terms.into_iter().collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + v.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

pub fn ln_choose(n: u32, k: u32) -> f64 {
    ln_binomial(u64::from(n), u64::from(k))
}

/// `ln(b^n - a^n)` for `0 ≤ a ≤ b`, accurate when `a` and `b` are close.
pub fn ln_power_gap(a: f64, b: f64, n: u32) -> f64 {
    ln_real_power_gap(a, b, f64::from(n))
}

/// `ln(b^s - a^s)` for `0 ≤ a ≤ b` and a real exponent `s > 0`.
pub fn ln_real_power_gap(a: f64, b: f64, s: f64) -> f64 {
    debug_assert!(a >= 0.0 && b >= a);
    if b <= a {
        return f64::NEG_INFINITY;
    }
    if a == 0.0 {
        return s * b.ln();
    }
    s * a.ln() + (s * ((b - a) / a).ln_1p()).exp_m1().ln()
}

/// Log-space values of `L_m = Σ_{k≥0} k^m e^{-k·rate}` for `m = 0..=max_m`.
#[derive(Debug, Clone)]
pub struct PowerGeometricSums {
    rate: f64,
    ln_sums: Vec<f64>,
}

impl PowerGeometricSums {
    pub fn new(max_m: u32, rate: f64) -> Self {
        assert!(rate > 0.0, "geometric rate must be positive");
        let ln_x = -rate;
        let ln_one_minus_x = (-(-rate).exp_m1()).ln();
        let mut ln_sums = Vec::with_capacity(max_m as usize + 1);
        ln_sums.push(-ln_one_minus_x);
        // Row m of the Eulerian triangle, log space.
        let mut row: Vec<f64> = vec![0.0];
        for m in 1..=max_m {
            if m > 1 {
                let prev = row;
                row = (0..m as usize)
                    .map(|j| {
                        let keep = if j < prev.len() {
                            ((j + 1) as f64).ln() + prev[j]
                        } else {
                            f64::NEG_INFINITY
                        };
                        let carry = if j > 0 {
                            ((m as usize - j) as f64).ln() + prev[j - 1]
                        } else {
                            f64::NEG_INFINITY
                        };
                        log_sum_exp([keep, carry])
                    })
                    .collect();
            }
            let poly = log_sum_exp(row.iter().enumerate().map(|(j, a)| a + j as f64 * ln_x));
            ln_sums.push(ln_x + poly - f64::from(m + 1) * ln_one_minus_x);
        }
        Self { rate, ln_sums }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `ln Σ_{k≥0} k^m x^k`.
    pub fn ln_sum(&self, m: u32) -> f64 {
        self.ln_sums[m as usize]
    }

    /// `ln Σ_{k≥1} k^m x^k`; differs from [`Self::ln_sum`] only at `m = 0`.
    pub fn ln_sum_from_one(&self, m: u32) -> f64 {
        if m == 0 {
            -self.rate + self.ln_sums[0]
        } else {
            self.ln_sums[m as usize]
        }
    }
}

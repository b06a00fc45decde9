//! Small numeric kernels shared across modules.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Falling factorial `(n)_k = n (n-1) ... (n-k+1)`; zero when `k > n`.
pub fn falling_factorial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| (n - i) as u128).product()
}

pub fn falling_factorial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i))
}

pub fn falling_factorial_f64(n: f64, k: usize) -> f64 {
    (0..k).map(|i| n - i as f64).product()
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Elementary symmetric polynomials `e_0, ..., e_k` of `values`, by the
/// one-pass recurrence `e_j <- e_j + x e_{j-1}`.
pub fn elementary_symmetric(values: impl IntoIterator<Item = f64>, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for x in values {
        for j in (1..=k).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// Exact integer version of [`elementary_symmetric`]; zero entries are
/// skipped since they contribute nothing.
pub fn elementary_symmetric_exact(values: &[usize], k: usize) -> Vec<BigUint> {
    let mut e = vec![BigUint::zero(); k + 1];
    e[0] = BigUint::one();
    for &x in values.iter().filter(|&&x| x > 0) {
        let x = BigUint::from(x);
        for j in (1..=k).rev() {
            let add = &e[j - 1] * &x;
            e[j] += add;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = NeumaierSum::default();
        s.add(1e16);
        s.add(1.0);
        s.add(-1e16);
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling_factorial(5, 2), 20);
        assert_eq!(falling_factorial(3, 4), 0);
        assert_eq!(falling_factorial(7, 0), 1);
        assert_eq!(falling_factorial_big(10, 3), BigUint::from(720u32));
        assert_eq!(falling_factorial_f64(4.0, 2), 12.0);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 3), 0);
    }

    #[test]
    fn elementary_symmetric_small() {
        // (1 + 2x)(1 + 3x)(1 + 4x) = 1 + 9x + 26x^2 + 24x^3
        let e = elementary_symmetric([2.0, 3.0, 4.0], 4);
        assert_eq!(e, vec![1.0, 9.0, 26.0, 24.0, 0.0]);
        let e = elementary_symmetric_exact(&[2, 3, 0, 4], 3);
        assert_eq!(e, [1u32, 9, 26, 24].map(BigUint::from).to_vec());
    }
}

//! Precision and truncation bounds for coefficient recovery.

use num_bigint::BigUint;
use num_traits::One;

use crate::poly::binomial;

/// p-adic precision needed to recover the interesting factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionBound {
    /// Smallest D with p^D ≥ 2γ + 1, γ = C(b, ⌊b/2⌋)·q^{b/2}.
    pub digits: u32,
    /// Weil bounds |c_i| ≤ C(b, i)·q^{i(n−1)/2} for i = 0..=b.
    pub coefficient_bounds: Vec<BigUint>,
}

fn big_binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    if n <= 60 {
        return BigUint::from(binomial(n, k));
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// D ≥ ⌈log_p(2γ+1)⌉ for q = p, with per-coefficient Weil bounds.
pub fn precision_bound(b: usize, q: u64, n: usize) -> PrecisionBound {
    let qb = BigUint::from(q);
    let half = (n as u32).saturating_sub(1) / 2;
    let coefficient_bounds = (0..=b as u64)
        .map(|i| big_binomial(b as u64, i) * qb.pow(i as u32 * half))
        .collect();
    if b == 0 {
        return PrecisionBound {
            digits: 0,
            coefficient_bounds,
        };
    }
    // (p^D − 1)^2 ≥ 4·C^2·q^b avoids the half-integer power of q
    let c = big_binomial(b as u64, b as u64 / 2);
    let target = BigUint::from(4u32) * &c * &c * qb.pow(b as u32);
    let mut digits = 0;
    let mut pd = BigUint::one();
    loop {
        let m = &pd - BigUint::one();
        if &m * &m >= target {
            break;
        }
        pd *= &qb;
        digits += 1;
    }
    PrecisionBound {
        digits,
        coefficient_bounds,
    }
}

fn floor_log(p: u64, x: u64) -> u32 {
    let mut e = 0;
    let mut v = p;
    while v <= x {
        v = v.saturating_mul(p);
        e += 1;
    }
    e
}

/// Smallest M such that k ≥ D + (n+1)⌊log_p(p(k+n)−1)⌋ − n + 1 for every k ≥ M (p > 2).
pub fn truncation_bound(d: u32, p: u64, n: usize) -> usize {
    let rhs = |k: u64| -> i64 {
        d as i64 + (n as i64 + 1) * floor_log(p, p * (k + n as u64) - 1) as i64 - n as i64 + 1
    };
    // past this point the left side outgrows the logarithm for good
    let horizon = 64 * (d as u64 + 2 * (n as u64 + 1) * 64 + 16);
    let mut last_fail: Option<u64> = None;
    for k in 0..horizon {
        if (k as i64) < rhs(k) {
            last_fail = Some(k);
        }
    }
    last_fail.map_or(1, |k| k as usize + 1).max(1)
}

//! Exact rational and high-precision constants: harmonic numbers, the
//! tabulated gamma_K / alpha_K rationals, the internal-path-length recursion
//! Psi_n, and the K=3 expansion constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest k with a tabulated exact gamma_K.
pub const MAX_EXACT_K: usize = 6;

/// Euler-Mascheroni constant, 20 digits.
pub const EULER_GAMMA: f64 = 0.57721566490153286061;

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(big(num), big(den))
}

/// H_m = sum_{j=1..m} 1/j, exactly.
pub fn harmonic(m: usize) -> BigRational {
    let mut h = BigRational::zero();
    for j in 1..=m {
        h += BigRational::new(BigInt::one(), big(j as i64));
    }
    h
}

/// Tabulated exact gamma_K = E[l_opt(D)] for k = 1..=6.
pub fn gamma_exact(k: usize) -> Result<BigRational> {
    let g = match k {
        1 => ratio(1, 1),
        2 => ratio(3, 2),
        3 => ratio(133, 72),
        4 => ratio(2384, 1125),
        5 => ratio(36469, 15552),
        6 => BigRational::new(
            "31796145419183".parse::<BigInt>().unwrap(),
            "12522149640000".parse::<BigInt>().unwrap(),
        ),
        _ => return Err(Error::NoExactAlpha(k)),
    };
    Ok(g)
}

/// alpha_K = gamma_K / (H_{K+1} - 1), exactly, for k = 1..=6.
pub fn alpha_exact(k: usize) -> Result<BigRational> {
    let g = gamma_exact(k)?;
    Ok(g / (harmonic(k + 1) - BigRational::one()))
}

/// alpha_K as f64, for k = 1..=6.
pub fn alpha_f64(k: usize) -> Result<f64> {
    Ok(alpha_exact(k)?.to_f64().expect("alpha_K fits in f64"))
}

/// Exact Psi_n recursion with the (K+1)-ary search-tree subtree-size law:
/// Psi_n = gamma_K (n-K) + (K+1) * sum_j P(I_0 = j) Psi_j for n > K, where
/// P(I_0 = j) = binom(n-1-j, K-1) / binom(n, K). Rational arithmetic; use
/// [`psi_dp_f64`] beyond a few hundred terms.
pub fn psi_dp_exact(k: usize, n_max: usize, gamma_k: &BigRational) -> Vec<BigRational> {
    let mut psi = vec![BigRational::zero(); n_max + 1];
    // binom(m, r) for r = 0..K-1, maintained incrementally as suffix sums:
    // b[r] = sum_{j=0}^{n-1} binom(n-1-j, r) * psi_j.
    let mut b = vec![BigRational::zero(); k];
    let mut binom_n_k = BigRational::zero(); // binom(n, K) as rational
    for n in 1..=n_max {
        // advance b from state n-1 to state n (incorporating psi_{n-1})
        for r in (1..k).rev() {
            let prev = b[r - 1].clone();
            b[r] += prev;
        }
        b[0] += &psi[n - 1];
        // binom(n, K)
        if n >= k {
            binom_n_k = BigRational::from(num_integer::binomial(big(n as i64), big(k as i64)));
        }
        if n > k {
            let lead = gamma_k * BigRational::from(big((n - k) as i64));
            psi[n] = lead
                + BigRational::from(big((k + 1) as i64)) * &b[k - 1] / binom_n_k.clone();
        }
    }
    psi
}

/// Float Psi_n recursion, O(K) per step via the same suffix-sum update.
pub fn psi_dp_f64(k: usize, n_max: usize, gamma_k: f64) -> Vec<f64> {
    let mut psi = vec![0.0f64; n_max + 1];
    let mut b = vec![0.0f64; k];
    for n in 1..=n_max {
        for r in (1..k).rev() {
            b[r] += b[r - 1];
        }
        b[0] += psi[n - 1];
        if n > k {
            let mut binom_n_k = 1.0f64;
            for i in 0..k {
                binom_n_k *= (n - i) as f64 / (i + 1) as f64;
            }
            psi[n] = gamma_k * (n - k) as f64 + (k + 1) as f64 * b[k - 1] / binom_n_k;
        }
    }
    psi
}

/// The explicit K=3 expansion constants of E[X_n] and the K=3 limit variance.
#[derive(Debug, Clone, Copy)]
pub struct K3Expansion {
    pub alpha3: f64,
    pub beta3: f64,
    pub delta3: f64,
    pub eps3: f64,
    pub sigma2_3: f64,
}

/// delta_3 as an exact rational.
pub fn delta3_exact() -> BigRational {
    ratio(707, 468)
}

/// Evaluate the K=3 closed forms.
pub fn k3_constants() -> K3Expansion {
    let pi = std::f64::consts::PI;
    let sqrt3 = 3.0f64.sqrt();
    let ln2 = std::f64::consts::LN_2;
    let ln3 = 3.0f64.ln();
    let g = EULER_GAMMA;
    K3Expansion {
        alpha3: 133.0 / 78.0,
        beta3: 133.0 / 78.0 * g - 2.0 / 117.0 * sqrt3 * pi + 4.0 / 39.0 * ln3
            + 3.0 / 26.0 * ln2
            - 6761.0 / 2028.0,
        delta3: 707.0 / 468.0,
        eps3: 707.0 / 468.0 * g + 1.0 / 702.0 * sqrt3 * pi + 11.0 / 234.0 * ln3
            + 5.0 / 156.0 * ln2
            + 70315.0 / 109512.0,
        sigma2_3: 3051169.0 / 657072.0 - 17689.0 / 36504.0 * pi * pi
            + 1463.0 / 2808.0 * ln2
            - 665.0 / 8424.0 * ln3,
    }
}

/// sigma^2_1 = (21 - 2 pi^2) / 3.
pub fn sigma2_1() -> f64 {
    (21.0 - 2.0 * std::f64::consts::PI * std::f64::consts::PI) / 3.0
}

/// Classical single-pivot quicksort expectation 2(n+1)H_n - 4n, exactly.
pub fn quicksort_mean_exact(n: usize) -> BigRational {
    let h = harmonic(n);
    BigRational::from(big(2 * (n as i64 + 1))) * h - BigRational::from(big(4 * n as i64))
}

//! Pivot spacings on the simplex, the toll term of the limit fixed point, and
//! Monte Carlo estimators for gamma_K and sigma^2_K.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact;
use crate::rng::shard_rng;
use crate::trees::TreeSet;

/// Number of independent MC shards; fixed so results do not depend on the
/// thread count.
const SHARDS: u64 = 64;

/// A point D = (D_0, ..., D_K) on the K-simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Spacings {
    d: Vec<f64>,
}

impl Spacings {
    /// Spacings induced by `k` uniform draws on (0,1): sort, then take the
    /// consecutive differences including both boundaries.
    pub fn from_uniforms(uniforms: &[f64]) -> Result<Self> {
        let mut u = uniforms.to_vec();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if u.iter().any(|&x| x <= 0.0 || x >= 1.0) {
            return Err(Error::ZeroSpacing);
        }
        if u.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ZeroSpacing);
        }
        let mut d = Vec::with_capacity(u.len() + 1);
        let mut prev = 0.0;
        for &x in &u {
            d.push(x - prev);
            prev = x;
        }
        d.push(1.0 - prev);
        Ok(Spacings { d })
    }

    /// Spacings induced by already-sorted pivot values in (0,1).
    pub fn from_sorted_pivots(pivots: &[f64]) -> Result<Self> {
        Self::from_uniforms(pivots)
    }

    pub fn k(&self) -> usize {
        self.d.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.d
    }
}

/// The toll term b(D) = alpha_K sum D_i log D_i + l_opt(D), split into parts.
#[derive(Debug, Clone, Copy)]
pub struct TollValue {
    pub entropy_term: f64,
    pub opt_cost: f64,
    pub total: f64,
}

/// Draw spacings for `k` pivots. Duplicate or boundary draws (possible only
/// in finite precision) are rejected and redrawn so every coordinate stays
/// strictly positive.
pub fn sample_spacings<R: Rng>(k: usize, rng: &mut R) -> Spacings {
    let mut buf = vec![0.0f64; k + 1];
    sample_spacings_into(k, rng, &mut buf);
    Spacings { d: buf }
}

/// Allocation-free sampler: writes the K+1 spacings into `out[..k+1]`.
pub fn sample_spacings_into<R: Rng>(k: usize, rng: &mut R, out: &mut [f64]) {
    debug_assert!(out.len() >= k + 1);
    'draw: loop {
        for slot in out[..k].iter_mut() {
            *slot = rng.gen::<f64>();
        }
        out[..k].sort_by(|a, b| a.partial_cmp(b).unwrap());
        if out[0] <= 0.0 {
            continue 'draw;
        }
        for i in 1..k {
            if out[i] == out[i - 1] {
                continue 'draw;
            }
        }
        // differences in place, right to left
        out[k] = 1.0 - out[k - 1];
        for i in (1..k).rev() {
            out[i] -= out[i - 1];
        }
        return;
    }
}

/// Evaluate the toll b(D) for given alpha_K.
pub fn toll(sp: &Spacings, alpha_k: f64, ts: &TreeSet) -> Result<TollValue> {
    if sp.k() != ts.k() {
        return Err(Error::DimensionMismatch {
            expected: ts.k() + 1,
            got: sp.k() + 1,
        });
    }
    if sp.d.iter().any(|&x| x <= 0.0) {
        return Err(Error::ZeroSpacing);
    }
    let entropy_term: f64 = alpha_k * sp.d.iter().map(|&x| x * x.ln()).sum::<f64>();
    let (_, opt_cost) = ts.optimal_cost_unchecked(&sp.d);
    Ok(TollValue {
        entropy_term,
        opt_cost,
        total: entropy_term + opt_cost,
    })
}

/// Mean and standard error from shard-wise (sum, sum of squares, count)
/// triples, combined in fixed shard order.
fn combine(moments: &[(f64, f64, u64)]) -> (f64, f64) {
    let (mut s, mut s2, mut n) = (0.0, 0.0, 0u64);
    for &(a, b, c) in moments {
        s += a;
        s2 += b;
        n += c;
    }
    let n = n as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

fn shard_sizes(samples: u64) -> Vec<u64> {
    let shards = SHARDS.min(samples.max(1));
    (0..shards)
        .map(|i| samples / shards + u64::from(i < samples % shards))
        .collect()
}

/// Monte Carlo estimate of gamma_K = E[l_opt(D)] with its standard error.
pub fn gamma_mc(k: usize, samples: u64, seed: u64) -> Result<(f64, f64)> {
    let ts = crate::trees::enumerate_trees(k)?;
    let moments: Vec<(f64, f64, u64)> = shard_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(shard, m)| {
            let mut rng = shard_rng(seed, shard as u64);
            let mut buf = vec![0.0f64; k + 1];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..m {
                sample_spacings_into(k, &mut rng, &mut buf);
                let (_, c) = ts.optimal_cost_unchecked(&buf);
                s += c;
                s2 += c * c;
            }
            (s, s2, m)
        })
        .collect();
    Ok(combine(&moments))
}

/// Monte Carlo estimate of sigma^2_K = (K+2)/K * E[b(D)^2] with its standard
/// error (both scaled by (K+2)/K). Uses the tabulated exact alpha_K for
/// k <= 6; beyond that an estimate must be supplied explicitly.
pub fn sigma2_mc(k: usize, samples: u64, seed: u64, alpha: Option<f64>) -> Result<(f64, f64)> {
    let alpha_k = match alpha {
        Some(a) => a,
        None => exact::alpha_f64(k)?,
    };
    let ts = crate::trees::enumerate_trees(k)?;
    let moments: Vec<(f64, f64, u64)> = shard_sizes(samples)
        .into_par_iter()
        .enumerate()
        .map(|(shard, m)| {
            let mut rng = shard_rng(seed, shard as u64);
            let mut buf = vec![0.0f64; k + 1];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..m {
                sample_spacings_into(k, &mut rng, &mut buf);
                let (_, opt) = ts.optimal_cost_unchecked(&buf);
                let entropy: f64 = buf[..=k].iter().map(|&x| x * x.ln()).sum();
                let b = alpha_k * entropy + opt;
                let b2 = b * b;
                s += b2;
                s2 += b2 * b2;
            }
            (s, s2, m)
        })
        .collect();
    let (mean, se) = combine(&moments);
    let scale = (k as f64 + 2.0) / k as f64;
    Ok((scale * mean, scale * se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::enumerate_trees;

    #[test]
    fn from_uniforms_example() {
        let sp = Spacings::from_uniforms(&[0.2, 0.7, 0.5]).unwrap();
        let d = sp.coords();
        assert!((d[0] - 0.2).abs() < 1e-12);
        assert!((d[1] - 0.3).abs() < 1e-12);
        assert!((d[2] - 0.2).abs() < 1e-12);
        assert!((d[3] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn from_uniforms_rejects_duplicates_and_boundaries() {
        assert!(Spacings::from_uniforms(&[0.2, 0.2]).is_err());
        assert!(Spacings::from_uniforms(&[0.0, 0.5]).is_err());
    }

    #[test]
    fn single_pivot_spacings() {
        let sp = Spacings::from_uniforms(&[0.3]).unwrap();
        assert_eq!(sp.coords(), &[0.3, 0.7]);
    }

    #[test]
    fn sampled_spacings_lie_on_simplex() {
        for k in 1..=6 {
            let mut rng = shard_rng(1, k as u64);
            for _ in 0..1000 {
                let sp = sample_spacings(k, &mut rng);
                let sum: f64 = sp.coords().iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
                assert!(sp.coords().iter().all(|&x| x > 0.0 && x < 1.0));
            }
        }
    }

    #[test]
    fn marginal_means_match_exchangeability() {
        // E[D_i] = 1/(K+1); Var(D_i) = K/((K+1)^2 (K+2)) for Beta(1,K).
        for k in [1usize, 3] {
            let n = 100_000;
            let mut rng = shard_rng(9, k as u64);
            let mut sums = vec![0.0; k + 1];
            for _ in 0..n {
                let sp = sample_spacings(k, &mut rng);
                for (s, &x) in sums.iter_mut().zip(sp.coords()) {
                    *s += x;
                }
            }
            let kf = k as f64;
            let var = kf / ((kf + 1.0) * (kf + 1.0) * (kf + 2.0));
            let se = (var / n as f64).sqrt();
            for s in &sums {
                let mean = s / n as f64;
                assert!((mean - 1.0 / (kf + 1.0)).abs() < 3.0 * se, "k={k} mean={mean}");
            }
        }
    }

    #[test]
    fn toll_k1_example() {
        let ts = enumerate_trees(1).unwrap();
        let sp = Spacings::from_uniforms(&[0.5]).unwrap();
        let t = toll(&sp, 2.0, &ts).unwrap();
        assert!((t.entropy_term - 2.0 * 0.5f64.ln()).abs() < 1e-12);
        assert_eq!(t.opt_cost, 1.0);
        assert!((t.total - (2.0 * 0.5f64.ln() + 1.0)).abs() < 1e-12);
        assert!((t.total + 0.3862943611).abs() < 1e-9);
    }

    #[test]
    fn toll_k3_centroid() {
        let ts = enumerate_trees(3).unwrap();
        let sp = Spacings {
            d: vec![0.25; 4],
        };
        let t = toll(&sp, 133.0 / 78.0, &ts).unwrap();
        assert_eq!(t.opt_cost, 2.0);
        assert!(t.entropy_term <= 0.0);
    }

    #[test]
    fn toll_rejects_zero_spacing() {
        let ts = enumerate_trees(1).unwrap();
        let sp = Spacings { d: vec![0.0, 1.0] };
        assert!(toll(&sp, 2.0, &ts).is_err());
    }

    #[test]
    fn gamma_k1_is_exact() {
        let (g, se) = gamma_mc(1, 10_000, 3).unwrap();
        assert_eq!(g, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn gamma_k2_small_sample() {
        let (g, se) = gamma_mc(2, 200_000, 5).unwrap();
        assert!((g - 1.5).abs() < 3.0 * se, "g={g} se={se}");
    }

    #[test]
    fn gamma_is_reproducible() {
        assert_eq!(gamma_mc(3, 50_000, 11).unwrap(), gamma_mc(3, 50_000, 11).unwrap());
    }

    #[test]
    fn sigma2_needs_alpha_beyond_table() {
        assert!(sigma2_mc(7, 100, 0, None).is_err());
        assert!(sigma2_mc(7, 100, 0, Some(1.55)).is_ok());
    }

    #[test]
    fn sigma2_k1_small_sample() {
        let (v, se) = sigma2_mc(1, 200_000, 13, None).unwrap();
        assert!((v - crate::exact::sigma2_1()).abs() < 3.0 * se + 1e-3, "v={v} se={se}");
    }

    #[test]
    fn entropy_sandwich() {
        // sum D_i log2(1/D_i) <= l_opt(D) <= ceil(log2(K+1))
        for k in 1..=6usize {
            let ts = enumerate_trees(k).unwrap();
            let mut rng = shard_rng(21, k as u64);
            let upper = ((k + 1) as f64).log2().ceil();
            for _ in 0..2000 {
                let sp = sample_spacings(k, &mut rng);
                let (_, opt) = ts.optimal_cost_unchecked(sp.coords());
                let ent: f64 = sp.coords().iter().map(|&x| -x * x.log2()).sum();
                assert!(ent <= opt + 1e-9, "k={k}");
                assert!(opt <= upper + 1e-9, "k={k}");
            }
        }
    }
}

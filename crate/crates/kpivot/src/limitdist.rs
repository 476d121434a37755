//! Sampling the limit fixed point Z_K and empirical distribution utilities:
//! moments, MGF, kernel density, Wasserstein and Kolmogorov-Smirnov distances.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact;
use crate::rng::shard_rng;
use crate::spacings::sample_spacings_into;
use crate::trees::{enumerate_trees, TreeSet};

/// A finite sample kept sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        EmpiricalDistribution { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Population variance of the sample.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.values.len() as f64
    }

    /// Standard error of [`variance`](Self::variance) under i.i.d. sampling,
    /// sqrt((m4 - var^2)/n).
    pub fn variance_std_error(&self) -> f64 {
        let m = self.mean();
        let n = self.values.len() as f64;
        let var = self.variance();
        let m4 = self.values.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
        ((m4 - var * var).max(0.0) / n).sqrt()
    }

    pub fn mean_std_error(&self) -> f64 {
        (self.variance() / self.values.len() as f64).sqrt()
    }
}

/// Samples approximations of Z_K, the unique centered square-integrable
/// solution of Z = sum_i (D_i Z^(i) + alpha_K D_i log D_i) + l_opt(D).
#[derive(Debug, Clone)]
pub struct FixpointSampler {
    k: usize,
    depth: u32,
    alpha_k: f64,
    ts: TreeSet,
}

impl FixpointSampler {
    /// `alpha` defaults to the tabulated exact alpha_K (k <= 6).
    pub fn new(k: usize, depth: u32, alpha: Option<f64>) -> Result<Self> {
        let alpha_k = match alpha {
            Some(a) => a,
            None => exact::alpha_f64(k)?,
        };
        Ok(FixpointSampler {
            k,
            depth,
            alpha_k,
            ts: enumerate_trees(k)?,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn alpha_k(&self) -> f64 {
        self.alpha_k
    }

    fn toll_term<R: Rng>(&self, rng: &mut R, buf: &mut [f64]) -> f64 {
        sample_spacings_into(self.k, rng, buf);
        let (_, opt) = self.ts.optimal_cost_unchecked(&buf[..=self.k]);
        let entropy: f64 = buf[..=self.k].iter().map(|&x| x * x.ln()).sum();
        self.alpha_k * entropy + opt
    }

    /// One draw by full recursive expansion truncated at `depth` (leaf value
    /// 0). Cost grows like (K+1)^depth, so this is only usable for small
    /// depths; use [`sample_pool`](Self::sample_pool) for bulk sampling.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        self.sample_at(self.depth, rng)
    }

    fn sample_at<R: Rng>(&self, depth: u32, rng: &mut R) -> f64 {
        if depth == 0 {
            return 0.0;
        }
        let mut buf = vec![0.0f64; self.k + 1];
        sample_spacings_into(self.k, rng, &mut buf);
        let (_, opt) = self.ts.optimal_cost_unchecked(&buf);
        let entropy: f64 = buf.iter().map(|&x| x * x.ln()).sum();
        let mut z = self.alpha_k * entropy + opt;
        for i in 0..=self.k {
            z += buf[i] * self.sample_at(depth - 1, rng);
        }
        z
    }

    /// Draw `n` approximate Z_K values by population iteration: starting from
    /// a pool of zeros, apply `depth` rounds of the fixed-point map with
    /// resampling from the previous pool. The pool's l_2 distance to Z_K
    /// contracts by sqrt(2/(K+2)) per round, the same factor as the
    /// depth-truncated expansion. The sample is the concatenation of
    /// [`POOL_REPLICATES`] independent chains, so replicate-based standard
    /// errors (see [`pool_moments`]) stay valid despite the within-chain
    /// dependence introduced by resampling.
    pub fn sample_pool(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_replicates(n, seed).concat()
    }

    /// Like [`sample_pool`](Self::sample_pool), but each chain is re-centered
    /// to its own sample mean. The population mean is the one direction the
    /// fixed-point map does not contract (the spacings sum to 1), so it
    /// performs a random walk across rounds; since E[Z_K] = 0 exactly, the
    /// per-chain shift strips that drift at the cost of an O(1/m) variance
    /// bias. Use this when the sample serves as a reference distribution.
    pub fn sample_pool_centered(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut chains = self.sample_replicates(n, seed);
        for chain in &mut chains {
            if chain.is_empty() {
                continue;
            }
            let m = chain.iter().sum::<f64>() / chain.len() as f64;
            for v in chain.iter_mut() {
                *v -= m;
            }
        }
        chains.concat()
    }

    /// The independent chains behind [`sample_pool`](Self::sample_pool), kept
    /// separate. Chain `r` is seeded from `(seed, r)`.
    pub fn sample_replicates(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let replicates = POOL_REPLICATES.min(n.max(1));
        let sizes: Vec<usize> = (0..replicates)
            .map(|r| n / replicates + usize::from(r < n % replicates))
            .collect();
        sizes
            .into_par_iter()
            .enumerate()
            .map(|(r, m)| self.run_chain(m, shard_rng(seed, r as u64)))
            .collect()
    }

    fn run_chain(&self, n: usize, mut rng: rand_chacha::ChaCha8Rng) -> Vec<f64> {
        if n == 0 {
            return Vec::new();
        }
        let mut pool = vec![0.0f64; n];
        let mut next = vec![0.0f64; n];
        let mut buf = vec![0.0f64; self.k + 1];
        for _round in 0..self.depth {
            for slot in next.iter_mut() {
                let mut z = self.toll_term(&mut rng, &mut buf);
                for &d in &buf[..=self.k] {
                    let idx = rng.gen_range(0..n);
                    z += d * pool[idx];
                }
                *slot = z;
            }
            std::mem::swap(&mut pool, &mut next);
        }
        pool
    }
}

/// Number of independent chains used by the pool sampler.
pub const POOL_REPLICATES: usize = 16;

/// Mean and variance of a pooled Z_K sample with standard errors taken
/// across the independent chains.
#[derive(Debug, Clone, Copy)]
pub struct PoolMoments {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

/// Estimate E[Z_K] and Var(Z_K) from independent pool chains; the standard
/// errors are the replicate spreads divided by sqrt(#chains).
pub fn pool_moments(sampler: &FixpointSampler, n: usize, seed: u64) -> PoolMoments {
    let chains = sampler.sample_replicates(n, seed);
    let stats: Vec<(f64, f64)> = chains
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| {
            let d = EmpiricalDistribution::from_values(c.clone());
            (d.mean(), d.variance())
        })
        .collect();
    let r = stats.len() as f64;
    let mean = stats.iter().map(|s| s.0).sum::<f64>() / r;
    let variance = stats.iter().map(|s| s.1).sum::<f64>() / r;
    let mean_var = stats.iter().map(|s| (s.0 - mean).powi(2)).sum::<f64>() / r;
    let var_var = stats.iter().map(|s| (s.1 - variance).powi(2)).sum::<f64>() / r;
    PoolMoments {
        mean,
        mean_se: (mean_var / r).sqrt(),
        variance,
        variance_se: (var_var / r).sqrt(),
    }
}

/// Empirical Wasserstein-p distance on the line: the exact integral of
/// |F_a^{-1}(u) - F_b^{-1}(u)|^p over u in (0,1), taken piecewise over the
/// merged quantile breakpoints. For equal sizes this reduces to the sorted
/// coupling (mean p-th power of sorted differences).
pub fn wasserstein_p(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    p: f64,
) -> Result<f64> {
    if a.size() == 0 || b.size() == 0 {
        return Err(Error::SampleSizeMismatch(a.size(), b.size()));
    }
    let (na, nb) = (a.size() as f64, b.size() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0f64;
    let mut s = 0.0f64;
    while i < a.size() && j < b.size() {
        let ua = (i + 1) as f64 / na;
        let ub = (j + 1) as f64 / nb;
        let next = ua.min(ub);
        s += (next - u) * (a.values[i] - b.values[j]).abs().powf(p);
        u = next;
        if ua <= ub {
            i += 1;
        }
        if ub <= ua {
            j += 1;
        }
    }
    Ok(s.powf(1.0 / p))
}

/// Exact sup-distance between the two empirical CDFs.
pub fn ks_distance(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (na, nb) = (a.size() as f64, b.size() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0.0f64;
    while i < a.size() || j < b.size() {
        let xa = a.values.get(i).copied().unwrap_or(f64::INFINITY);
        let xb = b.values.get(j).copied().unwrap_or(f64::INFINITY);
        if xa <= xb {
            i += 1;
        }
        if xb <= xa {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// Sample mean of exp(lambda * x). Overflow surfaces as +infinity.
pub fn mgf_estimate(a: &EmpiricalDistribution, lambda: f64) -> f64 {
    a.values.iter().map(|&x| (lambda * x).exp()).sum::<f64>() / a.size() as f64
}

/// Gaussian-kernel density estimate at the grid points.
pub fn kde_density(
    a: &EmpiricalDistribution,
    grid: &[f64],
    bandwidth: f64,
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::Config("kde grid must be nonempty".into()));
    }
    if bandwidth <= 0.0 {
        return Err(Error::Config("kde bandwidth must be positive".into()));
    }
    let norm = 1.0 / (a.size() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    Ok(grid
        .iter()
        .map(|&g| {
            norm * a
                .values
                .iter()
                .map(|&x| {
                    let u = (g - x) / bandwidth;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
        })
        .collect())
}

/// Silverman's rule-of-thumb bandwidth.
pub fn silverman_bandwidth(a: &EmpiricalDistribution) -> f64 {
    let n = a.size() as f64;
    let sd = a.variance().sqrt();
    let q1 = a.values[(a.size() - 1) / 4];
    let q3 = a.values[3 * (a.size() - 1) / 4];
    let spread = sd.min((q3 - q1) / 1.34).max(f64::MIN_POSITIVE);
    0.9 * spread * n.powf(-0.2)
}

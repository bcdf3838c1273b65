//! Spectrum samplers: an exact tridiagonal model for the GUE and a
//! single-site Metropolis log-gas chain for general one-cut potentials.
//!
//! Target law: density proportional to prod_{i<j} |l_i - l_j|^2
//! exp(-N sum_j V(l_j)). For V(x) = 2x^2 this is the GUE normalized so the
//! bulk fills [-1,1] (single-eigenvalue variance 1/(4N) at N = 1).

use crate::eqmeasure::Potential;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("symmetric tridiagonal eigensolver failed to converge")]
    EigensolveFailure,
    #[error("chain diverged: |lambda| = {0} > 10 after burn-in (bad proposal scale?)")]
    ChainDiverged(f64),
    #[error("replica {index}: {source}")]
    Replica {
        index: usize,
        #[source]
        source: Box<SamplerError>,
    },
}

/// Sorted eigenvalue sample with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub sampler_kind: String,
    pub seed: u64,
    pub potential: String,
    /// Metropolis acceptance rate, when applicable.
    pub acceptance_rate: Option<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.values.len()
    }
}

/// Metropolis chain parameters; all counts are single-site update steps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McmcParams {
    pub sweeps: usize,
    pub burn_in: usize,
    pub proposal_scale: f64,
    pub thinning: usize,
}

impl McmcParams {
    /// Defaults scaled to the O(1/N) bulk spacing.
    pub fn defaults(n: usize) -> Self {
        Self {
            sweeps: 200 * n,
            burn_in: 50 * n,
            proposal_scale: 1.0 / n as f64,
            thinning: n,
        }
    }

    pub fn valid(&self) -> bool {
        self.sweeps > 0 && self.burn_in > 0 && self.proposal_scale > 0.0 && self.thinning > 0
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix (diagonal `d`, subdiagonal
/// `e` of length n-1) by the implicit QL algorithm, eigenvalues only.
pub fn tridiagonal_eigenvalues(d: &mut Vec<f64>, e: &mut Vec<f64>) -> Result<(), SamplerError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(SamplerError::EigensolveFailure);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0;
            let mut i = m;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if i == l {
                    d[l] -= p;
                    e[l] = g;
                    e[m] = 0.0;
                }
                f = 0.0;
                let _ = f;
            }
        }
    }
    e.pop();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(())
}

/// Exact GUE sample of size N via the beta = 2 tridiagonal model, scaled by
/// 1/(2 sqrt N) so the empirical law converges to the semicircle on [-1,1].
pub fn sample_gue(n: usize, seed: u64) -> Result<Spectrum, SamplerError> {
    assert!(n >= 1);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut e: Vec<f64> = (1..n)
        .map(|k| {
            let dof = 2.0 * (n - k) as f64;
            let chi2 = ChiSquared::new(dof).unwrap();
            (chi2.sample(&mut rng) / 2.0).sqrt()
        })
        .collect();
    tridiagonal_eigenvalues(&mut d, &mut e)?;
    let scale = 1.0 / (2.0 * (n as f64).sqrt());
    for v in d.iter_mut() {
        *v *= scale;
    }
    Ok(Spectrum {
        values: d,
        provenance: Provenance {
            sampler_kind: "gue-tridiagonal".into(),
            seed,
            potential: "gue".into(),
            acceptance_rate: None,
        },
    })
}

/// Log of the unnormalized target density 2 sum_{i<j} log|l_i-l_j| - N sum V.
pub fn log_density(potential: &Potential, values: &[f64]) -> f64 {
    let n = values.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..i {
            acc += 2.0 * (values[i] - values[j]).abs().ln();
        }
        acc -= n as f64 * potential.evaluate(values[i]);
    }
    acc
}

/// Log density change of moving site k from old to new, all other sites fixed.
pub fn log_density_delta(potential: &Potential, values: &[f64], k: usize, new: f64) -> f64 {
    let n = values.len() as f64;
    let old = values[k];
    let mut acc = -n * (potential.evaluate(new) - potential.evaluate(old));
    for (i, &v) in values.iter().enumerate() {
        if i == k {
            continue;
        }
        acc += 2.0 * ((new - v).abs().ln() - (old - v).abs().ln());
    }
    acc
}

/// One spectrum from the invariant ensemble for a general potential by
/// single-site Metropolis, deterministic given the seed.
pub fn sample_invariant(
    potential: &Potential,
    n: usize,
    params: &McmcParams,
    seed: u64,
) -> Result<Spectrum, SamplerError> {
    assert!(n >= 2);
    assert!(params.valid());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // start from the equilibrium quantiles when available, else uniform
    let mut values: Vec<f64> = match crate::eqmeasure::solve_equilibrium(potential) {
        Ok(m) => (1..=n)
            .map(|j| m.quantile((j as f64 - 0.5) / n as f64))
            .collect(),
        Err(_) => (0..n)
            .map(|j| -0.9 + 1.8 * j as f64 / (n - 1) as f64)
            .collect(),
    };
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    let total = params.burn_in + params.sweeps;
    for step in 0..total {
        let k = rng.gen_range(0..n);
        let proposal = values[k] + params.proposal_scale * rng.sample::<f64, _>(StandardNormal);
        let delta = log_density_delta(potential, &values, k, proposal);
        proposed += 1;
        if delta >= 0.0 || rng.gen::<f64>() < delta.exp() {
            values[k] = proposal;
            accepted += 1;
        }
        if step == params.burn_in {
            if let Some(worst) = values.iter().map(|v| v.abs()).fold(None, |m: Option<f64>, v| {
                Some(m.map_or(v, |m| m.max(v)))
            }) {
                if worst > 10.0 {
                    return Err(SamplerError::ChainDiverged(worst));
                }
            }
        }
    }
    let worst = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if worst > 10.0 {
        return Err(SamplerError::ChainDiverged(worst));
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(Spectrum {
        values,
        provenance: Provenance {
            sampler_kind: "metropolis-log-gas".into(),
            seed,
            potential: potential.name.clone(),
            acceptance_rate: Some(accepted as f64 / proposed as f64),
        },
    })
}

/// Which sampler a replica job runs.
#[derive(Debug, Clone)]
pub enum SamplerJob {
    Gue { n: usize },
    Invariant { potential: Potential, n: usize, params: McmcParams },
}

impl SamplerJob {
    pub fn run(&self, seed: u64) -> Result<Spectrum, SamplerError> {
        match self {
            SamplerJob::Gue { n } => sample_gue(*n, seed),
            SamplerJob::Invariant { potential, n, params } => {
                sample_invariant(potential, *n, params, seed)
            }
        }
    }
}

/// Substream seed for replica r: a splitmix64-style mix of (master_seed, r).
/// Documented so external tools can reproduce individual replicas.
pub fn replica_seed(master_seed: u64, r: u64) -> u64 {
    let mut z = master_seed ^ r.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// M replicas with independent substreams, aggregated in replica-index order.
/// The output is identical regardless of scheduling.
pub fn run_replicas(
    job: &SamplerJob,
    m: usize,
    master_seed: u64,
) -> Result<Vec<Spectrum>, SamplerError> {
    use rayon::prelude::*;
    assert!(m >= 1);
    let results: Vec<Result<Spectrum, SamplerError>> = (0..m)
        .into_par_iter()
        .map(|r| {
            job.run(replica_seed(master_seed, r as u64))
                .map_err(|e| SamplerError::Replica {
                    index: r,
                    source: Box::new(e),
                })
        })
        .collect();
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_small_known() {
        // [[2,1],[1,2]] -> {1, 3}
        let mut d = vec![2.0, 2.0];
        let mut e = vec![1.0];
        tridiagonal_eigenvalues(&mut d, &mut e).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!((d[1] - 3.0).abs() < 1e-12);
        // 3x3 with known spectrum: diag(1,1,1) + offdiag 1 -> 1-sqrt2, 1, 1+sqrt2
        let mut d = vec![1.0, 1.0, 1.0];
        let mut e = vec![1.0, 1.0];
        tridiagonal_eigenvalues(&mut d, &mut e).unwrap();
        assert!((d[0] - (1.0 - std::f64::consts::SQRT_2)).abs() < 1e-12);
        assert!((d[1] - 1.0).abs() < 1e-12);
        assert!((d[2] - (1.0 + std::f64::consts::SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn gue_determinism() {
        let a = sample_gue(5, 42).unwrap();
        let b = sample_gue(5, 42).unwrap();
        assert_eq!(a.values, b.values);
        assert!(a.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn gue_n1_moments() {
        // single eigenvalue ~ N(0, 1/4)
        let m = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for s in 0..m {
            let v = sample_gue(1, s as u64).unwrap().values[0];
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / m as f64;
        let var = sumsq / m as f64 - mean * mean;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 0.25).abs() < 0.005, "var {var}");
    }

    #[test]
    fn gue_semicircle_ks() {
        let m = crate::eqmeasure::solve_equilibrium(&Potential::gue()).unwrap();
        let s = sample_gue(2000, 7).unwrap();
        let n = s.n() as f64;
        let mut ks: f64 = 0.0;
        for (j, &l) in s.values.iter().enumerate() {
            let f = m.cdf(l);
            ks = ks.max((f - j as f64 / n).abs()).max((f - (j + 1) as f64 / n).abs());
        }
        assert!(ks < 0.05, "KS {ks}");
    }

    #[test]
    fn metropolis_matches_tridiagonal_second_moment() {
        let pot = Potential::gue();
        let n = 200;
        let params = McmcParams::defaults(n);
        let m = 24;
        let mcmc: Vec<f64> = (0..m)
            .map(|r| {
                let s = sample_invariant(&pot, n, &params, 1000 + r).unwrap();
                s.values.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        let exact: Vec<f64> = (0..200)
            .map(|r| {
                let s = sample_gue(n, 5000 + r).unwrap();
                s.values.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let mu_m = mean(&mcmc);
        let mu_e = mean(&exact);
        let var_m = mcmc.iter().map(|v| (v - mu_m).powi(2)).sum::<f64>() / (m - 1) as f64;
        let se = (var_m / m as f64).sqrt();
        assert!(
            (mu_m - mu_e).abs() < 3.0 * se.max(0.01),
            "mcmc {mu_m} exact {mu_e} se {se}"
        );
    }

    #[test]
    fn metropolis_determinism() {
        let pot = Potential::gue();
        let params = McmcParams::defaults(16);
        let a = sample_invariant(&pot, 16, &params, 9).unwrap();
        let b = sample_invariant(&pot, 16, &params, 9).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn detailed_balance_ratio() {
        // acceptance log-ratio against direct density difference
        let pot = Potential::quartic();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let n = 12;
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.95..0.95)).collect();
        for _ in 0..10_000 {
            let k = rng.gen_range(0..n);
            let new = values[k] + 0.1 * rng.sample::<f64, _>(StandardNormal);
            let fast = log_density_delta(&pot, &values, k, new);
            let mut moved = values.clone();
            moved[k] = new;
            let slow = log_density(&pot, &moved) - log_density(&pot, &values);
            assert!((fast - slow).abs() < 1e-12 * (1.0 + slow.abs()));
        }
    }

    #[test]
    fn two_particle_gap_vs_rejection() {
        // rejection-sample the exact 2-particle density and compare the gap law
        let pot = Potential::gue();
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let mut reject_gaps = Vec::new();
        while reject_gaps.len() < 20_000 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b = rng.gen_range(-2.0..2.0);
            // density prop to (a-b)^2 exp(-2*2*(a^2+b^2)); bound: (a-b)^2 <= 16
            let logp = 2.0 * (a - b).abs().ln() - 2.0 * (2.0 * (a * a + b * b));
            let logbound = (16.0f64).ln();
            if rng.gen::<f64>() < (logp - logbound).exp() {
                reject_gaps.push((a - b).abs());
            }
        }
        reject_gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let params = McmcParams {
            sweeps: 400,
            burn_in: 100,
            proposal_scale: 0.5,
            thinning: 2,
        };
        let mut mcmc_gaps: Vec<f64> = (0..4000u64)
            .map(|r| {
                let s = sample_invariant(&pot, 2, &params, 10_000 + r).unwrap();
                s.values[1] - s.values[0]
            })
            .collect();
        mcmc_gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // two-sample KS
        let (mut i, mut j, mut ks) = (0usize, 0usize, 0.0f64);
        while i < mcmc_gaps.len() && j < reject_gaps.len() {
            if mcmc_gaps[i] <= reject_gaps[j] {
                i += 1;
            } else {
                j += 1;
            }
            let d = (i as f64 / mcmc_gaps.len() as f64 - j as f64 / reject_gaps.len() as f64).abs();
            ks = ks.max(d);
        }
        assert!(ks < 0.03, "two-sample KS {ks}");
    }

    #[test]
    fn replicas_deterministic_and_distinct() {
        let job = SamplerJob::Gue { n: 50 };
        let a = run_replicas(&job, 8, 5).unwrap();
        let b = run_replicas(&job, 8, 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.values, y.values);
        }
        // single replica equals a direct call with the derived seed
        let one = run_replicas(&job, 1, 5).unwrap();
        assert_eq!(one[0].values, sample_gue(50, replica_seed(5, 0)).unwrap().values);
        // no substream collisions
        let many = run_replicas(&SamplerJob::Gue { n: 20 }, 100, 11).unwrap();
        for i in 0..many.len() {
            for j in 0..i {
                assert_ne!(many[i].values, many[j].values);
            }
        }
    }
}

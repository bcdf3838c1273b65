//! Multiplicative chaos observables built from the counting field h_N:
//! normalized exponential densities, thick-point counts, free energies,
//! and a reference log-correlated Gaussian field on [-1,1] with the
//! covariance kernel
//!     Sigma(x,y) = log | (1 - xy + sqrt(1-x^2) sqrt(1-y^2)) / (x - y) |.

use crate::cheby::gauss_legendre;
use crate::counting::h_at;
use crate::eqmeasure::EquilibriumMeasure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

const SQRT2PI: f64 = std::f64::consts::SQRT_2 * PI;

/// Log-correlated covariance of the counting field on (-1,1).
pub fn sigma_kernel(x: f64, y: f64) -> f64 {
    assert!(x.abs() < 1.0 && y.abs() < 1.0 && x != y);
    let s = (1.0 - x * y + (1.0 - x * x).sqrt() * (1.0 - y * y).sqrt()) / (x - y);
    s.abs().ln()
}

/// Diagonal limit of the truncated series: Var X_K(x) for the reference
/// field below, sum_{k<=K} (2/k) U_{k-1}(x)^2 (1-x^2).
pub fn truncated_variance(kmax: usize, x: f64) -> f64 {
    let w = 1.0 - x * x;
    let mut sum = 0.0;
    let mut u_prev = 0.0; // U_{-1}
    let mut u = 1.0; // U_0
    for k in 1..=kmax {
        sum += 2.0 / k as f64 * u * u * w;
        let next = 2.0 * x * u - u_prev;
        u_prev = u;
        u = next;
    }
    sum
}

/// Truncated off-diagonal covariance sum_{k<=K} (2/k) U_{k-1}(x) U_{k-1}(y)
/// sqrt(1-x^2) sqrt(1-y^2), converging to `sigma_kernel` for x != y.
pub fn truncated_covariance(kmax: usize, x: f64, y: f64) -> f64 {
    let w = ((1.0 - x * x) * (1.0 - y * y)).sqrt();
    let mut sum = 0.0;
    let (mut ux_prev, mut ux) = (0.0, 1.0);
    let (mut uy_prev, mut uy) = (0.0, 1.0);
    for k in 1..=kmax {
        sum += 2.0 / k as f64 * ux * uy * w;
        let nx = 2.0 * x * ux - ux_prev;
        ux_prev = ux;
        ux = nx;
        let ny = 2.0 * y * uy - uy_prev;
        uy_prev = uy;
        uy = ny;
    }
    sum
}

/// Truncated log-correlated Gaussian field
///     X_K(x) = sum_{k=1}^{K} sqrt(2/k) xi_k U_{k-1}(x) sqrt(1-x^2),
/// whose K -> infinity covariance is `sigma_kernel`.
pub struct GaussianField {
    pub coefficients: Vec<f64>,
}

impl GaussianField {
    pub fn sample(kmax: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let coefficients = (1..=kmax)
            .map(|k| (2.0 / k as f64).sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self { coefficients }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let w = (1.0 - x * x).max(0.0).sqrt();
        // Clenshaw on the U-series
        let mut b1 = 0.0f64;
        let mut b2 = 0.0f64;
        for &c in self.coefficients.iter().rev() {
            let b0 = c + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        b1 * w
    }

    /// Reference Gaussian multiplicative chaos density at x:
    /// exp(gamma X_K(x) - gamma^2/2 Var X_K(x)).
    pub fn gmc_density(&self, gamma: f64, x: f64) -> f64 {
        let var = truncated_variance(self.coefficients.len(), x);
        (gamma * self.eval(x) - 0.5 * gamma * gamma * var).exp()
    }
}

/// How the exponential of the counting field is normalized into a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Divide by the sample mean of exp(gamma h) over the supplied replicas.
    MonteCarlo,
    /// Divide by the deterministic surrogate
    /// N^{gamma^2/2} (1-x^2)^{3 gamma^2 / 4} * chat.
    Surrogate { chat: f64 },
    /// No normalization (raw exponential).
    Raw,
}

/// exp(gamma h_N(x)) for one spectrum on a grid.
pub fn exp_field(
    measure: &EquilibriumMeasure,
    values: &[f64],
    gamma: f64,
    grid: &[f64],
) -> Vec<f64> {
    grid.iter().map(|&x| (gamma * h_at(measure, values, x)).exp()).collect()
}

/// Chaos density on a grid for a batch of replicas. Returns one row per
/// replica. For `MonteCarlo` the normalizer at each grid point is the
/// across-replica mean of the raw exponential at that point.
pub fn chaos_density(
    measure: &EquilibriumMeasure,
    replicas: &[Vec<f64>],
    gamma: f64,
    grid: &[f64],
    norm: Normalization,
) -> Vec<Vec<f64>> {
    let raw: Vec<Vec<f64>> = replicas
        .iter()
        .map(|v| exp_field(measure, v, gamma, grid))
        .collect();
    match norm {
        Normalization::Raw => raw,
        Normalization::MonteCarlo => {
            let m = raw.len() as f64;
            let mean: Vec<f64> = (0..grid.len())
                .map(|i| raw.iter().map(|row| row[i]).sum::<f64>() / m)
                .collect();
            raw.iter()
                .map(|row| row.iter().zip(&mean).map(|(v, m)| v / m).collect())
                .collect()
        }
        Normalization::Surrogate { chat } => {
            let n = replicas.first().map_or(0, |v| v.len()) as f64;
            let denom: Vec<f64> = grid
                .iter()
                .map(|&x| {
                    chat * n.powf(gamma * gamma / 2.0)
                        * (1.0 - x * x).max(0.0).powf(0.75 * gamma * gamma)
                })
                .collect();
            raw.iter()
                .map(|row| row.iter().zip(&denom).map(|(v, d)| v / d).collect())
                .collect()
        }
    }
}

/// Lebesgue measure of { x : h_N(x) >= gamma log N }  (gamma > 0),
/// or of { x : h_N(x) <= gamma log N } for gamma < 0, computed
/// exactly from the piecewise structure of h_N.
///
/// On each interval [l_j, l_{j+1}) we have h(x) = sqrt(2) pi (j+1 - N F(x)),
/// strictly decreasing, so the level set is an interval with endpoint
/// F^{-1}((j+1 - t/(sqrt2 pi)) / N) at threshold t.
pub fn thick_point_measure(measure: &EquilibriumMeasure, values: &[f64], gamma: f64) -> f64 {
    let n = values.len();
    let t = gamma * (n as f64).ln();
    // level in units of counting: h >= t  <=>  j+1 - N F(x) >= t / (sqrt2 pi)
    let shift = t / SQRT2PI;
    let mut total = 0.0;
    // intervals: (-inf, l_0) has count 0; [l_j, l_{j+1}) has count j+1.
    // We only need x in [-1, 1] since F is flat outside.
    let mut endpoints = Vec::with_capacity(n + 2);
    endpoints.push(-1.0f64);
    endpoints.extend(values.iter().map(|&v| v.clamp(-1.0, 1.0)));
    endpoints.push(1.0f64);
    for j in 0..=n {
        let (a, b) = (endpoints[j], endpoints[j + 1]);
        if b <= a {
            continue;
        }
        // count on (a, b) is j; h(x) = sqrt2 pi (j - N F(x))
        let p = (j as f64 - shift) / n as f64; // F(x*) where h crosses t
        if gamma >= 0.0 {
            // h >= t  <=>  F(x) <= p  <=>  x <= x*
            let cross = if p >= measure.cdf(b) {
                b
            } else if p <= measure.cdf(a) {
                a
            } else {
                measure.quantile(p)
            };
            total += cross - a;
        } else {
            // h <= t  <=>  x >= x*
            let cross = if p >= measure.cdf(b) {
                b
            } else if p <= measure.cdf(a) {
                a
            } else {
                measure.quantile(p)
            };
            total += b - cross;
        }
    }
    total
}

/// Empirical thick-point exponent: log of the replica-averaged level-set
/// measure divided by log N. The limit is -gamma^2/2 for |gamma| < sqrt 2.
pub fn thick_point_exponent(
    measure: &EquilibriumMeasure,
    replicas: &[Vec<f64>],
    gamma: f64,
) -> f64 {
    let n = replicas[0].len() as f64;
    let mean: f64 = replicas
        .iter()
        .map(|v| thick_point_measure(measure, v, gamma))
        .sum::<f64>()
        / replicas.len() as f64;
    mean.ln() / n.ln()
}

/// Free energy (1/log N) log int_{-1}^{1} e^{gamma h_N(x)} dx, with the
/// integral done exactly up to quadrature on each inter-eigenvalue interval
/// (the integrand is smooth there: e^{gamma sqrt2 pi (j - N F(x))}).
pub fn free_energy(measure: &EquilibriumMeasure, values: &[f64], gamma: f64) -> f64 {
    let n = values.len();
    let mut endpoints = Vec::with_capacity(n + 2);
    endpoints.push(-1.0f64);
    endpoints.extend(values.iter().map(|&v| v.clamp(-1.0, 1.0)));
    endpoints.push(1.0f64);
    let (gl_x, gl_w) = gauss_legendre(24);
    // log-sum-exp across intervals for stability at large gamma
    let mut log_terms: Vec<f64> = Vec::with_capacity(n + 1);
    let g = gamma * SQRT2PI;
    for j in 0..=n {
        let (a, b) = (endpoints[j], endpoints[j + 1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        // peel off the exponent at the interval midpoint
        let base = g * (j as f64 - n as f64 * measure.cdf(mid));
        let mut s = 0.0;
        for (xi, wi) in gl_x.iter().zip(&gl_w) {
            let x = mid + half * xi;
            let expo = g * (j as f64 - n as f64 * measure.cdf(x)) - base;
            s += wi * expo.exp();
        }
        log_terms.push(base + (half * s).ln());
    }
    let peak = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total = peak + log_terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln();
    total / (n as f64).ln()
}

/// Limiting free energy: gamma^2/2 in the subcritical phase |gamma| <= sqrt2,
/// frozen to sqrt2 |gamma| - 1 beyond.
pub fn free_energy_limit(gamma: f64) -> f64 {
    let g = gamma.abs();
    if g <= std::f64::consts::SQRT_2 {
        g * g / 2.0
    } else {
        std::f64::consts::SQRT_2 * g - 1.0
    }
}

/// Mesoscopic chaos density: exponential of the harmonic extension at
/// height eps instead of the raw field, same normalization options.
pub fn meso_chaos_density(
    measure: &EquilibriumMeasure,
    replicas: &[Vec<f64>],
    gamma: f64,
    eps: f64,
    grid: &[f64],
    norm: Normalization,
) -> Vec<Vec<f64>> {
    let raw: Vec<Vec<f64>> = replicas
        .iter()
        .map(|v| {
            grid.iter()
                .map(|&x| (gamma * crate::counting::harmonic_extension(measure, v, x, eps)).exp())
                .collect()
        })
        .collect();
    match norm {
        Normalization::Raw => raw,
        Normalization::MonteCarlo => {
            let m = raw.len() as f64;
            let mean: Vec<f64> = (0..grid.len())
                .map(|i| raw.iter().map(|row: &Vec<f64>| row[i]).sum::<f64>() / m)
                .collect();
            raw.iter()
                .map(|row| row.iter().zip(&mean).map(|(v, m)| v / m).collect())
                .collect()
        }
        Normalization::Surrogate { chat } => {
            let n = replicas.first().map_or(0, |v| v.len()) as f64;
            let scale = chat * (n * eps.min(1.0)).powf(gamma * gamma / 2.0);
            raw.iter().map(|row| row.iter().map(|v| v / scale).collect()).collect()
        }
    }
}

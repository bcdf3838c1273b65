//! The centered eigenvalue counting field
//!     h_N(x) = sqrt(2) pi ( #{ j : l_j <= x } - N F(x) ),
//! its exact extrema, rigidity statistics, Kolmogorov distance, and the
//! harmonic extension of the counting fluctuation to the upper half plane.

use crate::cheby::gauss_chebyshev_u;
use crate::eqmeasure::EquilibriumMeasure;
use std::f64::consts::PI;

const SQRT2PI: f64 = std::f64::consts::SQRT_2 * PI;

/// Number of eigenvalues <= x (values must be sorted ascending).
pub fn count_leq(values: &[f64], x: f64) -> usize {
    values.partition_point(|&v| v <= x)
}

/// h_N(x), right-continuous in x.
pub fn h_at(measure: &EquilibriumMeasure, values: &[f64], x: f64) -> f64 {
    let n = values.len() as f64;
    SQRT2PI * (count_leq(values, x) as f64 - n * measure.cdf(x))
}

/// Exact global extrema of h_N over the whole real line.
///
/// Between jumps, h is -sqrt(2) pi N F(x) plus a constant, which is
/// non-increasing, so the supremum over each interval [l_j, l_{j+1}) is
/// attained at the left endpoint and the infimum is the left limit at the
/// right endpoint, i.e. the value at l_{j+1} minus the jump sqrt(2) pi.
/// Outside the spectrum h tends to 0 at both infinities.
pub fn h_extrema(measure: &EquilibriumMeasure, values: &[f64]) -> (f64, f64) {
    let mut max = 0.0f64;
    let mut min = 0.0f64;
    for &l in values {
        let v = h_at(measure, values, l);
        max = max.max(v);
        min = min.min(v - SQRT2PI);
    }
    (min, max)
}

/// Kolmogorov distance between the empirical law and the equilibrium law,
/// expressed through the exact extrema of h_N.
pub fn ks_distance(measure: &EquilibriumMeasure, values: &[f64]) -> f64 {
    let (min, max) = h_extrema(measure, values);
    max.max(-min) / (SQRT2PI * values.len() as f64)
}

/// Bulk rigidity statistic
///     max_j  pi psi(k_j) sqrt(1-k_j^2) |l_j - k_j| N / log N
/// over the classical locations k_j = F^{-1}(j/N). The weight vanishes at
/// the edges, so extreme eigenvalues do not dominate.
pub fn rigidity_stat(measure: &EquilibriumMeasure, values: &[f64]) -> f64 {
    let n = values.len();
    assert!(n >= 2);
    let logn = (n as f64).ln();
    let mut worst = 0.0f64;
    for (j, &l) in values.iter().enumerate() {
        let kappa = measure.quantile((j + 1) as f64 / n as f64);
        let weight = PI * measure.psi_at(kappa) * (1.0 - kappa * kappa).max(0.0).sqrt();
        let dev = weight * (l - kappa).abs() * n as f64 / logn;
        worst = worst.max(dev);
    }
    worst
}

/// Harmonic extension of the counting fluctuation to height eps:
///     sqrt(2) ( N int arg(x + i eps - t) dmu(t) - sum_j arg(x + i eps - l_j) )
/// with arg in (0, pi). This is the Poisson extension of h_N up to the jump
/// normalization; the equilibrium integral uses Gauss-Chebyshev quadrature
/// with a node count growing like 1/eps to resolve the near-singular kernel.
pub fn harmonic_extension(measure: &EquilibriumMeasure, values: &[f64], x: f64, eps: f64) -> f64 {
    assert!(eps > 0.0);
    let n = values.len() as f64;
    let sum: f64 = values.iter().map(|&l| eps.atan2(x - l)).sum();
    let nodes = ((8.0 / eps).ceil() as usize).max(256);
    let (t, w) = gauss_chebyshev_u(nodes);
    let mut integral = 0.0;
    for (ti, wi) in t.iter().zip(&w) {
        integral += wi * measure.psi_at(*ti) * eps.atan2(x - ti);
    }
    // arg(x + i eps - l) decreases from pi to 0 as x passes l, so the sum
    // tracks N minus the smoothed count; the centered count is the negation.
    std::f64::consts::SQRT_2 * (n * integral - sum)
}

/// Centered linear statistic sum_j f(l_j) - N int f dmu for a smooth f,
/// with the equilibrium integral by Gauss-Chebyshev quadrature.
pub fn linear_statistic(
    measure: &EquilibriumMeasure,
    values: &[f64],
    f: impl Fn(f64) -> f64,
) -> f64 {
    let n = values.len() as f64;
    let sum: f64 = values.iter().map(|&l| f(l)).sum();
    let (t, w) = gauss_chebyshev_u(512);
    let mut integral = 0.0;
    for (ti, wi) in t.iter().zip(&w) {
        integral += wi * measure.psi_at(*ti) * f(*ti);
    }
    sum - n * integral
}

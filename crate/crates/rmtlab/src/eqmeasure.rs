//! One-cut equilibrium measures for analytic confining potentials normalized
//! to support [-1,1].
//!
//! A potential is carried as an evaluator together with the Chebyshev-T
//! expansion of its derivative, V'(x) = sum_{k>=1} c_k T_k(x) on [-1,1].
//! The equilibrium density is then psi_V(x) sqrt(1-x^2) with
//! psi_V = sum_k d_{k-1} U_{k-1}, d_{k-1} = c_k / (2 pi), and the support is
//! exactly [-1,1] iff c_1 = 4.

use crate::cheby;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error)]
pub enum EqError {
    #[error("potential is not one-cut regular: psi_V <= 0 at x = {0}")]
    NotOneCut(f64),
    #[error("bad normalization: c_1 = {0}, expected 4 (support must be [-1,1])")]
    BadNormalization(f64),
    #[error("argument outside (-1,1): {0}")]
    DomainError(f64),
    #[error("variance cross-check failed: series {series}, hilbert {hilbert}")]
    CrossCheckFailure { series: f64, hilbert: f64 },
}

/// An analytic confining potential, normalized so that the equilibrium
/// measure is supported on [-1,1].
#[derive(Clone)]
pub struct Potential {
    pub name: String,
    /// Monomial coefficients of V itself (index = power). V is defined on all
    /// of R through this polynomial; it is the primary definition of the
    /// potential, exact in the stored f64 coefficients.
    pub monomial: Vec<f64>,
    /// Chebyshev-T coefficients c_1..c_K of V' on [-1,1].
    pub deriv_cheb: Vec<f64>,
    evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("deriv_cheb", &self.deriv_cheb)
            .finish()
    }
}

impl Potential {
    /// GUE potential V(x) = 2 x^2; V' = 4x = 4 T_1.
    pub fn gue() -> Self {
        let monomial = vec![0.0, 0.0, 2.0];
        Self {
            name: "gue".into(),
            monomial: monomial.clone(),
            deriv_cheb: vec![4.0],
            evaluator: Arc::new(move |x| 2.0 * x * x),
        }
    }

    /// Convex non-quadratic example: a(x^4 + x^2) with a fixed numerically so
    /// that c_1 = 4. With V' = a(4x^3 + 2x) = a(3 T_1 + T_3 + 2 T_1) this
    /// gives c_1 = 5a, hence a = 4/5.
    pub fn quartic() -> Self {
        // Solve c_1(a) = 4 for the one free scale; linear, but done by a
        // bracketed solve to keep the construction generic.
        let c1_of = |a: f64| a * (4.0 * 0.75 + 2.0); // x^3 = (3 T_1 + T_3)/4
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if c1_of(mid) < 4.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = 0.5 * (lo + hi);
        let monomial = vec![0.0, 0.0, a, 0.0, a];
        Self {
            name: "quartic".into(),
            monomial,
            deriv_cheb: vec![a * 5.0, 0.0, a],
            evaluator: Arc::new(move |x: f64| a * (x.powi(4) + x * x)),
        }
    }

    /// Custom potential from the Chebyshev-T coefficients c_1..c_K of V'.
    /// V is recovered as the polynomial with V(0) = 0.
    pub fn from_deriv_cheb(name: &str, deriv_cheb: Vec<f64>) -> Self {
        // integrate the T-series of V' term by term in monomial form
        let mut vprime_mono = vec![0.0; deriv_cheb.len() + 1];
        for (k, &c) in deriv_cheb.iter().enumerate() {
            let t = cheb_t_monomial(k + 1);
            for (p, &tc) in t.iter().enumerate() {
                vprime_mono[p] += c * tc;
            }
        }
        let mut monomial = vec![0.0; vprime_mono.len() + 1];
        for (p, &c) in vprime_mono.iter().enumerate() {
            monomial[p + 1] = c / (p + 1) as f64;
        }
        let mono = monomial.clone();
        Self {
            name: name.into(),
            monomial,
            deriv_cheb,
            evaluator: Arc::new(move |x| horner(&mono, x)),
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "gue" => Some(Self::gue()),
            "quartic" => Some(Self::quartic()),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    /// V'(x), valid on all of R via the monomial form.
    pub fn deriv(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (p, &c) in self.monomial.iter().enumerate().skip(1) {
            acc += c * p as f64 * x.powi(p as i32 - 1);
        }
        acc
    }

    /// max |V'(x) - sum c_k T_k(x)| over a grid of [-1,1].
    pub fn reconstruction_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=2000 {
            let x = -1.0 + 2.0 * i as f64 / 2000.0;
            let series: f64 = self
                .deriv_cheb
                .iter()
                .enumerate()
                .map(|(k, &c)| c * cheby::cheb_t(k + 1, x))
                .sum();
            worst = worst.max((self.deriv(x) - series).abs());
        }
        worst
    }
}

pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Monomial coefficients of T_k.
pub fn cheb_t_monomial(k: usize) -> Vec<f64> {
    if k == 0 {
        return vec![1.0];
    }
    if k == 1 {
        return vec![0.0, 1.0];
    }
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    for _ in 1..k {
        let mut next = vec![0.0; cur.len() + 1];
        for (p, &c) in cur.iter().enumerate() {
            next[p + 1] += 2.0 * c;
        }
        for (p, &c) in prev.iter().enumerate() {
            next[p] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Equilibrium measure d mu_V = psi_V(x) sqrt(1-x^2) dx on [-1,1].
#[derive(Debug, Clone)]
pub struct EquilibriumMeasure {
    /// U-coefficients d_0..d_{K-1} of psi_V.
    pub density_cheb: Vec<f64>,
    pub lagrange_ell: f64,
    pub edge_c_minus: f64,
    pub edge_c_plus: f64,
    pub potential_name: String,
}

impl EquilibriumMeasure {
    /// psi_V(x) (density without the sqrt(1-x^2) factor).
    pub fn psi_at(&self, x: f64) -> f64 {
        cheby::clenshaw_u(&self.density_cheb, x)
    }

    /// Full density psi_V(x) sqrt(1-x^2), zero outside [-1,1].
    pub fn density_at(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            0.0
        } else {
            self.psi_at(x) * (1.0 - x * x).sqrt()
        }
    }

    /// CDF F(x) = int_{-1}^x d mu_V, clamped to [0,1] outside the support.
    /// Exact term-wise antiderivatives of U_k(x) sqrt(1-x^2).
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let theta = x.acos();
        let mut acc = 0.0;
        for (k, &d) in self.density_cheb.iter().enumerate() {
            acc += d * u_sqrt_antiderivative(k, theta);
        }
        acc.clamp(0.0, 1.0)
    }

    /// Inverse CDF by bracketed bisection/Newton; p in [0,1].
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return -1.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (-1.0, 1.0);
        let mut x = 0.0;
        for _ in 0..200 {
            let fx = self.cdf(x);
            if fx < p {
                lo = x;
            } else {
                hi = x;
            }
            let dens = self.density_at(x);
            let step_ok = dens > 1e-14;
            let newton = if step_ok { x - (fx - p) / dens } else { f64::NAN };
            x = if step_ok && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 {
                break;
            }
        }
        x
    }
}

/// int_{acos^{-1}...}: closed form of int_theta^pi sin((k+1)t) sin t dt.
fn u_sqrt_antiderivative(k: usize, theta: f64) -> f64 {
    if k == 0 {
        0.5 * ((PI - theta) + (2.0 * theta).sin() / 2.0)
    } else {
        let kf = k as f64;
        0.5 * (-(kf * theta).sin() / kf + ((kf + 2.0) * theta).sin() / (kf + 2.0))
    }
}

/// Quantiles kappa_1..kappa_N of the equilibrium measure, F(kappa_j) = j/N.
#[derive(Debug, Clone)]
pub struct QuantileTable {
    pub n: usize,
    pub kappa: Vec<f64>,
}

/// Solve for the equilibrium measure of a normalized one-cut potential.
pub fn solve_equilibrium(potential: &Potential) -> Result<EquilibriumMeasure, EqError> {
    let c1 = *potential.deriv_cheb.first().unwrap_or(&0.0);
    if (c1 - 4.0).abs() > 1e-6 {
        return Err(EqError::BadNormalization(c1));
    }
    let density_cheb: Vec<f64> = potential.deriv_cheb.iter().map(|c| c / (2.0 * PI)).collect();
    let mut measure = EquilibriumMeasure {
        density_cheb,
        lagrange_ell: 0.0,
        edge_c_minus: 0.0,
        edge_c_plus: 0.0,
        potential_name: potential.name.clone(),
    };
    // one-cut regularity check on a grid
    for i in 0..=1000 {
        let x = -1.0 + 2.0 * i as f64 / 1000.0;
        if measure.psi_at(x) <= 0.0 {
            return Err(EqError::NotOneCut(x));
        }
    }
    measure.edge_c_minus = (3.0 / (2.0 * SQRT2 * measure.psi_at(-1.0))).powf(2.0 / 3.0);
    measure.edge_c_plus = (3.0 / (2.0 * SQRT2 * measure.psi_at(1.0))).powf(2.0 / 3.0);
    // Euler-Lagrange constant at x = 0: -ell = 2 int log|y| d mu_V(y) - V(0).
    // The log-moments of U_k sqrt(1-x^2) have closed forms; see log_moment_u.
    let mut logint = 0.0;
    for (k, &d) in measure.density_cheb.iter().enumerate() {
        logint += d * log_moment_u(k);
    }
    measure.lagrange_ell = potential.evaluate(0.0) - 2.0 * logint;
    Ok(measure)
}

/// int_{-1}^1 log|y| U_k(y) sqrt(1-y^2) dy. Odd k vanish by symmetry; even
/// k = 2m follow from log|cos t| = -log 2 + sum_j (-1)^{j+1} cos(2jt)/j.
fn log_moment_u(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let m = k / 2;
    let lower = if m == 0 {
        -PI * (2.0f64).ln()
    } else {
        sign_alt(m + 1) * PI / (2.0 * m as f64)
    };
    let upper = sign_alt(m + 2) * PI / (2.0 * (m + 1) as f64);
    0.5 * (lower - upper)
}

fn sign_alt(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Spot check of the Euler-Lagrange inequality (strict outside the support):
/// 2 int log|x-y| d mu_V(y) - V(x) < -ell at x.
pub fn el_inequality_slack(measure: &EquilibriumMeasure, potential: &Potential, x: f64) -> f64 {
    let (nodes, weights) = cheby::gauss_chebyshev_u(512);
    let mut logint = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        logint += w * measure.psi_at(*t) * (x - t).abs().ln();
    }
    -measure.lagrange_ell - (2.0 * logint - potential.evaluate(x))
}

pub fn quantiles(measure: &EquilibriumMeasure, n: usize) -> QuantileTable {
    assert!(n >= 1);
    let kappa = (1..=n)
        .map(|j| {
            if j == n {
                1.0
            } else {
                measure.quantile(j as f64 / n as f64)
            }
        })
        .collect();
    QuantileTable { n, kappa }
}

/// Finite Hilbert transform (U f)(x) = (1/pi) PV int_{-1}^1 f(t)/((x-t) sqrt(1-t^2)) dt.
///
/// In the angle variable the principal value reduces to a regular integral via
/// PV int_0^pi dt/(cos p - cos t) = 0; the midpoint grid is shifted so nodes
/// pair symmetrically about the singular angle, and the node count doubles
/// from `n0` until two successive levels agree to 1e-9.
pub fn finite_hilbert<F: Fn(f64) -> f64>(f: F, x: f64) -> Result<f64, EqError> {
    if x.abs() >= 1.0 {
        return Err(EqError::DomainError(x));
    }
    let phi = x.acos();
    let fx = f(x);
    // The angle-variable integrand extends to an even 2pi-periodic function,
    // so the midpoint rule on a full period with nodes phi + (i+1/2)h is both
    // symmetric about the singular angle and spectrally accurate.
    let eval = |n: usize| -> f64 {
        let h = PI / n as f64;
        let mut s = 0.0;
        for i in 0..2 * n {
            let theta = phi + (i as f64 + 0.5) * h;
            let c = theta.cos();
            let denom = x - c;
            if denom.abs() < 1e-13 {
                continue;
            }
            s += (f(c) - fx) / denom;
        }
        s / (2.0 * n as f64)
    };
    let mut n = 512;
    let mut prev = eval(n);
    for _ in 0..6 {
        n *= 2;
        let cur = eval(n);
        if (cur - prev).abs() < 1e-9 {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

/// Result of the dual-route variance computation.
#[derive(Debug, Clone, Copy)]
pub struct SigmaVariance {
    /// Series value 1/4 sum_k k fhat_k^2 (the returned value).
    pub value: f64,
    /// Hilbert-transform route -(1/2pi) int f' (U f) sqrt(1-t^2) dt.
    pub hilbert: f64,
    pub discrepancy: f64,
}

const SIGMA_NODES: usize = 512;
const SIGMA_KMAX: usize = 200;

/// sigma^2(f) by both the Fourier-Chebyshev series formula and the
/// Hilbert-transform formula; returns the series value and the discrepancy.
pub fn sigma_variance<F: Fn(f64) -> f64 + Copy>(f: F) -> Result<SigmaVariance, EqError> {
    let coeffs = cheby::cheb_t_coefficients(f, SIGMA_NODES, SIGMA_KMAX);
    let series: f64 = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c * c)
        .sum::<f64>()
        / 4.0;
    // second route: f' from the differentiated Chebyshev series, U f by PV quadrature
    let dcoeffs = cheby::cheb_t_derivative(&coeffs);
    let (nodes, weights) = cheby::gauss_chebyshev_u(128);
    let mut hilbert = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        let fp = cheby::eval_t_series(&dcoeffs, *t);
        let uf = finite_hilbert(f, *t)?;
        hilbert += w * fp * uf;
    }
    hilbert *= -1.0 / (2.0 * PI);
    let discrepancy = (series - hilbert).abs();
    Ok(SigmaVariance {
        value: series,
        hilbert,
        discrepancy,
    })
}

/// Same as `sigma_variance` but failing hard when the two routes disagree;
/// intended for polynomial inputs where both routes are essentially exact.
pub fn sigma_variance_checked<F: Fn(f64) -> f64 + Copy>(f: F) -> Result<f64, EqError> {
    let sv = sigma_variance(f)?;
    if sv.discrepancy > 1e-8 {
        return Err(EqError::CrossCheckFailure {
            series: sv.value,
            hilbert: sv.hilbert,
        });
    }
    Ok(sv.value)
}

/// Covariance sigma^2(f; g) = 1/4 sum_k k fhat_k ghat_k.
pub fn sigma_bilinear<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: F, g: G) -> f64 {
    let fc = cheby::cheb_t_coefficients(f, SIGMA_NODES, SIGMA_KMAX);
    let gc = cheby::cheb_t_coefficients(g, SIGMA_NODES, SIGMA_KMAX);
    fc.iter()
        .zip(&gc)
        .enumerate()
        .skip(1)
        .map(|(k, (&a, &b))| k as f64 * a * b)
        .sum::<f64>()
        / 4.0
}

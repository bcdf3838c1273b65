//! Exact finite-N Hankel determinants for jump-deformed weights
//!     h(l) = exp( sqrt2 pi g1 1_{l<=x1} + sqrt2 pi g2 1_{l<=x2} + w(l) - N V(l) )
//! by extended-precision quadrature (MPFR via `rug`), with the orthogonal
//! polynomial basis, exponential-moment identities for the counting field,
//! a Christoffel-Darboux differential identity check, and the asymptotic
//! predictions they are compared against.
//!
//! The moment matrix is catastrophically ill-conditioned in machine
//! precision beyond N ~ 8, hence the configurable decimal-digit budget
//! (default 50, doubled once automatically before giving up).

use crate::eqmeasure::{EquilibriumMeasure, Potential};
use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::Float;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HankelError {
    #[error("precision exhausted: lost more than half of {digits} digits (condition ~ 1e{lost_digits:.0})")]
    PrecisionExhausted { digits: usize, lost_digits: f64 },
    #[error("evaluation point within {0} N^(-2/3) of the spectral edge")]
    EdgeTooClose(f64),
}

/// Jump-deformed weight specification. `w` is a polynomial in monomial
/// coefficients (tests use polynomials; any entire function could be added).
#[derive(Clone)]
pub struct HankelSpec {
    pub n: usize,
    pub x1: f64,
    pub x2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub w: Option<Vec<f64>>,
    pub potential: Potential,
}

impl HankelSpec {
    pub fn plain(potential: &Potential, n: usize) -> Self {
        Self {
            n,
            x1: -0.5,
            x2: 0.5,
            gamma1: 0.0,
            gamma2: 0.0,
            w: None,
            potential: potential.clone(),
        }
    }
}

pub const DEFAULT_DIGITS: usize = 50;

fn bits(digits: usize) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 32
}

fn horner_ext(coeffs: &[f64], x: &Float, prec: u32) -> Float {
    let mut acc = Float::with_val(prec, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * x + Float::with_val(prec, c);
    }
    acc
}

/// Gauss-Legendre nodes and weights on [-1,1] at extended precision:
/// float64 seeds refined by Newton iteration on the Legendre recurrence.
fn gauss_legendre_ext(n: usize, prec: u32) -> (Vec<Float>, Vec<Float>) {
    let (seed_x, _) = crate::cheby::gauss_legendre(n);
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for &s in &seed_x {
        let mut x = Float::with_val(prec, s);
        let mut dp = Float::with_val(prec, 0.0);
        for _ in 0..8 {
            // p_n(x) and p_n'(x) by the three-term recurrence
            let mut p0 = Float::with_val(prec, 1.0);
            let mut p1 = x.clone();
            for k in 2..=n {
                let kf = k as f64;
                let p2 = (Float::with_val(prec, 2.0 * kf - 1.0) * &x * &p1
                    - Float::with_val(prec, kf - 1.0) * &p0)
                    / kf;
                p0 = p1;
                p1 = p2;
            }
            // derivative: (x^2-1) p_n' = n (x p_n - p_{n-1})
            let x2m1 = (x.clone() * &x) - 1f64;
            dp = Float::with_val(prec, n as f64) * ((x.clone() * &p1) - &p0) / x2m1;
            let step = p1 / &dp;
            x -= step;
        }
        // weight 2 / ((1-x^2) p_n'(x)^2)
        let one_m = 1f64 - (x.clone() * &x);
        let w = Float::with_val(prec, 2.0) / (one_m * (dp.clone() * &dp));
        xs.push(x);
        ws.push(w);
    }
    (xs, ws)
}

/// Integration cutoff: beyond A the integrand of every moment up to order
/// 2N-2 is below 10^-(digits+5) of its scale.
fn tail_cutoff(spec: &HankelSpec, digits: usize) -> f64 {
    let n = spec.n as f64;
    let jump_bonus = (spec.gamma1.abs() + spec.gamma2.abs()) * std::f64::consts::SQRT_2
        * std::f64::consts::PI;
    let budget = (digits as f64 + 30.0) * std::f64::consts::LN_10 + jump_bonus;
    let wmax = |a: f64| -> f64 {
        spec.w
            .as_ref()
            .map_or(0.0, |c| c.iter().enumerate().map(|(k, v)| v.abs() * a.powi(k as i32)).sum())
    };
    let mut a = 2.0f64;
    while n * spec.potential.evaluate(a).min(spec.potential.evaluate(-a))
        - (2.0 * n + 1.0) * a.ln()
        - wmax(a)
        < budget
    {
        a *= 1.25;
        assert!(a < 1e6, "weight decays too slowly for the digit budget");
    }
    a
}

/// Moments m_k = int l^k h(l) dl for k = 0..=2N-2, each panel between
/// breakpoints integrated by 80-point Gauss-Legendre after chunking so the
/// exponent varies by at most ~20 per chunk. `max_chunk` controls the
/// paneling (used by the invariance test).
pub fn moments(spec: &HankelSpec, digits: usize, max_chunk: f64) -> Vec<Float> {
    let prec = bits(digits);
    let a = tail_cutoff(spec, digits);
    let mut cuts = vec![-a, -1.0, 1.0, a];
    if spec.gamma1 != 0.0 {
        cuts.push(spec.x1);
    }
    if spec.gamma2 != 0.0 {
        cuts.push(spec.x2);
    }
    cuts.retain(|c| c.abs() <= a);
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();

    let sqrt2pi = {
        let pi = Float::with_val(prec, Constant::Pi);
        pi * Float::with_val(prec, 2.0f64).sqrt()
    };
    let nmom = 2 * spec.n - 1;
    let (gx, gw) = gauss_legendre_ext(80, prec);
    let mut out = vec![Float::with_val(prec, 0.0); nmom];
    let nf = spec.n as f64;
    for win in cuts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi <= lo {
            continue;
        }
        // chunk so that N * |delta V| stays small and length <= max_chunk
        let mut chunk_ends = vec![lo];
        let mut t = lo;
        while t < hi {
            let mut step = max_chunk.min(hi - t);
            loop {
                let dv = nf * (spec.potential.evaluate(t + step) - spec.potential.evaluate(t)).abs();
                if dv <= 20.0 || step < 1e-6 {
                    break;
                }
                step *= 0.5;
            }
            t += step;
            chunk_ends.push(t.min(hi));
        }
        // jump factor is constant on the whole panel
        let mid = 0.5 * (lo + hi);
        let mut jump = Float::with_val(prec, 0.0);
        if spec.gamma1 != 0.0 && mid <= spec.x1 {
            jump += Float::with_val(prec, spec.gamma1) * &sqrt2pi;
        }
        if spec.gamma2 != 0.0 && mid <= spec.x2 {
            jump += Float::with_val(prec, spec.gamma2) * &sqrt2pi;
        }
        for ch in chunk_ends.windows(2) {
            let half = (Float::with_val(prec, ch[1]) - Float::with_val(prec, ch[0])) / 2f64;
            let center = (Float::with_val(prec, ch[1]) + Float::with_val(prec, ch[0])) / 2f64;
            for (xi, wi) in gx.iter().zip(&gw) {
                let l = (xi.clone() * &half) + &center;
                let mut expo = jump.clone();
                expo -= Float::with_val(prec, nf) * horner_ext(&spec.potential.monomial, &l, prec);
                if let Some(wc) = &spec.w {
                    expo += horner_ext(wc, &l, prec);
                }
                let mut term = expo.exp() * wi.clone() * &half;
                for m in out.iter_mut().take(nmom) {
                    *m += &term;
                    term *= &l;
                }
            }
        }
    }
    out
}

/// Cholesky factor of the moment matrix M_{ij} = m_{i+j}, i,j < N.
/// Returns L (lower, row-major) or the estimated digits lost if a pivot
/// collapses below half the working digits.
fn cholesky(moms: &[Float], n: usize, digits: usize) -> Result<Vec<Vec<Float>>, HankelError> {
    let prec = bits(digits);
    let mut l: Vec<Vec<Float>> = vec![vec![Float::with_val(prec, 0.0); n]; n];
    let scale = moms[0].clone();
    for i in 0..n {
        for j in 0..=i {
            let mut s = moms[i + j].clone();
            for k in 0..j {
                s -= l[i][k].clone() * &l[j][k];
            }
            if i == j {
                let lost = if s > 0 {
                    let ratio = scale.clone() / &s;
                    ratio.to_f64().log10() / 2.0
                } else {
                    f64::INFINITY
                };
                if lost > digits as f64 / 2.0 {
                    return Err(HankelError::PrecisionExhausted {
                        digits,
                        lost_digits: lost,
                    });
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / &l[j][j];
            }
        }
    }
    Ok(l)
}

/// log det of the Hankel moment matrix by pivoted Gaussian elimination.
fn log_det_lu(moms: &[Float], n: usize, digits: usize) -> Result<Float, HankelError> {
    let prec = bits(digits);
    let mut m: Vec<Vec<Float>> = (0..n)
        .map(|i| (0..n).map(|j| moms[i + j].clone()).collect())
        .collect();
    let scale = m[0][0].clone();
    let mut logdet = Float::with_val(prec, 0.0);
    let mut sign = 1.0f64;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].clone().abs().partial_cmp(&m[b][col].clone().abs()).unwrap())
            .unwrap();
        if piv != col {
            m.swap(piv, col);
            sign = -sign;
        }
        let p = m[col][col].clone();
        let lost = (scale.clone() / p.clone().abs()).to_f64().log10();
        if !(p != 0) || lost > digits as f64 {
            return Err(HankelError::PrecisionExhausted {
                digits,
                lost_digits: lost,
            });
        }
        if p < 0 {
            sign = -sign;
        }
        logdet += p.clone().abs().ln();
        for row in col + 1..n {
            let f = m[row][col].clone() / &p;
            for j in col..n {
                let t = f.clone() * &m[col][j];
                m[row][j] -= t;
            }
        }
    }
    assert!(sign > 0.0, "Hankel determinant of a positive weight must be positive");
    Ok(logdet)
}

/// log D_N at the requested digit budget, doubling it once if the
/// elimination runs out of digits.
pub fn log_hankel(spec: &HankelSpec, digits: usize) -> Result<Float, HankelError> {
    match moments(spec, digits, 0.25).as_slice() {
        moms => match log_det_lu(moms, spec.n, digits) {
            Ok(v) => Ok(v),
            Err(HankelError::PrecisionExhausted { .. }) => {
                let d2 = digits * 2;
                let moms = moments(spec, d2, 0.25);
                log_det_lu(&moms, spec.n, d2)
            }
            Err(e) => Err(e),
        },
    }
}

/// Orthonormal polynomials p_0..p_{N-1} for the weight, as monomial
/// coefficient rows, plus leading coefficients kappa_j = 1/L_jj.
pub struct OrthoBasis {
    pub coeffs: Vec<Vec<Float>>,
    pub kappa: Vec<Float>,
    pub digits: usize,
}

impl OrthoBasis {
    pub fn build(spec: &HankelSpec, digits: usize) -> Result<Self, HankelError> {
        let prec = bits(digits);
        let moms = moments(spec, digits, 0.25);
        let l = cholesky(&moms, spec.n, digits)?;
        let n = spec.n;
        // rows of L^{-1}: forward substitution against unit vectors
        let mut coeffs = vec![vec![Float::with_val(prec, 0.0); n]; n];
        for j in 0..n {
            for i in j..n {
                let mut s = if i == j {
                    Float::with_val(prec, 1.0)
                } else {
                    Float::with_val(prec, 0.0)
                };
                for k in j..i {
                    s -= l[i][k].clone() * &coeffs[k][j];
                }
                coeffs[i][j] = s / &l[i][i];
            }
        }
        let kappa = (0..n).map(|j| (1f64 / &l[j][j]).complete(prec)).collect();
        Ok(Self {
            coeffs,
            kappa,
            digits,
        })
    }

    pub fn eval(&self, j: usize, x: &Float) -> Float {
        let prec = bits(self.digits);
        let mut acc = Float::with_val(prec, 0.0);
        for c in self.coeffs[j].iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// log D_N = -2 sum_j log kappa_j (equivalently 2 sum log L_jj).
    pub fn log_hankel_from_kappa(&self) -> Float {
        let prec = bits(self.digits);
        let mut s = Float::with_val(prec, 0.0);
        for k in &self.kappa {
            s -= 2.0 * k.clone().ln();
        }
        s
    }
}

/// Equilibrium CDF at extended precision. The GUE has the closed form
/// (pi - theta + sin theta cos theta)/pi with theta = arccos x; other
/// potentials use the Chebyshev-series antiderivative with float64
/// coefficients (adequate: the series coefficients are exact rationals of
/// the quartic solve to ~1e-16, far below any use of these values).
pub fn cdf_ext(measure: &EquilibriumMeasure, x: f64, digits: usize) -> Float {
    let prec = bits(digits);
    if x <= -1.0 {
        return Float::with_val(prec, 0.0);
    }
    if x >= 1.0 {
        return Float::with_val(prec, 1.0);
    }
    let pi = Float::with_val(prec, Constant::Pi);
    let theta = Float::with_val(prec, x).acos();
    if measure.potential_name == "gue" {
        let s = theta.clone().sin() * theta.clone().cos();
        return (pi.clone() - &theta + s) / pi;
    }
    let mut f = Float::with_val(prec, 0.0);
    for (k, &d) in measure.density_cheb.iter().enumerate() {
        let jk = if k == 0 {
            let two_theta = (theta.clone() * 2f64).sin();
            ((pi.clone() - &theta) + two_theta / 2f64) / 2f64
        } else {
            let kf = k as f64;
            let a = (theta.clone() * kf).sin() / kf;
            let b = (theta.clone() * (kf + 2.0)).sin() / (kf + 2.0);
            (b - a) / 2f64
        };
        f += Float::with_val(prec, d) * jk;
    }
    f
}

/// Exact E exp(gamma h_N(x)) through the determinant ratio
/// D_N(jump gamma at x) / D_N(no jump) * exp(-N sqrt2 pi gamma F(x)).
pub fn exp_moment_exact(
    measure: &EquilibriumMeasure,
    potential: &Potential,
    x: f64,
    gamma: f64,
    n: usize,
    digits: usize,
) -> Result<f64, HankelError> {
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let prec = bits(digits);
    let mut spec = HankelSpec::plain(potential, n);
    spec.x1 = x;
    spec.gamma1 = gamma;
    let with_jump = log_hankel(&spec, digits)?;
    spec.gamma1 = 0.0;
    let without = log_hankel(&spec, digits)?;
    let pi = Float::with_val(prec, Constant::Pi);
    let sqrt2pi = pi * Float::with_val(prec, 2.0f64).sqrt();
    let drift = Float::with_val(prec, n as f64 * gamma) * sqrt2pi * cdf_ext(measure, x, digits);
    Ok((with_jump - without - drift).exp().to_f64())
}

/// Differential identity in the second jump position:
/// d/dx2 log D_N = -e^{w(x2) - N V(x2)} (1 - e^{sqrt2 pi g2}) sum_{j<N} p_j(x2)^2.
/// lhs by centered finite difference, rhs from the orthonormal basis.
pub struct DiffIdRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

pub fn diffid_y_check(spec: &HankelSpec, dy: f64, digits: usize) -> Result<DiffIdRecord, HankelError> {
    assert!(spec.x1 < spec.x2);
    let prec = bits(digits);
    let mut up = spec.clone();
    up.x2 += dy;
    let mut dn = spec.clone();
    dn.x2 -= dy;
    let lhs = ((log_hankel(&up, digits)? - log_hankel(&dn, digits)?) / (2.0 * dy)).to_f64();

    let basis = OrthoBasis::build(spec, digits)?;
    let x2 = Float::with_val(prec, spec.x2);
    let mut cd = Float::with_val(prec, 0.0);
    for j in 0..spec.n {
        let p = basis.eval(j, &x2);
        cd += p.clone() * &p;
    }
    let mut expo = -Float::with_val(prec, spec.n as f64)
        * horner_ext(&spec.potential.monomial, &x2, prec);
    if let Some(wc) = &spec.w {
        expo += horner_ext(wc, &x2, prec);
    }
    let pi = Float::with_val(prec, Constant::Pi);
    let sqrt2pi = pi * Float::with_val(prec, 2.0f64).sqrt();
    let efac = (Float::with_val(prec, spec.gamma2) * sqrt2pi).exp();
    let rhs = (-(expo.exp()) * (Float::with_val(prec, 1.0) - efac) * cd).to_f64();
    Ok(DiffIdRecord {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

/// Leading asymptotics of log D_N(x;gamma;0)/D_N(x;0;0) for a single jump
/// in the bulk: sqrt2 pi gamma N F(x) + (gamma^2/2) log N + (3 gamma^2/4) log(1-x^2).
pub fn predict_thm3(
    measure: &EquilibriumMeasure,
    x: f64,
    gamma: f64,
    n: usize,
    edge_margin: f64,
) -> Result<f64, HankelError> {
    if 1.0 - x.abs() < edge_margin * (n as f64).powf(-2.0 / 3.0) {
        return Err(HankelError::EdgeTooClose(edge_margin));
    }
    let g2 = gamma * gamma;
    Ok(std::f64::consts::SQRT_2 * std::f64::consts::PI * gamma * n as f64 * measure.cdf(x)
        + 0.5 * g2 * (n as f64).ln()
        + 0.75 * g2 * (1.0 - x * x).ln())
}

/// Merging-jumps asymptotics: log D_N(x1,x2;g1,g2) - log D_N(x1;g1+g2)
/// = sqrt2 pi g2 N mu([x1,x2]) - g1 g2 max(0, log((x2-x1) N)) + O(1).
pub fn predict_thm2(
    measure: &EquilibriumMeasure,
    x1: f64,
    x2: f64,
    gamma1: f64,
    gamma2: f64,
    n: usize,
) -> f64 {
    std::f64::consts::SQRT_2 * std::f64::consts::PI * gamma2 * n as f64
        * (measure.cdf(x2) - measure.cdf(x1))
        - gamma1 * gamma2 * ((x2 - x1) * n as f64).ln().max(0.0)
}

/// Smooth-deformation asymptotics (w polynomial, monomial coefficients):
/// log D_N(...;w)/D_N(...;0) = N int w dmu + sigma^2(w)/2
///   + sum_j (gamma_j / sqrt2) sqrt(1-x_j^2) (Uw)(x_j) + o(1).
pub fn predict_thm1(
    measure: &EquilibriumMeasure,
    x1: f64,
    x2: f64,
    gamma1: f64,
    gamma2: f64,
    w_mono: &[f64],
    n: usize,
) -> f64 {
    let w = |x: f64| crate::eqmeasure::horner(w_mono, x);
    let (t, wt) = crate::cheby::gauss_chebyshev_u(512);
    let mut int_w = 0.0;
    for (ti, wi) in t.iter().zip(&wt) {
        int_w += wi * measure.psi_at(*ti) * w(*ti);
    }
    let var = crate::eqmeasure::sigma_variance(&w)
        .expect("variance series for a polynomial deformation")
        .value;
    let mut jumps = 0.0;
    for &(g, x) in &[(gamma1, x1), (gamma2, x2)] {
        if g != 0.0 {
            jumps += g / std::f64::consts::SQRT_2
                * (1.0 - x * x).sqrt()
                * crate::eqmeasure::finite_hilbert(&w, x)
                    .expect("jump position inside (-1,1)");
        }
    }
    n as f64 * int_w + 0.5 * var + jumps
}

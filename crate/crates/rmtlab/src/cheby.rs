//! Chebyshev polynomial helpers shared across the crate.
//!
//! Conventions: `T_k(cos t) = cos(k t)`, `U_k(cos t) = sin((k+1)t)/sin t`.

/// T_k(x) by the three-term recurrence. Valid for all real x.
pub fn cheb_t(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// U_k(x) by the three-term recurrence. Valid for all real x.
pub fn cheb_u(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Clenshaw evaluation of sum_k c[k] T_k(x).
pub fn clenshaw_t(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    b1 - x * b2
}

/// Clenshaw evaluation of sum_k c[k] U_k(x).
pub fn clenshaw_u(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Fourier-Chebyshev coefficients f_hat[k] = (2/pi) int f(x) T_k(x)/sqrt(1-x^2) dx
/// via the n-point Gauss-Chebyshev rule; f_hat[0] carries the same 2/pi factor,
/// so f = f_hat[0]/2 + sum_{k>=1} f_hat[k] T_k.
pub fn cheb_t_coefficients<F: Fn(f64) -> f64>(f: F, n: usize, kmax: usize) -> Vec<f64> {
    let mut vals = Vec::with_capacity(n);
    let mut thetas = Vec::with_capacity(n);
    for i in 0..n {
        let theta = (i as f64 + 0.5) * std::f64::consts::PI / n as f64;
        thetas.push(theta);
        vals.push(f(theta.cos()));
    }
    let mut coeffs = vec![0.0; kmax + 1];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..n {
            s += vals[i] * (k as f64 * thetas[i]).cos();
        }
        *c = 2.0 * s / n as f64;
    }
    coeffs
}

/// Coefficients of the derivative of a T-series (same convention as
/// `cheb_t_coefficients`: index 0 halved on evaluation).
pub fn cheb_t_derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n];
    d[n - 1] = 0.0;
    if n >= 2 {
        d[n - 2] = 2.0 * (n - 1) as f64 * coeffs[n - 1];
    }
    for k in (0..n.saturating_sub(2)).rev() {
        d[k] = d[k + 2] + 2.0 * (k + 1) as f64 * coeffs[k + 1];
    }
    d
}

/// Evaluate a T-series in the halved-c0 convention.
pub fn eval_t_series(coeffs: &[f64], x: f64) -> f64 {
    clenshaw_t(coeffs, x) - coeffs[0] / 2.0
}

/// Nodes and weights of the n-point Gauss-Chebyshev rule of the second kind:
/// int_{-1}^1 g(x) sqrt(1-x^2) dx ~ sum w_i g(x_i).
pub fn gauss_chebyshev_u(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 1..=n {
        let theta = i as f64 * std::f64::consts::PI / (n + 1) as f64;
        nodes.push(theta.cos());
        weights.push(std::f64::consts::PI / (n + 1) as f64 * theta.sin() * theta.sin());
    }
    (nodes, weights)
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1], by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi initial guess for the i-th root counted from +1
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
                break;
            }
        }
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        nodes[m - 1] = 0.0;
    }
    // nodes come out descending on the first half; return ascending
    let nodes: Vec<f64> = nodes.into_iter().rev().collect();
    let weights: Vec<f64> = weights.into_iter().rev().collect();
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clenshaw_matches_recurrence() {
        let coeffs = [0.3, -1.2, 0.7, 0.05, -0.4];
        for &x in &[-0.95, -0.3, 0.0, 0.42, 0.99] {
            let direct: f64 = coeffs.iter().enumerate().map(|(k, c)| c * cheb_t(k, x)).sum();
            assert!((clenshaw_t(&coeffs, x) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let integral: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(8)).sum();
        assert!((integral - 2.0 / 9.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_chebyshev_u_mass() {
        let (_, w) = gauss_chebyshev_u(64);
        let total: f64 = w.iter().sum();
        assert!((total - std::f64::consts::PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn t_coefficients_recover_polynomial() {
        // f = 3 T_0 + 2 T_1 - T_3
        let f = |x: f64| 3.0 + 2.0 * x - cheb_t(3, x);
        let c = cheb_t_coefficients(f, 64, 6);
        assert!((c[0] / 2.0 - 3.0).abs() < 1e-12);
        assert!((c[1] - 2.0).abs() < 1e-12);
        assert!((c[3] + 1.0).abs() < 1e-12);
        assert!(c[4].abs() < 1e-12);
    }
}

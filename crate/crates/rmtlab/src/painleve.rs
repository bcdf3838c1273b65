//! The Jimbo-Miwa-Okamoto sigma-form of Painleve V on the ray s = -i r,
//! r > 0, written in real variables. With tau(r) = sigma(-i r) and
//! q = (g1 + g2) / (2 sqrt 2) the equation becomes
//!
//!     r^2 tau''(r)^2 = 4 (q^2 - tau'^2)^2 - (tau - r tau' - 2 tau'^2)^2.
//!
//! Solving the quadratic for tau'' forces a square-root branch choice. We
//! avoid tracking it by differentiating once: every solution of the
//! quadratic relation with tau'' not identically zero satisfies the smooth
//! third-order equation
//!
//!     tau''' = [ A (r + 4 tau') - 8 B tau' - r tau'' ] / r^2,
//!     A = tau - r tau' - 2 tau'^2,   B = q^2 - tau'^2,
//!
//! and the quantity G = r^2 tau''^2 - 4 B^2 + A^2 is a first integral of
//! the third-order flow. Imposing G = 0 at the initial point therefore
//! enforces the quadratic relation along the whole trajectory, with branch
//! crossings (tau'' = 0) handled automatically.
//!
//! The distinguished solution has tau(0+) = (g1+g2)^2/4 and is asymptotic
//! to -((g1-g2)/(2 sqrt 2)) r + (g1-g2)^2/4 + O(1/r) as r -> infinity.
//! Solutions that stay smooth at r = 0 with tau(0) = 2 q^2 form a
//! one-parameter family
//!
//!     tau = 2 q^2 + a r + c r^2 + d r^3 + ...,  c = q^2 - a^2,  d = -2ac/3,
//!
//! with the initial slope a as the free parameter. Shooting over a matches
//! the large-r slope: the tail of each trial is fitted by a line and a is
//! found by bisection on (fitted slope - target). The intercept converges
//! only at the O(1/r) rate through a persistent bounded oscillation, so the
//! accepted trajectory is continued well past r_max and the reported tail
//! fit uses that extension. Matching the intercept is the acceptance test;
//! uniqueness of the admissible a is observed empirically, not proven.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PainleveError {
    #[error("shooting failed: no admissible initial slope in the scanned bracket")]
    ShootingFailed,
    #[error("branch ambiguity: tau'' vanishes on an interval (non-transversal discriminant zero)")]
    BranchAmbiguity,
}

#[derive(Debug, Clone)]
pub struct SigmaPvSolution {
    pub gamma1: f64,
    pub gamma2: f64,
    /// increasing positive grid in r = |s|
    pub r_grid: Vec<f64>,
    /// tau(r) = sigma(-i r)
    pub sigma: Vec<f64>,
    pub sigma_prime: Vec<f64>,
    pub shooting_param: f64,
    /// sign chosen for tau''(r_min)
    pub initial_curvature_sign: f64,
    /// continuation of the trajectory past r_max, used by the tail fit
    /// (the asymptote intercept converges only like 1/r)
    pub tail_r: Vec<f64>,
    pub tail_sigma: Vec<f64>,
}

impl SigmaPvSolution {
    pub fn q(&self) -> f64 {
        (self.gamma1 + self.gamma2) / (2.0 * std::f64::consts::SQRT_2)
    }

    pub fn slope_target(&self) -> f64 {
        -(self.gamma1 - self.gamma2) / (2.0 * std::f64::consts::SQRT_2)
    }

    pub fn intercept_target(&self) -> f64 {
        (self.gamma1 - self.gamma2).powi(2) / 4.0
    }

    pub fn small_r_target(&self) -> f64 {
        (self.gamma1 + self.gamma2).powi(2) / 4.0
    }

    /// Least-squares line through the tail of the trajectory: the stored
    /// continuation past r_max when available (its window averages out the
    /// bounded oscillation around the asymptote), else [r_max/2, r_max].
    pub fn fit_tail(&self) -> (f64, f64) {
        let (rs, ts): (&[f64], &[f64]) = if self.tail_r.len() >= 10 {
            (&self.tail_r, &self.tail_sigma)
        } else {
            (&self.r_grid, &self.sigma)
        };
        let r_max = *rs.last().unwrap();
        let lo = r_max / 2.0;
        let pts: Vec<(f64, f64)> = rs
            .iter()
            .zip(ts)
            .filter(|(r, _)| **r >= lo)
            .map(|(r, t)| (*r, *t))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        (slope, intercept)
    }
}

fn rhs(q2: f64, r: f64, y: [f64; 3]) -> [f64; 3] {
    let [tau, tp, tpp] = y;
    let a = tau - r * tp - 2.0 * tp * tp;
    let b = q2 - tp * tp;
    let tppp = (a * (r + 4.0 * tp) - 8.0 * b * tp - r * tpp) / (r * r);
    [tp, tpp, tppp]
}

/// Discriminant 4 B^2 - A^2 = r tau' (4(q^2 - tau'^2) - r tau') at a state.
fn discriminant(q2: f64, r: f64, y: [f64; 3]) -> f64 {
    let a = y[0] - r * y[1] - 2.0 * y[1] * y[1];
    let b = q2 - y[1] * y[1];
    4.0 * b * b - a * a
}

/// One Dormand-Prince 5(4) step; returns (y5, error_estimate_norm).
fn dp45_step(q2: f64, r: f64, y: [f64; 3], h: f64) -> ([f64; 3], f64) {
    const A2: [f64; 1] = [1.0 / 5.0];
    const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
    const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
    const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
    const A6: [f64; 5] = [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ];
    const B5: [f64; 6] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

    let add = |y: [f64; 3], ks: &[[f64; 3]], cs: &[f64]| {
        let mut out = y;
        for (k, c) in ks.iter().zip(cs) {
            for i in 0..3 {
                out[i] += h * c * k[i];
            }
        }
        out
    };
    let k1 = rhs(q2, r, y);
    let k2 = rhs(q2, r + C[0] * h, add(y, &[k1], &A2));
    let k3 = rhs(q2, r + C[1] * h, add(y, &[k1, k2], &A3));
    let k4 = rhs(q2, r + C[2] * h, add(y, &[k1, k2, k3], &A4));
    let k5 = rhs(q2, r + C[3] * h, add(y, &[k1, k2, k3, k4], &A5));
    let k6 = rhs(q2, r + C[4] * h, add(y, &[k1, k2, k3, k4, k5], &A6));
    let y5 = add(y, &[k1, k2, k3, k4, k5, k6], &B5);
    let k7 = rhs(q2, r + h, y5);
    let y4 = add(y, &[k1, k2, k3, k4, k5, k6, k7], &B4);
    let mut err: f64 = 0.0;
    for i in 0..3 {
        let scale = 1e-12 + y[i].abs().max(y5[i].abs());
        err = err.max(((y5[i] - y4[i]) / scale).abs());
    }
    (y5, err)
}

enum Outcome {
    /// reached r_stop inside the admissibility band; final state returned
    Reached([f64; 3]),
    /// left the admissibility band, or the step size collapsed
    Exit,
}

/// Adaptive integration from (r0, y0) to r_stop with relative tolerance
/// `tol`. `record` receives every accepted step endpoint. The band is
/// |tau| <= 10 (1 + |slope| r).
fn integrate(
    q2: f64,
    slope: f64,
    mut r: f64,
    mut y: [f64; 3],
    r_stop: f64,
    tol: f64,
    h_cap: f64,
    mut record: impl FnMut(f64, [f64; 3]),
) -> Outcome {
    let band = |r: f64| 10.0 * (1.0 + slope.abs() * r);
    let mut h = (r * 1e-3).min(1e-4);
    // remaining spans below roundoff scale count as arrived
    while r_stop - r > 1e-13 * (1.0 + r) {
        h = h.min(r_stop - r);
        let (ynew, err) = dp45_step(q2, r, y, h);
        if err <= tol {
            r += h;
            y = ynew;
            record(r, y);
            if y[0].abs() > band(r) {
                return Outcome::Exit;
            }
            h *= (tol / (err + 1e-300)).powf(0.2).min(5.0) * 0.9;
            h = h.min(0.05 + 0.01 * r).min(h_cap);
        } else {
            h *= (tol / err).powf(0.2).max(0.1) * 0.9;
            if h < 1e-14 * (1.0 + r) {
                // stalled stepper counts as an exit on the side of tau
                return Outcome::Exit;
            }
        }
    }
    Outcome::Reached(y)
}

/// State at r_min on the smooth small-r family with initial slope a; the
/// curvature is taken from the conserved relation so that G = 0 exactly,
/// with the sign of the series curvature 2c.
fn initial_state(q2: f64, r_min: f64, a: f64) -> Option<[f64; 3]> {
    let c = q2 - a * a;
    let d = -2.0 / 3.0 * a * c;
    let tau0 = 2.0 * q2 + a * r_min + c * r_min * r_min + d * r_min.powi(3);
    let tp0 = a + 2.0 * c * r_min + 3.0 * d * r_min * r_min;
    let y = [tau0, tp0, 0.0];
    let disc = discriminant(q2, r_min, y);
    if disc < 0.0 {
        return None;
    }
    let sign = if c >= 0.0 { 1.0 } else { -1.0 };
    Some([tau0, tp0, sign * disc.sqrt() / r_min])
}

/// Fitted tail slope over [r_max/2, r_max] for a trial initial slope a,
/// or None if the trajectory leaves the admissibility band.
fn probe_slope(q2: f64, slope: f64, r_min: f64, r_max: f64, a: f64) -> Option<f64> {
    let y0 = initial_state(q2, r_min, a)?;
    let lo = r_max / 2.0;
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    let out = integrate(q2, slope, r_min, y0, r_max, 1e-10, f64::INFINITY, |r, y| {
        if r >= lo {
            n += 1.0;
            sx += r;
            sy += y[0];
            sxx += r * r;
            sxy += r * y[0];
        }
    });
    if !matches!(out, Outcome::Reached(_)) || n < 10.0 {
        return None;
    }
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Builds the graded output grid: piecewise-uniform segments, finer near
/// r_min where tau'' has an inverse-square-root singularity.
fn output_grid(r_min: f64, r_max: f64) -> Vec<f64> {
    let breaks = [r_min, 0.01, 0.1, 1.0, r_max];
    let steps = [1e-6, 1e-5, 1e-4, 5e-4];
    let mut grid = vec![r_min];
    for seg in 0..4 {
        let (a, b) = (breaks[seg], breaks[seg + 1]);
        if b <= a {
            continue;
        }
        let n = ((b - a) / steps[seg]).round().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for i in 1..=n {
            grid.push(a + h * i as f64);
        }
    }
    grid
}

pub fn integrate_sigma_pv(
    gamma1: f64,
    gamma2: f64,
    r_min: f64,
    r_max: f64,
) -> Result<SigmaPvSolution, PainleveError> {
    assert!(0.0 < r_min && r_min < 1.0 && r_max > 1.0);
    assert!(gamma1 != gamma2, "degenerate large-r slope");
    let q = (gamma1 + gamma2) / (2.0 * std::f64::consts::SQRT_2);
    let q2 = q * q;
    let slope = -(gamma1 - gamma2) / (2.0 * std::f64::consts::SQRT_2);
    let intercept = (gamma1 - gamma2) * (gamma1 - gamma2) / 4.0;

    // Scan the initial slope for sign changes of (tail slope - target). The
    // slope-deficit window next to the blow-down separatrix can be narrow
    // (~1e-2), hence the fine step.
    let amax = 1.5 * (1.0 + q.abs());
    let nscan = (2.0 * amax / 0.002).ceil() as usize;
    let mut prev: Option<(f64, f64)> = None; // (a, tail slope deficit)
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for i in 0..=nscan {
        let a = -amax + 2.0 * amax * i as f64 / nscan as f64;
        match probe_slope(q2, slope, r_min, r_max, a) {
            None => prev = None,
            Some(sl) => {
                let f = sl - slope;
                if let Some((pa, pf)) = prev {
                    if pf * f < 0.0 {
                        brackets.push((pa, a));
                    }
                }
                prev = Some((a, f));
            }
        }
    }
    let mut roots: Vec<f64> = Vec::new();
    for (mut a, mut b) in brackets {
        let mut fa = match probe_slope(q2, slope, r_min, r_max, a) {
            Some(sl) => sl - slope,
            None => continue,
        };
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            match probe_slope(q2, slope, r_min, r_max, mid) {
                None => b = mid,
                Some(sl) => {
                    let fm = sl - slope;
                    if fa * fm <= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                        fa = fm;
                    }
                }
            }
            if (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
                break;
            }
        }
        roots.push(0.5 * (a + b));
    }

    // evaluate each root by the extended tail fit and keep the best match
    // of slope and intercept together
    let r_far = 7.5 * r_max;
    let tail_lo = 0.5 * r_far;
    let mut best: Option<(f64, f64)> = None; // (a, score)
    for &a in &roots {
        let y0 = match initial_state(q2, r_min, a) {
            Some(y) => y,
            None => continue,
        };
        let mut tail: Vec<(f64, f64)> = Vec::new();
        let out = integrate(q2, slope, r_min, y0, r_far, 1e-10, 0.25, |r, y| {
            if r >= tail_lo {
                tail.push((r, y[0]));
            }
        });
        if !matches!(out, Outcome::Reached(_)) || tail.len() < 10 {
            continue;
        }
        let n = tail.len() as f64;
        let sx: f64 = tail.iter().map(|p| p.0).sum();
        let sy: f64 = tail.iter().map(|p| p.1).sum();
        let sxx: f64 = tail.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = tail.iter().map(|p| p.0 * p.1).sum();
        let sl = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let ic = (sy - sl * sx) / n;
        let score = (sl - slope).abs() / slope.abs().max(1e-3)
            + (ic - intercept).abs() / intercept.abs().max(1e-2);
        if best.map_or(true, |(_, s)| score < s) {
            best = Some((a, score));
        }
    }
    let (a_star, _) = best.ok_or(PainleveError::ShootingFailed)?;
    let y0 = initial_state(q2, r_min, a_star).ok_or(PainleveError::ShootingFailed)?;
    let sign = y0[2].signum();

    // dense pass on the graded grid at tight tolerance
    let grid = output_grid(r_min, r_max);
    let mut sigma = vec![0.0; grid.len()];
    let mut sigma_prime = vec![0.0; grid.len()];
    sigma[0] = y0[0];
    sigma_prime[0] = y0[1];
    let mut y = y0;
    let mut r = r_min;
    for i in 1..grid.len() {
        match integrate(q2, slope, r, y, grid[i], 1e-12, f64::INFINITY, |_, _| {}) {
            Outcome::Reached(ynew) => {
                y = ynew;
                r = grid[i];
                sigma[i] = y[0];
                sigma_prime[i] = y[1];
            }
            Outcome::Exit => return Err(PainleveError::ShootingFailed),
        }
    }

    // continuation for the reported tail fit
    let mut tail_r = Vec::new();
    let mut tail_sigma = Vec::new();
    match integrate(q2, slope, r, y, r_far, 1e-10, 0.25, |rr, yy| {
        if rr >= tail_lo {
            tail_r.push(rr);
            tail_sigma.push(yy[0]);
        }
    }) {
        Outcome::Reached(_) => {}
        Outcome::Exit => return Err(PainleveError::ShootingFailed),
    }

    // non-transversal discriminant zero: tau'' pinned at zero over a run of
    // grid points while the trajectory is not the linear degenerate branch
    let mut run = 0usize;
    for i in 1..grid.len() - 1 {
        let h1 = grid[i] - grid[i - 1];
        let h2 = grid[i + 1] - grid[i];
        if (h1 - h2).abs() > 1e-12 * h1 {
            run = 0;
            continue;
        }
        let t2 = (sigma[i + 1] - 2.0 * sigma[i] + sigma[i - 1]) / (h1 * h1);
        if (grid[i] * t2).abs() < 1e-9 {
            run += 1;
            if run > 400 {
                return Err(PainleveError::BranchAmbiguity);
            }
        } else {
            run = 0;
        }
    }

    Ok(SigmaPvSolution {
        gamma1,
        gamma2,
        r_grid: grid,
        sigma,
        sigma_prime,
        shooting_param: a_star,
        initial_curvature_sign: sign,
        tail_r,
        tail_sigma,
    })
}

/// Max over interior grid points of |r^2 (tau'')^2 - 4 B^2 + A^2| with
/// tau'' from a centered difference of the stored tau' (only where the local
/// spacing is uniform) and A, B from the stored tau, tau'.
pub fn residual(solution: &SigmaPvSolution) -> f64 {
    let q2 = solution.q() * solution.q();
    let g = &solution.r_grid;
    let mut worst = 0.0f64;
    for i in 1..g.len() - 1 {
        let h1 = g[i] - g[i - 1];
        let h2 = g[i + 1] - g[i];
        if (h1 - h2).abs() > 1e-12 * h1 {
            continue;
        }
        let t2 = (solution.sigma_prime[i + 1] - solution.sigma_prime[i - 1]) / (h1 + h2);
        let r = g[i];
        let tp = solution.sigma_prime[i];
        let a = solution.sigma[i] - r * tp - 2.0 * tp * tp;
        let b = q2 - tp * tp;
        worst = worst.max((r * r * t2 * t2 - 4.0 * b * b + a * a).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_algebra() {
        // g1 = -g2: zero initial value, intercept g1^2
        let g1 = 0.7;
        let g2 = -0.7;
        let s = SigmaPvSolution {
            gamma1: g1,
            gamma2: g2,
            r_grid: vec![1.0],
            sigma: vec![0.0],
            sigma_prime: vec![0.0],
            shooting_param: 0.0,
            initial_curvature_sign: 1.0,
            tail_r: vec![],
            tail_sigma: vec![],
        };
        assert_eq!(s.small_r_target(), 0.0);
        assert!((s.intercept_target() - g1 * g1).abs() < 1e-15);
    }

    #[test]
    fn constant_candidate_has_nonzero_residual() {
        // a generic constant does not solve the equation: with tau' = 0 the
        // residual is |4 B^2 - A^2| = |4 q^4 - c^2|, nonzero unless c = 2 q^2
        // (the constant c = 2 q^2 is the exact small-r boundary solution).
        let (g1, g2): (f64, f64) = (0.8, 0.2);
        let grid: Vec<f64> = (0..100).map(|i| 0.5 + 1e-3 * i as f64).collect();
        let c = 1.0;
        let s = SigmaPvSolution {
            gamma1: g1,
            gamma2: g2,
            r_grid: grid.clone(),
            sigma: vec![c; grid.len()],
            sigma_prime: vec![0.0; grid.len()],
            shooting_param: 0.0,
            initial_curvature_sign: 1.0,
            tail_r: vec![],
            tail_sigma: vec![],
        };
        let q2 = s.q() * s.q();
        let expected = (4.0 * q2 * q2 - c * c).abs();
        let r = residual(&s);
        assert!(r > 1e-3, "residual {r}");
        assert!((r - expected).abs() < 1e-10, "residual {r} expected {expected}");
    }

    #[test]
    fn shooting_main_example() {
        let s = integrate_sigma_pv(0.8, 0.2, 1e-3, 40.0).unwrap();
        assert!((s.sigma[0] - s.small_r_target()).abs() < 0.05, "tau(r_min) {}", s.sigma[0]);
        let (slope, intercept) = s.fit_tail();
        let st = s.slope_target();
        let it = s.intercept_target();
        assert!((slope - st).abs() < 0.02 * st.abs(), "slope {slope} target {st}");
        assert!((intercept - it).abs() < 0.05 * it.abs(), "intercept {intercept} target {it}");
        let res = residual(&s);
        assert!(res < 1e-6, "residual {res}");
    }

    #[test]
    fn shooting_other_parameter_pairs() {
        for &(g1, g2) in &[(0.5, -0.3), (1.0, 0.4)] {
            let s = integrate_sigma_pv(g1, g2, 1e-3, 40.0).unwrap();
            let (slope, intercept) = s.fit_tail();
            assert!(
                (slope - s.slope_target()).abs() < 0.02 * s.slope_target().abs(),
                "({g1},{g2}) slope {slope} target {}",
                s.slope_target()
            );
            assert!(
                (intercept - s.intercept_target()).abs() < 0.05 * s.intercept_target().abs(),
                "({g1},{g2}) intercept {intercept} target {}",
                s.intercept_target()
            );
            let res = residual(&s);
            assert!(res < 1e-6, "({g1},{g2}) residual {res}");
        }
    }

    #[test]
    fn swap_symmetry() {
        let a = integrate_sigma_pv(0.8, 0.2, 1e-3, 40.0).unwrap();
        let b = integrate_sigma_pv(0.2, 0.8, 1e-3, 40.0).unwrap();
        assert!((a.small_r_target() - b.small_r_target()).abs() < 1e-15);
        let (sa, _) = a.fit_tail();
        let (sb, _) = b.fit_tail();
        assert!((sa + sb).abs() < 0.01, "slopes {sa} {sb}");
    }

    #[test]
    fn refinement_reduces_residual_floor() {
        // integrate once, then compare second-difference residual on a
        // mid-range uniform segment at spacing h and h/2
        let (g1, g2) = (0.8, 0.2);
        let q = (g1 + g2) / (2.0 * std::f64::consts::SQRT_2);
        let s = integrate_sigma_pv(g1, g2, 1e-3, 40.0).unwrap();
        let resid_at = |h: f64| -> f64 {
            // re-integrate densely over [5, 6] with spacing h from the
            // accepted solution's state at r = 5
            let i5 = s.r_grid.partition_point(|&r| r < 5.0);
            let mut y = [s.sigma[i5], s.sigma_prime[i5], 0.0];
            // recover tau'' from the conserved relation (sign from data)
            let r5 = s.r_grid[i5];
            let d = discriminant(q * q, r5, y).max(0.0);
            let numer = s.sigma[i5 + 1] - 2.0 * s.sigma[i5] + s.sigma[i5 - 1];
            y[2] = (d.sqrt() / r5) * numer.signum();
            let n = (1.0 / h) as usize;
            let mut taus = vec![y[0]];
            let mut tps = vec![y[1]];
            let mut r = r5;
            for k in 1..=n {
                match integrate(q * q, -1.0, r, y, r5 + h * k as f64, 1e-12, f64::INFINITY, |_, _| {}) {
                    Outcome::Reached(ynew) => {
                        y = ynew;
                        r = r5 + h * k as f64;
                        taus.push(y[0]);
                        tps.push(y[1]);
                    }
                    Outcome::Exit => panic!("exit during refinement run"),
                }
            }
            let mut worst = 0.0f64;
            for i in 1..taus.len() - 1 {
                let t2 = (taus[i + 1] - 2.0 * taus[i] + taus[i - 1]) / (h * h);
                let rr = r5 + h * i as f64;
                let a = taus[i] - rr * tps[i] - 2.0 * tps[i] * tps[i];
                let b = q * q - tps[i] * tps[i];
                worst = worst.max((rr * rr * t2 * t2 - 4.0 * b * b + a * a).abs());
            }
            worst
        };
        let coarse = resid_at(2e-3);
        let fine = resid_at(1e-3);
        assert!(fine < coarse / 2.0, "coarse {coarse} fine {fine}");
    }
}


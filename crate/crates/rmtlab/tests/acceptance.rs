//! Acceptance gate: one test per criterion, each printing a single
//! "ACCEPTANCE k (<name>): PASS/FAIL" line with the measured values.
//!
//! The criteria are bracket/drift checks at desk scale; sample batches are
//! shared across criteria where the prescribed ensemble sizes coincide.

use std::sync::LazyLock;

use rmtlab::chaos::{
    chaos_density, free_energy, free_energy_limit, sigma_kernel, thick_point_measure,
    truncated_covariance, GaussianField, Normalization,
};
use rmtlab::counting::{h_at, h_extrema, ks_distance, linear_statistic, rigidity_stat};
use rmtlab::eqmeasure::{
    horner, sigma_variance, solve_equilibrium, EquilibriumMeasure, Potential,
};
use rmtlab::hankel::{
    diffid_y_check, exp_moment_exact, log_hankel, predict_thm2, predict_thm3, HankelSpec,
    OrthoBasis, DEFAULT_DIGITS,
};
use rmtlab::painleve::{integrate_sigma_pv, residual};
use rmtlab::sampler::{run_replicas, SamplerJob, Spectrum};

const SQRT2: f64 = std::f64::consts::SQRT_2;

static MEASURE: LazyLock<EquilibriumMeasure> =
    LazyLock::new(|| solve_equilibrium(&Potential::gue()).expect("gue equilibrium"));

fn gue_batch(n: usize, m: usize, seed: u64) -> Vec<Spectrum> {
    run_replicas(&SamplerJob::Gue { n }, m, seed).expect("gue batch")
}

/// N=6000, M=50: shared by criteria 2, 3, 6, 7.
static GUE_6000: LazyLock<Vec<Spectrum>> = LazyLock::new(|| gue_batch(6000, 50, 1001));
/// N=2000, M=400: shared by criteria 4 and 13.
static GUE_2000: LazyLock<Vec<Spectrum>> = LazyLock::new(|| gue_batch(2000, 400, 1002));

fn median(values: &mut Vec<f64>) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn sample_variance(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / SQRT2))
}

/// Kolmogorov distance of a sample against the standard normal law.
fn ks_vs_normal(stats: &mut Vec<f64>) -> f64 {
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = stats.len() as f64;
    let mut d = 0.0f64;
    for (i, &s) in stats.iter().enumerate() {
        let phi = std_normal_cdf(s);
        d = d.max((phi - i as f64 / m).abs());
        d = d.max(((i + 1) as f64 / m - phi).abs());
    }
    d
}

fn verdict(k: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {k} ({name}): {} [{detail}]",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {k} ({name}) failed: {detail}");
}

#[test]
fn a01_rigidity_bracket_and_monotone_approach() {
    // The statistic carries the weight pi psi(x) sqrt(1-x^2); for the gue
    // density psi = 2/pi this is exactly 2N sqrt(1-x^2) |l - k| / log N.
    let med_gue = |n: usize, m: usize, seed: u64| {
        let batch = gue_batch(n, m, seed);
        let mut stats: Vec<f64> = batch
            .iter()
            .map(|s| rigidity_stat(&MEASURE, &s.values))
            .collect();
        median(&mut stats)
    };
    let m2000 = med_gue(2000, 200, 1004);
    let m500 = med_gue(500, 200, 1005);
    let m4000 = med_gue(4000, 50, 1006);
    let pass = (0.7..=1.3).contains(&m2000) && (m4000 - 1.0).abs() < (m500 - 1.0).abs();
    verdict(
        1,
        "rigidity",
        pass,
        &format!("median N=2000: {m2000:.4}, N=500: {m500:.4}, N=4000: {m4000:.4}"),
    );
}

#[test]
fn a02_max_field_magnitude() {
    let scale = SQRT2 * (6000.0f64).ln();
    let extrema: Vec<(f64, f64)> = GUE_6000
        .iter()
        .map(|s| h_extrema(&MEASURE, &s.values))
        .collect();
    let mut maxes: Vec<f64> = extrema.iter().map(|&(_, max)| max / scale).collect();
    let mut mins: Vec<f64> = extrema.iter().map(|&(min, _)| -min / scale).collect();
    let med_max = median(&mut maxes);
    let med_min = median(&mut mins);
    let single = extrema[0].1.max(-extrema[0].0);
    let pass = (0.8..=1.2).contains(&med_max)
        && (0.8..=1.2).contains(&med_min)
        && (single - scale).abs() <= 0.25 * scale;
    verdict(
        2,
        "max of the counting field",
        pass,
        &format!(
            "median max/(sqrt2 logN): {med_max:.4}, median -min/(sqrt2 logN): {med_min:.4}, \
             single realization {single:.2} vs {scale:.2}"
        ),
    );
}

#[test]
fn a03_kolmogorov_distance_rate() {
    let mut stats: Vec<f64> = GUE_6000
        .iter()
        .map(|s| {
            let n = s.values.len() as f64;
            std::f64::consts::PI * n * ks_distance(&MEASURE, &s.values) / n.ln()
        })
        .collect();
    let med = median(&mut stats);
    let pass = (0.7..=1.3).contains(&med);
    verdict(
        3,
        "Kolmogorov distance rate",
        pass,
        &format!("median pi N d_K / log N: {med:.4}"),
    );
}

#[test]
fn a04_bulk_eigenvalue_clt() {
    let n = 2000usize;
    // midpoint quantile (j - 1/2)/N for j = N/2: the j/N convention carries
    // a deterministic half-spacing offset of 1/(2 N psi) in lambda_j, which
    // is ~0.8 sigma at this N (it decays like 1/sqrt(log N))
    let j = n / 2;
    let kappa = MEASURE.quantile((j as f64 - 0.5) / n as f64);
    let weight = 2.0 * SQRT2 * (1.0 - kappa * kappa).sqrt();
    let scale = n as f64 / (n as f64).ln().sqrt();
    let mut stats: Vec<f64> = GUE_2000
        .iter()
        .map(|s| weight * scale * (s.values[j - 1] - kappa))
        .collect();
    let d = ks_vs_normal(&mut stats);
    // Kolmogorov critical value at level 0.01 for M = 400
    let crit = 1.6276 / (stats.len() as f64).sqrt();
    let pass = d < crit;
    verdict(
        4,
        "bulk eigenvalue CLT",
        pass,
        &format!("KS distance {d:.4} vs critical {crit:.4} at level 0.01"),
    );
}

#[test]
fn a05_linear_statistic_clt_variance() {
    let batch = gue_batch(1000, 400, 1007);
    let f1 = |x: f64| x;
    let f2 = |x: f64| 2.0 * x * x - 1.0;
    let s1: Vec<f64> = batch
        .iter()
        .map(|s| linear_statistic(&MEASURE, &s.values, f1))
        .collect();
    let s2: Vec<f64> = batch
        .iter()
        .map(|s| linear_statistic(&MEASURE, &s.values, f2))
        .collect();
    let v1 = sample_variance(&s1);
    let v2 = sample_variance(&s2);
    let pass = (v1 - 0.25).abs() <= 0.15 * 0.25 && (v2 - 0.5).abs() <= 0.15 * 0.5;
    verdict(
        5,
        "linear statistic CLT",
        pass,
        &format!("var(sum x): {v1:.4} vs 1/4, var(sum T2): {v2:.4} vs 1/2"),
    );
}

#[test]
fn a06_thick_point_exponents() {
    let n = 6000f64;
    let mut details = String::new();
    let mut pass = true;
    for &gamma in &[0.5f64, 1.0, -0.5, -1.0] {
        let mut exps: Vec<f64> = GUE_6000
            .iter()
            .map(|s| thick_point_measure(&MEASURE, &s.values, gamma).ln() / n.ln())
            .collect();
        let med = median(&mut exps);
        let target = -gamma * gamma / 2.0;
        pass &= (med - target).abs() <= 0.2;
        details.push_str(&format!("gamma {gamma}: {med:.3} vs {target:.3}; "));
    }
    verdict(6, "thick points", pass, details.trim_end_matches("; "));
}

#[test]
fn a07_free_energy_freezing() {
    let mut details = String::new();
    let mut pass = true;
    for &gamma in &[0.5f64, 1.0, 2.0, 2.5] {
        let mut vals: Vec<f64> = GUE_6000
            .iter()
            .map(|s| free_energy(&MEASURE, &s.values, gamma))
            .collect();
        let med = median(&mut vals);
        let target = free_energy_limit(gamma);
        pass &= (med - target).abs() <= 0.2;
        details.push_str(&format!("gamma {gamma}: {med:.3} vs {target:.3}; "));
    }
    verdict(7, "free energy freezing", pass, details.trim_end_matches("; "));
}

#[test]
fn a08_chaos_mass_identities() {
    let gamma = 0.5f64;
    // (a) N=8, exact normalization from the jump Hankel ratio, M = 5e4.
    let nodes = 40usize;
    let a_len = 1.0f64; // |[-0.5, 0.5]|
    let grid: Vec<f64> = (0..nodes)
        .map(|i| -0.5 + a_len * (i as f64 + 0.5) / nodes as f64)
        .collect();
    let potential = Potential::gue();
    let exact_norm: Vec<f64> = grid
        .iter()
        .map(|&x| {
            exp_moment_exact(&MEASURE, &potential, x, gamma, 8, DEFAULT_DIGITS)
                .expect("exact exponential moment")
        })
        .collect();
    let batch8 = gue_batch(8, 50_000, 1008);
    let masses: Vec<f64> = batch8
        .iter()
        .map(|s| {
            grid.iter()
                .zip(&exact_norm)
                .map(|(&x, &e)| (gamma * h_at(&MEASURE, &s.values, x)).exp() / e)
                .sum::<f64>()
                * (a_len / nodes as f64)
        })
        .collect();
    let (mean8, se8) = mean_and_se(&masses);
    let pass_exact = (mean8 - a_len).abs() <= 3.0 * se8;

    // (b) N=500, monte-carlo normalization, M=400: the normalizer is fitted
    // on the first half of the replicas and the mass evaluated on the other
    // half, so the check is not satisfied by construction.
    let batch500 = gue_batch(500, 400, 1009);
    let replicas: Vec<Vec<f64>> = batch500.iter().map(|s| s.values.clone()).collect();
    let raw = chaos_density(&MEASURE, &replicas, gamma, &grid, Normalization::Raw);
    let half = raw.len() / 2;
    let norm_half: Vec<f64> = (0..grid.len())
        .map(|i| raw[..half].iter().map(|row| row[i]).sum::<f64>() / half as f64)
        .collect();
    let masses_mc: Vec<f64> = raw[half..]
        .iter()
        .map(|row| {
            row.iter().zip(&norm_half).map(|(v, m)| v / m).sum::<f64>() * (a_len / nodes as f64)
        })
        .collect();
    let (mean_mc, se_mc) = mean_and_se(&masses_mc);
    let pass_mc = (mean_mc - a_len).abs() <= 3.0 * se_mc;

    // (c) supercritical collapse: gamma = 1.8, monte-carlo normalization,
    // typical (median) mass on the bulk window should drop by at least a
    // factor 2 from N=1000 to N=4000. The replica mean is the wrong
    // estimator: the expectation of the normalized density is 1 at every N,
    // and the collapse holds in probability only.
    let gamma_s = 1.8f64;
    let norm = Normalization::MonteCarlo;
    let window: Vec<f64> = (0..101).map(|i| -0.5 + (i as f64 + 0.5) / 101.0).collect();
    let mass_at = |n: usize, seed: u64| {
        let batch = gue_batch(n, 40, seed);
        let reps: Vec<Vec<f64>> = batch.iter().map(|s| s.values.clone()).collect();
        let rows = chaos_density(&MEASURE, &reps, gamma_s, &window, norm);
        let masses: Vec<f64> = rows
            .iter()
            .map(|row| row.iter().sum::<f64>() / 101.0)
            .collect();
        median(&masses)
    };
    let m1000 = mass_at(1000, 1010);
    let m4000 = mass_at(4000, 1011);
    let ratio = m4000 / m1000;
    let pass_super = ratio > 0.0 && ratio <= 0.5;

    let pass = pass_exact && pass_mc && pass_super;
    verdict(
        8,
        "chaos mass identities",
        pass,
        &format!(
            "exact-normalized mean {mean8:.5} +- {se8:.5} vs {a_len}; \
             mc-normalized mean {mean_mc:.4} +- {se_mc:.4} vs {a_len}; \
             supercritical median mass ratio N=4000/N=1000: {ratio:.3} vs <= 0.5"
        ),
    );
}

#[test]
fn a09_exact_oracle_equivalences() {
    let potential = Potential::gue();
    // Heine identity vs direct monte carlo at N = 6 for a smooth deformation.
    let w_mono = [0.0f64, 0.5, 0.3];
    let n = 6usize;
    let mut spec = HankelSpec::plain(&potential, n);
    spec.gamma1 = 0.0;
    spec.gamma2 = 0.0;
    let plain = log_hankel(&spec, DEFAULT_DIGITS).expect("plain determinant");
    spec.w = Some(w_mono.to_vec());
    let deformed = log_hankel(&spec, DEFAULT_DIGITS).expect("deformed determinant");
    let exact_ratio = (deformed - plain).to_f64().exp();
    let batch = gue_batch(n, 200_000, 1012);
    let prods: Vec<f64> = batch
        .iter()
        .map(|s| {
            s.values
                .iter()
                .map(|&l| horner(&w_mono, l).exp())
                .product::<f64>()
        })
        .collect();
    let (mc_mean, mc_se) = mean_and_se(&prods);
    let pass_heine = (mc_mean - exact_ratio).abs() <= 4.0 * mc_se;

    // Exponential moment of the counting field vs monte carlo at N = 8.
    let (x, gamma, n8) = (0.2f64, 0.4f64, 8usize);
    let exact_em =
        exp_moment_exact(&MEASURE, &potential, x, gamma, n8, DEFAULT_DIGITS).expect("exact moment");
    let batch8 = gue_batch(n8, 200_000, 1013);
    let em: Vec<f64> = batch8
        .iter()
        .map(|s| (gamma * h_at(&MEASURE, &s.values, x)).exp())
        .collect();
    let (em_mean, em_se) = mean_and_se(&em);
    let pass_em = (em_mean - exact_em).abs() <= 4.0 * em_se;

    // Differential identity in the second jump position at N = 4.
    let mut dspec = HankelSpec::plain(&potential, 4);
    dspec.x1 = -0.3;
    dspec.x2 = 0.4;
    dspec.gamma1 = 0.3;
    dspec.gamma2 = 0.4;
    let rec = diffid_y_check(&dspec, 1e-5, DEFAULT_DIGITS).expect("differential identity");
    let pass_diff = rec.gap < 1e-8;

    // Determinant equals the product of leading coefficients to the negative
    // double power, checked on the log scale at N = 8.
    let spec8 = HankelSpec::plain(&potential, 8);
    let direct = log_hankel(&spec8, DEFAULT_DIGITS).expect("direct determinant");
    let basis = OrthoBasis::build(&spec8, DEFAULT_DIGITS).expect("orthonormal basis");
    let via_kappa = basis.log_hankel_from_kappa();
    let kappa_gap = (direct - via_kappa).to_f64().abs();
    let pass_kappa = kappa_gap < 1e-18;

    let pass = pass_heine && pass_em && pass_diff && pass_kappa;
    verdict(
        9,
        "exact-oracle equivalences",
        pass,
        &format!(
            "Heine mc {mc_mean:.5} +- {mc_se:.5} vs exact {exact_ratio:.5}; \
             exp moment mc {em_mean:.5} +- {em_se:.5} vs exact {exact_em:.5}; \
             differential identity gap {:.2e}; kappa-product gap {kappa_gap:.2e}",
            rec.gap
        ),
    );
}

#[test]
fn a10_asymptotic_drift_bands() {
    let potential = Potential::gue();
    // Smooth deformation w(x) = x at N = 14: the drift above N int w dmu
    // must approach sigma^2(w)/2 = 1/8.
    let n = 14usize;
    let mut spec = HankelSpec::plain(&potential, n);
    let plain = log_hankel(&spec, DEFAULT_DIGITS).expect("plain determinant");
    spec.w = Some(vec![0.0, 1.0]);
    let deformed = log_hankel(&spec, DEFAULT_DIGITS).expect("deformed determinant");
    // int x dmu = 0 by symmetry, so the whole log-ratio is the drift
    let drift_w = (deformed - plain).to_f64();
    let pass_w = (drift_w - 0.125).abs() < 0.05;

    // Single bulk jump, gamma = 0.4, N = 12: drift band across x.
    let (n12, gamma) = (12usize, 0.4f64);
    let mut band3 = (f64::INFINITY, f64::NEG_INFINITY);
    let base = {
        let s = HankelSpec::plain(&potential, n12);
        log_hankel(&s, DEFAULT_DIGITS).expect("plain determinant")
    };
    for &x in &[-0.6, -0.3, 0.0, 0.3, 0.6] {
        let mut s = HankelSpec::plain(&potential, n12);
        s.x1 = x;
        s.gamma1 = gamma;
        let exact = (log_hankel(&s, DEFAULT_DIGITS).expect("jump determinant") - base.clone())
            .to_f64();
        let predicted =
            predict_thm3(&MEASURE, x, gamma, n12, 0.5).expect("bulk jump prediction");
        let d = exact - predicted;
        band3 = (band3.0.min(d), band3.1.max(d));
    }
    let width3 = band3.1 - band3.0;
    let pass3 = width3 < 1.5;

    // Two merging jumps: drift band across N at fixed separation.
    let (x1, x2, g1, g2) = (-0.2f64, 0.3f64, 0.3f64, 0.4f64);
    let mut band2 = (f64::INFINITY, f64::NEG_INFINITY);
    for &nn in &[6usize, 8, 10, 12] {
        let mut two = HankelSpec::plain(&potential, nn);
        two.x1 = x1;
        two.x2 = x2;
        two.gamma1 = g1;
        two.gamma2 = g2;
        let mut merged = HankelSpec::plain(&potential, nn);
        merged.x1 = x1;
        merged.gamma1 = g1 + g2;
        let exact = (log_hankel(&two, DEFAULT_DIGITS).expect("two-jump determinant")
            - log_hankel(&merged, DEFAULT_DIGITS).expect("merged determinant"))
        .to_f64();
        let predicted = predict_thm2(&MEASURE, x1, x2, g1, g2, nn);
        let d = exact - predicted;
        band2 = (band2.0.min(d), band2.1.max(d));
    }
    let width2 = band2.1 - band2.0;
    let pass2 = width2 < 1.5;

    let pass = pass_w && pass3 && pass2;
    verdict(
        10,
        "asymptotic drift bands",
        pass,
        &format!(
            "w=x drift {drift_w:.4} vs 1/8; single-jump band width {width3:.3}; \
             two-jump band width {width2:.3}"
        ),
    );
}

#[test]
fn a11_gaussian_field_layer() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
    // Variance formulas on random polynomials to degree 12.
    let mut worst_var = 0.0f64;
    for _ in 0..10 {
        let coeffs: Vec<f64> = (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = |x: f64| horner(&coeffs, x);
        let sv = sigma_variance(f).expect("variance of a polynomial");
        worst_var = worst_var.max(sv.discrepancy);
    }
    let pass_var = worst_var < 1e-8;

    // Truncated covariance vs the closed-form kernel on 20 random pairs.
    let mut worst_cov = 0.0f64;
    let mut drawn = 0usize;
    while drawn < 20 {
        let x: f64 = rng.gen_range(-0.9..0.9);
        let y: f64 = rng.gen_range(-0.9..0.9);
        if (x - y).abs() < 0.05 {
            continue;
        }
        drawn += 1;
        let gap = (truncated_covariance(10_000, x, y) - sigma_kernel(x, y)).abs();
        worst_cov = worst_cov.max(gap);
    }
    let pass_cov = worst_cov < 1e-3;

    // Reference chaos mass over [-0.5, 0.5] has expectation = interval length.
    let gamma = 0.5f64;
    let nodes = 40usize;
    let grid: Vec<f64> = (0..nodes)
        .map(|i| -0.5 + (i as f64 + 0.5) / nodes as f64)
        .collect();
    let masses: Vec<f64> = (0..2000u64)
        .map(|s| {
            let field = GaussianField::sample(2000, 9000 + s);
            grid.iter()
                .map(|&x| field.gmc_density(gamma, x))
                .sum::<f64>()
                / nodes as f64
        })
        .collect();
    let (mass_mean, mass_se) = mean_and_se(&masses);
    let pass_mass = (mass_mean - 1.0).abs() <= 3.0 * mass_se;

    let pass = pass_var && pass_cov && pass_mass;
    verdict(
        11,
        "gaussian field layer",
        pass,
        &format!(
            "variance route discrepancy {worst_var:.2e}; covariance gap {worst_cov:.2e}; \
             chaos mass {mass_mean:.4} +- {mass_se:.4} vs 1"
        ),
    );
}

#[test]
fn a12_sigma_pv_connection() {
    let mut details = String::new();
    let mut pass = true;
    for &(g1, g2) in &[(0.8f64, 0.2f64), (0.5, -0.3), (1.0, 0.4)] {
        let sol = integrate_sigma_pv(g1, g2, 1e-3, 40.0).expect("shooting solution");
        let (slope, intercept) = sol.fit_tail();
        let res = residual(&sol);
        let slope_ok = (slope - sol.slope_target()).abs() <= 0.02 * sol.slope_target().abs();
        let icpt_ok =
            (intercept - sol.intercept_target()).abs() <= 0.05 * sol.intercept_target().abs();
        let res_ok = res < 1e-6;
        pass &= slope_ok && icpt_ok && res_ok;
        details.push_str(&format!(
            "({g1},{g2}): slope {slope:.5} vs {:.5}, intercept {intercept:.5} vs {:.5}, \
             residual {res:.2e}; ",
            sol.slope_target(),
            sol.intercept_target()
        ));
    }
    verdict(12, "sigma-PV connection", pass, details.trim_end_matches("; "));
}

#[test]
fn a13_edge_fluctuations() {
    let n = 2000f64;
    let stats: Vec<f64> = GUE_2000
        .iter()
        .map(|s| 2.0 * n.powf(2.0 / 3.0) * (s.values.last().unwrap() - 1.0))
        .collect();
    let (mean, _) = mean_and_se(&stats);
    let var = sample_variance(&stats);
    // Tracy-Widom (beta = 2) moments
    let (tw_mean, tw_var) = (-1.7710868074, 0.8131947928);
    let pass = (mean - tw_mean).abs() <= 0.15 && (var - tw_var).abs() <= 0.3;
    verdict(
        13,
        "edge fluctuations",
        pass,
        &format!("mean {mean:.4} vs {tw_mean:.4} +- 0.15, var {var:.4} vs {tw_var:.4} +- 0.3"),
    );
}

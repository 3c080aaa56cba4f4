use approx::assert_relative_eq;
use begwg::dataio::nfl_dataset;
use begwg::estimation::{
    as_printed, classify, covariance_and_ci, fit_mle, log_likelihood, observed_information, profile_alpha3,
    reference, score, stationary_alpha3, sufficient_stats, FitOptions, PairedSample,
};
use begwg::{Baseline, BegwgParams, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixed() -> Baseline {
    Baseline::new(0.1, 0.2, 0.2, 0.5).unwrap()
}

// independent evaluation of the optimum on the football data
const MLE: [f64; 3] = [0.032_287_9, 0.186_212_05, 0.406_217_16];
const LOG_LIK_AT_MLE: f64 = -273.557_98;
const LOG_LIK_AT_REPORTED: f64 = -273.557_997_550_6;

#[test]
fn football_counts() {
    let c = classify(&nfl_dataset(), 0.0);
    assert_eq!(c.counts(), [16, 2, 24]);
    assert_eq!(c.total(), 42);
}

#[test]
fn classification_ignores_scale() {
    let s = nfl_dataset();
    let scaled = PairedSample::new(s.pairs().iter().map(|&(a, b)| (3.7 * a, 3.7 * b)).collect()).unwrap();
    assert_eq!(classify(&s, 0.0).counts(), classify(&scaled, 0.0).counts());
    assert_eq!(classify(&s, 0.01).counts(), classify(&scaled, 0.037).counts());
}

#[test]
fn log_likelihood_matches_joint_density() {
    let s = nfl_dataset();
    let c = classify(&s, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let theta: [f64; 3] = [rng.random_range(0.01..2.0), rng.random_range(0.01..2.0), rng.random_range(0.01..2.0)];
        let p = BegwgParams::from_baseline(fixed(), theta).unwrap();
        let direct: f64 = s.pairs().iter().map(|&(x1, x2)| p.ln_joint_pdf(x1, x2).unwrap().0).sum();
        let via_stats = log_likelihood(theta, &fixed(), &c, &s).unwrap();
        assert!((direct - via_stats).abs() < 1e-9 * s.len() as f64);
    }
}

#[test]
fn log_likelihood_at_reported_estimates() {
    let s = nfl_dataset();
    let c = classify(&s, 0.0);
    let l = log_likelihood(reference::ALPHA_HAT, &fixed(), &c, &s).unwrap();
    assert!((l - LOG_LIK_AT_REPORTED).abs() < 1e-8);
}

#[test]
fn swap_symmetry() {
    let s = nfl_dataset();
    let t = s.swapped();
    let (cs, ct) = (classify(&s, 0.0), classify(&t, 0.0));
    let theta = [0.1, 0.2, 0.3];
    let mirrored = [0.2, 0.1, 0.3];
    let l = log_likelihood(theta, &fixed(), &cs, &s).unwrap();
    assert_relative_eq!(l, log_likelihood(mirrored, &fixed(), &ct, &t).unwrap(), max_relative = 1e-14);
    let g = score(theta, &fixed(), &cs, &s).unwrap();
    let h = score(mirrored, &fixed(), &ct, &t).unwrap();
    assert_relative_eq!(g[0], h[1], max_relative = 1e-13);
    assert_relative_eq!(g[1], h[0], max_relative = 1e-13);
    assert_relative_eq!(g[2], h[2], max_relative = 1e-13);
}

fn fd_gradient(f: impl Fn([f64; 3]) -> f64, theta: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let h = 1e-6f64.max(1e-6 * theta[i]);
        let (mut up, mut dn) = (theta, theta);
        up[i] += h;
        dn[i] -= h;
        out[i] = (f(up) - f(dn)) / (2.0 * h);
    }
    out
}

#[test]
fn score_is_gradient() {
    let s = nfl_dataset();
    let c = classify(&s, 0.0);
    let stats = sufficient_stats(&fixed(), &c, &s).unwrap();
    let mut points = vec![[0.1, 0.2, 0.3]];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        points.push([rng.random_range(0.05..2.0), rng.random_range(0.05..2.0), rng.random_range(0.05..2.0)]);
    }
    for theta in points {
        let g = stats.score(theta).unwrap();
        let fd = fd_gradient(|t| stats.log_likelihood(t).unwrap(), theta);
        for i in 0..3 {
            assert!((g[i] - fd[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "{theta:?} {i}: {} vs {}", g[i], fd[i]);
        }
    }
}

#[test]
fn information_is_negated_jacobian_of_score() {
    let s = nfl_dataset();
    let c = classify(&s, 0.0);
    let stats = sufficient_stats(&fixed(), &c, &s).unwrap();
    for theta in [[0.1, 0.2, 0.3], MLE, [1.5, 0.7, 0.2]] {
        let info = observed_information(theta, &c).unwrap();
        for j in 0..3 {
            let col = fd_gradient(|t| stats.score(t).unwrap()[j], theta);
            for i in 0..3 {
                let expect = -col[i];
                let got = info.matrix[(j, i)];
                assert!((got - expect).abs() <= 1e-5 * got.abs().max(1e-3), "({j},{i}): {got} vs {expect}");
            }
        }
    }
}

#[test]
fn profile_solves_third_equation() {
    let s = nfl_dataset();
    let c = classify(&s, 0.0);
    let a3 = profile_alpha3(0.0323, 0.186, &fixed(), &c, &s).unwrap();
    assert!(score([0.0323, 0.186, a3], &fixed(), &c, &s).unwrap()[2].abs() < 1e-10);
    assert!((a3 - 0.406).abs() / 0.406 < 0.15);
}

#[test]
fn printed_profile_expression_disagrees() {
    let s = nfl_dataset();
    let c = classify(&s, 0.0);
    let stats = sufficient_stats(&fixed(), &c, &s).unwrap();
    let printed = as_printed::profile_alpha3(&stats, MLE[0], MLE[1]);
    let stationary = stationary_alpha3(&stats, MLE[0], MLE[1]);
    assert!((stationary - MLE[2]).abs() < 1e-6);
    assert!((printed - 0.4906).abs() < 1e-3, "{printed}");
}

#[test]
fn football_fit() {
    let s = nfl_dataset();
    let fit = fit_mle(&fixed(), &s, 0.0, &FitOptions::default()).unwrap();
    assert!(fit.converged);
    for i in 0..3 {
        assert!((fit.alpha_hat[i] - MLE[i]).abs() < 1e-6, "{:?}", fit.alpha_hat);
        let r = reference::ALPHA_HAT[i];
        assert!((fit.alpha_hat[i] - r).abs() / r < 0.15);
    }
    assert!((fit.log_likelihood - LOG_LIK_AT_MLE).abs() < 1e-4);
    assert!(fit.log_likelihood >= LOG_LIK_AT_REPORTED);
    assert!(fit.score.iter().map(|g| g * g).sum::<f64>().sqrt() < 1e-8);
    assert_eq!(fit.counts, [16, 2, 24]);
    assert!((fit.aic - (-2.0 * fit.log_likelihood + 6.0)).abs() < 1e-12);
    for i in 0..3 {
        assert!(fit.covariance[i][i] >= 0.0);
        for j in 0..3 {
            assert_eq!(fit.covariance[i][j], fit.covariance[j][i]);
        }
        assert!(fit.ci[i][0] <= fit.ci[i][1]);
        assert!(fit.ci[i][0] >= 0.0);
    }
}

#[test]
fn information_inverse_at_fit() {
    let s = nfl_dataset();
    let c = classify(&s, 0.0);
    let fit = fit_mle(&fixed(), &s, 0.0, &FitOptions::default()).unwrap();
    let info = observed_information(fit.alpha_hat, &c).unwrap();
    assert!(info.matrix.cholesky().is_some());
    let (cov, _) = covariance_and_ci(&info, fit.alpha_hat, 0.95).unwrap();
    let prod = info.matrix * cov;
    for i in 0..3 {
        for j in 0..3 {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((prod[(i, j)] - e).abs() < 1e-8);
        }
    }
}

#[test]
fn multi_start_reaches_one_optimum() {
    let s = nfl_dataset();
    let base = fit_mle(&fixed(), &s, 0.0, &FitOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let start = [rng.random_range(0.01..3.0), rng.random_range(0.01..3.0)];
        let fit = fit_mle(&fixed(), &s, 0.0, &FitOptions { start: Some(start), ..FitOptions::default() }).unwrap();
        assert!(fit.converged, "start {start:?}");
        assert!((fit.log_likelihood - base.log_likelihood).abs() < 1e-6);
    }
}

#[test]
fn non_convergence_is_reported_in_band() {
    let s = nfl_dataset();
    let fit = fit_mle(&fixed(), &s, 0.0, &FitOptions { max_iter: 1, ..FitOptions::default() }).unwrap();
    assert!(!fit.converged);
    assert_eq!(fit.iterations, 1);
}

#[test]
fn degenerate_group_patterns_are_boundary() {
    let ties = PairedSample::new(vec![(1.0, 1.0), (2.0, 2.0), (0.5, 0.5), (3.0, 3.0), (1.5, 1.5)]).unwrap();
    assert!(matches!(fit_mle(&fixed(), &ties, 0.0, &FitOptions::default()), Err(Error::Boundary(_))));
    let below = PairedSample::new(vec![(1.0, 2.0), (2.0, 3.0), (0.5, 0.7), (3.0, 3.1), (1.5, 4.0)]).unwrap();
    assert!(matches!(fit_mle(&fixed(), &below, 0.0, &FitOptions::default()), Err(Error::Boundary(_))));
}

#[test]
fn fit_recovers_simulated_shapes() {
    let theta = [0.5, 0.3, 0.7];
    let p = BegwgParams::from_baseline(fixed(), theta).unwrap();
    let pairs = p.sample(&mut ChaCha8Rng::seed_from_u64(2024), 5000).unwrap();
    let s = PairedSample::new(pairs).unwrap();
    let fit = fit_mle(&fixed(), &s, 0.0, &FitOptions::default()).unwrap();
    assert!(fit.converged);
    for i in 0..3 {
        let se = fit.covariance[i][i].sqrt();
        assert!((fit.alpha_hat[i] - theta[i]).abs() < 4.0 * se, "{i}: {:?}", fit.alpha_hat);
    }
}

#[test]
fn json_schema_keys() {
    let fit = fit_mle(&fixed(), &nfl_dataset(), 0.0, &FitOptions::default()).unwrap();
    let v = serde_json::to_value(&fit).unwrap();
    for key in ["alpha_hat", "log_likelihood", "aic", "caic", "bic_paper", "bic_standard", "covariance", "ci", "converged", "iterations"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["ci"].as_array().unwrap().len(), 3);
    assert_eq!(v["covariance"][2].as_array().unwrap().len(), 3);
}

proptest! {
    #[test]
    fn log_likelihood_is_concave_along_lines(
        a in prop::array::uniform3(0.05f64..2.0), b in prop::array::uniform3(0.05f64..2.0), t in 0.0f64..1.0,
    ) {
        let s = nfl_dataset();
        let c = classify(&s, 0.0);
        let stats = sufficient_stats(&fixed(), &c, &s).unwrap();
        let mid = [0, 1, 2].map(|i| t * a[i] + (1.0 - t) * b[i]);
        let lhs = stats.log_likelihood(mid).unwrap();
        let rhs = t * stats.log_likelihood(a).unwrap() + (1.0 - t) * stats.log_likelihood(b).unwrap();
        prop_assert!(lhs >= rhs - 1e-9);
    }
}

//! Checks against independently computed references.

use avcausal::causal::{ci_mean_estimates, ci_single, CIParams, EstimateRule};
use avcausal::fitting::{fit_mu, readout_likelihoods, SweepSpec};
use avcausal::input::apply_poisson_noise;
use avcausal::readout::profile_peak_and_width;
use avcausal::{Network, NetworkParams, StimulusEvent};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Posterior of a common cause by midpoint integration over the cells the
/// 1-degree hypothesis grid stands for, at ten points per cell.
fn dense_posterior(x_a: f64, x_v: f64, sa: f64, sv: f64, p: f64) -> f64 {
    let (lo, hi, per) = (-90.5, 90.5, 10usize);
    let n = ((hi - lo) as usize) * per;
    let h = (hi - lo) / n as f64;
    let (mut both, mut a, mut v) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let s = lo + (k as f64 + 0.5) * h;
        let (fa, fv) = (normal_pdf(x_a, s, sa), normal_pdf(x_v, s, sv));
        both += fa * fv * h;
        a += fa * h;
        v += fv * h;
    }
    let width = hi - lo;
    let (l1, l2) = (both / width, (a / width) * (v / width));
    l1 * p / (l1 * p + l2 * (1.0 - p))
}

#[test]
fn posterior_matches_dense_quadrature() {
    let params = CIParams::new(5.0, 5.0, 0.5);
    let grid = ci_single(0.0, 0.0, &params).unwrap().post_c1;
    let dense = dense_posterior(0.0, 0.0, 5.0, 5.0, 0.5);
    assert!((grid - dense).abs() < 1e-4, "grid {grid} dense {dense}");

    for (x_a, x_v, sa, sv, p) in [(3.0, 12.0, 8.1, 1.7, 0.5), (-20.0, 5.0, 8.0, 7.5, 0.9), (0.0, 30.0, 8.1, 1.7, 0.1)] {
        let grid = ci_single(x_a, x_v, &CIParams::new(sa, sv, p)).unwrap().post_c1;
        let dense = dense_posterior(x_a, x_v, sa, sv, p);
        assert!((grid - dense).abs() < 1e-3, "({x_a},{x_v}) grid {grid} dense {dense}");
    }
}

#[test]
fn grid_posterior_means_match_product_of_gaussians_in_interior() {
    let params = CIParams::new(8.1, 1.7, 0.5).with_rule(EstimateRule::GridPosteriorMean);
    let r = ci_single(-6.0, 14.0, &params).unwrap();
    let (wa, wv) = (1.0 / 8.1f64.powi(2), 1.0 / 1.7f64.powi(2));
    assert!((r.s_fused - (wa * -6.0 + wv * 14.0) / (wa + wv)).abs() < 1e-6);
    assert!((r.s_a_seg + 6.0).abs() < 1e-6);
    assert!((r.s_v_seg - 14.0).abs() < 1e-6);
}

#[test]
fn monte_carlo_error_shrinks_with_samples() {
    let params = CIParams::new(8.1, 1.7, 0.5);
    let small = ci_mean_estimates(0.0, 12.0, &params, 1000, 5).unwrap();
    let large = ci_mean_estimates(0.0, 12.0, &params, 4000, 5).unwrap();
    let ratio = large.se_a / small.se_a;
    assert!((ratio - 0.5).abs() < 0.05, "ratio {ratio}");
    // independent seeds agree within the combined standard error
    let other = ci_mean_estimates(0.0, 12.0, &params, 4000, 6).unwrap();
    let se = (large.se_a.powi(2) + other.se_a.powi(2)).sqrt();
    assert!((large.mean_a - other.mean_a).abs() < 4.0 * se);
}

#[test]
fn noisy_peak_is_unbiased() {
    let net = Network::standard(NetworkParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let clean = net.forward(&StimulusEvent::auditory_only(0.0)).unwrap();
    let xhat0 = profile_peak_and_width(&clean.pooling.r_a, net.grid()).unwrap().xhat;
    let trials = 1000;
    let mut sum = 0.0;
    for _ in 0..trials {
        let mut input = clean.input.clone();
        input.theta_l = apply_poisson_noise(&input.theta_l, &mut rng).unwrap();
        input.theta_r = apply_poisson_noise(&input.theta_r, &mut rng).unwrap();
        let pooled = net.pool(&input).unwrap();
        sum += profile_peak_and_width(&pooled.r_a, net.grid()).unwrap().xhat;
    }
    let mean = sum / trials as f64;
    assert!((mean - xhat0).abs() <= 0.2, "mean xhat {mean} vs {xhat0}");
}

fn sds(params: NetworkParams) -> (f64, f64) {
    let (a, v) = readout_likelihoods(&Network::standard(params).unwrap()).unwrap();
    (a.sd, v.sd)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[test]
fn higher_gain_narrows_the_likelihood() {
    let base = NetworkParams::default();
    let a: Vec<f64> = [80.0, 100.0, 120.0, 140.0, 160.0, 180.0].iter().map(|&g| sds(base.with_gains(g, 80.0)).0).collect();
    let v: Vec<f64> = [40.0, 60.0, 80.0, 100.0, 120.0].iter().map(|&g| sds(base.with_gains(140.0, g)).1).collect();
    assert!(a.windows(2).all(|w| w[1] < w[0]), "{a:?}");
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
}

#[test]
fn wider_tuning_widens_the_likelihood_linearly() {
    let base = NetworkParams::default();
    let ms = [10.0, 15.0, 20.0, 25.0, 30.0];
    let a: Vec<f64> = ms.iter().map(|&m| sds(NetworkParams { m, ..base }).0).collect();
    let sigmas = [10.0, 20.0, 30.0, 40.0, 50.0];
    let v: Vec<f64> = sigmas.iter().map(|&sigma| sds(NetworkParams { sigma, ..base }).1).collect();
    assert!(pearson(&ms, &a) > 0.99, "{a:?}");
    assert!(pearson(&sigmas, &v) > 0.99, "{v:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_falls_with_disparity(sa in 2.0f64..12.0, sv in 1.0f64..10.0, p in 0.01f64..0.99, d in 0.0f64..50.0, dd in 0.5f64..10.0) {
        let params = CIParams::new(sa, sv, p);
        let near = ci_single(0.0, d, &params).unwrap().post_c1;
        let far = ci_single(0.0, d + dd, &params).unwrap().post_c1;
        prop_assert!(far <= near + 1e-12);
    }

    #[test]
    fn posterior_rises_with_prior(d in 0.0f64..50.0, p in 0.01f64..0.9, dp in 0.01f64..0.09) {
        let post = |p| ci_single(0.0, d, &CIParams::new(8.1, 1.7, p)).unwrap().post_c1;
        prop_assert!(post(p + dp) >= post(p));
    }

    #[test]
    fn decodes_are_mirror_antisymmetric(s_v in -60i32..60, mu in 8.0f64..13.0) {
        let net = Network::standard(NetworkParams::default().with_mu(mu)).unwrap();
        let (a, v) = net.decode_av(0.0, s_v as f64).unwrap();
        let (am, vm) = net.decode_av(0.0, -s_v as f64).unwrap();
        prop_assert_eq!(a, -am);
        prop_assert_eq!(v, -vm);
    }
}

#[test]
fn best_fit_mu_rises_with_the_prior() {
    let net = Network::standard(NetworkParams::default()).unwrap();
    let sweep = SweepSpec {
        s_v: (-15..=15).map(|k| 6.0 * k as f64).collect(),
        n_samples: 1500,
        ..SweepSpec::default()
    };
    let mus: Vec<f64> = [0.1, 0.5, 0.9].iter().map(|&p| fit_mu(p, &net, &sweep).unwrap().0.mu).collect();
    assert!(mus.windows(2).all(|w| w[1] >= w[0]), "{mus:?}");
}

//! Reference Bayesian causal-inference observer with a uniform spatial prior
//! discretized on a hypothesis grid, and the Monte Carlo procedure that turns
//! it into mean location estimates.
//!
//! The posterior probability of a common cause always uses the grid:
//!
//! ```text
//! L1 = (1/|S|) sum_s N(x_A; s, sA) N(x_V; s, sV)
//! L2 = [(1/|S|) sum_s N(x_A; s, sA)] [(1/|S|) sum_s N(x_V; s, sV)]
//! p(C=1 | x) = p L1 / (p L1 + (1 - p) L2)
//! ```
//!
//! Fused and segregated estimates come from [`EstimateRule`]. Final
//! estimates are model averages of the two.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Natural-log density below which a likelihood is treated as having no
/// mass on the grid (the linear-space density would underflow).
const MIN_LOG_DENSITY: f64 = -700.0;

/// How the fused and segregated location estimates are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateRule {
    /// Reliability-weighted mean for the fused estimate and the raw
    /// measurements for the segregated ones.
    #[default]
    Analytic,
    /// Posterior means over the discrete hypothesis grid. Estimates shrink
    /// toward the interior near the grid edges.
    GridPosteriorMean,
}

/// Parameters of the reference observer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CIParams {
    pub sigma_a: f64,
    pub sigma_v: f64,
    pub p_common: f64,
    /// Hypothesized source locations (uniform prior).
    pub hypotheses: Vec<f64>,
    pub rule: EstimateRule,
}

impl CIParams {
    /// Default hypothesis grid: -90..=90 in 1-degree steps.
    pub fn new(sigma_a: f64, sigma_v: f64, p_common: f64) -> Self {
        Self {
            sigma_a,
            sigma_v,
            p_common,
            hypotheses: (-90..=90).map(f64::from).collect(),
            rule: EstimateRule::default(),
        }
    }

    pub fn with_rule(mut self, rule: EstimateRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_p_common(mut self, p_common: f64) -> Self {
        self.p_common = p_common;
        self
    }

    pub fn with_hypotheses(mut self, hypotheses: Vec<f64>) -> Self {
        self.hypotheses = hypotheses;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma_a", self.sigma_a), ("sigma_v", self.sigma_v)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        if !(0.0..=1.0).contains(&self.p_common) {
            return Err(ModelError::InvalidParam {
                name: "p_common",
                reason: format!("must lie in [0, 1], got {}", self.p_common),
            });
        }
        if self.hypotheses.len() < 2 {
            return Err(ModelError::InvalidParam {
                name: "hypotheses",
                reason: "need at least two hypothesis locations".into(),
            });
        }
        let step = self.hypotheses[1] - self.hypotheses[0];
        let uniform = step > 0.0
            && self
                .hypotheses
                .windows(2)
                .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.max(1.0));
        if !uniform {
            return Err(ModelError::InvalidParam {
                name: "hypotheses",
                reason: "must be strictly increasing and uniformly spaced".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CausalInferenceResult {
    /// Posterior probability of a common cause.
    pub post_c1: f64,
    pub s_fused: f64,
    pub s_a_seg: f64,
    pub s_v_seg: f64,
    /// Model-averaged auditory estimate.
    pub shat_a: f64,
    /// Model-averaged visual estimate.
    pub shat_v: f64,
}

/// Per-hypothesis log density terms without the constant normalizer.
fn log_kernel(x: f64, s: f64, sigma: f64) -> f64 {
    let z = (x - s) / sigma;
    -0.5 * z * z
}

fn log_norm(sigma: f64) -> f64 {
    -(sigma * (2.0 * std::f64::consts::PI).sqrt()).ln()
}

/// Stable log(exp(a) + exp(b)).
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Causal inference for one pair of noisy measurements.
pub fn ci_single(x_a: f64, x_v: f64, params: &CIParams) -> Result<CausalInferenceResult> {
    let s = &params.hypotheses;
    let (sa, sv) = (params.sigma_a, params.sigma_v);

    let la: Vec<f64> = s.iter().map(|&h| log_kernel(x_a, h, sa)).collect();
    let lv: Vec<f64> = s.iter().map(|&h| log_kernel(x_v, h, sv)).collect();
    let max_a = la.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_v = lv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_av = la.iter().zip(&lv).map(|(a, v)| a + v).fold(f64::NEG_INFINITY, f64::max);
    if max_a + log_norm(sa) < MIN_LOG_DENSITY || max_v + log_norm(sv) < MIN_LOG_DENSITY {
        return Err(ModelError::DegenerateLikelihood { x_a, x_v });
    }

    // shifted linear-space kernels; each has its maximum at 1
    let ea: Vec<f64> = la.iter().map(|l| (l - max_a).exp()).collect();
    let ev: Vec<f64> = lv.iter().map(|l| (l - max_v).exp()).collect();
    let eav: Vec<f64> = la.iter().zip(&lv).map(|(a, v)| (a + v - max_av).exp()).collect();
    let sum_a: f64 = ea.iter().sum();
    let sum_v: f64 = ev.iter().sum();
    let sum_av: f64 = eav.iter().sum();

    let ln_count = (s.len() as f64).ln();
    let log_l1 = max_av + sum_av.ln() + log_norm(sa) + log_norm(sv) - ln_count;
    let log_l2 = (max_a + sum_a.ln() + log_norm(sa) - ln_count) + (max_v + sum_v.ln() + log_norm(sv) - ln_count);

    let p = params.p_common;
    let post_c1 = if p <= 0.0 {
        0.0
    } else if p >= 1.0 {
        1.0
    } else {
        let one = log_l1 + p.ln();
        let two = log_l2 + (1.0 - p).ln();
        (one - log_add(one, two)).exp()
    };

    let (s_fused, s_a_seg, s_v_seg) = match params.rule {
        EstimateRule::Analytic => {
            let (wa, wv) = (1.0 / (sa * sa), 1.0 / (sv * sv));
            ((wa * x_a + wv * x_v) / (wa + wv), x_a, x_v)
        }
        EstimateRule::GridPosteriorMean => {
            let mean = |w: &[f64], total: f64| s.iter().zip(w).map(|(h, w)| h * w).sum::<f64>() / total;
            (mean(&eav, sum_av), mean(&ea, sum_a), mean(&ev, sum_v))
        }
    };

    Ok(CausalInferenceResult {
        post_c1,
        s_fused,
        s_a_seg,
        s_v_seg,
        shat_a: post_c1 * s_fused + (1.0 - post_c1) * s_a_seg,
        shat_v: post_c1 * s_fused + (1.0 - post_c1) * s_v_seg,
    })
}

/// Monte Carlo mean of the model-averaged estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean_a: f64,
    pub mean_v: f64,
    /// Standard error of `mean_a`.
    pub se_a: f64,
    /// Standard error of `mean_v`.
    pub se_v: f64,
    pub n_samples: usize,
}

/// Draws `x_A ~ N(s_a, sigma_a)` and `x_V ~ N(s_v, sigma_v)` independently,
/// runs [`ci_single`] per draw and averages. Deterministic given `seed`.
pub fn ci_mean_estimates(s_a: f64, s_v: f64, params: &CIParams, n_samples: usize, seed: u64) -> Result<McEstimate> {
    params.validate()?;
    if n_samples == 0 {
        return Err(ModelError::InvalidInput("n_samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise_a = Normal::new(s_a, params.sigma_a).map_err(|e| ModelError::InvalidInput(e.to_string()))?;
    let noise_v = Normal::new(s_v, params.sigma_v).map_err(|e| ModelError::InvalidInput(e.to_string()))?;
    let (mut sum_a, mut sum_v, mut sq_a, mut sq_v) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n_samples {
        let x_a = noise_a.sample(&mut rng);
        let x_v = noise_v.sample(&mut rng);
        let r = ci_single(x_a, x_v, params)?;
        sum_a += r.shat_a;
        sum_v += r.shat_v;
        sq_a += r.shat_a * r.shat_a;
        sq_v += r.shat_v * r.shat_v;
    }
    let n = n_samples as f64;
    let (mean_a, mean_v) = (sum_a / n, sum_v / n);
    let se = |sq: f64, mean: f64| {
        if n_samples < 2 {
            0.0
        } else {
            ((sq - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt()
        }
    };
    Ok(McEstimate {
        mean_a,
        mean_v,
        se_a: se(sq_a, mean_a),
        se_v: se(sq_v, mean_v),
        n_samples,
    })
}

/// One point of a disparity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub s_a: f64,
    pub s_v: f64,
    /// `s_v - s_a`.
    pub disparity: f64,
    pub mean_a: f64,
    pub mean_v: f64,
}

/// Seed used for sweep point `index`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Monte Carlo means for every visual location in `s_v_list`, auditory fixed
/// at `s_a`. Points run in parallel; each uses `point_seed(seed, index)`, so
/// results do not depend on scheduling.
pub fn ci_disparity_sweep(
    s_a: f64,
    s_v_list: &[f64],
    params: &CIParams,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    s_v_list
        .par_iter()
        .enumerate()
        .map(|(i, &s_v)| {
            let est = ci_mean_estimates(s_a, s_v, params, n_samples, point_seed(seed, i))?;
            Ok(SweepPoint {
                s_a,
                s_v,
                disparity: s_v - s_a,
                mean_a: est.mean_a,
                mean_v: est.mean_v,
            })
        })
        .collect()
}

/// Visual locations -90..=90 in 2-degree steps.
pub fn standard_sweep_locations() -> Vec<f64> {
    (-45..=45).map(|k| 2.0 * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn forced_fusion_gives_reliability_weighted_mean() {
        for rule in [EstimateRule::Analytic, EstimateRule::GridPosteriorMean] {
            let p = CIParams::new(8.1, 1.7, 1.0).with_rule(rule);
            let r = ci_single(0.0, 20.0, &p).unwrap();
            let w_v = 8.1f64.powi(2) / (8.1f64.powi(2) + 1.7f64.powi(2));
            assert_abs_diff_eq!(w_v, 0.9578, epsilon = 1e-4);
            assert_eq!(r.post_c1, 1.0);
            assert_abs_diff_eq!(r.shat_a, 20.0 * w_v, epsilon = 1e-6);
            assert_abs_diff_eq!(r.shat_a, 19.16, epsilon = 0.01);
            assert_abs_diff_eq!(r.shat_v, r.s_fused, epsilon = 1e-12);
        }
    }

    #[test]
    fn no_common_cause_segregates() {
        for rule in [EstimateRule::Analytic, EstimateRule::GridPosteriorMean] {
            let p = CIParams::new(8.1, 1.7, 0.0).with_rule(rule);
            let r = ci_single(-10.0, 25.0, &p).unwrap();
            assert_eq!(r.post_c1, 0.0);
            assert_abs_diff_eq!(r.shat_a, -10.0, epsilon = 1e-6);
            assert_abs_diff_eq!(r.shat_v, 25.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn grid_means_shrink_at_the_edge() {
        let p = CIParams::new(8.1, 1.7, 0.0).with_rule(EstimateRule::GridPosteriorMean);
        let r = ci_single(0.0, 90.0, &p).unwrap();
        assert!(r.shat_v < 89.0);
        let a = ci_single(0.0, 90.0, &p.clone().with_rule(EstimateRule::Analytic)).unwrap();
        assert_eq!(a.shat_v, 90.0);
    }

    #[test]
    fn far_off_grid_measurements_are_rejected() {
        let p = CIParams::new(1.0, 1.0, 0.5);
        assert!(matches!(ci_single(0.0, 500.0, &p), Err(ModelError::DegenerateLikelihood { .. })));
        assert!(ci_single(0.0, 95.0, &p).is_ok());
    }

    #[test]
    fn validation() {
        assert!(CIParams::new(0.0, 1.0, 0.5).validate().is_err());
        assert!(CIParams::new(1.0, 1.0, 1.5).validate().is_err());
        assert!(CIParams::new(1.0, 1.0, 0.5).with_hypotheses(vec![0.0, 1.0, 3.0]).validate().is_err());
        assert!(ci_mean_estimates(0.0, 0.0, &CIParams::new(1.0, 1.0, 0.5), 0, 1).is_err());
    }

    #[test]
    fn aligned_stimuli_have_zero_mean_bias() {
        let p = CIParams::new(8.1, 1.7, 0.5);
        let est = ci_mean_estimates(0.0, 0.0, &p, 4000, 3).unwrap();
        assert!(est.mean_a.abs() < 4.0 * est.se_a, "{est:?}");
        assert!(est.mean_v.abs() < 4.0 * est.se_v);
    }

    #[test]
    fn mc_is_seed_deterministic() {
        let p = CIParams::new(8.1, 1.7, 0.5);
        let a = ci_mean_estimates(0.0, 12.0, &p, 500, 9).unwrap();
        let b = ci_mean_estimates(0.0, 12.0, &p, 500, 9).unwrap();
        let c = ci_mean_estimates(0.0, 12.0, &p, 500, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sweep_uses_per_point_seeds() {
        let p = CIParams::new(8.1, 1.7, 0.5);
        let locs = [-10.0, 0.0, 14.0];
        let sweep = ci_disparity_sweep(0.0, &locs, &p, 300, 40).unwrap();
        for (i, pt) in sweep.iter().enumerate() {
            let direct = ci_mean_estimates(0.0, locs[i], &p, 300, 40 + i as u64).unwrap();
            assert_eq!(pt.mean_a, direct.mean_a);
            assert_eq!(pt.disparity, locs[i]);
        }
    }

    #[test]
    fn forced_fusion_mean_tracks_fusion_point() {
        let p = CIParams::new(8.1, 1.7, 1.0);
        let w_v = 8.1f64.powi(2) / (8.1f64.powi(2) + 1.7f64.powi(2));
        for s_v in [-30.0, 10.0, 40.0] {
            let est = ci_mean_estimates(0.0, s_v, &p, 2000, 1).unwrap();
            assert!((est.mean_a - w_v * s_v).abs() < 4.0 * est.se_a + 1e-9);
        }
    }

    #[test]
    fn standard_locations() {
        let l = standard_sweep_locations();
        assert_eq!(l.len(), 91);
        assert_eq!(l[0], -90.0);
        assert_eq!(l[90], 90.0);
    }

    proptest! {
        #[test]
        fn model_average_identity(x_a in -100.0f64..100.0, x_v in -100.0f64..100.0, p in 0.0f64..=1.0, grid in any::<bool>()) {
            let rule = if grid { EstimateRule::GridPosteriorMean } else { EstimateRule::Analytic };
            let params = CIParams::new(8.1, 1.7, p).with_rule(rule);
            let r = ci_single(x_a, x_v, &params).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.post_c1));
            prop_assert_eq!(r.shat_a, r.post_c1 * r.s_fused + (1.0 - r.post_c1) * r.s_a_seg);
            prop_assert_eq!(r.shat_v, r.post_c1 * r.s_fused + (1.0 - r.post_c1) * r.s_v_seg);
        }

        #[test]
        fn translation_equivariance_in_interior(x_a in -30.0f64..30.0, d in -20.0f64..20.0, k in -20i32..20) {
            let params = CIParams::new(8.1, 1.7, 0.5).with_rule(EstimateRule::GridPosteriorMean);
            let r = ci_single(x_a, x_a + d, &params).unwrap();
            let s = ci_single(x_a + k as f64, x_a + d + k as f64, &params).unwrap();
            prop_assert!((r.post_c1 - s.post_c1).abs() < 1e-6);
            prop_assert!((r.shat_a + k as f64 - s.shat_a).abs() < 1e-4);
            prop_assert!((r.shat_v + k as f64 - s.shat_v).abs() < 1e-4);
        }
    }
}

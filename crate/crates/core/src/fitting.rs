//! Fitting the initial multisensory input μ to causal-inference sweeps, and
//! the closed-form laws relating μ to the common-cause prior and to the
//! input gains.

use rayon::prelude::*;
use serde::Serialize;

use crate::causal::{ci_disparity_sweep, CIParams, SweepPoint};
use crate::error::{ModelError, Result};
use crate::grid::{Activity, SpatialGrid};
use crate::input::StimulusEvent;
use crate::network::Network;
use crate::pooling::{
    auditory_potential, divisive_normalize, multisensory_potential, peak_location, pool_all, visual_potential,
    EXP_OVERFLOW_BOUND,
};
use crate::readout::{profile_peak_and_width, LikelihoodSummary};

/// Slope denominator of the scaled logit.
pub const LOGIT_SCALE: f64 = 0.7;
/// Plane coefficients relating input gains to `c`.
pub const C_COEF_A: f64 = 0.866;
pub const C_COEF_V: f64 = -1.4025;
pub const C_INTERCEPT: f64 = 1.616;
/// Resolution of the μ search.
pub const MU_STEP: f64 = 0.05;

/// `log10(p / (1 - p)) / 0.7 + c`.
pub fn mu_from_pcommon(p_common: f64, c: f64) -> Result<f64> {
    if !(p_common > 0.0 && p_common < 1.0) {
        return Err(ModelError::InvalidParam {
            name: "p_common",
            reason: format!("logit undefined at {p_common}; need 0 < p < 1"),
        });
    }
    Ok((p_common / (1.0 - p_common)).log10() / LOGIT_SCALE + c)
}

pub fn c_from_gains(g_a: f64, g_v: f64) -> f64 {
    C_COEF_A * g_a + C_COEF_V * g_v + C_INTERCEPT
}

/// Unisensory likelihood summaries read from the noiseless pooling profiles
/// for stimuli at the grid location nearest 0.
pub fn readout_likelihoods(network: &Network) -> Result<(LikelihoodSummary, LikelihoodSummary)> {
    let grid = network.grid();
    let at = grid.center(grid.nearest_index(0.0));
    let a = network.forward(&StimulusEvent::auditory_only(at))?;
    let v = network.forward(&StimulusEvent::visual_only(at))?;
    Ok((
        profile_peak_and_width(&a.pooling.r_a, grid)?,
        profile_peak_and_width(&v.pooling.r_v, grid)?,
    ))
}

/// Oracle parameters whose likelihood widths are the network's own readouts.
pub fn oracle_params_for(network: &Network, p_common: f64) -> Result<CIParams> {
    let (a, v) = readout_likelihoods(network)?;
    let params = CIParams::new(a.sd, v.sd, p_common);
    params.validate()?;
    Ok(params)
}

/// Noiseless decodes of one audiovisual event as a function of μ.
///
/// Potentials do not depend on μ; it only scales multisensory activity by
/// `exp(μ)`, and the shared normalization divisor leaves decoded locations
/// unchanged. So the reconstruction splits into a unisensory part plus
/// `exp(μ)` times a multisensory part, precomputed once per event.
#[derive(Debug, Clone)]
pub struct MuResponse {
    uni: [Activity; 3],
    multi: [Activity; 3],
    max_potential: f64,
    grid: SpatialGrid,
}

impl MuResponse {
    pub fn new(network: &Network, s_a: f64, s_v: f64) -> Result<Self> {
        let event = StimulusEvent::audiovisual(s_a, s_v);
        let input = network.input::<rand_chacha::ChaCha8Rng>(&event, &network.fresh_adaptation(), None)?;
        let w = network.weights();
        let guard = |v: Activity, population: &'static str| -> Result<Activity> {
            match v.iter().find(|&&x| !(x <= EXP_OVERFLOW_BOUND)) {
                Some(&value) => Err(ModelError::Overflow {
                    population,
                    value,
                    bound: EXP_OVERFLOW_BOUND,
                }),
                None => Ok(v.mapv(f64::exp)),
            }
        };
        let r_a = guard(auditory_potential(&input, w)?, "auditory")?;
        let r_v = guard(visual_potential(&input, w)?, "visual")?;
        let v_m = multisensory_potential(&input, w, 0.0)?;
        let max_potential = v_m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let r_m = guard(v_m, "multisensory")?;
        Ok(Self {
            uni: [w.w_l.dot(&r_a), w.w_r.dot(&r_a), w.w_v.dot(&r_v)],
            multi: [w.w_ml.dot(&r_m), w.w_mr.dot(&r_m), w.w_mv.dot(&r_m)],
            max_potential,
            grid: network.grid().clone(),
        })
    }

    /// Decoded (auditory, visual) locations at multisensory input `mu`.
    pub fn decode(&self, mu: f64) -> Result<(f64, f64)> {
        if !(self.max_potential + mu <= EXP_OVERFLOW_BOUND) {
            return Err(ModelError::Overflow {
                population: "multisensory",
                value: self.max_potential + mu,
                bound: EXP_OVERFLOW_BOUND,
            });
        }
        let k = mu.exp();
        let rho = |i: usize| &self.uni[i] + &(&self.multi[i] * k);
        let (l, r, v) = (rho(0), rho(1), rho(2));
        Ok((peak_location(&(&l * &r), &self.grid), peak_location(&v, &self.grid)))
    }
}

/// Noiseless network decodes over a disparity sweep.
pub fn network_sweep(network: &Network, s_a: f64, s_v_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    s_v_list.iter().map(|&s_v| network.decode_av(s_a, s_v)).collect()
}

/// Reference decode of a pass at an explicit μ, through the full pipeline.
pub fn decode_at_mu(network: &Network, s_a: f64, s_v: f64, mu: f64) -> Result<(f64, f64)> {
    let event = StimulusEvent::audiovisual(s_a, s_v);
    let input = network.input::<rand_chacha::ChaCha8Rng>(&event, &network.fresh_adaptation(), None)?;
    let pooled = divisive_normalize(&pool_all(&input, network.weights(), mu)?)?;
    let recon = crate::network::reconstruct(&pooled, network.weights());
    Ok((
        crate::network::decode_auditory(&recon, network.grid())?,
        crate::network::decode_visual(&recon, network.grid())?,
    ))
}

/// Candidate μ values: multiples of `step` within `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuLattice {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl MuLattice {
    /// `[center - half_width, center + half_width]` snapped outward to
    /// multiples of `step`.
    pub fn around(center: f64, half_width: f64, step: f64) -> Self {
        Self {
            lo: ((center - half_width) / step).floor() * step,
            hi: ((center + half_width) / step).ceil() * step,
            step,
        }
    }

    /// Default search window seeded by the gain law.
    pub fn for_gains(g_a: f64, g_v: f64) -> Self {
        Self::around(c_from_gains(g_a, g_v), 5.0, MU_STEP)
    }

    pub fn values(&self) -> Vec<f64> {
        let first = (self.lo / self.step - 1e-9).ceil() as i64;
        let last = (self.hi / self.step + 1e-9).floor() as i64;
        (first..=last).map(|k| k as f64 * self.step).collect()
    }
}

/// Outcome of a μ fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub mu: f64,
    pub rmse_a: f64,
    pub rmse_v: f64,
    /// `sqrt((rmse_a^2 + rmse_v^2) / 2)`.
    pub objective: f64,
    pub p_common: f64,
    /// Network decodes at the best μ, one per sweep point.
    pub decodes: Vec<(f64, f64)>,
}

fn residuals(decodes: &[(f64, f64)], oracle: &[SweepPoint]) -> (f64, f64) {
    let n = oracle.len() as f64;
    let (mut sa, mut sv) = (0.0, 0.0);
    for (d, o) in decodes.iter().zip(oracle) {
        sa += (d.0 - o.mean_a).powi(2);
        sv += (d.1 - o.mean_v).powi(2);
    }
    ((sa / n).sqrt(), (sv / n).sqrt())
}

/// Grid search of μ against an already computed oracle sweep.
pub fn fit_mu_to_oracle(network: &Network, oracle: &[SweepPoint], lattice: MuLattice, p_common: f64) -> Result<FitResult> {
    if oracle.is_empty() {
        return Err(ModelError::InvalidInput("oracle sweep is empty".into()));
    }
    let candidates = lattice.values();
    if candidates.len() < 3 {
        return Err(ModelError::InvalidInput("μ lattice needs at least three candidates".into()));
    }
    let responses: Vec<MuResponse> = oracle
        .par_iter()
        .map(|pt| MuResponse::new(network, pt.s_a, pt.s_v))
        .collect::<Result<_>>()?;
    let scores: Vec<(f64, f64, f64)> = candidates
        .par_iter()
        .map(|&mu| {
            let decodes: Vec<(f64, f64)> = responses.iter().map(|r| r.decode(mu)).collect::<Result<_>>()?;
            let (ra, rv) = residuals(&decodes, oracle);
            Ok((ra, rv, ((ra * ra + rv * rv) / 2.0).sqrt()))
        })
        .collect::<Result<_>>()?;

    // first minimum in ascending order: ties go to the smaller μ
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.2 < scores[best].2 {
            best = i;
        }
    }
    let mu = candidates[best];
    if best == 0 || best == candidates.len() - 1 {
        return Err(ModelError::FitOnBoundary {
            mu,
            lo: candidates[0],
            hi: candidates[candidates.len() - 1],
        });
    }
    let decodes = responses.iter().map(|r| r.decode(mu)).collect::<Result<_>>()?;
    let (rmse_a, rmse_v, objective) = scores[best];
    Ok(FitResult {
        mu,
        rmse_a,
        rmse_v,
        objective,
        p_common,
        decodes,
    })
}

/// Disparity sweep definition shared by the oracle and the network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub s_a: f64,
    pub s_v: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            s_a: 0.0,
            s_v: crate::causal::standard_sweep_locations(),
            n_samples: 10_000,
            seed: 1,
        }
    }
}

/// Oracle sweep with likelihood widths read from `network`.
pub fn oracle_sweep(network: &Network, p_common: f64, sweep: &SweepSpec) -> Result<Vec<SweepPoint>> {
    let params = oracle_params_for(network, p_common)?;
    ci_disparity_sweep(sweep.s_a, &sweep.s_v, &params, sweep.n_samples, sweep.seed)
}

/// Runs the oracle sweep and fits μ on the default lattice for the
/// network's gains.
pub fn fit_mu(p_common: f64, network: &Network, sweep: &SweepSpec) -> Result<(FitResult, Vec<SweepPoint>)> {
    let oracle = oracle_sweep(network, p_common, sweep)?;
    let p = network.params();
    let fit = fit_mu_to_oracle(network, &oracle, MuLattice::for_gains(p.g_a, p.g_v), p_common)?;
    Ok((fit, oracle))
}

/// Least-squares `c` for `μ = log10(p/(1-p))/0.7 + c`, and the RMS residual.
pub fn fit_logit_curve(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(ModelError::InvalidInput("need at least three (p, μ) points".into()));
    }
    let shifted: Vec<f64> = points
        .iter()
        .map(|&(p, mu)| mu_from_pcommon(p, 0.0).map(|base| mu - base))
        .collect::<Result<_>>()?;
    let c = shifted.iter().sum::<f64>() / shifted.len() as f64;
    let rmse = (shifted.iter().map(|s| (s - c).powi(2)).sum::<f64>() / shifted.len() as f64).sqrt();
    Ok((c, rmse))
}

/// Ordinary least-squares plane `c = a g_A + b g_V + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneFit {
    pub coef_a: f64,
    pub coef_v: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_c_plane(samples: &[(f64, f64, f64)]) -> Result<PlaneFit> {
    if samples.len() < 4 {
        return Err(ModelError::InvalidInput("need at least four (g_A, g_V, c) samples".into()));
    }
    let n = samples.len() as f64;
    let mean = |f: fn(&(f64, f64, f64)) -> f64| samples.iter().map(f).sum::<f64>() / n;
    let (ma, mv, mc) = (mean(|s| s.0), mean(|s| s.1), mean(|s| s.2));
    // centered normal equations
    let (mut saa, mut svv, mut sav, mut sac, mut svc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(a, v, c) in samples {
        let (a, v, c) = (a - ma, v - mv, c - mc);
        saa += a * a;
        svv += v * v;
        sav += a * v;
        sac += a * c;
        svc += v * c;
    }
    let det = saa * svv - sav * sav;
    if !(det > 1e-10 * (saa * svv).max(f64::MIN_POSITIVE)) {
        return Err(ModelError::RankDeficient);
    }
    let coef_a = (sac * svv - svc * sav) / det;
    let coef_v = (svc * saa - sac * sav) / det;
    let intercept = mc - coef_a * ma - coef_v * mv;
    let predicted: Vec<f64> = samples.iter().map(|s| coef_a * s.0 + coef_v * s.1 + intercept).collect();
    let observed: Vec<f64> = samples.iter().map(|s| s.2).collect();
    Ok(PlaneFit {
        coef_a,
        coef_v,
        intercept,
        r2: r_squared(&observed, &predicted),
    })
}

/// Coefficient of determination of `predicted` against `observed`.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> f64 {
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let ss_tot: f64 = observed.iter().map(|o| (o - mean).powi(2)).sum();
    let ss_res: f64 = observed.iter().zip(predicted).map(|(o, p)| (o - p).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { f64::NEG_INFINITY };
    }
    1.0 - ss_res / ss_tot
}

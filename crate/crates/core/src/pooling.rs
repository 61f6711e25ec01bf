//! Intermediate pooling layer: fixed feedforward weights, exponential
//! units and divisive normalization across the three pooling populations.

use ndarray::{Array2, ArrayView1};

use crate::error::{ModelError, Result};
use crate::grid::{Activity, NetworkParams, SpatialGrid};
use crate::input::InputActivity;

/// Largest membrane potential accepted before `exp` would overflow.
pub const EXP_OVERFLOW_BOUND: f64 = 700.0;

/// Feedforward weights, indexed `[input unit i, pooling unit j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingWeights {
    pub w_l: Array2<f64>,
    pub w_r: Array2<f64>,
    pub w_v: Array2<f64>,
    pub w_ml: Array2<f64>,
    pub w_mr: Array2<f64>,
    pub w_mv: Array2<f64>,
}

/// The parameter subset the weight matrices depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct WeightKey {
    m: f64,
    sigma: f64,
    a: f64,
    v: f64,
    a_m: f64,
    v_m: f64,
}

impl WeightKey {
    pub(crate) fn of(p: &NetworkParams) -> Self {
        Self {
            m: p.m,
            sigma: p.sigma,
            a: p.a,
            v: p.v,
            a_m: p.a_m,
            v_m: p.v_m,
        }
    }
}

/// Builds all six weight matrices. Sigmoid weights use plain differences,
/// Gaussian weights use wrapped distance.
pub fn build_weights(params: &NetworkParams, grid: &SpatialGrid) -> PoolingWeights {
    let n = grid.len();
    let x = grid.centers();
    let n_l = n as f64;
    let n_r = n as f64;
    let m = params.m;
    let two_var = 2.0 * params.sigma * params.sigma;
    let gauss_norm = params.sigma * (2.0 * std::f64::consts::PI).sqrt();

    let left = Array2::from_shape_fn((n, n), |(i, j)| 1.0 / (1.0 + (-(x[i] - x[j]) / m).exp()));
    let right = Array2::from_shape_fn((n, n), |(i, j)| 1.0 / (1.0 + ((x[i] - x[j]) / m).exp()));
    let gauss = Array2::from_shape_fn((n, n), |(i, j)| {
        let d = grid.distance(x[i], x[j]);
        (-d * d / two_var).exp() / gauss_norm
    });

    PoolingWeights {
        w_l: &left * (params.a / n_l),
        w_r: &right * (params.a / n_r),
        w_v: &gauss * params.v,
        w_ml: &left * (params.a_m / n_l),
        w_mr: &right * (params.a_m / n_r),
        w_mv: &gauss * params.v_m,
    }
}

/// Activity of the auditory, visual and multisensory pooling populations.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingActivity {
    pub r_a: Activity,
    pub r_v: Activity,
    pub r_m: Activity,
    pub normalized: bool,
}

fn weighted_sum(theta: &Activity, w: &Array2<f64>) -> Result<Activity> {
    if theta.len() != w.nrows() {
        return Err(ModelError::LengthMismatch {
            expected: w.nrows(),
            actual: theta.len(),
        });
    }
    Ok(theta.dot(w))
}

fn exp_guarded(v: Activity, population: &'static str) -> Result<Activity> {
    if let Some(&bad) = v.iter().find(|&&x| !(x <= EXP_OVERFLOW_BOUND)) {
        return Err(ModelError::Overflow {
            population,
            value: bad,
            bound: EXP_OVERFLOW_BOUND,
        });
    }
    Ok(v.mapv(f64::exp))
}

pub fn auditory_potential(input: &InputActivity, w: &PoolingWeights) -> Result<Activity> {
    Ok(weighted_sum(&input.theta_l, &w.w_l)? + weighted_sum(&input.theta_r, &w.w_r)?)
}

pub fn visual_potential(input: &InputActivity, w: &PoolingWeights) -> Result<Activity> {
    weighted_sum(&input.theta_v, &w.w_v)
}

pub fn multisensory_potential(input: &InputActivity, w: &PoolingWeights, mu: f64) -> Result<Activity> {
    let v = weighted_sum(&input.theta_v, &w.w_mv)?
        + weighted_sum(&input.theta_l, &w.w_ml)?
        + weighted_sum(&input.theta_r, &w.w_mr)?;
    Ok(v + mu)
}

pub fn pool_unisensory_auditory(input: &InputActivity, w: &PoolingWeights) -> Result<Activity> {
    exp_guarded(auditory_potential(input, w)?, "auditory")
}

pub fn pool_unisensory_visual(input: &InputActivity, w: &PoolingWeights) -> Result<Activity> {
    exp_guarded(visual_potential(input, w)?, "visual")
}

pub fn pool_multisensory(input: &InputActivity, w: &PoolingWeights, mu: f64) -> Result<Activity> {
    exp_guarded(multisensory_potential(input, w, mu)?, "multisensory")
}

/// Runs all three pooling populations (unnormalized).
pub fn pool_all(input: &InputActivity, w: &PoolingWeights, mu: f64) -> Result<PoolingActivity> {
    Ok(PoolingActivity {
        r_a: pool_unisensory_auditory(input, w)?,
        r_v: pool_unisensory_visual(input, w)?,
        r_m: pool_multisensory(input, w, mu)?,
        normalized: false,
    })
}

/// Divides every pooling unit by `1 + mean activity over the whole layer`.
pub fn divisive_normalize(pooling: &PoolingActivity) -> Result<PoolingActivity> {
    if pooling.normalized {
        return Err(ModelError::InvalidInput("pooling activity is already normalized".into()));
    }
    let units = (pooling.r_a.len() + pooling.r_v.len() + pooling.r_m.len()) as f64;
    let total = pooling.r_a.sum() + pooling.r_v.sum() + pooling.r_m.sum();
    let divisor = 1.0 + total / units;
    Ok(PoolingActivity {
        r_a: &pooling.r_a / divisor,
        r_v: &pooling.r_v / divisor,
        r_m: &pooling.r_m / divisor,
        normalized: true,
    })
}

/// Share of multisensory and auditory activity in their combined total.
pub fn relatedness_index(pooling: &PoolingActivity) -> (f64, f64) {
    let sm = pooling.r_m.sum();
    let sa = pooling.r_a.sum();
    let p_m = sm / (sm + sa);
    (p_m, 1.0 - p_m)
}

/// Indices holding the maximum value (exact ties).
pub fn argmax_indices(values: ArrayView1<'_, f64>) -> Vec<usize> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == max)
        .map(|(i, _)| i)
        .collect()
}

/// Grid location of a profile's maximum (tied maxima resolved by the grid's
/// tie rule).
pub fn peak_location(values: &Activity, grid: &SpatialGrid) -> f64 {
    grid.tie_location(&argmax_indices(values.view()))
}

//! Input layer: sigmoidally tuned auditory units (left and right
//! subpopulations) and Gaussian tuned visual units.

use ndarray::{Array1, Zip};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::grid::{Activity, NetworkParams, SpatialGrid};
use crate::recalibration::AdaptationState;

/// One trial's stimuli. At least one modality must be present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulusEvent {
    pub auditory: Option<f64>,
    pub visual: Option<f64>,
}

impl StimulusEvent {
    pub fn audiovisual(s_a: f64, s_v: f64) -> Self {
        Self {
            auditory: Some(s_a),
            visual: Some(s_v),
        }
    }

    pub fn auditory_only(s_a: f64) -> Self {
        Self {
            auditory: Some(s_a),
            visual: None,
        }
    }

    pub fn visual_only(s_v: f64) -> Self {
        Self {
            auditory: None,
            visual: Some(s_v),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.auditory.is_none() && self.visual.is_none() {
            return Err(ModelError::EmptyEvent);
        }
        for loc in self.auditory.iter().chain(self.visual.iter()) {
            if !loc.is_finite() {
                return Err(ModelError::InvalidInput(format!("stimulus location {loc} is not finite")));
            }
        }
        Ok(())
    }

    /// The same event reflected about the midline.
    pub fn mirrored(&self) -> Self {
        Self {
            auditory: self.auditory.map(|s| -s),
            visual: self.visual.map(|s| -s),
        }
    }
}

/// Activity of the three input subpopulations.
#[derive(Debug, Clone, PartialEq)]
pub struct InputActivity {
    pub theta_l: Activity,
    pub theta_r: Activity,
    pub theta_v: Activity,
}

impl InputActivity {
    pub fn zeros(n: usize) -> Self {
        Self {
            theta_l: Array1::zeros(n),
            theta_r: Array1::zeros(n),
            theta_v: Array1::zeros(n),
        }
    }
}

fn check_alpha(alpha: &Activity, grid: &SpatialGrid) -> Result<()> {
    grid.check_len(alpha.len())?;
    if alpha.iter().any(|&a| !(a > 0.0)) {
        return Err(ModelError::InvalidInput("adaptation weights must be > 0".into()));
    }
    Ok(())
}

/// Leftward-tuned auditory units: `alpha * g_a / (1 + exp((s_a - x) / m))`.
pub fn auditory_left_response(
    s_a: f64,
    params: &NetworkParams,
    alpha_l: &Activity,
    grid: &SpatialGrid,
) -> Result<Activity> {
    check_alpha(alpha_l, grid)?;
    Ok(Zip::from(alpha_l)
        .and(grid.centers())
        .map_collect(|&alpha, &x| alpha * params.g_a / (1.0 + ((s_a - x) / params.m).exp())))
}

/// Rightward-tuned auditory units: the mirror image of the left population.
pub fn auditory_right_response(
    s_a: f64,
    params: &NetworkParams,
    alpha_r: &Activity,
    grid: &SpatialGrid,
) -> Result<Activity> {
    check_alpha(alpha_r, grid)?;
    Ok(Zip::from(alpha_r)
        .and(grid.centers())
        .map_collect(|&alpha, &x| alpha * params.g_a / (1.0 + (-(s_a - x) / params.m).exp())))
}

/// Gaussian visual tuning on wrapped distance. Visual units carry no
/// adaptation weight.
pub fn visual_response(s_v: f64, params: &NetworkParams, grid: &SpatialGrid) -> Activity {
    let two_var = 2.0 * params.sigma * params.sigma;
    grid.centers()
        .iter()
        .map(|&x| {
            let d = grid.distance(s_v, x);
            params.g_v * (-d * d / two_var).exp()
        })
        .collect()
}

/// Replaces every entry by an independent Poisson draw with that entry as
/// its mean. Zero means stay exactly zero.
pub fn apply_poisson_noise<R: Rng + ?Sized>(activity: &Activity, rng: &mut R) -> Result<Activity> {
    activity
        .iter()
        .map(|&lambda| {
            if lambda == 0.0 {
                Ok(0.0)
            } else if lambda > 0.0 && lambda.is_finite() {
                let dist = Poisson::new(lambda)
                    .map_err(|e| ModelError::InvalidInput(format!("poisson mean {lambda}: {e}")))?;
                Ok(dist.sample(rng))
            } else {
                Err(ModelError::InvalidInput(format!("activity {lambda} is not a valid Poisson mean")))
            }
        })
        .collect::<Result<Vec<f64>>>()
        .map(Array1::from)
}

/// Input activity for an event. Absent modalities produce all-zero
/// activity; noise, if requested, is applied after adaptation scaling.
pub fn input_for_event<R: Rng + ?Sized>(
    event: &StimulusEvent,
    params: &NetworkParams,
    adaptation: &AdaptationState,
    grid: &SpatialGrid,
    noise: Option<&mut R>,
) -> Result<InputActivity> {
    event.validate()?;
    let mut out = InputActivity::zeros(grid.len());
    if let Some(s_a) = event.auditory {
        out.theta_l = auditory_left_response(s_a, params, &adaptation.alpha_l, grid)?;
        out.theta_r = auditory_right_response(s_a, params, &adaptation.alpha_r, grid)?;
    }
    if let Some(s_v) = event.visual {
        out.theta_v = visual_response(s_v, params, grid);
    }
    if let Some(rng) = noise {
        out.theta_l = apply_poisson_noise(&out.theta_l, rng)?;
        out.theta_r = apply_poisson_noise(&out.theta_r, rng)?;
        out.theta_v = apply_poisson_noise(&out.theta_v, rng)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ones(grid: &SpatialGrid) -> Activity {
        Array1::ones(grid.len())
    }

    #[test]
    fn left_sigmoid_values() {
        let grid = SpatialGrid::standard();
        let p = NetworkParams::default();
        let i0 = grid.nearest_index(0.0);
        let theta = auditory_left_response(0.0, &p, &ones(&grid), &grid).unwrap();
        assert_abs_diff_eq!(theta[i0], 70.0, epsilon = 1e-12);
        // s_a - x = +m
        let i = grid.nearest_index(-20.0);
        assert_abs_diff_eq!(theta[i], 140.0 / (1.0 + std::f64::consts::E), epsilon = 1e-12);
        assert_abs_diff_eq!(theta[i], 37.65, epsilon = 0.01);
        // far left stimulus saturates every unit near the right end
        let far = auditory_left_response(-1000.0, &p, &ones(&grid), &grid).unwrap();
        assert_abs_diff_eq!(far[300], 140.0, epsilon = 1e-9);
    }

    #[test]
    fn right_sigmoid_values() {
        let grid = SpatialGrid::standard();
        let p = NetworkParams::default();
        let i0 = grid.nearest_index(0.0);
        let r = auditory_right_response(0.0, &p, &ones(&grid), &grid).unwrap();
        assert_abs_diff_eq!(r[i0], 70.0, epsilon = 1e-12);
        let r5 = auditory_right_response(5.0, &p, &ones(&grid), &grid).unwrap();
        let l5 = auditory_left_response(-5.0, &p, &ones(&grid), &grid).unwrap();
        assert_abs_diff_eq!(r5[i0], l5[i0], epsilon = 1e-12);
        let far = auditory_right_response(1000.0, &p, &ones(&grid), &grid).unwrap();
        assert_abs_diff_eq!(far[0], 140.0, epsilon = 1e-9);
    }

    #[test]
    fn left_response_decreases_with_stimulus() {
        let grid = SpatialGrid::standard();
        let p = NetworkParams::default();
        let a = auditory_left_response(-10.0, &p, &ones(&grid), &grid).unwrap();
        let b = auditory_left_response(10.0, &p, &ones(&grid), &grid).unwrap();
        assert!(a.iter().zip(b.iter()).all(|(x, y)| x >= y));
    }

    #[test]
    fn visual_values() {
        let grid = SpatialGrid::standard();
        let p = NetworkParams::default();
        let v = visual_response(0.0, &p, &grid);
        let i0 = grid.nearest_index(0.0);
        assert_abs_diff_eq!(v[i0], 80.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[grid.nearest_index(20.0)], 80.0 * (-0.5f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(v[i0 + 20], 48.52, epsilon = 0.01);
        let wrapped = visual_response(150.0, &p, &grid);
        assert_abs_diff_eq!(wrapped[0], 80.0 * (-1.0f64 / 800.0).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(wrapped[0], 79.90, epsilon = 0.01);
    }

    #[test]
    fn poisson_zero_and_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let zeros = Array1::zeros(50);
        assert!(apply_poisson_noise(&zeros, &mut rng).unwrap().iter().all(|&v| v == 0.0));

        let n = 100_000;
        let base = Array1::from_elem(n, 70.0);
        let draws = apply_poisson_noise(&base, &mut rng).unwrap();
        let mean = draws.mean().unwrap();
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 70.0).abs() < 0.7, "mean {mean}");
        assert!((var - 70.0).abs() < 3.0, "variance {var}");
        assert!(draws.iter().all(|d| d.fract() == 0.0 && *d >= 0.0));
    }

    #[test]
    fn poisson_is_seed_reproducible() {
        let grid = SpatialGrid::standard();
        let p = NetworkParams::default();
        let adapt = AdaptationState::new(grid.len(), 0.0, 0.0);
        let ev = StimulusEvent::audiovisual(3.0, -7.0);
        let a = input_for_event(&ev, &p, &adapt, &grid, Some(&mut ChaCha8Rng::seed_from_u64(5))).unwrap();
        let b = input_for_event(&ev, &p, &adapt, &grid, Some(&mut ChaCha8Rng::seed_from_u64(5))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn absent_modalities_are_silent() {
        let grid = SpatialGrid::standard();
        let p = NetworkParams::default();
        let adapt = AdaptationState::new(grid.len(), 0.0, 0.0);
        let a_only = input_for_event::<ChaCha8Rng>(&StimulusEvent::auditory_only(0.0), &p, &adapt, &grid, None).unwrap();
        assert!(a_only.theta_v.iter().all(|&v| v == 0.0));
        let v_only = input_for_event::<ChaCha8Rng>(&StimulusEvent::visual_only(0.0), &p, &adapt, &grid, None).unwrap();
        assert!(v_only.theta_l.iter().chain(v_only.theta_r.iter()).all(|&v| v == 0.0));
        let empty = StimulusEvent {
            auditory: None,
            visual: None,
        };
        assert_eq!(
            input_for_event::<ChaCha8Rng>(&empty, &p, &adapt, &grid, None),
            Err(ModelError::EmptyEvent)
        );
    }

    #[test]
    fn av_event_at_center_is_mirror_symmetric() {
        let grid = SpatialGrid::standard();
        let p = NetworkParams::default();
        let adapt = AdaptationState::new(grid.len(), 0.0, 0.0);
        let inp = input_for_event::<ChaCha8Rng>(&StimulusEvent::audiovisual(0.0, 0.0), &p, &adapt, &grid, None).unwrap();
        let n = grid.len();
        for i in 0..n {
            assert_abs_diff_eq!(inp.theta_l[i], inp.theta_r[n - 1 - i], epsilon = 1e-12);
            assert_abs_diff_eq!(inp.theta_v[i], inp.theta_v[n - 1 - i], epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        let grid = SpatialGrid::standard();
        let mut alpha = ones(&grid);
        alpha[3] = 0.0;
        assert!(auditory_left_response(0.0, &NetworkParams::default(), &alpha, &grid).is_err());
        let short = Array1::ones(10);
        assert!(matches!(
            auditory_right_response(0.0, &NetworkParams::default(), &short, &grid),
            Err(ModelError::LengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn negating_stimulus_swaps_left_and_right(s in -90.0f64..90.0) {
            let grid = SpatialGrid::standard();
            let p = NetworkParams::default();
            let one = ones(&grid);
            let l = auditory_left_response(s, &p, &one, &grid).unwrap();
            let r_neg = auditory_right_response(-s, &p, &one, &grid).unwrap();
            let n = grid.len();
            for i in 0..n {
                prop_assert!((l[i] - r_neg[n - 1 - i]).abs() < 1e-9);
            }
        }

        #[test]
        fn complementary_sigmoids_sum_to_gain(s in -150.0f64..150.0, g in 10.0f64..300.0) {
            let grid = SpatialGrid::standard();
            let p = NetworkParams { g_a: g, ..Default::default() };
            let one = ones(&grid);
            let l = auditory_left_response(s, &p, &one, &grid).unwrap();
            let r = auditory_right_response(s, &p, &one, &grid).unwrap();
            for i in 0..grid.len() {
                prop_assert!((l[i] + r[i] - g).abs() < 1e-9);
            }
        }

        #[test]
        fn visual_translation_equivariance(s in -150i32..150, k in -300i32..300) {
            let grid = SpatialGrid::standard();
            let p = NetworkParams::default();
            let base = visual_response(s as f64, &p, &grid);
            let shifted = visual_response((s + k) as f64, &p, &grid);
            let n = grid.len() as i32;
            for i in 0..n {
                let j = (i + k).rem_euclid(n);
                prop_assert!((base[i as usize] - shifted[j as usize]).abs() < 1e-9);
            }
        }
    }
}

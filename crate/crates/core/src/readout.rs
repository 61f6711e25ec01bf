//! Likelihood summary (peak and width) read from a unisensory pooling
//! profile.

use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::grid::{Activity, SpatialGrid};
use crate::pooling::argmax_indices;

/// Ratio between the full width at half maximum and the standard deviation
/// of a Gaussian, `2 * sqrt(2 ln 2)` (about 2.355).
pub const FWHM_PER_SD: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LikelihoodSummary {
    /// Location of the profile maximum (degrees).
    pub xhat: f64,
    /// Width of the equivalent Gaussian likelihood (degrees).
    pub sd: f64,
    /// RMS residual between the max-normalized profile and a unit-peak
    /// Gaussian with the same peak and width.
    pub fit_rmse: f64,
}

/// Linear interpolation of the half-maximum crossing between samples
/// `inside` (>= 0.5) and `outside` (< 0.5).
fn crossing(grid: &SpatialGrid, p: &[f64], inside: usize, outside: usize) -> f64 {
    let (xi, xo) = (grid.center(inside), grid.center(outside));
    let t = (p[inside] - 0.5) / (p[inside] - p[outside]);
    xi + t * (xo - xi)
}

pub fn profile_peak_and_width(activity: &Activity, grid: &SpatialGrid) -> Result<LikelihoodSummary> {
    grid.check_len(activity.len())?;
    let max = activity.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max.is_finite() && max > 0.0) {
        return Err(ModelError::DegenerateProfile(format!("maximum {max} must be finite and positive")));
    }
    let p: Vec<f64> = activity.iter().map(|a| a / max).collect();
    let tied = argmax_indices(activity.view());
    let xhat = tied.iter().map(|&i| grid.center(i)).sum::<f64>() / tied.len() as f64;

    let first = tied[0];
    let last = tied[tied.len() - 1];
    let left = (0..first)
        .rev()
        .find(|&i| p[i] < 0.5)
        .ok_or(ModelError::ProfileClipped("left"))?;
    let right = (last + 1..p.len())
        .find(|&i| p[i] < 0.5)
        .ok_or(ModelError::ProfileClipped("right"))?;
    let x_left = crossing(grid, &p, left + 1, left);
    let x_right = crossing(grid, &p, right - 1, right);
    let sd = (x_right - x_left) / FWHM_PER_SD;
    if !(sd > 0.0) {
        return Err(ModelError::DegenerateProfile(format!("non-positive width {sd}")));
    }

    let two_var = 2.0 * sd * sd;
    let sse: f64 = grid
        .centers()
        .iter()
        .zip(&p)
        .map(|(&x, &pi)| {
            let g = (-(x - xhat).powi(2) / two_var).exp();
            (pi - g).powi(2)
        })
        .sum();
    let fit_rmse = (sse / p.len() as f64).sqrt();
    Ok(LikelihoodSummary { xhat, sd, fit_rmse })
}

pub fn gaussian_fit_rmse(activity: &Activity, grid: &SpatialGrid) -> Result<f64> {
    profile_peak_and_width(activity, grid).map(|s| s.fit_rmse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian(grid: &SpatialGrid, mean: f64, sd: f64, scale: f64) -> Activity {
        grid.centers()
            .iter()
            .map(|&x| scale * (-(x - mean).powi(2) / (2.0 * sd * sd)).exp())
            .collect()
    }

    #[test]
    fn fwhm_constant() {
        assert_abs_diff_eq!(FWHM_PER_SD, 2.0 * (2.0 * std::f64::consts::LN_2).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn self_fit_of_exact_gaussian() {
        // half maximum exactly on the grid points +/-5, so interpolation is exact
        let grid = SpatialGrid::standard();
        let sd = 10.0 / FWHM_PER_SD;
        let s = profile_peak_and_width(&gaussian(&grid, 0.0, sd, 3.5e40), &grid).unwrap();
        assert_eq!(s.xhat, 0.0);
        assert_abs_diff_eq!(s.sd, sd, epsilon = 1e-9);
        assert!(s.fit_rmse < 1e-9, "rmse {}", s.fit_rmse);
    }

    #[test]
    fn off_grid_gaussian_is_close() {
        let grid = SpatialGrid::standard();
        let s = profile_peak_and_width(&gaussian(&grid, 0.0, 8.0, 1.0), &grid).unwrap();
        assert_abs_diff_eq!(s.sd, 8.0, epsilon = 0.01);
        assert!(gaussian_fit_rmse(&gaussian(&grid, 0.0, 8.0, 1.0), &grid).unwrap() < 1e-3);
    }

    #[test]
    fn ties_average_the_peak() {
        let grid = SpatialGrid::new(11, -5.0, 5.0).unwrap();
        let prof = Activity::from(vec![0.0, 0.0, 0.1, 0.4, 1.0, 1.0, 0.4, 0.1, 0.0, 0.0, 0.0]);
        let s = profile_peak_and_width(&prof, &grid).unwrap();
        assert_abs_diff_eq!(s.xhat, -0.5, epsilon = 1e-12);
        // crossings at -1 - 5/6 and 5/6
        assert_abs_diff_eq!(s.sd, (5.0 / 6.0 - (-1.0 - 5.0 / 6.0)) / FWHM_PER_SD, epsilon = 1e-12);
    }

    #[test]
    fn clipped_profiles_are_rejected() {
        let grid = SpatialGrid::standard();
        let wide = gaussian(&grid, 140.0, 30.0, 1.0);
        assert_eq!(profile_peak_and_width(&wide, &grid), Err(ModelError::ProfileClipped("right")));
        let flat = Activity::ones(grid.len());
        assert!(profile_peak_and_width(&flat, &grid).is_err());
        let zero = Activity::zeros(grid.len());
        assert!(matches!(profile_peak_and_width(&zero, &grid), Err(ModelError::DegenerateProfile(_))));
    }
}

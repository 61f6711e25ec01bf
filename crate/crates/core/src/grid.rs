//! Spatial discretization shared by every population, plus the network
//! parameter record.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Activity of one population, indexed by unit.
pub type Activity = ndarray::Array1<f64>;

/// Circular distance between two azimuths on a ring of circumference `wrap`.
///
/// At exactly `wrap / 2` both branches agree, so the result is continuous.
pub fn wrapped_distance(a: f64, b: f64, wrap: f64) -> f64 {
    let d = (a - b).abs();
    if d < wrap / 2.0 {
        d
    } else {
        // Points further apart than one full turn are folded back first.
        let d = d % wrap;
        d.min(wrap - d)
    }
}

/// Uniformly spaced unit centers (degrees azimuth) with a wrap length.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    centers: Vec<f64>,
    step: f64,
    wrap: f64,
}

impl SpatialGrid {
    /// `n` centers from `lo` to `hi` inclusive. The wrap length is `n * step`,
    /// i.e. 301 for the default 1-degree grid.
    pub fn new(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 {
            return Err(ModelError::InvalidGrid(format!("need at least 2 units, got {n}")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(ModelError::InvalidGrid(format!("bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let centers = (0..n).map(|i| lo + step * i as f64).collect();
        Ok(Self {
            centers,
            step,
            wrap: step * n as f64,
        })
    }

    /// Builds a grid from explicit centers, rejecting anything that is not
    /// strictly increasing with uniform spacing.
    pub fn from_centers(centers: Vec<f64>) -> Result<Self> {
        if centers.len() < 2 {
            return Err(ModelError::InvalidGrid("need at least 2 centers".into()));
        }
        let step = centers[1] - centers[0];
        if !(step > 0.0) {
            return Err(ModelError::InvalidGrid("centers must be strictly increasing".into()));
        }
        for w in centers.windows(2) {
            if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
                return Err(ModelError::InvalidGrid(format!(
                    "non-uniform spacing: {} then {}",
                    step,
                    w[1] - w[0]
                )));
            }
        }
        let wrap = step * centers.len() as f64;
        Ok(Self { centers, step, wrap })
    }

    /// The 301-unit grid from -150 to 150 degrees used throughout.
    pub fn standard() -> Self {
        Self::new(301, -150.0, 150.0).expect("standard grid is valid")
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn center(&self, i: usize) -> f64 {
        self.centers[i]
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn wrap(&self) -> f64 {
        self.wrap
    }

    pub fn lo(&self) -> f64 {
        self.centers[0]
    }

    pub fn hi(&self) -> f64 {
        self.centers[self.centers.len() - 1]
    }

    pub fn distance(&self, a: f64, b: f64) -> f64 {
        wrapped_distance(a, b, self.wrap)
    }

    /// Index of the center nearest to `x` (clamped to the grid).
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x - self.lo()) / self.step).round();
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Location for a set of tied maximal indices: the mean of the tied
    /// centers, snapped to the grid point nearest zero when it falls between
    /// two centers.
    pub fn tie_location(&self, tied: &[usize]) -> f64 {
        debug_assert!(!tied.is_empty());
        let mean_index = tied.iter().sum::<usize>() as f64 / tied.len() as f64;
        let lower = mean_index.floor();
        if (mean_index - lower).abs() < 1e-12 {
            return self.center(lower as usize);
        }
        let a = self.center(lower as usize);
        let b = self.center(lower as usize + 1);
        if a.abs() <= b.abs() {
            a
        } else {
            b
        }
    }

    pub fn check_len(&self, actual: usize) -> Result<()> {
        if actual != self.len() {
            return Err(ModelError::LengthMismatch {
                expected: self.len(),
                actual,
            });
        }
        Ok(())
    }
}

impl Default for SpatialGrid {
    fn default() -> Self {
        Self::standard()
    }
}

/// Gains, tuning widths, weight scales and multisensory bias of the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkParams {
    /// Auditory input gain.
    pub g_a: f64,
    /// Visual input gain.
    pub g_v: f64,
    /// Auditory sigmoid rise (degrees).
    pub m: f64,
    /// Visual tuning width (degrees).
    pub sigma: f64,
    /// Auditory weight scale onto the auditory pooling units.
    pub a: f64,
    /// Visual weight scale onto the visual pooling units.
    pub v: f64,
    /// Auditory weight scale onto the multisensory pooling units.
    pub a_m: f64,
    /// Visual weight scale onto the multisensory pooling units.
    pub v_m: f64,
    /// Initial input (bias) to the multisensory pooling units.
    pub mu: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            g_a: 140.0,
            g_v: 80.0,
            m: 20.0,
            sigma: 20.0,
            a: 2.0,
            v: 5.0,
            a_m: 1.0,
            v_m: 2.0,
            mu: 10.5,
        }
    }
}

impl NetworkParams {
    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub fn with_gains(self, g_a: f64, g_v: f64) -> Self {
        Self { g_a, g_v, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("g_a", self.g_a),
            ("g_v", self.g_v),
            ("m", self.m),
            ("sigma", self.sigma),
            ("a", self.a),
            ("v", self.v),
            ("a_m", self.a_m),
            ("v_m", self.v_m),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        if !self.mu.is_finite() {
            return Err(ModelError::InvalidParam {
                name: "mu",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }
}

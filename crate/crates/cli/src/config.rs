//! Scenario configuration. Every section is optional; missing fields take
//! the default simulation values and the resolved config is echoed back in
//! each run summary.

use std::path::Path;

use avcausal::{EstimateRule, NetworkParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Input and unisensory pooling profiles with Gaussian fits.
    Profiles,
    /// Multisensory pooling peak against the fusion estimate.
    FusionTracking,
    /// Relatedness index against the causal-inference posterior.
    Relatedness,
    /// Reconstruction-layer activity and decoded locations for one event.
    Reconstruction,
    /// μ fits against oracle disparity sweeps, one per prior.
    CausalFit,
    /// μ fits over priors and a gain ladder, with logit-law fits.
    MuLaw,
    /// Best-fit c over a gain grid and the plane through it.
    GainPlane,
    /// Recalibration time course and aftereffect decay.
    TimeCourse,
    /// Online effect and aftereffect against train length.
    Repetition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub network: NetworkParams,
    #[serde(default)]
    pub stimulus: StimulusConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub gains: GainsConfig,
    #[serde(default)]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub conditions: Vec<Condition>,
    #[serde(default)]
    pub recalibration: RecalibrationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StimulusConfig {
    pub s_a: f64,
    /// Visual location for single-event scenarios.
    pub s_v: f64,
    /// Visual sweep `s_v_lo..=s_v_hi` in steps of `s_v_step`.
    pub s_v_lo: f64,
    pub s_v_hi: f64,
    pub s_v_step: f64,
}

impl Default for StimulusConfig {
    fn default() -> Self {
        Self {
            s_a: 0.0,
            s_v: 20.0,
            s_v_lo: -90.0,
            s_v_hi: 90.0,
            s_v_step: 2.0,
        }
    }
}

impl StimulusConfig {
    pub fn sweep(&self) -> Vec<f64> {
        let n = ((self.s_v_hi - self.s_v_lo) / self.s_v_step + 1e-9).floor() as i64;
        (0..=n).map(|k| self.s_v_lo + k as f64 * self.s_v_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub p_common: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub rule: EstimateRule,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            p_common: vec![0.5],
            n_samples: 10_000,
            seed: 1,
            rule: EstimateRule::Analytic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Half width of the μ search window around the gain-law prediction.
    pub half_width: f64,
    pub step: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            half_width: 5.0,
            step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainsConfig {
    /// (g_A, g_V) pairs for the μ–prior ladder.
    pub ladder: Vec<[f64; 2]>,
    /// Auditory and visual gains whose cartesian product forms the c grid.
    pub grid_a: Vec<f64>,
    pub grid_v: Vec<f64>,
}

impl Default for GainsConfig {
    fn default() -> Self {
        Self {
            ladder: vec![[140.0, 80.0]],
            grid_a: vec![120.0, 140.0, 160.0],
            grid_v: vec![70.0, 80.0, 90.0],
        }
    }
}

/// Tuning-width variant for fusion tracking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub label: String,
    pub m: f64,
    pub sigma: f64,
    #[serde(default = "default_v")]
    pub v: f64,
}

fn default_v() -> f64 {
    NetworkParams::default().v
}

/// Paired multisensory input and prior for the relatedness comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition {
    pub mu: f64,
    pub p_common: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecalibrationConfig {
    pub eta: f64,
    pub tau: f64,
    pub s_a: f64,
    pub s_v: f64,
    pub reps: usize,
    pub delays: Vec<usize>,
    /// Probe locations for the generalization table (1-s delay).
    pub generalization: Vec<f64>,
    pub repetitions: Vec<usize>,
    /// Optional reference data, CSV with `label,value` rows
    /// (`train1`..`train20`, `delay1`, `delay5`, `delay20`).
    pub fixture: Option<String>,
}

impl Default for RecalibrationConfig {
    fn default() -> Self {
        Self {
            eta: 0.65,
            tau: 0.009,
            s_a: 0.0,
            s_v: 8.0,
            reps: 20,
            delays: vec![1, 5, 20],
            generalization: vec![-15.0, 0.0, 15.0],
            repetitions: vec![1, 20],
            fixture: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Directory under the output root; defaults to the scenario name.
    pub dir: Option<String>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn output_dir(&self) -> &str {
        self.output.dir.as_deref().unwrap_or(&self.name)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: String| Err(CliError::Config(format!("{field}: {why}")));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad("name", "must be a non-empty plain identifier".into());
        }
        if let Err(e) = self.network.validate() {
            return bad("network", e.to_string());
        }
        if !(self.stimulus.s_v_step > 0.0 && self.stimulus.s_v_hi >= self.stimulus.s_v_lo) {
            return bad("stimulus", "need s_v_step > 0 and s_v_hi >= s_v_lo".into());
        }
        if self.oracle.n_samples == 0 {
            return bad("oracle.n_samples", "must be at least 1".into());
        }
        if let Some(p) = self.oracle.p_common.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad("oracle.p_common", format!("{p} outside [0, 1]"));
        }
        if !(self.fit.step > 0.0 && self.fit.half_width > self.fit.step) {
            return bad("fit", "need step > 0 and half_width > step".into());
        }
        if !(self.recalibration.eta >= 0.0 && self.recalibration.tau >= 0.0) {
            return bad("recalibration", "eta and tau must be non-negative".into());
        }
        let needs = |ok: bool, field: &str| if ok { Ok(()) } else { bad(field, format!("required by scenario {:?}", self.scenario)) };
        match self.scenario {
            ScenarioKind::FusionTracking => needs(!self.variants.is_empty(), "variants")?,
            ScenarioKind::Relatedness => needs(!self.conditions.is_empty(), "conditions")?,
            ScenarioKind::CausalFit => needs(!self.oracle.p_common.is_empty(), "oracle.p_common")?,
            ScenarioKind::MuLaw => needs(!self.gains.ladder.is_empty() && self.oracle.p_common.len() >= 3, "gains.ladder / oracle.p_common (>= 3)")?,
            ScenarioKind::GainPlane => needs(self.gains.grid_a.len() * self.gains.grid_v.len() >= 4, "gains.grid_a x gains.grid_v (>= 4 pairs)")?,
            ScenarioKind::TimeCourse | ScenarioKind::Repetition => needs(self.recalibration.reps > 0, "recalibration.reps")?,
            ScenarioKind::Profiles | ScenarioKind::Reconstruction => {}
        }
        Ok(())
    }
}

/// Bundled configuration for a figure id (`fig2` .. `fig12`).
pub fn bundled(figure: &str) -> Option<&'static str> {
    Some(match figure {
        "fig2" => include_str!("../configs/fig2.toml"),
        "fig3" => include_str!("../configs/fig3.toml"),
        "fig4" => include_str!("../configs/fig4.toml"),
        "fig5" => include_str!("../configs/fig5.toml"),
        "fig6" => include_str!("../configs/fig6.toml"),
        "fig7" => include_str!("../configs/fig7.toml"),
        "fig8" => include_str!("../configs/fig8.toml"),
        "fig9" => include_str!("../configs/fig9.toml"),
        "fig10" => include_str!("../configs/fig10.toml"),
        "fig11" => include_str!("../configs/fig11.toml"),
        "fig12" => include_str!("../configs/fig12.toml"),
        _ => return None,
    })
}

pub const FIGURES: [&str; 11] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12"];

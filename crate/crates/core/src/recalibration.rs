//! Recalibration of the auditory input weights from reconstruction error,
//! their decay in the absence of stimulation, and trial-by-trial schedules.

use ndarray::{Array1, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::grid::Activity;
use crate::input::{InputActivity, StimulusEvent};
use crate::network::{Network, ReconstructionActivity};

/// How the input and reconstruction profiles are max-normalized before the
/// error is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorScope {
    /// Left and right subpopulations are normalized independently.
    #[default]
    PerSubpopulation,
    /// One maximum across both auditory subpopulations.
    Pooled,
}

/// Per-unit auditory adaptation weights and the trial clock.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationState {
    pub alpha_l: Activity,
    pub alpha_r: Activity,
    /// Adaptation rate.
    pub eta: f64,
    /// Decay per one-second blank step.
    pub tau: f64,
    pub scope: ErrorScope,
    /// Elapsed trials (seconds).
    pub clock: u64,
}

impl AdaptationState {
    pub fn new(n: usize, eta: f64, tau: f64) -> Self {
        Self {
            alpha_l: Array1::ones(n),
            alpha_r: Array1::ones(n),
            eta,
            tau,
            scope: ErrorScope::default(),
            clock: 0,
        }
    }

    pub fn with_scope(mut self, scope: ErrorScope) -> Self {
        self.scope = scope;
        self
    }

    /// True when every weight is exactly 1.
    pub fn is_rest(&self) -> bool {
        self.alpha_l.iter().chain(self.alpha_r.iter()).all(|&a| a == 1.0)
    }

    /// Largest |alpha - 1| over both subpopulations.
    pub fn max_deviation(&self) -> f64 {
        self.alpha_l
            .iter()
            .chain(self.alpha_r.iter())
            .map(|a| (a - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Error-driven update after a stimulus:
    /// `alpha += eta * th * (rho / max rho - th)` with `th = theta / max theta`.
    pub fn update_adaptation(&mut self, input: &InputActivity, recon: &ReconstructionActivity) -> Result<()> {
        let max_of = |a: &Activity| a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (theta_max_l, theta_max_r, rho_max_l, rho_max_r) = match self.scope {
            ErrorScope::PerSubpopulation => (
                max_of(&input.theta_l),
                max_of(&input.theta_r),
                max_of(&recon.rho_l),
                max_of(&recon.rho_r),
            ),
            ErrorScope::Pooled => {
                let t = max_of(&input.theta_l).max(max_of(&input.theta_r));
                let r = max_of(&recon.rho_l).max(max_of(&recon.rho_r));
                (t, t, r, r)
            }
        };
        for (name, m) in [("left", theta_max_l), ("right", theta_max_r)] {
            if !(m > 0.0) {
                return Err(ModelError::InvalidInput(format!(
                    "no {name} auditory input activity to adapt against"
                )));
            }
        }
        let eta = self.eta;
        let step = |alpha: &mut Activity, theta: &Activity, rho: &Activity, tmax: f64, rmax: f64| {
            Zip::from(alpha).and(theta).and(rho).for_each(|a, &t, &r| {
                let tn = t / tmax;
                *a += eta * tn * (r / rmax - tn);
            });
        };
        step(&mut self.alpha_l, &input.theta_l, &recon.rho_l, theta_max_l, rho_max_l);
        step(&mut self.alpha_r, &input.theta_r, &recon.rho_r, theta_max_r, rho_max_r);
        if self.alpha_l.iter().chain(self.alpha_r.iter()).any(|&a| !(a > 0.0)) {
            return Err(ModelError::InvalidInput(
                "adaptation drove an input weight to a non-positive value".into(),
            ));
        }
        self.clock += 1;
        Ok(())
    }

    /// One blank second: every weight moves toward 1 by `tau`, landing
    /// exactly on 1 instead of overshooting.
    pub fn decay_adaptation(&mut self) {
        let tau = self.tau;
        // the slack absorbs rounding from repeated subtraction, so a weight
        // that started k*tau away from 1 lands on 1 after exactly k steps
        let snap = tau * (1.0 + 1e-9);
        let relax = |a: &mut f64| {
            let d = *a - 1.0;
            *a = if d.abs() <= snap { 1.0 } else { *a - tau * d.signum() };
        };
        self.alpha_l.iter_mut().for_each(relax);
        self.alpha_r.iter_mut().for_each(relax);
        self.clock += 1;
    }
}

/// One second of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Trial {
    Blank,
    Stimulus { event: StimulusEvent, probe: bool },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialSchedule {
    pub entries: Vec<Trial>,
}

impl TrialSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stimulus(mut self, event: StimulusEvent) -> Self {
        self.entries.push(Trial::Stimulus { event, probe: false });
        self
    }

    pub fn probe(mut self, event: StimulusEvent) -> Self {
        self.entries.push(Trial::Stimulus { event, probe: true });
        self
    }

    pub fn blanks(mut self, count: usize) -> Self {
        self.entries.extend(std::iter::repeat_n(Trial::Blank, count));
        self
    }

    /// `reps` audiovisual stimuli separated by single blank seconds, ending
    /// on the last stimulus.
    pub fn train(mut self, event: StimulusEvent, reps: usize, record: bool) -> Self {
        for k in 0..reps {
            if k > 0 {
                self = self.blanks(1);
            }
            self.entries.push(Trial::Stimulus { event, probe: record });
        }
        self
    }

    /// Adaptation train, `delay` blank seconds, then a recorded auditory-only
    /// probe at `probe_at`. Every train trial is recorded too.
    pub fn aftereffect(adapter: StimulusEvent, reps: usize, delay: usize, probe_at: f64) -> Self {
        Self::new()
            .train(adapter, reps, true)
            .blanks(delay)
            .probe(StimulusEvent::auditory_only(probe_at))
    }

    pub fn probe_indices(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, Trial::Stimulus { probe: true, .. }))
            .map(|(i, _)| i)
            .collect()
    }
}

/// What happened in one second of a schedule run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    pub event: Option<StimulusEvent>,
    pub probe: bool,
    pub shat_a: Option<f64>,
    pub shat_v: Option<f64>,
    /// Weights after this second's update or decay.
    pub alpha_l: Activity,
    pub alpha_r: Activity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRun {
    pub records: Vec<TrialRecord>,
    pub final_state: AdaptationState,
}

impl ScheduleRun {
    pub fn probes(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| r.probe)
    }
}

/// Runs a schedule second by second. Stimulus seconds go through the
/// network and then adapt (when sound is present); blank and visual-only
/// seconds decay the weights.
pub fn run_schedule(
    schedule: &TrialSchedule,
    network: &Network,
    initial: AdaptationState,
    noise: bool,
    seed: u64,
) -> Result<ScheduleRun> {
    let mut state = initial;
    network.grid().check_len(state.alpha_l.len())?;
    network.grid().check_len(state.alpha_r.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(schedule.entries.len());
    for (index, trial) in schedule.entries.iter().enumerate() {
        let (event, probe, shat_a, shat_v) = match *trial {
            Trial::Blank => {
                state.decay_adaptation();
                (None, false, None, None)
            }
            Trial::Stimulus { event, probe } => {
                let out = network.forward_pass(&event, &state, noise.then_some(&mut rng))?;
                if event.auditory.is_some() {
                    state.update_adaptation(&out.input, &out.reconstruction)?;
                } else {
                    state.decay_adaptation();
                }
                (Some(event), probe, out.shat_a, out.shat_v)
            }
        };
        records.push(TrialRecord {
            index,
            event,
            probe,
            shat_a,
            shat_v,
            alpha_l: state.alpha_l.clone(),
            alpha_r: state.alpha_r.clone(),
        });
    }
    Ok(ScheduleRun {
        records,
        final_state: state,
    })
}

//! Experimental protocols built on the network: fusion tracking of the
//! multisensory layer and the recalibration time-course experiments.

use serde::Serialize;

use crate::error::Result;
use crate::fitting::readout_likelihoods;
use crate::input::StimulusEvent;
use crate::network::Network;
use crate::pooling::peak_location;
use crate::recalibration::{run_schedule, AdaptationState, TrialSchedule};

/// Multisensory pooling peak against the reliability-weighted fusion point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FusionPoint {
    pub s_a: f64,
    pub s_v: f64,
    pub multisensory_peak: f64,
    pub fused: f64,
}

/// For each visual location, the location of maximal multisensory pooling
/// activity and the fusion estimate implied by the readout widths.
pub fn fusion_tracking(network: &Network, s_a: f64, s_v_list: &[f64]) -> Result<Vec<FusionPoint>> {
    let (a, v) = readout_likelihoods(network)?;
    let (wa, wv) = (1.0 / (a.sd * a.sd), 1.0 / (v.sd * v.sd));
    s_v_list
        .iter()
        .map(|&s_v| {
            let out = network.forward(&StimulusEvent::audiovisual(s_a, s_v))?;
            Ok(FusionPoint {
                s_a,
                s_v,
                multisensory_peak: peak_location(&out.pooling.r_m, network.grid()),
                fused: (wa * s_a + wv * s_v) / (wa + wv),
            })
        })
        .collect()
}

/// Recalibration settings shared by the time-course experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecalibrationSetup {
    pub eta: f64,
    pub tau: f64,
    pub s_a: f64,
    pub s_v: f64,
    pub reps: usize,
}

impl RecalibrationSetup {
    pub fn adapter(&self) -> StimulusEvent {
        StimulusEvent::audiovisual(self.s_a, self.s_v)
    }

    fn fresh(&self, network: &Network) -> AdaptationState {
        AdaptationState::new(network.grid().len(), self.eta, self.tau)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub delay: usize,
    pub probe_at: f64,
    pub shat_a: f64,
    /// `shat_a - probe_at`.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeCourse {
    /// Auditory estimate on each audiovisual train trial.
    pub online: Vec<f64>,
    /// One separate run per (delay, probe location).
    pub probes: Vec<ProbeResult>,
}

/// Adaptation train followed, in separate runs, by an auditory-only probe
/// after each delay. Noiseless.
pub fn aftereffect_time_course(
    network: &Network,
    setup: &RecalibrationSetup,
    delays: &[usize],
    probe_locations: &[f64],
) -> Result<TimeCourse> {
    let train = run_schedule(
        &TrialSchedule::new().train(setup.adapter(), setup.reps, true),
        network,
        setup.fresh(network),
        false,
        0,
    )?;
    let online = train.probes().map(|r| r.shat_a.unwrap_or(f64::NAN)).collect();
    let mut probes = Vec::new();
    for &delay in delays {
        for &probe_at in probe_locations {
            let schedule = TrialSchedule::aftereffect(setup.adapter(), setup.reps, delay, probe_at);
            let run = run_schedule(&schedule, network, setup.fresh(network), false, 0)?;
            let last = run.records.last().expect("schedule ends on the probe");
            let shat_a = last.shat_a.unwrap_or(f64::NAN);
            probes.push(ProbeResult {
                delay,
                probe_at,
                shat_a,
                shift: shat_a - probe_at,
            });
        }
    }
    Ok(TimeCourse { online, probes })
}

/// Online shift on the last train trial and aftereffect after `delay`
/// blank seconds, as functions of train length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepetitionEffect {
    pub reps: usize,
    pub ventriloquism: f64,
    pub aftereffect: f64,
}

pub fn repetition_effects(
    network: &Network,
    setup: &RecalibrationSetup,
    reps_list: &[usize],
    delay: usize,
) -> Result<Vec<RepetitionEffect>> {
    reps_list
        .iter()
        .map(|&reps| {
            let s = RecalibrationSetup { reps, ..*setup };
            let schedule = TrialSchedule::aftereffect(s.adapter(), reps, delay, s.s_a);
            let run = run_schedule(&schedule, network, s.fresh(network), false, 0)?;
            let online: Vec<f64> = run
                .probes()
                .filter(|r| r.event.is_some_and(|e| e.visual.is_some()))
                .map(|r| r.shat_a.unwrap_or(f64::NAN))
                .collect();
            let probe = run.records.last().expect("schedule ends on the probe");
            Ok(RepetitionEffect {
                reps,
                ventriloquism: online.last().copied().unwrap_or(f64::NAN) - s.s_a,
                aftereffect: probe.shat_a.unwrap_or(f64::NAN) - s.s_a,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::NetworkParams;

    fn setup(reps: usize) -> RecalibrationSetup {
        RecalibrationSetup {
            eta: 0.65,
            tau: 0.009,
            s_a: 0.0,
            s_v: 8.0,
            reps,
        }
    }

    #[test]
    fn time_course_shape() {
        let net = Network::standard(NetworkParams::default().with_mu(10.7)).unwrap();
        let tc = aftereffect_time_course(&net, &setup(20), &[1, 5, 20], &[0.0]).unwrap();
        assert_eq!(tc.online.len(), 20);
        assert_eq!(tc.probes.len(), 3);
        assert!(tc.probes[0].shift > 0.0);
        assert!(tc.probes[0].shift >= tc.probes[2].shift);
    }

    #[test]
    fn no_learning_means_no_aftereffect() {
        let net = Network::standard(NetworkParams::default().with_mu(10.7)).unwrap();
        let s = RecalibrationSetup { eta: 0.0, ..setup(5) };
        let eff = repetition_effects(&net, &s, &[1, 5], 1).unwrap();
        assert!(eff.iter().all(|e| e.aftereffect == 0.0));
        assert!(eff.iter().all(|e| e.ventriloquism > 0.0));
    }

    #[test]
    fn fusion_point_at_zero_disparity() {
        let net = Network::standard(NetworkParams::default()).unwrap();
        let pts = fusion_tracking(&net, 0.0, &[0.0]).unwrap();
        assert_eq!(pts[0].multisensory_peak, 0.0);
        assert_eq!(pts[0].fused, 0.0);
    }
}

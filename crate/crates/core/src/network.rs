//! Reconstruction layer, location decoding and the full single-pass network.

use std::sync::Arc;

use ndarray::Zip;
use rand::Rng;

use crate::error::{ModelError, Result};
use crate::grid::{Activity, NetworkParams, SpatialGrid};
use crate::input::{input_for_event, InputActivity, StimulusEvent};
use crate::pooling::{build_weights, divisive_normalize, peak_location, pool_all, PoolingActivity, PoolingWeights, WeightKey};
use crate::recalibration::AdaptationState;

/// Reconstructed input activity.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionActivity {
    pub rho_l: Activity,
    pub rho_r: Activity,
    pub rho_v: Activity,
}

/// Everything produced by one pass through the network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkOutput {
    pub input: InputActivity,
    /// Pooling activity after divisive normalization.
    pub pooling: PoolingActivity,
    pub reconstruction: ReconstructionActivity,
    pub shat_a: Option<f64>,
    pub shat_v: Option<f64>,
}

/// Projects pooling activity back onto the input units through the
/// feedforward weights: unit `i` receives `sum_j w[i, j] * r_j`, i.e. the
/// same weight that connects input `i` to pooling unit `j`.
pub fn reconstruct(pooling: &PoolingActivity, w: &PoolingWeights) -> ReconstructionActivity {
    ReconstructionActivity {
        rho_l: w.w_l.dot(&pooling.r_a) + w.w_ml.dot(&pooling.r_m),
        rho_r: w.w_r.dot(&pooling.r_a) + w.w_mr.dot(&pooling.r_m),
        rho_v: w.w_v.dot(&pooling.r_v) + w.w_mv.dot(&pooling.r_m),
    }
}

fn is_flat(values: &Activity) -> bool {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min <= 1e-12 * max.abs().max(f64::MIN_POSITIVE)
}

/// Visual estimate: location of the largest visual reconstruction.
pub fn decode_visual(recon: &ReconstructionActivity, grid: &SpatialGrid) -> Result<f64> {
    grid.check_len(recon.rho_v.len())?;
    if is_flat(&recon.rho_v) {
        return Err(ModelError::ModalityAbsent("visual"));
    }
    Ok(peak_location(&recon.rho_v, grid))
}

/// Auditory estimate: location maximizing the element-wise product of the
/// left and right reconstructions (the half-maximum crossing for ideal
/// complementary sigmoids).
pub fn decode_auditory(recon: &ReconstructionActivity, grid: &SpatialGrid) -> Result<f64> {
    grid.check_len(recon.rho_l.len())?;
    let product: Activity = Zip::from(&recon.rho_l).and(&recon.rho_r).map_collect(|l, r| l * r);
    if is_flat(&product) {
        return Err(ModelError::ModalityAbsent("auditory"));
    }
    Ok(peak_location(&product, grid))
}

/// A network instance: grid, parameters and the cached weight matrices.
///
/// Cloning is cheap; the weights are shared.
#[derive(Debug, Clone)]
pub struct Network {
    grid: SpatialGrid,
    params: NetworkParams,
    weights: Arc<PoolingWeights>,
    key: WeightKey,
}

impl Network {
    pub fn new(params: NetworkParams, grid: SpatialGrid) -> Result<Self> {
        params.validate()?;
        let weights = Arc::new(build_weights(&params, &grid));
        Ok(Self {
            key: WeightKey::of(&params),
            grid,
            params,
            weights,
        })
    }

    /// Network on the standard 301-unit grid.
    pub fn standard(params: NetworkParams) -> Result<Self> {
        Self::new(params, SpatialGrid::standard())
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn weights(&self) -> &PoolingWeights {
        &self.weights
    }

    /// Replaces the parameters, rebuilding weights only when a
    /// weight-relevant parameter changed.
    pub fn set_params(&mut self, params: NetworkParams) -> Result<()> {
        params.validate()?;
        let key = WeightKey::of(&params);
        if key != self.key {
            self.weights = Arc::new(build_weights(&params, &self.grid));
            self.key = key;
        }
        self.params = params;
        Ok(())
    }

    pub fn with_params(&self, params: NetworkParams) -> Result<Self> {
        let mut out = self.clone();
        out.set_params(params)?;
        Ok(out)
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        self.with_params(self.params.with_mu(mu))
    }

    /// Fresh (all ones) adaptation state sized for this network.
    pub fn fresh_adaptation(&self) -> AdaptationState {
        AdaptationState::new(self.grid.len(), 0.0, 0.0)
    }

    pub fn input<R: Rng + ?Sized>(
        &self,
        event: &StimulusEvent,
        adaptation: &AdaptationState,
        noise: Option<&mut R>,
    ) -> Result<InputActivity> {
        input_for_event(event, &self.params, adaptation, &self.grid, noise)
    }

    /// Pooling activity (unnormalized) for a given input.
    pub fn pool(&self, input: &InputActivity) -> Result<PoolingActivity> {
        pool_all(input, &self.weights, self.params.mu)
    }

    /// Input, pooling, normalization, reconstruction and decoding of the
    /// modalities present in `event`.
    pub fn forward_pass<R: Rng + ?Sized>(
        &self,
        event: &StimulusEvent,
        adaptation: &AdaptationState,
        noise: Option<&mut R>,
    ) -> Result<NetworkOutput> {
        let input = self.input(event, adaptation, noise)?;
        self.forward_from_input(event, input)
    }

    /// Noiseless forward pass with unadapted inputs.
    pub fn forward(&self, event: &StimulusEvent) -> Result<NetworkOutput> {
        self.forward_pass::<rand_chacha::ChaCha8Rng>(event, &self.fresh_adaptation(), None)
    }

    pub fn forward_from_input(&self, event: &StimulusEvent, input: InputActivity) -> Result<NetworkOutput> {
        let pooling = divisive_normalize(&self.pool(&input)?)?;
        let reconstruction = reconstruct(&pooling, &self.weights);
        let shat_a = match event.auditory {
            Some(_) => Some(decode_auditory(&reconstruction, &self.grid)?),
            None => None,
        };
        let shat_v = match event.visual {
            Some(_) => Some(decode_visual(&reconstruction, &self.grid)?),
            None => None,
        };
        Ok(NetworkOutput {
            input,
            pooling,
            reconstruction,
            shat_a,
            shat_v,
        })
    }

    /// Decoded (auditory, visual) estimates for a noiseless audiovisual event.
    pub fn decode_av(&self, s_a: f64, s_v: f64) -> Result<(f64, f64)> {
        let out = self.forward(&StimulusEvent::audiovisual(s_a, s_v))?;
        Ok((out.shat_a.expect("auditory present"), out.shat_v.expect("visual present")))
    }
}

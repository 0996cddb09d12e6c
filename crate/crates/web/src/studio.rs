//! Demo state kept between button presses. Pure Rust so it can be tested natively.

use wavegest::generator::{generate_dataset, GeneratorSpec};
use wavegest::kinematics::{check_joint_limits, render_overlay, ChainConfig, RenderOptions};
use wavegest::model::{
    condition, fit_model, ConditioningConstraint, Coordinate, GestureModel, DEFAULT_EPS_R, DEFAULT_LAMBDA,
};
use wavegest::synthesis::{sample_gesture, spectrum_stats, time_scale, SynthesisRequest};
use wavegest::Result;

/// Sample rate of rendered gestures. Low enough to keep the SVG small.
const RENDER_RATE: f64 = 50.0;

pub struct Studio {
    trained: GestureModel,
    active: GestureModel,
    clamps: Vec<ConditioningConstraint>,
    chain: ChainConfig,
}

/// An overlay drawing plus how many of its frames break a joint limit.
pub struct Rendering {
    pub svg: String,
    pub frames: usize,
    pub violations: usize,
}

impl Studio {
    /// Generates waving-arm demonstrations from `seed` and fits a model with `harmonics` per joint.
    pub fn train(seed: u64, harmonics: usize) -> Result<Self> {
        let ds = generate_dataset(&GeneratorSpec::waving_arm(), seed)?;
        let model = fit_model(&ds, harmonics, DEFAULT_LAMBDA, DEFAULT_EPS_R)?;
        Ok(Studio { active: model.clone(), trained: model, clamps: Vec::new(), chain: ChainConfig::waving_arm() })
    }

    pub fn dofs(&self) -> usize {
        self.active.dofs()
    }

    pub fn harmonics(&self) -> usize {
        self.active.harmonics()
    }

    /// Geometric-mean amplitudes, joint-major: entry `d * K + (k - 1)`.
    pub fn spectrum(&self) -> Vec<f64> {
        spectrum_stats(&self.active, false).per_dof().concat()
    }

    /// Fixes the amplitude of one harmonic. Replaces an earlier clamp on the same harmonic.
    pub fn clamp_amplitude(&mut self, dof: usize, harmonic: usize, value: f64) -> Result<()> {
        let c = ConditioningConstraint::amplitude(dof, harmonic, value);
        let mut clamps: Vec<_> = self.clamps.iter().copied().filter(|old| old.target != c.target).collect();
        clamps.push(c);
        self.active = condition(&self.trained, &clamps)?;
        self.clamps = clamps;
        Ok(())
    }

    /// Median amplitude of one harmonic in the trained model and the standard deviation of its log.
    /// Clamps many deviations away from the median extrapolate through the covariance.
    pub fn amplitude_stats(&self, dof: usize, harmonic: usize) -> Result<(f64, f64)> {
        let c = Coordinate::log_amplitude(dof, harmonic);
        Ok((self.trained.mean_at(c)?.exp(), self.trained.variance_at(c)?.sqrt()))
    }

    pub fn release(&mut self) {
        self.active = self.trained.clone();
        self.clamps.clear();
    }

    pub fn clamp_count(&self) -> usize {
        self.clamps.len()
    }

    /// Samples a gesture and draws it on the arm. `tempo` > 1 slows the gesture down.
    pub fn render(&self, seed: u64, tempo: f64, stride: usize) -> Result<Rendering> {
        let req = SynthesisRequest::new(self.active.ref_duration() * tempo, RENDER_RATE)?;
        let req = time_scale(req, tempo)?;
        let traj = sample_gesture(&self.active, seed, &req)?;
        let svg = render_overlay(&self.chain, &traj, stride, RenderOptions::default())?;
        let violations = check_joint_limits(&self.chain, &traj)?.len();
        Ok(Rendering { svg, frames: traj.len().div_ceil(stride.max(1)), violations })
    }
}

//! Learn rhythmic multi-joint gestures from demonstrations.
//!
//! Trajectories are projected onto complex Fourier harmonics, the weights are
//! moved to log-polar coordinates, and a Gaussian over those coordinates is
//! sampled or conditioned to produce new gestures.

pub mod basis;
#[cfg(feature = "cli")]
pub mod cli;
pub mod dataset;
pub mod error;
pub mod generator;
pub mod kinematics;
pub mod model;
pub mod synthesis;

pub use basis::{build_basis, fit_weights, reconstruct, BasisMatrix, ComplexWeights};
pub use dataset::{load_dataset, load_demo, save_demo, Dataset, Demonstration};
pub use error::{Error, Result};
pub use generator::{generate_dataset, GeneratorSpec};
pub use kinematics::{check_joint_limits, render_overlay, ChainConfig, KinematicChain, Plane, RenderOptions};
pub use model::{
    align_phases, condition, fit_model, from_logpolar, sample_model, to_logpolar, Component, ConditioningConstraint,
    Coordinate, GestureModel, LogPolarVector, WeightIndexMap,
};
pub use synthesis::{
    sample_gesture, scale_amplitude, shift_phase, spectrum_stats, synthesize, time_scale, Spectrum, SynthesisRequest,
};

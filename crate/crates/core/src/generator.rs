//! Synthetic wave-gesture datasets.
//!
//! Every demonstration is a single dominant oscillation per joint on top of a
//! posture offset:
//!
//! ```text
//! y_d(t) = offset_d + A_d cos(2 pi f t + phi_d) + noise
//! ```
//!
//! `f` is shared by all joints of one demonstration and drawn per
//! demonstration. Amplitudes are log-normal: `ln A_d ~ N(m_d, s_d^2)` with
//! `m_d` the midpoint of `ln` of the configured range and `s_d` a quarter of
//! its width, so the range covers +-2 standard deviations. Coupled joint pairs
//! share correlated standard-normal draws.

use std::fs;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Demonstration};
use crate::error::{Error, Result};

/// Log-amplitude correlation between two joints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub dof_a: usize,
    pub dof_b: usize,
    pub rho: f64,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub dofs: usize,
    pub demos: usize,
    /// `[min, max]` seconds.
    pub duration_s: [f64; 2],
    pub rate_hz: f64,
    /// Per-joint posture offset range, radians.
    pub offset_rad: Vec<[f64; 2]>,
    /// Per-joint oscillation amplitude range, radians.
    pub amplitude_rad: Vec<[f64; 2]>,
    pub frequency_hz: [f64; 2],
    pub max_cycles: f64,
    /// Round each demonstration to a whole number of cycles.
    #[serde(default = "default_true")]
    pub integer_cycles: bool,
    /// Per-joint mean phase, radians. Empty means zero for every joint.
    #[serde(default)]
    pub base_phase_rad: Vec<f64>,
    pub phase_jitter_rad: f64,
    pub noise_std_rad: f64,
    #[serde(default)]
    pub coupling: Vec<Coupling>,
}

impl GeneratorSpec {
    /// Five-joint waving arm (shoulder pitch, shoulder roll, elbow, forearm roll,
    /// wrist), 15 demonstrations of 6-10 s at 1.5-3 Hz with at most 20 cycles.
    /// Elbow and wrist amplitudes are coupled with rho = 0.9.
    pub fn waving_arm() -> Self {
        Self {
            dofs: 5,
            demos: 15,
            duration_s: [6.0, 10.0],
            rate_hz: 100.0,
            offset_rad: vec![[-0.3, 0.3], [0.8, 1.4], [0.9, 1.7], [-0.4, 0.4], [-0.2, 0.2]],
            amplitude_rad: vec![[0.02, 0.1], [0.05, 0.2], [0.2, 0.6], [0.05, 0.25], [0.2, 0.7]],
            frequency_hz: [1.5, 3.0],
            max_cycles: 20.0,
            integer_cycles: true,
            base_phase_rad: vec![0.0, 0.4, 0.0, -0.5, 0.8],
            phase_jitter_rad: 0.3,
            noise_std_rad: 0.005,
            coupling: vec![Coupling { dof_a: 2, dof_b: 4, rho: 0.9 }],
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: Self =
            serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
        spec.validate().map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::invalid(m));
        if self.dofs == 0 || self.demos == 0 {
            return err("dofs and demos must be >= 1".into());
        }
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !(ordered(self.duration_s) && self.duration_s[0] > 0.0) {
            return err(format!("duration range {:?} must be positive and ordered", self.duration_s));
        }
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return err(format!("rate must be > 0, got {}", self.rate_hz));
        }
        if !(ordered(self.frequency_hz) && self.frequency_hz[0] > 0.0) {
            return err(format!("frequency range {:?} must be positive and ordered", self.frequency_hz));
        }
        if self.frequency_hz[1] >= self.rate_hz / 2.0 {
            return err(format!(
                "max frequency {} Hz must stay below the Nyquist rate {} Hz",
                self.frequency_hz[1],
                self.rate_hz / 2.0
            ));
        }
        if !(self.max_cycles.is_finite() && self.max_cycles > 0.0) {
            return err(format!("max_cycles must be > 0, got {}", self.max_cycles));
        }
        if self.integer_cycles && self.max_cycles < 1.0 {
            return err("integer cycles need max_cycles >= 1".into());
        }
        if (self.duration_s[0] * self.rate_hz).round() < 2.0 {
            return err("shortest duration gives fewer than 2 samples".into());
        }
        for (name, ranges) in [("offset_rad", &self.offset_rad), ("amplitude_rad", &self.amplitude_rad)] {
            if ranges.len() != self.dofs {
                return err(format!("{name} has {} ranges for {} joints", ranges.len(), self.dofs));
            }
            if let Some(r) = ranges.iter().find(|r| !ordered(**r)) {
                return err(format!("{name} range {r:?} is not ordered"));
            }
        }
        if let Some(r) = self.amplitude_rad.iter().find(|r| r[0] <= 0.0) {
            return err(format!("amplitude range {r:?} must be positive"));
        }
        if !self.base_phase_rad.is_empty() && self.base_phase_rad.len() != self.dofs {
            return err(format!("base_phase_rad has {} entries for {} joints", self.base_phase_rad.len(), self.dofs));
        }
        for (name, v) in [("phase_jitter_rad", self.phase_jitter_rad), ("noise_std_rad", self.noise_std_rad)] {
            if !(v.is_finite() && v >= 0.0) {
                return err(format!("{name} must be >= 0, got {v}"));
            }
        }
        for c in &self.coupling {
            if c.dof_a >= self.dofs || c.dof_b >= self.dofs || c.dof_a == c.dof_b {
                return err(format!("coupling {c:?} must name two distinct joints below {}", self.dofs));
            }
            if !(c.rho.is_finite() && c.rho.abs() <= 1.0) {
                return err(format!("coupling rho {} outside [-1, 1]", c.rho));
            }
        }
        self.amplitude_factor().map(|_| ())
    }

    /// Mean of `ln A_d`.
    pub fn log_amplitude_mean(&self, dof: usize) -> f64 {
        let [lo, hi] = self.amplitude_rad[dof];
        0.5 * (lo.ln() + hi.ln())
    }

    /// Standard deviation of `ln A_d`.
    pub fn log_amplitude_sigma(&self, dof: usize) -> f64 {
        let [lo, hi] = self.amplitude_rad[dof];
        0.25 * (hi.ln() - lo.ln())
    }

    fn correlation(&self) -> Result<DMatrix<f64>> {
        let mut corr = DMatrix::identity(self.dofs, self.dofs);
        for c in &self.coupling {
            if corr[(c.dof_a, c.dof_b)] != 0.0 {
                return Err(Error::invalid(format!("joints {} and {} are coupled twice", c.dof_a, c.dof_b)));
            }
            corr[(c.dof_a, c.dof_b)] = c.rho;
            corr[(c.dof_b, c.dof_a)] = c.rho;
        }
        Ok(corr)
    }

    /// Lower factor `L` with `L L^T` equal to the coupling correlation matrix.
    fn amplitude_factor(&self) -> Result<DMatrix<f64>> {
        let corr = self.correlation()?;
        if let Some(chol) = Cholesky::new(corr.clone()) {
            return Ok(chol.l());
        }
        // |rho| = 1 leaves the matrix only semi-definite
        let eig = SymmetricEigen::new(corr);
        if eig.eigenvalues.iter().any(|&l| l < -1e-12) {
            return Err(Error::invalid("coupling correlations are mutually inconsistent (not positive semi-definite)"));
        }
        let sqrt = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()));
        Ok(eig.eigenvectors * DMatrix::from_diagonal(&sqrt))
    }
}

/// Parameters drawn for one generated demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoParams {
    pub duration: f64,
    pub frequency: f64,
    pub cycles: f64,
    pub offsets: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
}

pub fn generate_dataset(spec: &GeneratorSpec, seed: u64) -> Result<Dataset> {
    generate_with_params(spec, seed).map(|(ds, _)| ds)
}

/// Like [`generate_dataset`] but also returns the drawn per-demo parameters.
pub fn generate_with_params(spec: &GeneratorSpec, seed: u64) -> Result<(Dataset, Vec<DemoParams>)> {
    spec.validate()?;
    let factor = spec.amplitude_factor()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.noise_std_rad).map_err(|e| Error::invalid(e.to_string()))?;
    let width = spec.demos.saturating_sub(1).to_string().len().max(3);

    let mut demos = Vec::with_capacity(spec.demos);
    let mut params = Vec::with_capacity(spec.demos);
    for m in 0..spec.demos {
        let p = draw_params(spec, &factor, &mut rng);
        let samples = (p.duration * spec.rate_hz).round() as usize;
        let dt = 1.0 / spec.rate_hz;
        let mut y = DMatrix::zeros(samples, spec.dofs);
        for t in 0..samples {
            let phase = std::f64::consts::TAU * p.cycles * t as f64 / samples as f64;
            for d in 0..spec.dofs {
                let n = if spec.noise_std_rad > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                y[(t, d)] = p.offsets[d] + p.amplitudes[d] * (phase + p.phases[d]).cos() + n;
            }
        }
        demos.push(Demonstration::new(y, dt, format!("demo_{m:0width$}"))?);
        params.push(p);
    }
    Ok((Dataset::new(demos)?, params))
}

fn draw_params(spec: &GeneratorSpec, factor: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> DemoParams {
    let draw = |rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]| if lo < hi { rng.random_range(lo..=hi) } else { lo };
    let samples = (draw(rng, spec.duration_s) * spec.rate_hz).round().max(2.0);
    let duration = samples / spec.rate_hz;
    let mut cycles = (draw(rng, spec.frequency_hz) * duration).min(spec.max_cycles);
    if spec.integer_cycles {
        cycles = cycles.round().clamp(1.0, spec.max_cycles.floor());
    }
    let frequency = cycles / duration;

    let z = DVector::from_fn(spec.dofs, |_, _| StandardNormal.sample(rng));
    let correlated = factor * z;
    let amplitudes = (0..spec.dofs)
        .map(|d| (spec.log_amplitude_mean(d) + spec.log_amplitude_sigma(d) * correlated[d]).exp())
        .collect();
    let offsets = spec.offset_rad.iter().map(|r| draw(rng, *r)).collect();
    let phases = (0..spec.dofs)
        .map(|d| {
            let base = spec.base_phase_rad.get(d).copied().unwrap_or(0.0);
            let jitter: f64 = StandardNormal.sample(rng);
            base + spec.phase_jitter_rad * jitter
        })
        .collect();
    DemoParams { duration, frequency, cycles, offsets, amplitudes, phases }
}

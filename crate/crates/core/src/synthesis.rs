//! Gesture synthesis from log-polar vectors and intuitive modulation.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::basis::C64;
use crate::dataset::Demonstration;
use crate::error::{Error, Result};
use crate::model::{from_logpolar, sample_model, Component, Coordinate, GestureModel, LogPolarVector, WeightIndexMap};

/// Output timing of a synthesized gesture.
///
/// One basis period spans `ref_duration * time_scale` seconds; durations
/// longer than that repeat the periodic waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisRequest {
    pub duration: f64,
    pub rate: f64,
    pub time_scale: f64,
}

impl SynthesisRequest {
    pub fn new(duration: f64, rate: f64) -> Result<Self> {
        let req = Self { duration, rate, time_scale: 1.0 };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::invalid(format!("duration must be > 0, got {}", self.duration)));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::invalid(format!("rate must be > 0, got {}", self.rate)));
        }
        if !(self.time_scale.is_finite() && self.time_scale > 0.0) {
            return Err(Error::invalid(format!("time scale must be > 0, got {}", self.time_scale)));
        }
        if self.samples() < 2 {
            return Err(Error::invalid(format!(
                "duration {} s at {} Hz gives fewer than 2 samples",
                self.duration, self.rate
            )));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.duration * self.rate).round() as usize
    }
}

/// Stretches the gesture period by `gamma`, dividing every frequency by `gamma`.
pub fn time_scale(req: SynthesisRequest, gamma: f64) -> Result<SynthesisRequest> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid(format!("time scale factor must be > 0, got {gamma}")));
    }
    let out = SynthesisRequest { time_scale: req.time_scale * gamma, ..req };
    out.validate()?;
    Ok(out)
}

/// Layout and reference period a log-polar vector is interpreted against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelMeta {
    pub layout: WeightIndexMap,
    pub ref_duration: f64,
}

impl GestureModel {
    pub fn meta(&self) -> ModelMeta {
        ModelMeta { layout: self.layout(), ref_duration: self.ref_duration() }
    }
}

/// Where the log-polar vector for a synthesis comes from.
#[derive(Debug, Clone)]
pub enum GestureSource<'a> {
    Explicit(LogPolarVector, ModelMeta),
    Sampled { model: &'a GestureModel, seed: u64 },
}

impl GestureSource<'_> {
    pub fn synthesize(&self, req: &SynthesisRequest) -> Result<Demonstration> {
        match self {
            GestureSource::Explicit(x, meta) => synthesize(x, meta, req),
            GestureSource::Sampled { model, seed } => sample_gesture(model, *seed, req),
        }
    }
}

/// Complex trajectory before the real part is taken; `T x D`.
pub fn synthesize_complex(x: &LogPolarVector, meta: &ModelMeta, req: &SynthesisRequest) -> Result<DMatrix<C64>> {
    if x.layout() != meta.layout {
        return Err(Error::Dimension { expected: meta.layout.dim(), found: x.layout().dim() });
    }
    req.validate()?;
    if !(meta.ref_duration.is_finite() && meta.ref_duration > 0.0) {
        return Err(Error::invalid(format!("reference duration must be > 0, got {}", meta.ref_duration)));
    }
    let period = meta.ref_duration * req.time_scale;
    let w = from_logpolar(x, period)?;
    let phases: Vec<f64> = (0..req.samples()).map(|i| i as f64 / (req.rate * period)).collect();
    Ok(w.evaluate(&phases))
}

pub fn synthesize(x: &LogPolarVector, meta: &ModelMeta, req: &SynthesisRequest) -> Result<Demonstration> {
    let y = synthesize_complex(x, meta, req)?;
    Demonstration::new(y.map(|c| c.re), 1.0 / req.rate, "synthesized")
}

pub fn sample_gesture(model: &GestureModel, seed: u64, req: &SynthesisRequest) -> Result<Demonstration> {
    let x = sample_model(model, seed)?;
    let demo = synthesize(&x, &model.meta(), req)?;
    let samples = demo.samples().clone();
    Demonstration::new(samples, demo.dt(), format!("sample_seed{seed}"))
}

/// Multiplies the amplitude of every harmonic of the selected joints (all when `None`).
pub fn scale_amplitude(x: &LogPolarVector, factor: f64, dofs: Option<&[usize]>) -> Result<LogPolarVector> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::invalid(format!("amplitude factor must be > 0, got {factor}")));
    }
    let layout = x.layout();
    if let Some(bad) = dofs.and_then(|d| d.iter().find(|&&d| d >= layout.dofs())) {
        return Err(Error::invalid(format!("dof {bad} out of range (model has {})", layout.dofs())));
    }
    let shift = factor.ln();
    let mut out = x.clone();
    let selected = |d: usize| dofs.is_none_or(|s| s.contains(&d));
    for d in (0..layout.dofs()).filter(|&d| selected(d)) {
        for k in 1..=layout.harmonics() {
            let c = Coordinate::log_amplitude(d, k);
            out.set(c, x.get(c)? + shift)?;
        }
    }
    Ok(out)
}

/// Adds `delta` radians to the phase of harmonic `k` of joint `dof`, without re-wrapping.
pub fn shift_phase(x: &LogPolarVector, delta: f64, harmonic: usize, dof: usize) -> Result<LogPolarVector> {
    let c = Coordinate::phase(dof, harmonic);
    let mut out = x.clone();
    out.set(c, x.get(c)? + delta)?;
    Ok(out)
}

/// Per-joint single-sided amplitude spectrum of a model mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    include_dc: bool,
    /// `amplitudes[d][i]` is harmonic `i` with dc, `i + 1` without.
    amplitudes: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn includes_dc(&self) -> bool {
        self.include_dc
    }

    pub fn per_dof(&self) -> &[Vec<f64>] {
        &self.amplitudes
    }

    pub fn get(&self, dof: usize, harmonic: usize) -> Option<f64> {
        let i = if self.include_dc { harmonic } else { harmonic.checked_sub(1)? };
        self.amplitudes.get(dof)?.get(i).copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dof,k,amplitude\n");
        let first_k = if self.include_dc { 0 } else { 1 };
        for (d, row) in self.amplitudes.iter().enumerate() {
            for (i, a) in row.iter().enumerate() {
                let _ = writeln!(out, "{d},{},{a}", i + first_k);
            }
        }
        out
    }
}

/// Geometric-mean amplitude `exp(mu_lnr)` for `k = 1..K`; the raw dc mean is
/// prepended as `k = 0` when `include_dc` is set.
pub fn spectrum_stats(model: &GestureModel, include_dc: bool) -> Spectrum {
    let layout = model.layout();
    let amplitudes = (0..layout.dofs())
        .map(|d| {
            let dc = include_dc.then(|| model.mu()[layout.index(Coordinate::dc(d)).unwrap()]);
            dc.into_iter()
                .chain((1..=layout.harmonics()).map(|k| {
                    let i = layout.index(Coordinate { dof: d, harmonic: k, component: Component::LogAmplitude });
                    model.mu()[i.unwrap()].exp()
                }))
                .collect()
        })
        .collect();
    Spectrum { include_dc, amplitudes }
}

//! Gaussian model over log-polar Fourier weights.
//!
//! Each joint contributes `2K+1` real coordinates laid out as
//! `[dc, ln|w_1| .. ln|w_K|, arg w_1 .. arg w_K]`. Negative harmonics are
//! implied by conjugate symmetry and are not modelled. The DC weight is kept
//! raw so posture offsets of either sign need no special casing.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::basis::{fit_weights, ComplexWeights, C64, SYMMETRY_TOL};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 1e-6;
pub const DEFAULT_EPS_R: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Dc,
    LogAmplitude,
    Phase,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Dc => "dc",
            Component::LogAmplitude => "lnr",
            Component::Phase => "theta",
        })
    }
}

/// One scalar coordinate of the model. `harmonic` is 0 for `Dc`, `1..=K` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coordinate {
    pub dof: usize,
    pub harmonic: usize,
    pub component: Component,
}

impl Coordinate {
    pub fn dc(dof: usize) -> Self {
        Self { dof, harmonic: 0, component: Component::Dc }
    }

    pub fn log_amplitude(dof: usize, harmonic: usize) -> Self {
        Self { dof, harmonic, component: Component::LogAmplitude }
    }

    pub fn phase(dof: usize, harmonic: usize) -> Self {
        Self { dof, harmonic, component: Component::Phase }
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(dof={}, k={})", self.component, self.dof, self.harmonic)
    }
}

/// Bijection between flat vector indices and [`Coordinate`]s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightIndexMap {
    dofs: usize,
    harmonics: usize,
}

impl WeightIndexMap {
    pub const LAYOUT: &'static str = "dc,lnr[1..K],theta[1..K] per dof";

    pub fn new(dofs: usize, harmonics: usize) -> Self {
        Self { dofs, harmonics }
    }

    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    fn stride(&self) -> usize {
        2 * self.harmonics + 1
    }

    pub fn dim(&self) -> usize {
        self.dofs * self.stride()
    }

    pub fn index(&self, c: Coordinate) -> Result<usize> {
        if c.dof >= self.dofs {
            return Err(Error::invalid(format!("{c}: dof out of range (model has {} joints)", self.dofs)));
        }
        let base = c.dof * self.stride();
        match c.component {
            Component::Dc if c.harmonic == 0 => Ok(base),
            Component::Dc => Err(Error::invalid(format!("{c}: dc coordinates have k=0"))),
            _ if c.harmonic == 0 || c.harmonic > self.harmonics => {
                Err(Error::invalid(format!("{c}: harmonic out of range 1..={}", self.harmonics)))
            }
            Component::LogAmplitude => Ok(base + c.harmonic),
            Component::Phase => Ok(base + self.harmonics + c.harmonic),
        }
    }

    pub fn coordinate(&self, index: usize) -> Coordinate {
        assert!(index < self.dim(), "index {index} out of range {}", self.dim());
        let dof = index / self.stride();
        let r = index % self.stride();
        match r {
            0 => Coordinate::dc(dof),
            r if r <= self.harmonics => Coordinate::log_amplitude(dof, r),
            r => Coordinate::phase(dof, r - self.harmonics),
        }
    }

    /// Position of the phase coordinate `(dof, k)` within a length `D*K` phase vector.
    pub fn phase_slot(&self, dof: usize, harmonic: usize) -> usize {
        dof * self.harmonics + harmonic - 1
    }

    fn phase_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dofs).flat_map(move |d| {
            (1..=self.harmonics).map(move |k| (self.phase_slot(d, k), d * self.stride() + self.harmonics + k))
        })
    }
}

/// Flat real vector in [`WeightIndexMap`] layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPolarVector {
    values: DVector<f64>,
    layout: WeightIndexMap,
}

impl LogPolarVector {
    pub fn new(values: DVector<f64>, layout: WeightIndexMap) -> Result<Self> {
        if values.len() != layout.dim() {
            return Err(Error::Dimension { expected: layout.dim(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("log-polar vector contains non-finite values"));
        }
        Ok(Self { values, layout })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn layout(&self) -> WeightIndexMap {
        self.layout
    }

    pub fn get(&self, c: Coordinate) -> Result<f64> {
        Ok(self.values[self.layout.index(c)?])
    }

    pub fn set(&mut self, c: Coordinate, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::invalid(format!("{c}: non-finite value")));
        }
        let i = self.layout.index(c)?;
        self.values[i] = value;
        Ok(())
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }
}

/// Principal argument in `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Shifts `theta` by a multiple of 2 pi into `(reference - pi, reference + pi]`.
pub fn unwrap_near(theta: f64, reference: f64) -> f64 {
    let mut v = theta - TAU * ((theta - reference) / TAU).round();
    if v <= reference - PI {
        v += TAU;
    } else if v > reference + PI {
        v -= TAU;
    }
    v
}

fn principal_arg(w: C64) -> f64 {
    let a = w.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// Converts conjugate-symmetric weights to log-polar coordinates.
///
/// Returns the vector and the coordinates whose modulus fell below `eps_r`;
/// those are floored to `ln(eps_r)` with phase 0 and logged as warnings.
pub fn to_logpolar(weights: &ComplexWeights, eps_r: f64) -> Result<(LogPolarVector, Vec<Coordinate>)> {
    if !(eps_r.is_finite() && eps_r > 0.0) {
        return Err(Error::invalid(format!("eps_r must be finite and > 0, got {eps_r}")));
    }
    let asym = weights.symmetry_error();
    if asym > SYMMETRY_TOL {
        return Err(Error::invalid(format!(
            "weights are not conjugate symmetric (deviation {asym:e} > {SYMMETRY_TOL:e})"
        )));
    }
    let layout = WeightIndexMap::new(weights.dofs(), weights.harmonics());
    let mut values = DVector::zeros(layout.dim());
    let mut floored = Vec::new();
    for d in 0..layout.dofs() {
        values[layout.index(Coordinate::dc(d))?] = weights.get(d, 0).re;
        for k in 1..=layout.harmonics() {
            let w = weights.get(d, k as i64);
            let modulus = w.norm();
            let (ln_r, theta) = if modulus < eps_r {
                floored.push(Coordinate::log_amplitude(d, k));
                (eps_r.ln(), 0.0)
            } else {
                (modulus.ln(), principal_arg(w))
            };
            values[layout.index(Coordinate::log_amplitude(d, k))?] = ln_r;
            values[layout.index(Coordinate::phase(d, k))?] = theta;
        }
    }
    if !floored.is_empty() {
        log::warn!("{} weight moduli below eps_r={eps_r:e} floored (first: {})", floored.len(), floored[0]);
    }
    Ok((LogPolarVector::new(values, layout)?, floored))
}

/// Rebuilds complex weights `exp(ln r) exp(i theta)`, filling negative harmonics by conjugation.
pub fn from_logpolar(x: &LogPolarVector, duration: f64) -> Result<ComplexWeights> {
    let layout = x.layout();
    let k_max = layout.harmonics();
    let mut coeffs = DMatrix::from_element(layout.dofs(), 2 * k_max + 1, Complex::new(0.0, 0.0));
    for d in 0..layout.dofs() {
        coeffs[(d, k_max)] = Complex::new(x.get(Coordinate::dc(d))?, 0.0);
        for k in 1..=k_max {
            let r = x.get(Coordinate::log_amplitude(d, k))?.exp();
            let w = Complex::from_polar(r, x.get(Coordinate::phase(d, k))?);
            coeffs[(d, k_max + k)] = w;
            coeffs[(d, k_max - k)] = w.conj();
        }
    }
    ComplexWeights::new(coeffs, duration)
}

/// Aligned vectors plus the per-phase circular means they were aligned to.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAlignment {
    pub vectors: Vec<LogPolarVector>,
    /// Length `D*K`, indexed by [`WeightIndexMap::phase_slot`].
    pub reference: Vec<f64>,
}

/// Unwraps every phase coordinate to within pi of its circular mean across `vectors`.
pub fn align_phases(vectors: &[LogPolarVector]) -> Result<PhaseAlignment> {
    let layout = vectors.first().ok_or_else(|| Error::invalid("phase alignment needs at least one vector"))?.layout();
    if let Some(v) = vectors.iter().find(|v| v.layout() != layout) {
        return Err(Error::Dimension { expected: layout.dim(), found: v.layout().dim() });
    }
    let mut out: Vec<LogPolarVector> = vectors.to_vec();
    let mut reference = vec![0.0; layout.dofs() * layout.harmonics()];
    for (slot, idx) in layout.phase_indices() {
        let (s, c) = vectors.iter().fold((0.0, 0.0), |(s, c), v| {
            let theta = v.values[idx];
            (s + theta.sin(), c + theta.cos())
        });
        let mean = s.atan2(c);
        reference[slot] = mean;
        for v in &mut out {
            v.values[idx] = unwrap_near(v.values[idx], mean);
        }
    }
    Ok(PhaseAlignment { vectors: out, reference })
}

/// Multivariate Gaussian over log-polar weight coordinates.
///
/// Coordinates with zero variance are treated as fixed: sampling returns the
/// mean there and conditioning skips them.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureModel {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    layout: WeightIndexMap,
    ref_duration: f64,
    lambda: f64,
    phase_ref: Vec<f64>,
}

impl GestureModel {
    pub fn new(
        mu: DVector<f64>,
        sigma: DMatrix<f64>,
        layout: WeightIndexMap,
        ref_duration: f64,
        lambda: f64,
        phase_ref: Vec<f64>,
    ) -> Result<Self> {
        let dim = layout.dim();
        if mu.len() != dim {
            return Err(Error::Dimension { expected: dim, found: mu.len() });
        }
        if sigma.shape() != (dim, dim) {
            return Err(Error::Dimension { expected: dim * dim, found: sigma.len() });
        }
        let phase_len = layout.dofs() * layout.harmonics();
        if phase_ref.len() != phase_len {
            return Err(Error::Dimension { expected: phase_len, found: phase_ref.len() });
        }
        if mu.iter().chain(sigma.iter()).chain(&phase_ref).any(|v| !v.is_finite()) {
            return Err(Error::invalid("model contains non-finite values"));
        }
        if !(ref_duration.is_finite() && ref_duration > 0.0) {
            return Err(Error::invalid(format!("ref_duration must be > 0, got {ref_duration}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
        }
        let asym = (&sigma - sigma.transpose()).amax();
        if asym > 1e-12 * sigma.amax().max(1.0) {
            return Err(Error::invalid(format!("covariance is not symmetric (deviation {asym:e})")));
        }
        if sigma.diagonal().iter().any(|v| *v < 0.0) {
            return Err(Error::invalid("covariance has a negative variance"));
        }
        Ok(Self { mu, sigma, layout, ref_duration, lambda, phase_ref })
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn layout(&self) -> WeightIndexMap {
        self.layout
    }

    pub fn dofs(&self) -> usize {
        self.layout.dofs()
    }

    pub fn harmonics(&self) -> usize {
        self.layout.harmonics()
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn ref_duration(&self) -> f64 {
        self.ref_duration
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn phase_ref(&self) -> &[f64] {
        &self.phase_ref
    }

    pub fn mean_vector(&self) -> LogPolarVector {
        LogPolarVector { values: self.mu.clone(), layout: self.layout }
    }

    pub fn mean_at(&self, c: Coordinate) -> Result<f64> {
        Ok(self.mu[self.layout.index(c)?])
    }

    pub fn variance_at(&self, c: Coordinate) -> Result<f64> {
        let i = self.layout.index(c)?;
        Ok(self.sigma[(i, i)])
    }

    /// Indices with positive variance.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.sigma[(i, i)] > 0.0).collect()
    }

    /// Precomputes a Cholesky factor of the free block for repeated draws.
    pub fn sampler(&self) -> Result<Sampler<'_>> {
        let free = self.free_indices();
        let block = self.sigma.select_rows(&free).select_columns(&free);
        let chol = if free.is_empty() {
            None
        } else {
            Some(Cholesky::new(block).ok_or_else(|| {
                Error::NotPositiveDefinite(format!(
                    "covariance over {} free coordinates cannot be factored",
                    free.len()
                ))
            })?)
        };
        Ok(Sampler { model: self, free, chol })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json { path: path.to_path_buf(), source },
            Error::Io { .. } | Error::SchemaVersion { .. } => e,
            other => Error::Format { path: path.to_path_buf(), message: other.to_string() },
        })
    }

    /// JSON with every float printed to 17 significant digits.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            dofs: self.dofs(),
            harmonics: self.harmonics(),
            ref_duration_s: self.ref_duration,
            lambda: self.lambda,
            mu: self.mu.iter().copied().collect(),
            sigma: self.sigma.transpose().iter().copied().collect(),
            phase_ref: self.phase_ref.clone(),
            index_layout: WeightIndexMap::LAYOUT.to_string(),
        };
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
        file.serialize(&mut ser).expect("in-memory serialization cannot fail");
        buf.push(b'\n');
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: SchemaHeader =
            serde_json::from_str(text).map_err(|source| Error::Json { path: "<model>".into(), source })?;
        if header.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::SchemaVersion { expected: MODEL_SCHEMA_VERSION, found: header.schema_version });
        }
        let file: ModelFile =
            serde_json::from_str(text).map_err(|source| Error::Json { path: "<model>".into(), source })?;
        if file.index_layout != WeightIndexMap::LAYOUT {
            return Err(Error::invalid(format!(
                "unsupported index layout `{}`, expected `{}`",
                file.index_layout,
                WeightIndexMap::LAYOUT
            )));
        }
        let layout = WeightIndexMap::new(file.dofs, file.harmonics);
        let dim = layout.dim();
        if file.sigma.len() != dim * dim {
            return Err(Error::invalid(format!(
                "sigma has {} entries, expected {dim}x{dim} = {}",
                file.sigma.len(),
                dim * dim
            )));
        }
        if file.mu.len() != dim {
            return Err(Error::invalid(format!("mu has {} entries, expected {dim}", file.mu.len())));
        }
        Self::new(
            DVector::from_vec(file.mu),
            DMatrix::from_row_slice(dim, dim, &file.sigma),
            layout,
            file.ref_duration_s,
            file.lambda,
            file.phase_ref,
        )
    }
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Deserialize)]
struct SchemaHeader {
    schema_version: u32,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    #[serde(rename = "D")]
    dofs: usize,
    #[serde(rename = "K")]
    harmonics: usize,
    ref_duration_s: f64,
    lambda: f64,
    mu: Vec<f64>,
    sigma: Vec<f64>,
    phase_ref: Vec<f64>,
    index_layout: String,
}

struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Draws from a [`GestureModel`] using a cached factor of its free covariance block.
pub struct Sampler<'a> {
    model: &'a GestureModel,
    free: Vec<usize>,
    chol: Option<Cholesky<f64, Dyn>>,
}

impl Sampler<'_> {
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> LogPolarVector {
        let mut values = self.model.mu.clone();
        if let Some(chol) = &self.chol {
            let z = DVector::from_fn(self.free.len(), |_, _| StandardNormal.sample(rng));
            let dx = chol.l() * z;
            for (j, &i) in self.free.iter().enumerate() {
                values[i] += dx[j];
            }
        }
        LogPolarVector { values, layout: self.model.layout }
    }
}

/// One draw `mu + L z`, deterministic in `seed`.
pub fn sample_model(model: &GestureModel, seed: u64) -> Result<LogPolarVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(model.sampler()?.sample(&mut rng))
}

/// Fits the Gaussian over aligned log-polar weights of every demonstration.
///
/// Covariance uses the `1/M` normalization and is then loaded on the diagonal
/// with `lambda * trace / dim` (or `lambda` alone when the trace is zero).
pub fn fit_model(dataset: &Dataset, harmonics: usize, lambda: f64, eps_r: f64) -> Result<GestureModel> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if 2 * harmonics + 1 > dataset.min_len() {
        return Err(Error::invalid(format!(
            "K={harmonics} needs at least {} samples per demonstration, shortest has {}",
            2 * harmonics + 1,
            dataset.min_len()
        )));
    }
    let mut vectors = Vec::with_capacity(dataset.len());
    for demo in dataset.demos() {
        let w = fit_weights(demo, harmonics)?;
        let (x, _) = to_logpolar(&w, eps_r)?;
        vectors.push(x);
    }
    let PhaseAlignment { vectors, reference } = align_phases(&vectors)?;
    let layout = vectors[0].layout();
    let dim = layout.dim();
    let m = vectors.len() as f64;

    let mut mu = DVector::zeros(dim);
    for v in &vectors {
        mu += &v.values;
    }
    mu /= m;
    let mut sigma = DMatrix::zeros(dim, dim);
    for v in &vectors {
        let c = &v.values - &mu;
        sigma.ger(1.0 / m, &c, &c, 1.0);
    }
    symmetrize(&mut sigma);
    let load = diagonal_load(&sigma, lambda);
    for i in 0..dim {
        sigma[(i, i)] += load;
    }

    let ref_duration = dataset.demos().iter().map(|d| d.duration()).sum::<f64>() / m;
    GestureModel::new(mu, sigma, layout, ref_duration, lambda, reference)
}

fn diagonal_load(sigma: &DMatrix<f64>, lambda: f64) -> f64 {
    let n = sigma.nrows();
    if n == 0 {
        return 0.0;
    }
    let mean_var = sigma.trace() / n as f64;
    lambda * if mean_var > 0.0 { mean_var } else { 1.0 }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Fixes one model coordinate to a value given in natural units: amplitude in
/// radians (converted with `ln`), phase in radians, dc in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningConstraint {
    pub target: Coordinate,
    pub value: f64,
}

impl ConditioningConstraint {
    pub fn amplitude(dof: usize, harmonic: usize, value: f64) -> Self {
        Self { target: Coordinate::log_amplitude(dof, harmonic), value }
    }

    pub fn phase(dof: usize, harmonic: usize, value: f64) -> Self {
        Self { target: Coordinate::phase(dof, harmonic), value }
    }

    pub fn dc(dof: usize, value: f64) -> Self {
        Self { target: Coordinate::dc(dof), value }
    }

    /// Value in model coordinates.
    fn model_value(&self, model: &GestureModel) -> Result<f64> {
        let v = self.value;
        if !v.is_finite() {
            return Err(Error::invalid(format!("{}: non-finite value", self.target)));
        }
        match self.target.component {
            Component::Dc => Ok(v),
            Component::LogAmplitude if v > 0.0 => Ok(v.ln()),
            Component::LogAmplitude => Err(Error::invalid(format!("{}: amplitude must be > 0, got {v}", self.target))),
            Component::Phase if v > -PI && v <= PI => {
                let slot = model.layout.phase_slot(self.target.dof, self.target.harmonic);
                Ok(unwrap_near(v, model.phase_ref[slot]))
            }
            Component::Phase => Err(Error::invalid(format!("{}: phase must lie in (-pi, pi], got {v}", self.target))),
        }
    }
}

impl FromStr for ConditioningConstraint {
    type Err = Error;

    /// Parses `amp:dof=2,k=10,value=5`, `phase:dof=0,k=3,value=-1.2` or `dc:dof=1,value=0.4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::invalid(format!("constraint `{s}`: {msg}"));
        let (kind, rest) =
            s.split_once(':').ok_or_else(|| bad("expected `<amp|phase|dc>:dof=..,k=..,value=..`".into()))?;
        let (mut dof, mut k, mut value) = (None, None, None);
        for part in rest.split(',') {
            let (key, val) = part.split_once('=').ok_or_else(|| bad(format!("`{part}` is not key=value")))?;
            let val = val.trim();
            match key.trim() {
                "dof" => dof = Some(val.parse::<usize>().map_err(|_| bad(format!("bad dof `{val}`")))?),
                "k" => k = Some(val.parse::<usize>().map_err(|_| bad(format!("bad k `{val}`")))?),
                "value" => value = Some(val.parse::<f64>().map_err(|_| bad(format!("bad value `{val}`")))?),
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let dof = dof.ok_or_else(|| bad("missing dof".into()))?;
        let value = value.ok_or_else(|| bad("missing value".into()))?;
        match kind.trim() {
            "amp" => Ok(Self::amplitude(dof, k.ok_or_else(|| bad("missing k".into()))?, value)),
            "phase" => Ok(Self::phase(dof, k.ok_or_else(|| bad("missing k".into()))?, value)),
            "dc" => match k {
                None | Some(0) => Ok(Self::dc(dof, value)),
                Some(k) => Err(bad(format!("dc constraints take k=0, got {k}"))),
            },
            other => Err(bad(format!("unknown kind `{other}`"))),
        }
    }
}

/// Gaussian conditioning on a subset of coordinates.
///
/// Constrained coordinates keep their value as the mean with zero variance.
/// Coordinates already fixed by an earlier conditioning may be repeated with
/// the same value and are otherwise rejected.
pub fn condition(model: &GestureModel, constraints: &[ConditioningConstraint]) -> Result<GestureModel> {
    let layout = model.layout;
    let mut targets: Vec<(usize, f64)> = Vec::with_capacity(constraints.len());
    for c in constraints {
        let idx = layout.index(c.target)?;
        if targets.iter().any(|(i, _)| *i == idx) {
            return Err(Error::invalid(format!("duplicate constraint on {}", c.target)));
        }
        targets.push((idx, c.model_value(model)?));
    }

    let mut new_b = Vec::new();
    for &(idx, value) in &targets {
        if model.sigma[(idx, idx)] > 0.0 {
            new_b.push((idx, value));
            continue;
        }
        let current = model.mu[idx];
        if (current - value).abs() > 1e-12 * current.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "{} is already fixed at {current}, cannot condition it to {value}",
                layout.coordinate(idx)
            )));
        }
    }
    if new_b.is_empty() {
        return Ok(model.clone());
    }

    let b: Vec<usize> = new_b.iter().map(|(i, _)| *i).collect();
    let a: Vec<usize> = model.free_indices().into_iter().filter(|i| !b.contains(i)).collect();
    if a.is_empty() {
        return Err(Error::invalid("conditioning must leave at least one free coordinate"));
    }

    let s = &model.sigma;
    let s_bb = s.select_rows(&b).select_columns(&b);
    let s_ab = s.select_rows(&a).select_columns(&b);
    let s_aa = s.select_rows(&a).select_columns(&a);
    let chol = Cholesky::new(s_bb).ok_or_else(|| {
        Error::NotPositiveDefinite(format!(
            "covariance of the {} constrained coordinates is singular; increase lambda",
            b.len()
        ))
    })?;
    let innovation = DVector::from_iterator(b.len(), new_b.iter().map(|(i, v)| v - model.mu[*i]));
    // gain^T = S_bb^-1 S_ba
    let gain_t = chol.solve(&s_ab.transpose());
    let mu_a = model.mu.select_rows(&a) + gain_t.transpose() * innovation;
    let mut cov_a = s_aa - &s_ab * &gain_t;
    symmetrize(&mut cov_a);
    if Cholesky::new(cov_a.clone()).is_none() {
        let load = diagonal_load(&cov_a, model.lambda.max(f64::EPSILON));
        log::warn!("conditional covariance lost definiteness; loading diagonal by {load:e}");
        for i in 0..a.len() {
            cov_a[(i, i)] += load;
        }
    }

    let mut mu = model.mu.clone();
    let mut sigma = model.sigma.clone();
    for &(i, v) in &new_b {
        mu[i] = v;
        sigma.row_mut(i).fill(0.0);
        sigma.column_mut(i).fill(0.0);
    }
    for (r, &i) in a.iter().enumerate() {
        mu[i] = mu_a[r];
        for (c, &j) in a.iter().enumerate() {
            sigma[(i, j)] = cov_a[(r, c)];
        }
    }
    GestureModel::new(mu, sigma, layout, model.ref_duration, model.lambda, model.phase_ref.clone())
}

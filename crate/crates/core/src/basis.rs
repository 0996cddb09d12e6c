//! Complex exponential basis and least-squares weight fitting.
//!
//! The basis has one column per harmonic `k` in `-K..=K`, with entries
//! `exp(i 2 pi t k / T)` for `t = 0..T-1`. On that grid the columns are
//! orthogonal (`Phi^H Phi = T I`), so the least-squares weights are a plain
//! projection `Phi^H y / T`. The multi-joint system `Phi (x) I_D` is never
//! formed; each joint is projected onto the shared `Phi`.

use std::f64::consts::TAU;

use nalgebra::{Complex, DMatrix};

use crate::dataset::Demonstration;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// `exp(i 2 pi num / den)` with the numerator reduced modulo `den` first, so
/// large `t * k` products do not lose phase precision.
fn unit_root(num: i64, den: usize) -> C64 {
    let den = den as i64;
    let r = num.rem_euclid(den);
    Complex::from_polar(1.0, TAU * r as f64 / den as f64)
}

/// The `samples`-th roots of unity; entry `r` is `exp(i 2 pi r / samples)`.
fn roots_of_unity(samples: usize) -> Vec<C64> {
    (0..samples as i64).map(|r| unit_root(r, samples)).collect()
}

/// Dense `T x (2K+1)` basis matrix. Column `j` holds harmonic `k = j - K`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    entries: DMatrix<C64>,
    harmonics: usize,
}

impl BasisMatrix {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn samples(&self) -> usize {
        self.entries.nrows()
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    /// Column index of harmonic `k`.
    pub fn column(&self, k: i64) -> usize {
        (k + self.harmonics as i64) as usize
    }
}

pub fn check_basis_size(samples: usize, harmonics: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {samples}")));
    }
    if 2 * harmonics + 1 > samples {
        return Err(Error::invalid(format!(
            "{} basis columns (K={harmonics}) exceed {samples} samples; the fit would be underdetermined",
            2 * harmonics + 1
        )));
    }
    Ok(())
}

pub fn build_basis(samples: usize, harmonics: usize) -> Result<BasisMatrix> {
    check_basis_size(samples, harmonics)?;
    let k_max = harmonics as i64;
    let roots = roots_of_unity(samples);
    let mut entries = DMatrix::from_element(samples, 2 * harmonics + 1, Complex::new(1.0, 0.0));
    for k in 1..=k_max {
        let pos = (k + k_max) as usize;
        let neg = (k_max - k) as usize;
        for t in 0..samples {
            let z = roots[(t as i64 * k).rem_euclid(samples as i64) as usize];
            entries[(t, pos)] = z;
            entries[(t, neg)] = z.conj();
        }
    }
    Ok(BasisMatrix { entries, harmonics })
}

/// Complex Fourier weights of a multi-joint trajectory.
///
/// `coeffs` is `D x (2K+1)`; column `j` is harmonic `k = j - K`. `duration`
/// is the wall-clock length of one basis period in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWeights {
    coeffs: DMatrix<C64>,
    harmonics: usize,
    duration: f64,
}

/// Largest tolerated `|w_k - conj(w_-k)|` and `|Im w_0|` for weights of a real signal.
pub const SYMMETRY_TOL: f64 = 1e-9;

impl ComplexWeights {
    pub fn new(coeffs: DMatrix<C64>, duration: f64) -> Result<Self> {
        let cols = coeffs.ncols();
        if cols.is_multiple_of(2) {
            return Err(Error::invalid(format!("weights need an odd number of harmonic columns, got {cols}")));
        }
        if coeffs.nrows() == 0 {
            return Err(Error::invalid("weights need at least one joint"));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::invalid("weights contain non-finite values"));
        }
        Ok(Self { coeffs, harmonics: (cols - 1) / 2, duration })
    }

    pub fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn dofs(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    /// Weight of joint `dof` at harmonic `k` (`-K <= k <= K`).
    pub fn get(&self, dof: usize, k: i64) -> C64 {
        self.coeffs[(dof, (k + self.harmonics as i64) as usize)]
    }

    /// Largest deviation from conjugate symmetry, including `|Im w_0|`.
    pub fn symmetry_error(&self) -> f64 {
        let k_max = self.harmonics as i64;
        let mut worst: f64 = 0.0;
        for d in 0..self.dofs() {
            worst = worst.max(self.get(d, 0).im.abs());
            for k in 1..=k_max {
                worst = worst.max((self.get(d, k) - self.get(d, -k).conj()).norm());
            }
        }
        worst
    }

    /// Evaluates `sum_k w_k exp(i 2 pi k s)` for each phase `s` (in periods).
    /// Returns a `phases x D` complex matrix.
    pub fn evaluate(&self, phases: &[f64]) -> DMatrix<C64> {
        let k_max = self.harmonics as i64;
        let mut out = DMatrix::from_element(phases.len(), self.dofs(), Complex::new(0.0, 0.0));
        for (row, &s) in phases.iter().enumerate() {
            let s = s.rem_euclid(1.0);
            for k in -k_max..=k_max {
                let e = Complex::from_polar(1.0, TAU * s * k as f64);
                for d in 0..self.dofs() {
                    out[(row, d)] += self.get(d, k) * e;
                }
            }
        }
        out
    }

    /// Evaluates the weights on the uniform grid `t / samples`, `t = 0..samples-1`,
    /// using exact rational phases.
    pub fn evaluate_grid(&self, samples: usize) -> DMatrix<C64> {
        let k_max = self.harmonics as i64;
        let roots = roots_of_unity(samples);
        let mut out = DMatrix::from_element(samples, self.dofs(), Complex::new(0.0, 0.0));
        for t in 0..samples {
            for k in -k_max..=k_max {
                let e = roots[(t as i64 * k).rem_euclid(samples as i64) as usize];
                for d in 0..self.dofs() {
                    out[(t, d)] += self.get(d, k) * e;
                }
            }
        }
        out
    }
}

/// Least-squares Fourier weights of every joint of `demo`.
pub fn fit_weights(demo: &Demonstration, harmonics: usize) -> Result<ComplexWeights> {
    let samples = demo.len();
    check_basis_size(samples, harmonics)?;
    let y = demo.samples();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("demonstration contains non-finite samples"));
    }
    let dofs = demo.dofs();
    let k_max = harmonics as i64;
    let scale = 1.0 / samples as f64;
    let roots = roots_of_unity(samples);
    let mut coeffs = DMatrix::from_element(dofs, 2 * harmonics + 1, Complex::new(0.0, 0.0));

    for d in 0..dofs {
        let mean = y.column(d).iter().sum::<f64>() * scale;
        coeffs[(d, harmonics)] = Complex::new(mean, 0.0);
    }
    for k in 1..=k_max {
        // Phi^H y: conjugated basis column dotted with each joint's samples.
        let mut acc = vec![Complex::new(0.0, 0.0); dofs];
        for t in 0..samples {
            let e = roots[(-(t as i64) * k).rem_euclid(samples as i64) as usize];
            for (d, a) in acc.iter_mut().enumerate() {
                *a += e * y[(t, d)];
            }
        }
        for (d, a) in acc.into_iter().enumerate() {
            let w = a * scale;
            coeffs[(d, (k_max + k) as usize)] = w;
            coeffs[(d, (k_max - k) as usize)] = w.conj();
        }
    }
    ComplexWeights::new(coeffs, demo.duration())
}

/// Real `T_out x D` trajectory `Re(Phi(T_out, K) w)`, one full period over `T_out` samples.
pub fn reconstruct(weights: &ComplexWeights, samples: usize) -> Result<DMatrix<f64>> {
    if samples < 2 {
        return Err(Error::invalid(format!("need at least 2 output samples, got {samples}")));
    }
    Ok(weights.evaluate_grid(samples).map(|c| c.re))
}

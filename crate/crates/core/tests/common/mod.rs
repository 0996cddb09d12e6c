//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use nalgebra::{Complex, DMatrix, DVector, SVD};
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;

/// Basis evaluated directly as `exp(i 2 pi t k / T)` without any phase reduction.
pub fn naive_basis(samples: usize, harmonics: usize) -> DMatrix<C64> {
    let k_max = harmonics as i64;
    DMatrix::from_fn(samples, 2 * harmonics + 1, |t, j| {
        let k = j as i64 - k_max;
        Complex::from_polar(1.0, TAU * t as f64 * k as f64 / samples as f64)
    })
}

/// Solves the stacked multi-joint system `(Phi kron I_D) w = vec(y)` by dense SVD
/// least squares. Returns the `D x (2K+1)` weight matrix.
pub fn kron_least_squares(y: &DMatrix<f64>, harmonics: usize) -> DMatrix<C64> {
    let (samples, dofs) = y.shape();
    let phi = naive_basis(samples, harmonics);
    let cols = 2 * harmonics + 1;
    let mut psi = DMatrix::from_element(samples * dofs, cols * dofs, Complex::new(0.0, 0.0));
    for t in 0..samples {
        for j in 0..cols {
            for d in 0..dofs {
                psi[(t * dofs + d, j * dofs + d)] = phi[(t, j)];
            }
        }
    }
    let rhs = DVector::from_fn(samples * dofs, |i, _| Complex::new(y[(i / dofs, i % dofs)], 0.0));
    let w = SVD::new(psi, true, true).solve(&rhs, 1e-12).expect("svd solve");
    DMatrix::from_fn(dofs, cols, |d, j| w[j * dofs + d])
}

/// Per-joint normal equations `(Phi^H Phi)^-1 Phi^H y` solved with LU.
pub fn normal_equations(y: &DMatrix<f64>, harmonics: usize) -> DMatrix<C64> {
    let (samples, dofs) = y.shape();
    let phi = naive_basis(samples, harmonics);
    let gram = phi.adjoint() * &phi;
    let lu = gram.lu();
    let mut out = DMatrix::from_element(dofs, 2 * harmonics + 1, Complex::new(0.0, 0.0));
    for d in 0..dofs {
        let col = DVector::from_fn(samples, |t, _| Complex::new(y[(t, d)], 0.0));
        let w = lu.solve(&(phi.adjoint() * col)).expect("gram is invertible");
        out.row_mut(d).copy_from(&w.transpose());
    }
    out
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Conditional Gaussian read off the full precision matrix:
/// `Cov_a|b = (Lambda_aa)^-1`, `mu_a|b = mu_a - (Lambda_aa)^-1 Lambda_ab (x_b - mu_b)`.
pub fn precision_conditional(
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    b: &[usize],
    x_b: &[f64],
) -> (Vec<usize>, DVector<f64>, DMatrix<f64>) {
    let n = mu.len();
    let a: Vec<usize> = (0..n).filter(|i| !b.contains(i)).collect();
    let precision = sigma.clone().try_inverse().expect("sigma invertible");
    let l_aa = precision.select_rows(&a).select_columns(&a);
    let l_ab = precision.select_rows(&a).select_columns(b);
    let cov = l_aa.try_inverse().expect("precision block invertible");
    let delta = DVector::from_iterator(b.len(), b.iter().zip(x_b).map(|(&i, v)| v - mu[i]));
    let mean = mu.select_rows(&a) - &cov * (l_ab * delta);
    (a, mean, cov)
}

pub fn random_pd<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let s = &a * a.transpose() + DMatrix::identity(n, n) * 0.1;
    (&s + s.transpose()) * 0.5
}

type Mat4 = [[f64; 4]; 4];

fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Rodrigues rotation about a unit axis as a homogeneous transform.
pub fn rotation_h(axis: [f64; 3], angle: f64) -> Mat4 {
    let [x, y, z] = axis;
    let (s, c) = angle.sin_cos();
    let v = 1.0 - c;
    [
        [c + x * x * v, x * y * v - z * s, x * z * v + y * s, 0.0],
        [y * x * v + z * s, c + y * y * v, y * z * v - x * s, 0.0],
        [z * x * v - y * s, z * y * v + x * s, c + z * z * v, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn translation_h(p: [f64; 3]) -> Mat4 {
    [[1.0, 0.0, 0.0, p[0]], [0.0, 1.0, 0.0, p[1]], [0.0, 0.0, 1.0, p[2]], [0.0, 0.0, 0.0, 1.0]]
}

/// Chain positions from composed homogeneous transforms
/// `T = Trans(base) Rz(yaw) Ry(pitch) Rx(roll) prod_i Rot(axis_i, q_i) Trans(offset_i)`.
pub fn transform_chain(
    base_position: [f64; 3],
    rpy: [f64; 3],
    joints: &[([f64; 3], [f64; 3])],
    q: &[f64],
) -> Vec<[f64; 3]> {
    let mut t = translation_h(base_position);
    t = mat4_mul(&t, &rotation_h([0.0, 0.0, 1.0], rpy[2]));
    t = mat4_mul(&t, &rotation_h([0.0, 1.0, 0.0], rpy[1]));
    t = mat4_mul(&t, &rotation_h([1.0, 0.0, 0.0], rpy[0]));
    let mut out = vec![[t[0][3], t[1][3], t[2][3]]];
    for ((axis, offset), &angle) in joints.iter().zip(q) {
        t = mat4_mul(&t, &rotation_h(*axis, angle));
        t = mat4_mul(&t, &translation_h(*offset));
        out.push([t[0][3], t[1][3], t[2][3]]);
    }
    out
}

pub fn zero_crossings<I: IntoIterator<Item = f64>>(values: I) -> usize {
    let mut prev: Option<bool> = None;
    let mut n = 0;
    for v in values {
        let neg = v < 0.0;
        if prev.is_some_and(|p| p != neg) {
            n += 1;
        }
        prev = Some(neg);
    }
    n
}

//! Acceptance criteria. Runs without the libtest harness so the one-line
//! PASS/FAIL report per criterion is always printed:
//! `cargo test -p wavegest --test acceptance`.

mod common;

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::{max_abs_diff, precision_conditional, random_pd, transform_chain, zero_crossings};
use wavegest::basis::{build_basis, fit_weights, reconstruct, ComplexWeights};
use wavegest::generator::{generate_dataset, generate_with_params, Coupling, GeneratorSpec};
use wavegest::kinematics::{BasePose, Joint, KinematicChain};
use wavegest::model::{
    condition, fit_model, from_logpolar, sample_model, to_logpolar, ConditioningConstraint, Coordinate, GestureModel,
    LogPolarVector, WeightIndexMap, DEFAULT_EPS_R, DEFAULT_LAMBDA,
};
use wavegest::synthesis::{
    scale_amplitude, shift_phase, spectrum_stats, synthesize, time_scale, ModelMeta, SynthesisRequest,
};
use wavegest::Demonstration;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn c01_basis_orthogonality() -> Outcome {
    let (dev, elapsed) = timed(|| {
        let b = build_basis(200, 25).unwrap();
        let gram = b.entries().adjoint() * b.entries();
        let target = DMatrix::<Complex<f64>>::identity(51, 51) * Complex::new(200.0, 0.0);
        max_abs_diff(&gram, &target)
    });
    ensure(dev <= 1e-9, || format!("max deviation {dev:e} > 1e-9"))?;
    ensure(elapsed < Duration::from_millis(100), || format!("took {elapsed:?}"))?;
    Ok(format!("max |Phi^H Phi - 200 I| = {dev:.2e}, {elapsed:?}"))
}

fn c02_pure_tone() -> Outcome {
    let y = DMatrix::from_fn(100, 1, |t, _| 2.0 * (TAU * 5.0 * t as f64 / 100.0 + 0.7).cos());
    let w = fit_weights(&Demonstration::new(y, 0.01, "tone").unwrap(), 10).map_err(|e| e.to_string())?;
    let e_pos = (w.get(0, 5) - Complex::from_polar(1.0, 0.7)).norm();
    let e_neg = (w.get(0, -5) - Complex::from_polar(1.0, -0.7)).norm();
    ensure(e_pos <= 1e-9 && e_neg <= 1e-9, || format!("errors {e_pos:e}, {e_neg:e}"))?;
    Ok(format!("|w5 - e^0.7i| = {e_pos:.1e}, |w-5 - e^-0.7i| = {e_neg:.1e}"))
}

fn c03_band_limited_round_trip() -> Outcome {
    let spec = GeneratorSpec { noise_std_rad: 0.0, ..GeneratorSpec::waving_arm() };
    let ds = generate_dataset(&spec, 1).unwrap();
    let mut worst: f64 = 0.0;
    for demo in ds.demos() {
        let w = fit_weights(demo, 25).unwrap();
        let back = reconstruct(&w, demo.len()).unwrap();
        let rmse = ((back - demo.samples()).norm_squared() / demo.samples().len() as f64).sqrt();
        worst = worst.max(rmse);
    }
    ensure(worst <= 1e-8, || format!("worst RMSE {worst:e}"))?;
    Ok(format!("{} generated demos, worst RMSE {worst:.1e}", ds.len()))
}

fn c04_realness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (dofs, k_max, samples) = (3, 10, 64);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut c = DMatrix::from_element(dofs, 2 * k_max + 1, Complex::new(0.0, 0.0));
        for d in 0..dofs {
            c[(d, k_max)] = Complex::new(rng.sample(StandardNormal), 0.0);
            for k in 1..=k_max {
                let w = Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                c[(d, k_max + k)] = w;
                c[(d, k_max - k)] = w.conj();
            }
        }
        let w = ComplexWeights::new(c, 1.0).unwrap();
        let y = w.evaluate_grid(samples);
        worst = worst.max(y.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
    }
    ensure(worst <= 1e-9, || format!("max imaginary part {worst:e}"))?;
    Ok(format!("1000 weight sets, max |Im| = {worst:.1e}"))
}

fn c05_logpolar_inverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let layout = WeightIndexMap::new(4, 8);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        // x -> w -> x
        let x = DVector::from_fn(layout.dim(), |i, _| match layout.coordinate(i).component {
            wavegest::Component::Dc => rng.sample(StandardNormal),
            wavegest::Component::LogAmplitude => rng.random_range(-5.0..2.0),
            wavegest::Component::Phase => rng.random_range(-3.1..3.1),
        });
        let x = LogPolarVector::new(x, layout).unwrap();
        let w = from_logpolar(&x, 1.0).unwrap();
        let (back, floored) = to_logpolar(&w, DEFAULT_EPS_R).unwrap();
        ensure(floored.is_empty(), || "unexpected floor".into())?;
        worst = worst.max((back.values() - x.values()).amax());
        // w -> x -> w
        let again = from_logpolar(&back, 1.0).unwrap();
        worst = worst.max(max_abs_diff(again.coeffs(), w.coeffs()));
    }
    ensure(worst <= 1e-12, || format!("max round-trip error {worst:e}"))?;
    Ok(format!("200 vectors both directions, max error {worst:.1e}"))
}

fn c06_conditioning_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let layout = WeightIndexMap::new(2, 1);
    let (mut worst_rel, mut worst_eig) = (0.0f64, f64::INFINITY);
    for trial in 0..100 {
        let mu = DVector::from_fn(6, |_, _| rng.sample::<f64, _>(StandardNormal));
        let model = GestureModel::new(mu, random_pd(&mut rng, 6), layout, 1.0, 1e-6, vec![0.0, 0.0]).unwrap();
        let count = 1 + trial % 3;
        let mut idx: Vec<usize> = (0..6).collect();
        for i in 0..count {
            let j = rng.random_range(i..6);
            idx.swap(i, j);
        }
        let b = &idx[..count];
        let mut cons = Vec::new();
        let mut vals = Vec::new();
        for &i in b {
            let target = layout.coordinate(i);
            let (natural, internal) = match target.component {
                wavegest::Component::LogAmplitude => {
                    let a: f64 = rng.random_range(0.2..3.0);
                    (a, a.ln())
                }
                _ => {
                    let v = rng.random_range(-3.0..3.0);
                    (v, v)
                }
            };
            cons.push(ConditioningConstraint { target, value: natural });
            vals.push(internal);
        }
        let got = condition(&model, &cons).map_err(|e| e.to_string())?;
        let (a, mean, cov) = precision_conditional(model.mu(), model.sigma(), b, &vals);
        let got_mean = got.mu().select_rows(&a);
        let got_cov = got.sigma().select_rows(&a).select_columns(&a);
        let rel_mean = (&got_mean - &mean).amax() / mean.amax().max(1.0);
        let rel_cov = (&got_cov - &cov).amax() / cov.amax().max(1.0);
        worst_rel = worst_rel.max(rel_mean).max(rel_cov);
        let prior = model.sigma().select_rows(&a).select_columns(&a);
        let eig = (prior - got_cov).symmetric_eigenvalues();
        worst_eig = worst_eig.min(eig.min());
    }
    ensure(worst_rel <= 1e-9, || format!("relative error {worst_rel:e}"))?;
    ensure(worst_eig >= -1e-10, || format!("variance grew: eigenvalue {worst_eig:e}"))?;
    Ok(format!("100 trials, max rel error {worst_rel:.1e}, min shrink eigenvalue {worst_eig:.1e}"))
}

fn c07_sampling_moments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let layout = WeightIndexMap::new(4, 0);
    let mu = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.0]);
    let sigma = random_pd(&mut rng, 4);
    let model = GestureModel::new(mu.clone(), sigma.clone(), layout, 1.0, 0.0, vec![]).unwrap();
    let n = 100_000;
    let ((mean, cov), elapsed) = timed(|| {
        let sampler = model.sampler().unwrap();
        let mut draw_rng = ChaCha8Rng::seed_from_u64(70);
        let draws: Vec<DVector<f64>> = (0..n).map(|_| sampler.sample(&mut draw_rng).into_values()).collect();
        let mean = draws.iter().fold(DVector::zeros(4), |acc, d| acc + d) / n as f64;
        let mut cov = DMatrix::zeros(4, 4);
        for d in &draws {
            let c = d - &mean;
            cov += &c * c.transpose();
        }
        (mean, cov / n as f64)
    });
    for i in 0..4 {
        let tol = 5.0 * sigma[(i, i)].sqrt() / (n as f64).sqrt();
        ensure((mean[i] - mu[i]).abs() <= tol, || format!("mean[{i}] off by {:e} > {tol:e}", (mean[i] - mu[i]).abs()))?;
    }
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            // relative to the entry's natural scale sqrt(S_ii S_jj)
            let rel = (cov[(i, j)] - sigma[(i, j)]).abs() / (sigma[(i, i)] * sigma[(j, j)]).sqrt();
            worst = worst.max(rel);
        }
    }
    ensure(worst <= 0.05, || format!("covariance off by {worst:.3} relative"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("1e5 draws, worst covariance deviation {:.2}%, {elapsed:?}", 100.0 * worst))
}

fn protocol_model(seed: u64) -> GestureModel {
    let ds = generate_dataset(&GeneratorSpec::waving_arm(), seed).unwrap();
    fit_model(&ds, 25, DEFAULT_LAMBDA, DEFAULT_EPS_R).unwrap()
}

fn c08_conditioned_clamp() -> Outcome {
    let model = protocol_model(8);
    let target = Coordinate::log_amplitude(2, 10);
    let cond = condition(&model, &[ConditioningConstraint::amplitude(2, 10, 5.0)]).map_err(|e| e.to_string())?;
    let mean = cond.mean_at(target).unwrap();
    ensure(mean == 5f64.ln(), || format!("mean {mean} != ln 5"))?;
    let reported = spectrum_stats(&cond, false).get(2, 10).unwrap();
    // exp(ln 5) is one ulp below 5 in binary64
    ensure((reported - 5.0).abs() <= 4.0 * f64::EPSILON * 5.0, || format!("spectrum reports {reported}"))?;
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let x = sample_model(&cond, seed).map_err(|e| e.to_string())?;
        let w = from_logpolar(&x, cond.ref_duration()).unwrap();
        worst = worst.max((w.get(2, 10).norm() - 5.0).abs());
    }
    ensure(worst <= 1e-9, || format!("sampled |w_2,10| off by {worst:e}"))?;
    Ok(format!("mean = ln 5, spectrum {reported}, 50 samples within {worst:.1e}"))
}

fn c09_coupling_inference() -> Outcome {
    let spec = GeneratorSpec {
        duration_s: [5.0, 5.0],
        frequency_hz: [2.0, 2.0],
        coupling: vec![Coupling { dof_a: 2, dof_b: 4, rho: 0.9 }],
        ..GeneratorSpec::waving_arm()
    };
    let sigma_gen = spec.log_amplitude_sigma(2);
    let (elbow, wrist) = (Coordinate::log_amplitude(2, 10), Coordinate::log_amplitude(4, 10));
    let (mut up, mut down) = (0, 0);
    for seed in 0..10 {
        let (ds, params) = generate_with_params(&spec, 900 + seed).unwrap();
        ensure(params.iter().all(|p| p.cycles == 10.0), || "dominant harmonic is not 10".into())?;
        let model = fit_model(&ds, 25, DEFAULT_LAMBDA, DEFAULT_EPS_R).unwrap();
        let base = model.mean_at(wrist).unwrap();
        let mu_elbow = model.mean_at(elbow).unwrap();
        for (sign, count) in [(1.0, &mut up), (-1.0, &mut down)] {
            let value = (mu_elbow + sign * sigma_gen).exp();
            let c = condition(&model, &[ConditioningConstraint::amplitude(2, 10, value)]).map_err(|e| e.to_string())?;
            if sign * (c.mean_at(wrist).unwrap() - base) > 0.0 {
                *count += 1;
            }
        }
    }
    ensure(up == 10 && down == 10, || format!("upward {up}/10, downward {down}/10"))?;
    Ok(format!("wrist follows elbow: up {up}/10, down {down}/10"))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let code = wavegest::cli::run(std::iter::once("wavegest").chain(args.iter().copied()));
    ensure(code == 0, || format!("`wavegest {}` exited with {code}", args.join(" ")))
}

fn c10_protocol_pipeline() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();
    let spec = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/waving_arm_spec.json");
    let chain = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/waving_arm_chain.json");
    let (res, elapsed) = timed(|| -> Result<usize, String> {
        cli(&["gen-demos", "--spec", spec.to_str().unwrap(), "--out", &p("demos"), "--seed", "10"])?;
        cli(&["train", "--demos", &p("demos"), "--k", "25", "--out", &p("model.json")])?;
        cli(&[
            "condition",
            "--model",
            &p("model.json"),
            "--set",
            "amp:dof=2,k=20,value=0.3",
            "--out",
            &p("cond.json"),
        ])?;
        cli(&[
            "synthesize",
            "--model",
            &p("cond.json"),
            "--seed",
            "3",
            "--duration",
            "4",
            "--rate",
            "100",
            "--out",
            &p("gesture.csv"),
        ])?;
        cli(&[
            "render",
            "--chain",
            chain.to_str().unwrap(),
            "--traj",
            &p("gesture.csv"),
            "--stride",
            "7",
            "--plane",
            "xz",
            "--out",
            &p("overlay.svg"),
        ])?;
        Ok(fs::read_dir(tmp.path().join("demos")).map_err(|e| e.to_string())?.count())
    });
    let demos = res?;
    ensure(elapsed < Duration::from_secs(10), || format!("pipeline took {elapsed:?}"))?;
    ensure(demos == 15, || format!("{demos} demo files"))?;

    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(p("model.json")).unwrap()).unwrap();
    let dim = model["mu"].as_array().map_or(0, Vec::len);
    let sigma_len = model["sigma"].as_array().map_or(0, Vec::len);
    ensure(dim == 255 && sigma_len == 255 * 255, || format!("model dimension {dim}, sigma {sigma_len}"))?;

    let traj = wavegest::load_demo(p("gesture.csv")).map_err(|e| e.to_string())?;
    let svg = fs::read_to_string(p("overlay.svg")).unwrap();
    ensure(svg.starts_with("<?xml") && svg.contains("<svg") && svg.trim_end().ends_with("</svg>"), || {
        "malformed SVG".into()
    })?;
    let lines = svg.matches("<polyline").count();
    let expected = traj.len().div_ceil(7);
    ensure(lines == expected, || format!("{lines} polylines, expected {expected}"))?;
    Ok(format!("15 demos -> 255-dim model -> {} samples -> {lines} polylines in {elapsed:?}", traj.len()))
}

fn c11_modulation_exactness() -> Outcome {
    let model = protocol_model(11);
    let x = sample_model(&model, 1).unwrap();
    let meta = model.meta();
    let req = SynthesisRequest::new(model.ref_duration(), 100.0).unwrap();
    let base = synthesize(&x, &meta, &req).unwrap();
    let doubled = synthesize(&scale_amplitude(&x, 2.0, None).unwrap(), &meta, &req).unwrap();
    let dc = DVector::from_fn(model.dofs(), |d, _| x.get(Coordinate::dc(d)).unwrap());
    let mut scale_err: f64 = 0.0;
    for t in 0..base.len() {
        for d in 0..model.dofs() {
            let a = base.samples()[(t, d)] - dc[d];
            let b = doubled.samples()[(t, d)] - dc[d];
            scale_err = scale_err.max((b - 2.0 * a).abs());
        }
    }
    ensure(scale_err <= 1e-12, || format!("amplitude doubling error {scale_err:e}"))?;

    let mut shifted = x.clone();
    for d in 0..model.dofs() {
        for k in 1..=model.harmonics() {
            shifted = shift_phase(&shifted, TAU, k, d).unwrap();
        }
    }
    let shift_err = (synthesize(&shifted, &meta, &req).unwrap().samples() - base.samples()).amax();
    ensure(shift_err <= 1e-9, || format!("2 pi phase shift changed output by {shift_err:e}"))?;

    // single harmonic at 2 Hz for 10 s: 40 crossings, 20 after stretching by 2
    let layout = WeightIndexMap::new(1, 12);
    let mut tone = LogPolarVector::new(DVector::from_element(layout.dim(), -40.0), layout).unwrap();
    tone.set(Coordinate::dc(0), 0.0).unwrap();
    tone.set(Coordinate::log_amplitude(0, 10), 0.0).unwrap();
    for k in 1..=12 {
        tone.set(Coordinate::phase(0, k), 0.3).unwrap();
    }
    let tone_meta = ModelMeta { layout, ref_duration: 5.0 };
    let req = SynthesisRequest::new(10.0, 100.0).unwrap();
    let count = |r: &SynthesisRequest| {
        let y = synthesize(&tone, &tone_meta, r).unwrap();
        zero_crossings(y.samples().column(0).iter().copied())
    };
    let (before, after) = (count(&req), count(&time_scale(req, 2.0).unwrap()));
    ensure(before == 40 && after == 20, || format!("zero crossings {before} -> {after}"))?;
    Ok(format!("x2 amplitude err {scale_err:.1e}, 2pi shift err {shift_err:.1e}, crossings {before} -> {after}"))
}

fn c12_fk_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst_pos, mut worst_len) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let joints: Vec<Joint> = (0..6)
            .map(|_| {
                let axis = nalgebra::Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal)).normalize();
                Joint {
                    name: String::new(),
                    axis: [axis.x, axis.y, axis.z],
                    link_offset: [
                        rng.random_range(-0.4..0.4),
                        rng.random_range(-0.4..0.4),
                        rng.random_range(-0.4..0.4),
                    ],
                    limits: [-3.2, 3.2],
                }
            })
            .collect();
        let base = BasePose {
            position: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            rpy: [rng.random_range(-3.0..3.0), rng.random_range(-1.5..1.5), rng.random_range(-3.0..3.0)],
        };
        let chain = KinematicChain::new(joints, base).unwrap();
        let q: Vec<f64> = (0..6).map(|_| rng.random_range(-3.2..3.2)).collect();
        let got = chain.forward_kinematics(&q).unwrap();
        let spec: Vec<_> = chain.joints().iter().map(|j| (j.axis, j.link_offset)).collect();
        let want = transform_chain(chain.base_pose().position, chain.base_pose().rpy, &spec, &q);
        for (g, w) in got.iter().zip(&want) {
            worst_pos = worst_pos.max((g - nalgebra::Vector3::from(*w)).amax());
        }
        for (i, len) in chain.link_lengths().iter().enumerate() {
            worst_len = worst_len.max(((got[i + 1] - got[i]).norm() - len).abs());
        }
    }
    ensure(worst_pos <= 1e-12, || format!("position error {worst_pos:e}"))?;
    ensure(worst_len <= 1e-9, || format!("link length error {worst_len:e}"))?;
    Ok(format!("100 chains, position error {worst_pos:.1e}, link error {worst_len:.1e}"))
}

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("C1 basis orthogonality", c01_basis_orthogonality),
        ("C2 pure-tone recovery", c02_pure_tone),
        ("C3 band-limited round trip", c03_band_limited_round_trip),
        ("C4 realness", c04_realness),
        ("C5 log-polar inverse pair", c05_logpolar_inverse),
        ("C6 Gaussian conditioning oracle", c06_conditioning_oracle),
        ("C7 sampling moments", c07_sampling_moments),
        ("C8 conditioned clamp", c08_conditioned_clamp),
        ("C9 coupling inference", c09_coupling_inference),
        ("C10 protocol-scale pipeline", c10_protocol_pipeline),
        ("C11 modulation exactness", c11_modulation_exactness),
        ("C12 FK oracle", c12_fk_oracle),
    ];
    let mut failures = Vec::new();
    for (name, check) in criteria.iter() {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failures.push(name);
            }
        }
    }
    if failures.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: {} of {} criteria failed: {failures:?}", failures.len(), criteria.len());
        std::process::exit(1);
    }
}

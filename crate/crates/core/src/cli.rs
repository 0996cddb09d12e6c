//! `wavegest` command-line pipeline.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use crate::dataset::{load_dataset, load_demo, save_dataset, save_demo};
use crate::generator::{generate_dataset, GeneratorSpec};
use crate::kinematics::{check_joint_limits, render_overlay, ChainConfig, Plane, RenderOptions};
use crate::model::{
    condition, fit_model, sample_model, ConditioningConstraint, GestureModel, DEFAULT_EPS_R, DEFAULT_LAMBDA,
};
use crate::synthesis::{sample_gesture, scale_amplitude, spectrum_stats, synthesize, time_scale, SynthesisRequest};

#[derive(Debug, Parser)]
#[command(name = "wavegest", version, about = "Learn, sample and modulate rhythmic wave gestures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic demonstration dataset from a generator spec (JSON).
    GenDemos {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit a gesture model to a directory of demonstrations.
    Train {
        #[arg(long)]
        demos: PathBuf,
        #[arg(long, default_value_t = 25)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long = "eps-r", default_value_t = DEFAULT_EPS_R)]
        eps_r: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw gestures from a model into a directory.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        timing: Timing,
        #[arg(long)]
        out: PathBuf,
    },
    /// Condition a model on amplitude, phase or dc values.
    Condition {
        #[arg(long)]
        model: PathBuf,
        /// `amp:dof=D,k=K,value=V`, `phase:dof=D,k=K,value=V` or `dc:dof=D,value=V`; repeatable.
        #[arg(long = "set", required = true, value_parser = parse_constraint)]
        constraints: Vec<ConditioningConstraint>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample one gesture and apply amplitude and time scaling.
    Synthesize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        timing: Timing,
        #[arg(long = "scale-amp", default_value_t = 1.0)]
        scale_amp: f64,
        #[arg(long = "time-scale", default_value_t = 1.0)]
        time_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the geometric-mean amplitude spectrum of a model as CSV.
    Spectrum {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "include-dc")]
        include_dc: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a trajectory on a kinematic chain as overlaid poses (SVG).
    Render {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value = "xz", value_parser = parse_plane)]
        plane: Plane,
        /// Document millimeters per meter.
        #[arg(long, default_value_t = 500.0)]
        scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Timing {
    /// Seconds; defaults to the model's reference duration.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, default_value_t = 100.0)]
    rate: f64,
}

impl Timing {
    fn request(&self, model: &GestureModel) -> anyhow::Result<SynthesisRequest> {
        let duration = self.duration.unwrap_or_else(|| model.ref_duration());
        SynthesisRequest::new(duration, self.rate).context("--duration/--rate")
    }
}

fn parse_constraint(s: &str) -> Result<ConditioningConstraint, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_plane(s: &str) -> Result<Plane, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

/// Refuses to write over any of the command's inputs.
fn guard_output(out: &Path, inputs: &[&Path]) -> anyhow::Result<()> {
    let resolve = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let target = resolve(out);
    for input in inputs {
        if resolve(input) == target {
            bail!("--out {} would overwrite input {}", out.display(), input.display());
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_model(path: &Path) -> anyhow::Result<GestureModel> {
    GestureModel::load(path).with_context(|| format!("--model {}", path.display()))
}

fn execute(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::GenDemos { spec, out, seed } => {
            guard_output(&out, &[&spec])?;
            let gen = GeneratorSpec::load(&spec).with_context(|| format!("--spec {}", spec.display()))?;
            let dataset = generate_dataset(&gen, seed)?;
            let files = save_dataset(&dataset, &out, "demo")?;
            log::info!("wrote {} demonstrations to {}", files.len(), out.display());
        }
        Command::Train { demos, k, lambda, eps_r, out } => {
            guard_output(&out, &[&demos])?;
            let dataset = load_dataset(&demos).with_context(|| format!("--demos {}", demos.display()))?;
            let model = fit_model(&dataset, k, lambda, eps_r).with_context(|| format!("--k {k}"))?;
            model.save(&out)?;
            log::info!("trained {}-dimensional model on {} demonstrations", model.dim(), dataset.len());
        }
        Command::Sample { model, n, seed, timing, out } => {
            guard_output(&out, &[&model])?;
            let gm = load_model(&model)?;
            let req = timing.request(&gm)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let width = n.saturating_sub(1).to_string().len().max(3);
            for i in 0..n {
                let s = seed.wrapping_add(i as u64);
                let demo = sample_gesture(&gm, s, &req)?;
                save_demo(&demo, out.join(format!("sample_{i:0width$}.csv")))?;
            }
        }
        Command::Condition { model, constraints, out } => {
            guard_output(&out, &[&model])?;
            let gm = load_model(&model)?;
            let conditioned = condition(&gm, &constraints).context("--set")?;
            conditioned.save(&out)?;
        }
        Command::Synthesize { model, seed, timing, scale_amp, time_scale: gamma, out } => {
            guard_output(&out, &[&model])?;
            let gm = load_model(&model)?;
            let req = time_scale(timing.request(&gm)?, gamma).context("--time-scale")?;
            let x = sample_model(&gm, seed)?;
            let x = scale_amplitude(&x, scale_amp, None).context("--scale-amp")?;
            let demo = synthesize(&x, &gm.meta(), &req)?;
            save_demo(&demo, &out)?;
        }
        Command::Spectrum { model, include_dc, out } => {
            guard_output(&out, &[&model])?;
            let gm = load_model(&model)?;
            write_text(&out, &spectrum_stats(&gm, include_dc).to_csv())?;
        }
        Command::Render { chain, traj, stride, plane, scale, out } => {
            guard_output(&out, &[&chain, &traj])?;
            let cfg = ChainConfig::load(&chain).with_context(|| format!("--chain {}", chain.display()))?;
            let demo = load_demo(&traj).with_context(|| format!("--traj {}", traj.display()))?;
            let violations = check_joint_limits(&cfg, &demo).with_context(|| format!("--traj {}", traj.display()))?;
            if let Some(first) = violations.first() {
                log::warn!(
                    "{} joint-limit violations (first: frame {}, joint {}, {:.3} rad)",
                    violations.len(),
                    first.frame,
                    first.joint,
                    first.value
                );
            }
            let svg =
                render_overlay(&cfg, &demo, stride, RenderOptions { plane, scale }).context("--stride/--scale")?;
            write_text(&out, &svg)?;
        }
    }
    Ok(())
}

/// Runs one invocation; `argv[0]` is the program name. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let rendered = e.to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("invalid arguments"));
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

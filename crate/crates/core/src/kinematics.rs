//! Serial-chain forward kinematics and SVG overlays of joint trajectories.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::dataset::Demonstration;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Joint {
    #[serde(default)]
    pub name: String,
    /// Rotation axis in the joint frame; normalized on construction.
    pub axis: [f64; 3],
    /// Displacement to the next joint, meters, expressed in this joint's rotated frame.
    pub link_offset: [f64; 3],
    pub limits: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasePose {
    #[serde(default)]
    pub position: [f64; 3],
    /// Roll, pitch, yaw in radians (`Rz(yaw) Ry(pitch) Rx(roll)`).
    #[serde(default)]
    pub rpy: [f64; 3],
}

/// Rigid serial chain of revolute joints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct KinematicChain {
    joints: Vec<Joint>,
    base_pose: BasePose,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    joints: Vec<Joint>,
    #[serde(default)]
    base_pose: BasePose,
}

impl TryFrom<RawChain> for KinematicChain {
    type Error = Error;

    fn try_from(raw: RawChain) -> Result<Self> {
        KinematicChain::new(raw.joints, raw.base_pose)
    }
}

impl From<KinematicChain> for RawChain {
    fn from(c: KinematicChain) -> Self {
        RawChain { joints: c.joints, base_pose: c.base_pose }
    }
}

impl KinematicChain {
    pub fn new(mut joints: Vec<Joint>, base_pose: BasePose) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::invalid("a chain needs at least one joint"));
        }
        for (i, j) in joints.iter_mut().enumerate() {
            let axis = Vector3::from(j.axis);
            let norm = axis.norm();
            if !(norm.is_finite() && norm > 1e-12) {
                return Err(Error::invalid(format!("joint {i} has a zero or non-finite axis")));
            }
            j.axis = (axis / norm).into();
            if j.limits.iter().any(|v| v.is_nan()) || j.limits[0] > j.limits[1] {
                return Err(Error::invalid(format!("joint {i} limits {:?} are not ordered", j.limits)));
            }
            if j.link_offset.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("joint {i} has a non-finite link offset")));
            }
        }
        if base_pose.position.iter().chain(&base_pose.rpy).any(|v| !v.is_finite()) {
            return Err(Error::invalid("base pose is not finite"));
        }
        Ok(Self { joints, base_pose })
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn base_pose(&self) -> &BasePose {
        &self.base_pose
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn link_lengths(&self) -> Vec<f64> {
        self.joints.iter().map(|j| Vector3::from(j.link_offset).norm()).collect()
    }

    /// The base point followed by the end of every link: `N + 1` positions.
    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Vec<Vector3<f64>>> {
        if q.len() != self.joints.len() {
            return Err(Error::Dimension { expected: self.joints.len(), found: q.len() });
        }
        let [r, p, y] = self.base_pose.rpy;
        let mut rot = Rotation3::from_euler_angles(r, p, y);
        let mut pos = Vector3::from(self.base_pose.position);
        let mut out = Vec::with_capacity(q.len() + 1);
        out.push(pos);
        for (joint, &angle) in self.joints.iter().zip(q) {
            let axis = Unit::new_unchecked(Vector3::from(joint.axis));
            rot *= Rotation3::from_axis_angle(&axis, angle);
            pos += rot * Vector3::from(joint.link_offset);
            out.push(pos);
        }
        Ok(out)
    }
}

/// Chain plus the mapping from model joints onto chain joints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub chain: KinematicChain,
    /// `joint_map[d]` is the chain joint driven by trajectory column `d`.
    pub joint_map: Vec<usize>,
    /// Angle held by every chain joint that no trajectory column drives. Empty means all zero.
    #[serde(default)]
    pub hold: Vec<f64>,
}

impl ChainConfig {
    pub fn new(chain: KinematicChain, joint_map: Vec<usize>, hold: Vec<f64>) -> Result<Self> {
        let cfg = Self { chain, joint_map, hold };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.chain.len();
        if !self.hold.is_empty() && self.hold.len() != n {
            return Err(Error::invalid(format!("hold has {} angles for {n} joints", self.hold.len())));
        }
        for (d, &j) in self.joint_map.iter().enumerate() {
            if j >= n {
                return Err(Error::invalid(format!("joint_map[{d}] = {j} but the chain has {n} joints")));
            }
            if self.joint_map[..d].contains(&j) {
                return Err(Error::invalid(format!("chain joint {j} is mapped twice")));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
        cfg.validate().map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain serializes") + "\n"
    }

    /// A 6-joint arm (3 shoulder, elbow, forearm roll, wrist) driven by a
    /// 5-joint waving model; shoulder yaw is held.
    pub fn waving_arm() -> Self {
        let joint = |name: &str, axis: [f64; 3], link: [f64; 3], limits: [f64; 2]| Joint {
            name: name.into(),
            axis,
            link_offset: link,
            limits,
        };
        let chain = KinematicChain::new(
            vec![
                joint("shoulder_pitch", [0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [-3.1, 3.1]),
                joint("shoulder_roll", [1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [-0.5, 3.0]),
                joint("shoulder_yaw", [0.0, 0.0, 1.0], [0.0, 0.0, 0.30], [-1.6, 1.6]),
                joint("elbow", [0.0, 1.0, 0.0], [0.0, 0.0, 0.10], [-0.1, 2.6]),
                joint("forearm_roll", [0.0, 0.0, 1.0], [0.0, 0.0, 0.18], [-1.8, 1.8]),
                joint("wrist", [0.0, 1.0, 0.0], [0.0, 0.0, 0.12], [-1.4, 1.4]),
            ],
            BasePose { position: [0.0, 0.0, 1.2], rpy: [0.0, 0.0, 0.0] },
        )
        .expect("fixture chain is valid");
        // model joints: shoulder pitch, shoulder roll, elbow, forearm roll, wrist
        Self::new(chain, vec![0, 1, 3, 4, 5], vec![0.0; 6]).expect("fixture mapping is valid")
    }

    fn check_dofs(&self, traj: &Demonstration) -> Result<()> {
        if traj.dofs() != self.joint_map.len() {
            return Err(Error::invalid(format!(
                "trajectory has {} joints but the joint map covers {}",
                traj.dofs(),
                self.joint_map.len()
            )));
        }
        Ok(())
    }

    /// Full chain configuration for one trajectory frame.
    pub fn joint_angles(&self, traj: &Demonstration, frame: usize) -> Vec<f64> {
        let mut q = if self.hold.is_empty() { vec![0.0; self.chain.len()] } else { self.hold.clone() };
        for (d, &j) in self.joint_map.iter().enumerate() {
            q[j] = traj.samples()[(frame, d)];
        }
        q
    }
}

/// A joint angle outside its limits at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitViolation {
    pub frame: usize,
    pub joint: usize,
    pub value: f64,
    pub limits: [f64; 2],
}

/// Every `(frame, joint)` outside its (inclusive) limits. Empty means the trajectory is feasible.
pub fn check_joint_limits(cfg: &ChainConfig, traj: &Demonstration) -> Result<Vec<LimitViolation>> {
    cfg.check_dofs(traj)?;
    let mut out = Vec::new();
    for frame in 0..traj.len() {
        for (joint, value) in cfg.joint_angles(traj, frame).into_iter().enumerate() {
            let limits = cfg.chain.joints[joint].limits;
            if value < limits[0] || value > limits[1] {
                out.push(LimitViolation { frame, joint, value, limits });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

impl Plane {
    fn project(self, p: &Vector3<f64>) -> (f64, f64) {
        match self {
            Plane::Xy => (p.x, p.y),
            Plane::Xz => (p.x, p.z),
            Plane::Yz => (p.y, p.z),
        }
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xy" => Ok(Plane::Xy),
            "xz" => Ok(Plane::Xz),
            "yz" => Ok(Plane::Yz),
            other => Err(Error::invalid(format!("unknown plane `{other}`, expected xy, xz or yz"))),
        }
    }
}

/// Joint positions of the rendered frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTrace {
    pub frames: Vec<usize>,
    pub points: Vec<Vec<Vector3<f64>>>,
}

pub fn pose_trace(cfg: &ChainConfig, traj: &Demonstration, stride: usize) -> Result<PoseTrace> {
    if stride == 0 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    if traj.is_empty() {
        return Err(Error::invalid("trajectory has no frames"));
    }
    cfg.check_dofs(traj)?;
    let frames: Vec<usize> = (0..traj.len()).step_by(stride).collect();
    let points =
        frames.iter().map(|&f| cfg.chain.forward_kinematics(&cfg.joint_angles(traj, f))).collect::<Result<_>>()?;
    Ok(PoseTrace { frames, points })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub plane: Plane,
    /// Document millimeters per chain meter.
    pub scale: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { plane: Plane::Xz, scale: 500.0 }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// SVG 1.1 overlay with one polyline per rendered frame; later frames are more opaque.
///
/// Document coordinates are millimeters with the vertical axis flipped so the
/// second projection axis points up. Frames with a joint outside its limits
/// are drawn in red with class `limit-violation`.
pub fn render_overlay(cfg: &ChainConfig, traj: &Demonstration, stride: usize, opts: RenderOptions) -> Result<String> {
    if !(opts.scale.is_finite() && opts.scale > 0.0) {
        return Err(Error::invalid(format!("scale must be > 0, got {}", opts.scale)));
    }
    let trace = pose_trace(cfg, traj, stride)?;
    let violations = check_joint_limits(cfg, traj)?;

    let projected: Vec<Vec<(f64, f64)>> = trace
        .points
        .iter()
        .map(|pts| {
            pts.iter()
                .map(|p| {
                    let (u, v) = opts.plane.project(p);
                    (u * opts.scale, -v * opts.scale)
                })
                .collect()
        })
        .collect();
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in projected.iter().flatten() {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    let margin = (0.05 * (max_x - min_x).max(max_y - min_y)).max(1.0);
    let (x0, y0) = (min_x - margin, min_y - margin);
    let (w, h) = (max_x - min_x + 2.0 * margin, max_y - min_y + 2.0 * margin);
    let stroke = (0.004 * w.max(h)).max(0.2);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}mm" height="{}mm" viewBox="{} {} {} {}">"#,
        num(w),
        num(h),
        num(x0),
        num(y0),
        num(w),
        num(h)
    );
    let _ = writeln!(svg, "<title>{} overlaid poses of {}</title>", projected.len(), escape(traj.name()));
    let _ = writeln!(
        svg,
        r#"<g fill="none" stroke-width="{}" stroke-linecap="round" stroke-linejoin="round">"#,
        num(stroke)
    );
    let n = projected.len();
    for (i, (pts, &frame)) in projected.iter().zip(&trace.frames).enumerate() {
        let opacity = 0.15 + 0.85 * (i + 1) as f64 / n as f64;
        let bad = violations.iter().any(|v| v.frame == frame);
        let points: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", num(x), num(y))).collect();
        let (color, class) = if bad { ("#c0392b", r#" class="limit-violation""#) } else { ("#1f4e79", "") };
        let _ = writeln!(
            svg,
            r#"<polyline{class} data-frame="{frame}" stroke="{color}" stroke-opacity="{:.3}" points="{}"/>"#,
            opacity,
            points.join(" ")
        );
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

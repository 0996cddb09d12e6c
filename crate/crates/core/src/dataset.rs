//! Demonstration trajectories and their on-disk text format.
//!
//! A demonstration file is comma-separated UTF-8 text:
//!
//! ```text
//! # dt=0.01
//! # name=wave_03
//! 0.12,-0.4,1.3,0.05,0.0
//! ...
//! ```
//!
//! The `# name=` line is optional. Each body row holds one joint-angle sample
//! (radians) per degree of freedom.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// One recorded multi-joint trajectory sampled at a fixed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    samples: DMatrix<f64>,
    dt: f64,
    name: String,
}

impl Demonstration {
    /// Builds a demonstration from a `T x D` matrix of joint angles.
    pub fn new(samples: DMatrix<f64>, dt: f64, name: impl Into<String>) -> Result<Self> {
        if samples.nrows() < 2 {
            return Err(Error::invalid(format!("a demonstration needs at least 2 samples, got {}", samples.nrows())));
        }
        if samples.ncols() < 1 {
            return Err(Error::invalid("a demonstration needs at least one joint"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("dt must be finite and > 0, got {dt}")));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % samples.nrows(), pos / samples.nrows());
            return Err(Error::invalid(format!("non-finite sample at row {row}, joint {col}")));
        }
        Ok(Self { samples, dt, name: name.into() })
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of samples `T`.
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    /// Number of joints `D`.
    pub fn dofs(&self) -> usize {
        self.samples.ncols()
    }

    /// Wall-clock length `T * dt` in seconds.
    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * self.dofs() * 20);
        // `{}` on f64 prints the shortest representation that parses back to the same bits.
        let _ = writeln!(out, "# dt={}", self.dt);
        if !self.name.is_empty() {
            let _ = writeln!(out, "# name={}", self.name);
        }
        for row in self.samples.row_iter() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the demonstration text format. `path` is only used in error messages.
    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, column: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message,
        };

        let mut lines = text.lines().enumerate().peekable();
        let (_, header) =
            lines.next().ok_or_else(|| parse_err(1, 1, "empty file, expected `# dt=<seconds>`".into()))?;
        let dt_text = header
            .trim()
            .strip_prefix('#')
            .map(str::trim)
            .and_then(|h| h.strip_prefix("dt="))
            .ok_or_else(|| parse_err(1, 1, format!("expected `# dt=<seconds>`, found `{header}`")))?;
        let dt: f64 = dt_text.trim().parse().map_err(|_| parse_err(1, 1, format!("invalid dt value `{dt_text}`")))?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(parse_err(1, 1, format!("dt must be finite and > 0, got {dt}")));
        }

        let mut name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        if let Some((_, line)) = lines.peek() {
            let trimmed = line.trim();
            if let Some(rest) = trimmed.strip_prefix('#') {
                let rest = rest.trim();
                match rest.strip_prefix("name=") {
                    Some(n) => name = n.to_string(),
                    None => {
                        return Err(parse_err(2, 1, format!("unknown header line `{trimmed}`")));
                    }
                }
                lines.next();
            }
        }

        let mut values = Vec::new();
        let mut dofs = None;
        let mut rows = 0;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut count = 0;
            for (col, field) in line.split(',').enumerate() {
                let field = field.trim();
                let v: f64 =
                    field.parse().map_err(|_| parse_err(lineno, col + 1, format!("`{field}` is not a number")))?;
                if !v.is_finite() {
                    return Err(parse_err(lineno, col + 1, format!("non-finite value `{field}`")));
                }
                values.push(v);
                count += 1;
            }
            match dofs {
                None => dofs = Some(count),
                Some(d) if d != count => {
                    return Err(parse_err(
                        lineno,
                        count.min(d) + 1,
                        format!("sample row {} has {count} fields, expected {d}", rows + 1),
                    ));
                }
                Some(_) => {}
            }
            rows += 1;
        }

        let dofs = dofs.unwrap_or(0);
        if rows < 2 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("a demonstration needs at least 2 sample rows, found {rows}"),
            });
        }
        let samples = DMatrix::from_row_slice(rows, dofs, &values);
        Demonstration::new(samples, dt, name)
            .map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
    }
}

pub fn load_demo(path: impl AsRef<Path>) -> Result<Demonstration> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Demonstration::from_text(&text, path)
}

pub fn save_demo(demo: &Demonstration, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, demo.to_text()).map_err(|e| Error::io(path, e))
}

/// An ordered set of demonstrations sharing one joint count.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    demos: Vec<Demonstration>,
    dofs: usize,
}

impl Dataset {
    pub fn new(demos: Vec<Demonstration>) -> Result<Self> {
        let first = demos.first().ok_or_else(|| Error::invalid("a dataset needs at least one demonstration"))?;
        let dofs = first.dofs();
        if let Some(bad) = demos.iter().find(|d| d.dofs() != dofs) {
            return Err(Error::DofMismatch {
                first: PathBuf::from(first.name()),
                first_dofs: dofs,
                second: PathBuf::from(bad.name()),
                second_dofs: bad.dofs(),
            });
        }
        Ok(Self { demos, dofs })
    }

    pub fn demos(&self) -> &[Demonstration] {
        &self.demos
    }

    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn len(&self) -> usize {
        self.demos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demos.is_empty()
    }

    pub fn min_len(&self) -> usize {
        self.demos.iter().map(Demonstration::len).min().unwrap_or(0)
    }
}

/// Lists demonstration files in lexicographic filename order. Hidden files and
/// subdirectories are skipped.
pub fn demo_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if !hidden && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let files = demo_files(dir)?;
    if files.is_empty() {
        return Err(Error::Format {
            path: dir.to_path_buf(),
            message: "directory contains no demonstration files".into(),
        });
    }
    let mut demos = Vec::with_capacity(files.len());
    for path in &files {
        let demo = load_demo(path)?;
        if let Some(first) = demos.first().map(Demonstration::dofs) {
            if demo.dofs() != first {
                return Err(Error::DofMismatch {
                    first: files[0].clone(),
                    first_dofs: first,
                    second: path.clone(),
                    second_dofs: demo.dofs(),
                });
            }
        }
        demos.push(demo);
    }
    Dataset::new(demos)
}

/// Writes every demonstration as `<prefix>_<index>.csv` into `dir`, creating it if needed.
pub fn save_dataset(dataset: &Dataset, dir: impl AsRef<Path>, prefix: &str) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let width = dataset.len().saturating_sub(1).to_string().len().max(3);
    let mut written = Vec::with_capacity(dataset.len());
    for (i, demo) in dataset.demos().iter().enumerate() {
        let path = dir.join(format!("{prefix}_{i:0width$}.csv"));
        save_demo(demo, &path)?;
        written.push(path);
    }
    Ok(written)
}

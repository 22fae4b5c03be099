//! Snapshots, CSV series, JSON summaries and run configuration files.
//!
//! A snapshot is
//!
//! ```text
//! TODASNAP1\n
//! {"model": {...}, "grid": {...}, "time": ..., "fields": [...], ...}\n
//! <fields as little-endian f64, row-major, in declared order>
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::SweepRecord;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::fourier::Fourier;
use crate::grid::{Grid, DEFAULT_L};
use crate::models::{InitialData, ModelSpec, Rho, State};
use crate::singtrack::{KWindow, TrackMode, TrackerSeries, DEFAULT_CADENCE, DEFAULT_K_MIN};

pub const SNAPSHOT_MAGIC: &str = "TODASNAP1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotModel {
    pub dim: usize,
    pub rho: Rho,
    pub epsilon: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub model: SnapshotModel,
    pub grid: Grid,
    pub time: f64,
    pub fields: Vec<String>,
    pub endianness: String,
    pub scalar_width: usize,
}

impl SnapshotHeader {
    pub fn new(spec: &ModelSpec, time: f64, fields: &[&str]) -> Self {
        SnapshotHeader {
            model: SnapshotModel {
                dim: spec.dim(),
                rho: spec.rho,
                epsilon: spec.epsilon,
                dt: spec.dt,
            },
            grid: spec.grid,
            time,
            fields: fields.iter().map(|s| s.to_string()).collect(),
            endianness: "LE".into(),
            scalar_width: 8,
        }
    }

    pub fn bytes_per_field(&self) -> usize {
        self.scalar_width * self.grid.len()
    }

    pub fn payload_len(&self) -> usize {
        self.bytes_per_field() * self.fields.len()
    }

    fn validate(&self) -> Result<()> {
        self.grid
            .validate()
            .map_err(|e| Error::BadHeader(e.to_string()))?;
        if self.endianness != "LE" {
            return Err(Error::BadHeader(format!(
                "unsupported endianness {:?}",
                self.endianness
            )));
        }
        if self.scalar_width != 8 {
            return Err(Error::BadHeader(format!(
                "unsupported scalar width {}",
                self.scalar_width
            )));
        }
        if self.model.dim != self.grid.dim() {
            return Err(Error::BadHeader(format!(
                "model is {}D but the grid is {}D",
                self.model.dim,
                self.grid.dim()
            )));
        }
        Ok(())
    }
}

/// Physical fields at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub fields: Vec<Field>,
}

impl Snapshot {
    pub fn from_state(spec: &ModelSpec, state: &State, fourier: &Fourier) -> Result<Self> {
        let [a, b] = state.physical(fourier)?;
        Ok(Snapshot {
            header: SnapshotHeader::new(spec, state.t(), &state.field_names()),
            fields: vec![a, b],
        })
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.header
            .fields
            .iter()
            .position(|f| f == name)
            .map(|i| &self.fields[i])
    }

    /// Rebuild the model state (requires the two fields of a run).
    pub fn to_state(&self, fourier: &Fourier) -> Result<State> {
        match self.fields.as_slice() {
            [a, b] => State::from_physical(fourier, a, b, self.header.time),
            _ => Err(Error::BadHeader(format!(
                "expected 2 fields, found {}",
                self.fields.len()
            ))),
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let m = &self.header.model;
        ModelSpec::new(self.header.grid, m.rho, m.epsilon, m.dt)
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        self.header.validate()?;
        for f in &self.fields {
            if f.grid() != &self.header.grid {
                return Err(Error::GridMismatch(
                    "snapshot field grid differs from header".into(),
                ));
            }
        }
        if self.fields.len() != self.header.fields.len() {
            return Err(Error::ShapeMismatch {
                expected: self.header.fields.len(),
                found: self.fields.len(),
            });
        }
        let json = serde_json::to_string(&self.header)?;
        let mut out =
            Vec::with_capacity(SNAPSHOT_MAGIC.len() + json.len() + 2 + self.header.payload_len());
        out.extend_from_slice(SNAPSHOT_MAGIC.as_bytes());
        out.push(b'\n');
        out.extend_from_slice(json.as_bytes());
        out.push(b'\n');
        for f in &self.fields {
            for v in f.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let magic_end = bytes
            .iter()
            .position(|&b| b == b'\n')
            .unwrap_or(bytes.len().min(SNAPSHOT_MAGIC.len()));
        let magic = &bytes[..magic_end];
        if magic != SNAPSHOT_MAGIC.as_bytes() {
            return Err(Error::BadMagic(String::from_utf8_lossy(magic).into_owned()));
        }
        let rest = &bytes[(magic_end + 1).min(bytes.len())..];
        let header_end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::BadHeader("header line is not terminated".into()))?;
        let header: SnapshotHeader = serde_json::from_slice(&rest[..header_end])
            .map_err(|e| Error::BadHeader(e.to_string()))?;
        header.validate()?;
        let payload = &rest[header_end + 1..];
        let expected = header.payload_len();
        if payload.len() < expected {
            return Err(Error::Truncated {
                expected,
                found: payload.len(),
            });
        }
        if payload.len() > expected {
            return Err(Error::SizeMismatch {
                extra: payload.len() - expected,
            });
        }
        let fields = payload
            .chunks_exact(header.bytes_per_field().max(1))
            .take(header.fields.len())
            .map(|chunk| {
                let values = chunk
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                    .collect();
                Field::new(header.grid, values)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Snapshot { header, fields })
    }
}

pub fn write_snapshot(path: impl AsRef<Path>, snapshot: &Snapshot) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, snapshot.encode()?).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    Snapshot::decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// 17 significant digits: enough to reparse any `f64` exactly.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("not a number: {s:?}")))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Reader::from_reader(file))
}

pub const SERIES_COLUMNS: [&str; 7] = ["t", "delta_u", "B_u", "A_u", "delta_v", "B_v", "A_v"];
pub const SWEEP_COLUMNS: [&str; 3] = ["epsilon", "delta_inf", "t_star"];

pub fn write_series(path: impl AsRef<Path>, series: &TrackerSeries) -> Result<()> {
    series.validate()?;
    let mut w = csv_writer(path.as_ref())?;
    w.write_record(SERIES_COLUMNS)?;
    for i in 0..series.len() {
        w.write_record(
            [
                series.times[i],
                series.delta_u[i],
                series.b_u[i],
                series.a_u[i],
                series.delta_v[i],
                series.b_v[i],
                series.a_v[i],
            ]
            .map(format_real),
        )?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

/// Read a series written by [`write_series`]; `m` is not stored in the file.
pub fn read_series(path: impl AsRef<Path>, m: f64) -> Result<TrackerSeries> {
    let mut r = csv_reader(path.as_ref())?;
    if r.headers()?.iter().ne(SERIES_COLUMNS) {
        return Err(Error::Config(format!(
            "unexpected series columns {:?}",
            r.headers()?
        )));
    }
    let mut s = TrackerSeries::new(m);
    for rec in r.records() {
        let rec = rec?;
        let v = rec.iter().map(parse_real).collect::<Result<Vec<_>>>()?;
        s.times.push(v[0]);
        s.delta_u.push(v[1]);
        s.b_u.push(v[2]);
        s.a_u.push(v[3]);
        s.delta_v.push(v[4]);
        s.b_v.push(v[5]);
        s.a_v.push(v[6]);
    }
    s.validate()?;
    Ok(s)
}

/// Sweep rows `(epsilon, delta_inf, t_star)`; missing values are empty.
pub fn write_sweep(path: impl AsRef<Path>, records: &[SweepRecord]) -> Result<()> {
    let opt = |x: Option<f64>| x.map_or(String::new(), format_real);
    let mut w = csv_writer(path.as_ref())?;
    w.write_record(SWEEP_COLUMNS)?;
    for r in records {
        w.write_record([format_real(r.epsilon), opt(r.delta_inf), opt(r.t_star)])?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

/// `(epsilon, delta_inf, t_star)` per row.
pub type SweepRow = (f64, Option<f64>, Option<f64>);

pub fn read_sweep(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let opt = |s: &str| {
        if s.is_empty() {
            Ok(None)
        } else {
            parse_real(s).map(Some)
        }
    };
    let mut r = csv_reader(path.as_ref())?;
    if r.headers()?.iter().ne(SWEEP_COLUMNS) {
        return Err(Error::Config(format!(
            "unexpected sweep columns {:?}",
            r.headers()?
        )));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok((parse_real(&rec[0])?, opt(&rec[1])?, opt(&rec[2])?))
        })
        .collect()
}

/// Two-column `(t, drift)` energy series.
pub fn write_energy(path: impl AsRef<Path>, rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv_writer(path.as_ref())?;
    w.write_record(["t", "energy_drift"])?;
    for &(t, d) in rows {
        w.write_record([format_real(t), format_real(d)])?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// run configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dim: usize,
    pub rho: Rho,
    #[serde(default)]
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub dealias: bool,
    /// Krasny threshold; `None` keeps the default for `rho`, `0` disables.
    #[serde(default)]
    pub filter: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    #[serde(default = "one")]
    pub ny: usize,
    #[serde(default = "default_l")]
    pub lx: f64,
    #[serde(default = "default_l")]
    pub ly: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub data: InitialData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    /// Stopping rule; defaults to the rule of the system.
    #[serde(default)]
    pub mode: Option<TrackMode>,
    #[serde(default = "default_k_min")]
    pub k_min: f64,
    /// Upper end of the fitting window; default two thirds of `max k`.
    #[serde(default)]
    pub k_max: Option<f64>,
    /// Stop the run when the rule fires.
    #[serde(default = "yes")]
    pub stop: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            enabled: true,
            cadence: DEFAULT_CADENCE,
            mode: None,
            k_min: DEFAULT_K_MIN,
            k_max: None,
            stop: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotConfig {
    /// Write a snapshot at the first step at or past each time.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "yes")]
    pub last: bool,
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        SnapshotConfig {
            times: Vec::new(),
            last: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Steps between energy samples.
    #[serde(default = "default_energy_every")]
    pub energy_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out(),
            energy_every: default_energy_every(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Break-up time of the dispersionless system.
    pub t_c: f64,
    /// Defaults to ten values up to 0.1 (from 0.02 for hyperbolic runs).
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    /// Blow-up sweeps: give up at this time.
    #[serde(default)]
    pub t_max: Option<f64>,
    /// Blow-up sweeps: tracker cadence.
    #[serde(default = "one")]
    pub cadence: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub tracker: TrackerConfig,
    #[serde(default)]
    pub snapshots: SnapshotConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_l() -> f64 {
    DEFAULT_L
}
fn default_cadence() -> usize {
    DEFAULT_CADENCE
}
fn default_k_min() -> f64 {
    DEFAULT_K_MIN
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_energy_every() -> usize {
    100
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.model_spec()?;
        if spec.dim() != self.model.dim {
            return Err(Error::Config(format!(
                "model.dim = {} but the grid is {}D",
                self.model.dim,
                spec.dim()
            )));
        }
        if self.initial.data.dim() != self.model.dim {
            return Err(Error::Config(format!(
                "initial data {:?} is {}D but model.dim = {}",
                self.initial.data,
                self.initial.data.dim(),
                self.model.dim
            )));
        }
        if !(self.model.t_end.is_finite() && self.model.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "model.t_end must be >= 0, got {}",
                self.model.t_end
            )));
        }
        if self.tracker.cadence == 0 || self.output.energy_every == 0 {
            return Err(Error::Config(
                "tracker.cadence and output.energy_every must be positive".into(),
            ));
        }
        self.window()?;
        if let Some(s) = &self.sweep {
            if s.cadence == 0 {
                return Err(Error::Config("sweep.cadence must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = &self.grid;
        if g.ny <= 1 {
            Grid::new_1d(g.nx, g.lx)
        } else {
            Grid::new_2d(g.nx, g.ny, g.lx, g.ly)
        }
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let m = &self.model;
        let spec = ModelSpec::new(self.grid()?, m.rho, m.epsilon, m.dt)
            .map_err(|e| Error::Config(e.to_string()))?
            .with_dealias(m.dealias);
        Ok(match m.filter {
            None => spec,
            Some(0.0) => spec.with_filter(None),
            Some(f) => {
                let s = spec.with_filter(Some(f));
                s.validate().map_err(|e| Error::Config(e.to_string()))?;
                s
            }
        })
    }

    pub fn track_mode(&self) -> TrackMode {
        self.tracker.mode.unwrap_or(match self.model.rho {
            Rho::Hyperbolic => TrackMode::Hyperbolic,
            Rho::Elliptic => TrackMode::Elliptic,
        })
    }

    pub fn window(&self) -> Result<KWindow> {
        let grid = self.grid()?;
        let standard = KWindow::standard(grid.max_kx());
        let w = KWindow {
            k_min: self.tracker.k_min,
            k_max: self.tracker.k_max.unwrap_or(standard.k_max),
        };
        if !(w.k_min >= 0.0 && w.k_max > w.k_min) {
            return Err(Error::Config(format!(
                "fitting window ({}, {}) is empty",
                w.k_min, w.k_max
            )));
        }
        Ok(w)
    }
}

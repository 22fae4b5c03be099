//! Asymptotic Fourier analysis of nearly singular fields.
//!
//! A singularity `(z - z0)^mu` of a real function at `z0 = alpha + i delta`
//! leaves the high-wavenumber signature
//!
//! ```text
//! ln |c(k)| ~ A - B ln k - delta k,      B = mu + 1
//! ```
//!
//! and an oscillation of `Re c(k)` with period `2 pi / alpha` in `k`.
//! `delta` is the distance of the nearest complex singularity from the real
//! axis; it reaching zero (hyperbolic break-up) or dropping below the
//! smallest resolved distance `2 pi L / N` (elliptic cusp, blow-up) marks the
//! critical time.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Spectrum;
use crate::fourier::Fourier;
use crate::integrator::Control;
use crate::models::State;

/// Magnitudes below this are round-off and excluded from fits.
pub const MAGNITUDE_FLOOR: f64 = 1e-13;

/// Minimum number of usable points for [`fit_decay`].
pub const MIN_FIT_POINTS: usize = 10;

/// Lower edge of the default fitting window.
pub const DEFAULT_K_MIN: f64 = 10.0;

pub const DEFAULT_CADENCE: usize = 25;

/// Log-depth separating two oscillation maxima.
const NOTCH_DEPTH: f64 = 0.5;

/// Coefficients along the positive `k_x` axis, referenced to the origin
/// and scaled by the cell size so they approximate the continuous transform
/// `int u(x) exp(-i k x) dx` independently of the resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpectrum {
    pub k: Vec<f64>,
    pub coeffs: Vec<Complex64>,
}

impl AxisSpectrum {
    /// A spectrum known only through magnitudes (zero phase).
    pub fn from_magnitudes(k: Vec<f64>, magnitudes: &[f64]) -> Self {
        let coeffs = magnitudes.iter().map(|&m| Complex64::new(m, 0.0)).collect();
        AxisSpectrum { k, coeffs }
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
}

/// Positive-`k_x` coefficients of a spectrum: the full line in 1D, the
/// `k_y = 0` slice in 2D. The Nyquist bin is dropped.
pub fn axis_spectrum(spectrum: &Spectrum) -> AxisSpectrum {
    let g = spectrum.grid();
    let row = spectrum.ky_zero_row();
    let scale = g.cell();
    let n = g.nx / 2;
    let mut k = Vec::with_capacity(n - 1);
    let mut coeffs = Vec::with_capacity(n - 1);
    for (j, &c) in row.iter().enumerate().take(n).skip(1) {
        k.push(j as f64 / g.lx);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.push(c * (scale * sign));
    }
    AxisSpectrum { k, coeffs }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KWindow {
    pub k_min: f64,
    pub k_max: f64,
}

impl KWindow {
    /// `10 < k < 2 max(k) / 3`, the dealiasing edge.
    pub fn standard(max_k: f64) -> Self {
        KWindow {
            k_min: DEFAULT_K_MIN,
            k_max: 2.0 * max_k / 3.0,
        }
    }

    pub fn contains(&self, k: f64) -> bool {
        k > self.k_min && k < self.k_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierFit {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    /// Root-mean-square residual of the log-magnitudes.
    pub residual: f64,
    pub k_window: KWindow,
    pub points: usize,
}

impl FourierFit {
    /// Singularity exponent `mu = B - 1`.
    pub fn mu(&self) -> f64 {
        self.b - 1.0
    }

    pub fn model(&self, k: f64) -> f64 {
        self.a - self.b * k.ln() - self.delta * k
    }
}

/// Least-squares fit of `ln|c| = A - B ln k - delta k` over the window,
/// ignoring points below [`MAGNITUDE_FLOOR`].
pub fn fit_decay(spectrum: &AxisSpectrum, window: KWindow) -> Result<FourierFit> {
    let (k, y): (Vec<f64>, Vec<f64>) = spectrum
        .k
        .iter()
        .zip(&spectrum.coeffs)
        .filter(|(&k, c)| window.contains(k) && c.norm() > MAGNITUDE_FLOOR)
        .map(|(&k, c)| (k, c.norm().ln()))
        .unzip();
    if k.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            found: k.len(),
        });
    }
    let n = k.len();
    // Columns scaled to unit max so the SVD sees comparable magnitudes.
    let kmax = k.iter().copied().fold(0.0, f64::max);
    let lmax = k.iter().map(|k| k.ln().abs()).fold(0.0, f64::max).max(1.0);
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => -k[i].ln() / lmax,
        _ => -k[i] / kmax,
    });
    let rhs = DVector::from_column_slice(&y);
    let svd = design.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidParameter(format!("least squares failed: {e}")))?;
    let resid = &design * &sol - &rhs;
    Ok(FourierFit {
        a: sol[0],
        b: sol[1] / lmax,
        delta: sol[2] / kmax,
        residual: (resid.norm_squared() / n as f64).sqrt(),
        k_window: window,
        points: n,
    })
}

/// Real part of the singularity location from the oscillation of the
/// origin-referenced spectrum. `|Re c(k)|` has maxima spaced `pi / alpha`;
/// they are located on `ln|Re c|` minus the fitted decay, refined by a
/// parabola through each discrete maximum.
pub fn estimate_alpha(spectrum: &AxisSpectrum, window: KWindow) -> Result<f64> {
    let fit = fit_decay(spectrum, window)?;
    let pts: Vec<(f64, f64)> = spectrum
        .k
        .iter()
        .zip(&spectrum.coeffs)
        .filter(|(&k, c)| window.contains(k) && c.norm() > MAGNITUDE_FLOOR)
        .map(|(&k, c)| (k, c.re.abs().max(f64::MIN_POSITIVE).ln() - fit.model(k)))
        .collect();

    let mut peaks: Vec<(f64, f64)> = Vec::new();
    let mut valley = f64::INFINITY;
    for w in pts.windows(3) {
        let (k0, r0) = w[0];
        let (k1, r1) = w[1];
        let (k2, r2) = w[2];
        valley = valley.min(r1);
        if r1 > r0 && r1 >= r2 {
            // vertex of the parabola through the three samples
            let h = k1 - k0;
            let denom = r0 - 2.0 * r1 + r2;
            let offset = if denom.abs() > 0.0 && (k2 - k1 - h).abs() < 1e-9 * h {
                0.5 * h * (r0 - r2) / denom
            } else {
                0.0
            };
            let peak = (k1 + offset.clamp(-h, h), r1);
            match peaks.last_mut() {
                // no notch since the previous maximum: same hump
                Some(last) if valley > last.1.min(r1) - NOTCH_DEPTH => {
                    if r1 > last.1 {
                        *last = peak;
                    }
                }
                _ => peaks.push(peak),
            }
            valley = f64::INFINITY;
        }
    }
    // Spurious maxima inside the deep notches sit far below the envelope.
    if !peaks.is_empty() {
        let mut heights: Vec<f64> = peaks.iter().map(|p| p.1).collect();
        heights.sort_by(|a, b| a.total_cmp(b));
        let median = heights[heights.len() / 2];
        peaks.retain(|p| p.1 >= median - 2.0);
    }
    if peaks.len() < 3 {
        return Err(Error::NoOscillation {
            needed: 3,
            found: peaks.len(),
        });
    }
    let spacing = (peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64;
    Ok(std::f64::consts::PI / spacing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackMode {
    /// `delta_u` crossing zero, interpolated.
    Hyperbolic,
    /// First sample with `delta_u` below the minimal resolved distance.
    Elliptic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackerSeries {
    pub times: Vec<f64>,
    pub delta_u: Vec<f64>,
    pub b_u: Vec<f64>,
    pub a_u: Vec<f64>,
    pub delta_v: Vec<f64>,
    pub b_v: Vec<f64>,
    pub a_v: Vec<f64>,
    /// Minimal resolved distance of the run.
    pub m: f64,
}

impl TrackerSeries {
    pub fn new(m: f64) -> Self {
        TrackerSeries {
            m,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, u: &FourierFit, v: Option<&FourierFit>) {
        self.times.push(t);
        self.delta_u.push(u.delta);
        self.b_u.push(u.b);
        self.a_u.push(u.a);
        self.delta_v.push(v.map_or(f64::NAN, |f| f.delta));
        self.b_v.push(v.map_or(f64::NAN, |f| f.b));
        self.a_v.push(v.map_or(f64::NAN, |f| f.a));
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        for len in [
            self.delta_u.len(),
            self.b_u.len(),
            self.a_u.len(),
            self.delta_v.len(),
            self.b_v.len(),
            self.a_v.len(),
        ] {
            if len != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "tracker times must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Detection {
    /// Critical time and the index of the first sample at or past it.
    Critical {
        t: f64,
        index: usize,
    },
    NotYetCritical,
}

impl Detection {
    pub fn time(&self) -> Option<f64> {
        match self {
            Detection::Critical { t, .. } => Some(*t),
            Detection::NotYetCritical => None,
        }
    }
}

/// Apply the stopping rule of `mode` to a series of `delta_u`.
pub fn detect_critical_time(series: &TrackerSeries, mode: TrackMode) -> Result<Detection> {
    series.validate()?;
    if series.is_empty() {
        return Err(Error::InvalidParameter("tracker series is empty".into()));
    }
    let d = &series.delta_u;
    let t = &series.times;
    match mode {
        TrackMode::Hyperbolic => {
            if d[0] <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "delta_u starts at {} <= 0; no crossing to locate",
                    d[0]
                )));
            }
            for i in 1..d.len() {
                if d[i] <= 0.0 {
                    let tc = if d[i] == 0.0 {
                        t[i]
                    } else {
                        t[i - 1] + (t[i] - t[i - 1]) * d[i - 1] / (d[i - 1] - d[i])
                    };
                    return Ok(Detection::Critical { t: tc, index: i });
                }
            }
            Ok(Detection::NotYetCritical)
        }
        TrackMode::Elliptic => {
            Ok(d.iter()
                .position(|&x| x < series.m)
                .map_or(Detection::NotYetCritical, |i| Detection::Critical {
                    t: t[i],
                    index: i,
                }))
        }
    }
}

/// Blow-up time of a dispersive elliptic run: the elliptic rule.
pub fn detect_blowup_time(series: &TrackerSeries) -> Result<Detection> {
    detect_critical_time(series, TrackMode::Elliptic)
}

/// Fitted quantities at a detected critical time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackSummary {
    pub mode: TrackMode,
    pub detection: Detection,
    /// `B_u`, `B_v` at the critical time (interpolated for the hyperbolic
    /// rule).
    pub b_u: Option<f64>,
    pub b_v: Option<f64>,
    /// Singularity location from the last sample before detection.
    pub alpha: Option<f64>,
    pub m: f64,
}

struct Sample {
    t: f64,
    u: AxisSpectrum,
}

/// Integration callback that fits `u` and `v` spectra at each call and
/// stops the run when the detection rule fires.
pub struct Tracker {
    fourier: Fourier,
    mode: TrackMode,
    window: KWindow,
    series: TrackerSeries,
    stop_on_detect: bool,
    previous: Option<Sample>,
    before_detection: Option<Sample>,
    detected: bool,
}

impl Tracker {
    pub fn new(fourier: Fourier, mode: TrackMode) -> Self {
        let grid = *fourier.grid();
        Tracker {
            window: KWindow::standard(grid.max_kx()),
            series: TrackerSeries::new(grid.min_resolved_distance()),
            fourier,
            mode,
            stop_on_detect: true,
            previous: None,
            before_detection: None,
            detected: false,
        }
    }

    pub fn with_window(mut self, window: KWindow) -> Self {
        self.window = window;
        self
    }

    /// Keep integrating after detection (records the full series).
    pub fn keep_running(mut self) -> Self {
        self.stop_on_detect = false;
        self
    }

    pub fn series(&self) -> &TrackerSeries {
        &self.series
    }

    pub fn into_series(self) -> TrackerSeries {
        self.series
    }

    pub fn mode(&self) -> TrackMode {
        self.mode
    }

    pub fn window(&self) -> KWindow {
        self.window
    }

    fn fired(&self, delta_u: f64) -> bool {
        match self.mode {
            TrackMode::Hyperbolic => delta_u <= 0.0,
            TrackMode::Elliptic => delta_u < self.series.m,
        }
    }

    /// Record one sample; returns `Stop` once the rule fires (unless
    /// [`keep_running`](Self::keep_running) was set).
    pub fn observe(&mut self, state: &State) -> Control {
        let u = axis_spectrum(&state.u_spectrum(&self.fourier));
        let fit_u = match fit_decay(&u, self.window) {
            Ok(f) => f,
            // too early: the spectrum has not reached the window yet
            Err(_) => return Control::Continue,
        };
        let v = axis_spectrum(state.v_spectrum());
        let fit_v = fit_decay(&v, self.window).ok();
        self.series.push(state.t(), &fit_u, fit_v.as_ref());

        let sample = Sample { t: state.t(), u };
        if !self.detected && self.fired(fit_u.delta) {
            self.detected = true;
            self.before_detection = match self.mode {
                TrackMode::Hyperbolic => self.previous.take(),
                TrackMode::Elliptic => Some(sample),
            };
            if self.stop_on_detect {
                return Control::Stop(format!(
                    "{:?} detection rule fired at t = {}",
                    self.mode,
                    state.t()
                ));
            }
            return Control::Continue;
        }
        self.previous = Some(sample);
        Control::Continue
    }

    pub fn summary(&self) -> Result<TrackSummary> {
        let detection = if self.series.is_empty() {
            Detection::NotYetCritical
        } else {
            detect_critical_time(&self.series, self.mode)?
        };
        let s = &self.series;
        let (b_u, b_v) = match detection {
            Detection::Critical { t, index } => match self.mode {
                TrackMode::Hyperbolic if index > 0 => {
                    let w = (t - s.times[index - 1]) / (s.times[index] - s.times[index - 1]);
                    let lerp = |a: &[f64]| a[index - 1] + w * (a[index] - a[index - 1]);
                    (Some(lerp(&s.b_u)), Some(lerp(&s.b_v)))
                }
                _ => (Some(s.b_u[index]), Some(s.b_v[index])),
            },
            Detection::NotYetCritical => (None, None),
        };
        let alpha = match (&detection, &self.before_detection) {
            (Detection::Critical { .. }, Some(sample)) => {
                estimate_alpha(&sample.u, self.window).ok()
            }
            _ => None,
        };
        Ok(TrackSummary {
            mode: self.mode,
            detection,
            b_u,
            b_v: b_v.filter(|b| b.is_finite()),
            alpha,
            m: s.m,
        })
    }

    /// Time of the sample used for `alpha`.
    pub fn alpha_sample_time(&self) -> Option<f64> {
        self.before_detection.as_ref().map(|s| s.t)
    }
}

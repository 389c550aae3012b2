//! Radar system description, derived timing/geometry, and scene types.
//!
//! Geometry is broadside stripmap: the platform flies along `y` at height
//! `H_p`, range cell `m` sits at closest-approach slant range
//! `R̄_m = R̄_0 + m·ρ_r`, and the swath is centred on `R_c` so that
//! `R̄_0 = R_c − (M/2)·ρ_r`.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Static description of the radar system and platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarParams {
    /// Carrier frequency `f_c`, Hz.
    pub carrier_freq: f64,
    /// Signal bandwidth `B`, Hz. Also the complex sampling rate.
    pub bandwidth: f64,
    /// Number of OFDM subcarriers `N`.
    pub num_subcarriers: usize,
    /// Number of range cells `M` in the swath.
    pub num_range_cells: usize,
    /// Cyclic prefix length in samples.
    pub cp_len: usize,
    /// Pulse repetition frequency, Hz.
    pub prf: f64,
    /// Effective platform velocity `v_p`, m/s.
    pub platform_velocity: f64,
    /// Platform altitude `H_p`, m.
    pub platform_height: f64,
    /// Effective antenna length `L_a`, m.
    pub antenna_length: f64,
    /// Synthetic aperture time `T_a`, s.
    pub aperture_time: f64,
    /// Slant range of the swath centre `R_c`, m.
    pub swath_center_range: f64,
}

impl RadarParams {
    /// X-band stripmap reference system: 9 GHz carrier, 150 MHz bandwidth,
    /// N = 512 subcarriers, M = 96 range cells, CP of 95 samples, PRF 800 Hz,
    /// 150 m/s at 5 km altitude, 1 m antenna, 1 s aperture, `R_c = 5√2` km.
    pub fn reference() -> Self {
        Self {
            carrier_freq: 9.0e9,
            bandwidth: 150.0e6,
            num_subcarriers: 512,
            num_range_cells: 96,
            cp_len: 95,
            prf: 800.0,
            platform_velocity: 150.0,
            platform_height: 5_000.0,
            antenna_length: 1.0,
            aperture_time: 1.0,
            swath_center_range: 5_000.0 * std::f64::consts::SQRT_2,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            Error::Config(format!(
                "{}: field `{}`: {}",
                path.display(),
                e.path(),
                e.inner()
            ))
        })
    }
}

/// Hard parameter violations.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamError {
    ZeroSubcarriers,
    ZeroRangeCells,
    CpTooLong { cp_len: usize, max: usize },
    NonPositiveBandwidth,
    CarrierBelowBandwidth,
    NotPositive(&'static str),
    Negative(&'static str),
    NonFinite(&'static str),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::ZeroSubcarriers => write!(f, "num_subcarriers must be at least 1"),
            ParamError::ZeroRangeCells => write!(f, "num_range_cells must be at least 1"),
            ParamError::CpTooLong { cp_len, max } => {
                write!(f, "cp_len exceeds N−1 ({cp_len} > {max})")
            }
            ParamError::NonPositiveBandwidth => write!(f, "bandwidth must be positive"),
            ParamError::CarrierBelowBandwidth => {
                write!(f, "carrier_freq must exceed bandwidth for the baseband model")
            }
            ParamError::NotPositive(field) => write!(f, "{field} must be positive"),
            ParamError::Negative(field) => write!(f, "{field} must not be negative"),
            ParamError::NonFinite(field) => write!(f, "{field} is not finite"),
        }
    }
}

/// Conditions that are legal but worth flagging.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamWarning {
    /// `1/PRF` does not cover the swath echo plus the pulse.
    PriTooShort { pri: f64, required: f64 },
    /// `N < M`: the reconstruction can only recover folded sums of cells.
    FoldedReconstruction { n: usize, m: usize },
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::PriTooShort { pri, required } => write!(
                f,
                "PRI {pri:.3e} s shorter than swath echo plus pulse {required:.3e} s"
            ),
            ParamWarning::FoldedReconstruction { n, m } => {
                write!(f, "N<M: folded reconstruction (N = {n}, M = {m})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<ParamError>,
    pub warnings: Vec<ParamWarning>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    /// Converts the report into a `Result`, joining all hard errors.
    pub fn into_result(self) -> Result<Vec<ParamWarning>> {
        if self.errors.is_empty() {
            Ok(self.warnings)
        } else {
            let msg = self
                .errors
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InvalidParams(msg))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Checks every hard invariant and collects soft warnings. Never fails.
pub fn validate_params(params: &RadarParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let reals = [
        ("carrier_freq", params.carrier_freq),
        ("bandwidth", params.bandwidth),
        ("prf", params.prf),
        ("platform_velocity", params.platform_velocity),
        ("platform_height", params.platform_height),
        ("antenna_length", params.antenna_length),
        ("aperture_time", params.aperture_time),
        ("swath_center_range", params.swath_center_range),
    ];
    for (name, value) in reals {
        if !value.is_finite() {
            report.errors.push(ParamError::NonFinite(name));
        }
    }
    if !report.errors.is_empty() {
        return report;
    }

    if params.num_subcarriers == 0 {
        report.errors.push(ParamError::ZeroSubcarriers);
    } else if params.cp_len > params.num_subcarriers - 1 {
        report.errors.push(ParamError::CpTooLong {
            cp_len: params.cp_len,
            max: params.num_subcarriers - 1,
        });
    }
    if params.num_range_cells == 0 {
        report.errors.push(ParamError::ZeroRangeCells);
    }
    if params.bandwidth <= 0.0 {
        report.errors.push(ParamError::NonPositiveBandwidth);
    } else if params.carrier_freq <= params.bandwidth {
        report.errors.push(ParamError::CarrierBelowBandwidth);
    }
    for (name, value) in [
        ("prf", params.prf),
        ("antenna_length", params.antenna_length),
        ("aperture_time", params.aperture_time),
        ("swath_center_range", params.swath_center_range),
    ] {
        if value <= 0.0 {
            report.errors.push(ParamError::NotPositive(name));
        }
    }
    for (name, value) in [
        ("platform_velocity", params.platform_velocity),
        ("platform_height", params.platform_height),
    ] {
        if value < 0.0 {
            report.errors.push(ParamError::Negative(name));
        }
    }
    if !report.errors.is_empty() {
        return report;
    }

    let t = derive_timings(params);
    let required = 2.0 * t.swath_width / SPEED_OF_LIGHT + t.pulse_duration;
    let pri = 1.0 / params.prf;
    if pri <= required {
        report
            .warnings
            .push(ParamWarning::PriTooShort { pri, required });
    }
    if params.num_subcarriers < params.num_range_cells {
        report.warnings.push(ParamWarning::FoldedReconstruction {
            n: params.num_subcarriers,
            m: params.num_range_cells,
        });
    }
    report
}

/// Quantities that follow directly from [`RadarParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedTimings {
    /// `T_s = 1/B`.
    pub sample_interval: f64,
    /// `Δf = B/N`.
    pub subcarrier_spacing: f64,
    /// `T = N·T_s`.
    pub core_duration: f64,
    /// `T_GI = cp_len·T_s`.
    pub guard_duration: f64,
    /// `T_o = T + T_GI`.
    pub pulse_duration: f64,
    /// `ρ_r = c/(2B)`.
    pub range_resolution: f64,
    /// `R_w = M·ρ_r`.
    pub swath_width: f64,
    /// `λ = c/f_c`.
    pub wavelength: f64,
    /// `β_bw = 0.866·λ/L_a`.
    pub azimuth_beamwidth: f64,
    /// `R̄_0`, closest-approach slant range of cell 0.
    pub near_range: f64,
}

impl DerivedTimings {
    /// `R̄_m = R̄_0 + m·ρ_r`.
    pub fn cell_range(&self, m: usize) -> f64 {
        self.near_range + m as f64 * self.range_resolution
    }
}

pub fn derive_timings(params: &RadarParams) -> DerivedTimings {
    let ts = 1.0 / params.bandwidth;
    let n = params.num_subcarriers as f64;
    let rho = SPEED_OF_LIGHT / (2.0 * params.bandwidth);
    let wavelength = SPEED_OF_LIGHT / params.carrier_freq;
    let m = params.num_range_cells;
    DerivedTimings {
        sample_interval: ts,
        subcarrier_spacing: params.bandwidth / n,
        core_duration: n * ts,
        guard_duration: params.cp_len as f64 * ts,
        pulse_duration: (params.num_subcarriers + params.cp_len) as f64 * ts,
        range_resolution: rho,
        swath_width: m as f64 * rho,
        wavelength,
        azimuth_beamwidth: 0.866 * wavelength / params.antenna_length,
        near_range: params.swath_center_range - (m as f64 / 2.0) * rho,
    }
}

/// Ordered complex samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    samples: Vec<Complex64>,
    sample_interval: f64,
}

impl ComplexSequence {
    /// Rejects NaN or infinite samples.
    pub fn new(samples: Vec<Complex64>, sample_interval: f64) -> Result<Self> {
        if let Some(i) = samples.iter().position(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            samples,
            sample_interval,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn set_sample_interval(&mut self, ts: f64) {
        self.sample_interval = ts;
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        energy(&self.samples)
    }
}

pub(crate) fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|s| s.norm_sqr()).sum()
}

/// Complex reflectivity `g_m` of each range cell on one range line.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeLine {
    rcs: Vec<Complex64>,
}

impl RangeLine {
    pub fn new(rcs: Vec<Complex64>) -> Self {
        Self { rcs }
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            rcs: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    pub fn rcs(&self) -> &[Complex64] {
        &self.rcs
    }

    pub fn len(&self) -> usize {
        self.rcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rcs.is_empty()
    }
}

/// A point scatterer on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    /// Ground range, m.
    pub x: f64,
    /// Azimuth position, m.
    pub y: f64,
    pub amplitude: Complex64,
}

impl Scatterer {
    pub fn slant_range(&self, params: &RadarParams) -> f64 {
        self.x.hypot(params.platform_height)
    }
}

/// A collection of point scatterers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    pub scatterers: Vec<Scatterer>,
}

/// Nearest range cell for closest-approach slant range `r`; ties go to the
/// lower index. May be negative or `>= M` for out-of-swath ranges.
pub fn range_cell_of(r: f64, timings: &DerivedTimings) -> i64 {
    let f = (r - timings.near_range) / timings.range_resolution;
    (f - 0.5).ceil() as i64
}

/// Ground range whose slant range is exactly `R̄_m`.
pub fn ground_range_of_cell(m: usize, params: &RadarParams, timings: &DerivedTimings) -> f64 {
    let r = timings.cell_range(m);
    (r * r - params.platform_height * params.platform_height)
        .max(0.0)
        .sqrt()
}

impl Scene {
    pub fn new(scatterers: Vec<Scatterer>) -> Self {
        Self { scatterers }
    }

    /// A unit scatterer at the swath centre, azimuth 0.
    pub fn point_at_center(params: &RadarParams, timings: &DerivedTimings) -> Self {
        let x = ground_range_of_cell(params.num_range_cells / 2, params, timings);
        Self::new(vec![Scatterer {
            x,
            y: 0.0,
            amplitude: Complex64::new(1.0, 0.0),
        }])
    }

    /// Range cell of every scatterer; fails on the first one outside the swath.
    pub fn cell_indices(&self, params: &RadarParams, timings: &DerivedTimings) -> Result<Vec<usize>> {
        self.scatterers
            .iter()
            .enumerate()
            .map(|(index, s)| {
                let r = s.slant_range(params);
                let cell = range_cell_of(r, timings);
                if cell < 0 || cell >= params.num_range_cells as i64 {
                    Err(Error::OutOfSwath {
                        index,
                        slant_range: r,
                        cell,
                    })
                } else {
                    Ok(cell as usize)
                }
            })
            .collect()
    }

    pub fn validate(&self, params: &RadarParams, timings: &DerivedTimings) -> Result<()> {
        self.cell_indices(params, timings).map(|_| ())
    }

    /// Parses a scene document and rejects scatterers outside the swath.
    pub fn from_json_str(text: &str, params: &RadarParams, timings: &DerivedTimings) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: SceneDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            Error::Config(format!("scene: field `{}`: {}", e.path(), e.inner()))
        })?;
        let scene = doc.into_scene()?;
        scene.validate(params, timings)?;
        Ok(scene)
    }

    pub fn from_json_file(
        path: impl AsRef<Path>,
        params: &RadarParams,
        timings: &DerivedTimings,
    ) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text, params, timings)
    }
}

/// On-disk scene document: either a scatterer list or a regular grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatterers: Option<Vec<ScattererDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererDoc {
    pub x: f64,
    pub y: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

/// `values[i][k]` is the amplitude at ground range `origin[0] + i·spacing[0]`
/// and azimuth `origin[1] + k·spacing[1]`. Zero entries are skipped.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub values: Vec<Vec<f64>>,
}

impl SceneDoc {
    pub fn into_scene(self) -> Result<Scene> {
        let mut scatterers = Vec::new();
        if let Some(list) = self.scatterers {
            scatterers.extend(list.into_iter().map(|s| Scatterer {
                x: s.x,
                y: s.y,
                amplitude: Complex64::from_polar(s.amplitude, s.phase_deg.to_radians()),
            }));
        }
        if let Some(grid) = self.grid {
            for (i, row) in grid.values.iter().enumerate() {
                for (k, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        scatterers.push(Scatterer {
                            x: grid.origin[0] + i as f64 * grid.spacing[0],
                            y: grid.origin[1] + k as f64 * grid.spacing[1],
                            amplitude: Complex64::new(v, 0.0),
                        });
                    }
                }
            }
        }
        if scatterers.iter().any(|s| {
            !(s.x.is_finite() && s.y.is_finite() && s.amplitude.re.is_finite() && s.amplitude.im.is_finite())
        }) {
            return Err(Error::Config("scene contains non-finite values".into()));
        }
        Ok(Scene::new(scatterers))
    }

    pub fn from_scene(scene: &Scene) -> Self {
        Self {
            scatterers: Some(
                scene
                    .scatterers
                    .iter()
                    .map(|s| ScattererDoc {
                        x: s.x,
                        y: s.y,
                        amplitude: s.amplitude.norm(),
                        phase_deg: s.amplitude.arg().to_degrees(),
                    })
                    .collect(),
            ),
            grid: None,
        }
    }
}

/// Reflectivity of the range line at azimuth `y_p`: the coherent sum of every
/// scatterer within half an azimuth sample (`v_p/(2·PRF)`) of `y_p`, binned to
/// its nearest range cell. Out-of-swath scatterers are skipped here; scene
/// loading rejects them.
pub fn scene_to_range_line(
    scene: &Scene,
    y_p: f64,
    params: &RadarParams,
    timings: &DerivedTimings,
) -> RangeLine {
    let half_bin = 0.5 * params.platform_velocity / params.prf;
    let m = params.num_range_cells;
    let mut line = RangeLine::zeros(m);
    for s in &scene.scatterers {
        let dy = s.y - y_p;
        if dy < -half_bin || dy >= half_bin.max(f64::MIN_POSITIVE) {
            continue;
        }
        let cell = range_cell_of(s.slant_range(params), timings);
        if (0..m as i64).contains(&cell) {
            line.rcs[cell as usize] += s.amplitude;
        }
    }
    line
}

//! Range-Doppler image formation shared by every waveform branch.
//!
//! Only the range-compression step depends on the branch: CP-OFDM uses the
//! cyclic-prefix reconstruction, the other three use the matched filter.
//! From [`RangeCompressedData`] onward there is one code path: optional
//! secondary range compression (LFM only), RCMC against the fixed swath
//! centre `R_c`, and azimuth matched filtering by FFT.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::echo::{envelope_at_offset, simulate_raw, two_way_phase, Aperture, RawData};
use crate::error::{Error, Result};
use crate::fft;
use crate::matrix::ComplexMatrix;
use crate::model::{DerivedTimings, RadarParams, Scene, SPEED_OF_LIGHT};
use crate::rangecomp::{cp_ofdm_range_compress, matched_filter_compress};
use crate::waveform::{lfm_pulse, noise_pulse, ofdm_pulse, pn_weights, Pulse, PulseKind, WeightVector};

/// Waveform / range-compression pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    CpOfdm,
    Lfm,
    Noise,
    ConventionalOfdm,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::CpOfdm, Branch::Lfm, Branch::Noise, Branch::ConventionalOfdm];

    pub fn name(self) -> &'static str {
        match self {
            Branch::CpOfdm => "cp_ofdm",
            Branch::Lfm => "lfm",
            Branch::Noise => "noise",
            Branch::ConventionalOfdm => "conventional_ofdm",
        }
    }

    /// Transmit pulse and matching range compressor.
    ///
    /// All four pulses last `N + cp_len` samples. The OFDM branches draw PN
    /// weights from `seed`; the noise branch draws its samples from it.
    pub fn setup(self, params: &RadarParams, timings: &DerivedTimings, seed: u64) -> Result<BranchSetup> {
        let n = params.num_subcarriers;
        let len = n + params.cp_len;
        let (pulse, compressor) = match self {
            Branch::CpOfdm => {
                if n < params.num_range_cells {
                    return Err(Error::InvalidParams(format!(
                        "imaging needs N >= M (N = {n}, M = {})",
                        params.num_range_cells
                    )));
                }
                let w = pn_weights(n, seed)?;
                let pulse = ofdm_pulse(&w, params.cp_len)?;
                let compressor = RangeCompressor::CpOfdm {
                    weights: w,
                    cp_len: params.cp_len,
                };
                (pulse, compressor)
            }
            Branch::Lfm => matched(lfm_pulse(len, 1.0)?, true),
            Branch::Noise => matched(noise_pulse(len, seed)?, false),
            Branch::ConventionalOfdm => {
                let w = pn_weights(n, seed)?;
                matched(ofdm_pulse(&w, params.cp_len)?.as_conventional(), false)
            }
        };
        Ok(BranchSetup {
            branch: self,
            pulse: pulse.with_sample_interval(timings.sample_interval),
            compressor,
        })
    }
}

fn matched(pulse: Pulse, src: bool) -> (Pulse, RangeCompressor) {
    let reference = pulse.as_slice().to_vec();
    (pulse, RangeCompressor::MatchedFilter { reference, src })
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "cp_ofdm" | "cpofdm" => Ok(Branch::CpOfdm),
            "lfm" => Ok(Branch::Lfm),
            "noise" => Ok(Branch::Noise),
            "conventional_ofdm" | "ofdm" => Ok(Branch::ConventionalOfdm),
            other => Err(Error::InvalidInput(format!(
                "unknown branch '{other}' (expected cp_ofdm, lfm, noise, conventional_ofdm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RangeCompressor {
    CpOfdm { weights: WeightVector, cp_len: usize },
    /// `src` enables secondary range compression downstream.
    MatchedFilter { reference: Vec<Complex64>, src: bool },
}

impl RangeCompressor {
    /// Compresses one unshifted echo line to `M` range cells.
    pub fn compress_line(&self, line: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
        match self {
            RangeCompressor::CpOfdm { weights, cp_len } => {
                Ok(cp_ofdm_range_compress(line, weights, m, *cp_len, false)?.d_hat)
            }
            RangeCompressor::MatchedFilter { reference, .. } => {
                let out = matched_filter_compress(line, reference)?;
                if out.len() != m {
                    return Err(Error::LengthMismatch {
                        expected: m + reference.len() - 1,
                        actual: line.len(),
                    });
                }
                Ok(out)
            }
        }
    }

    fn accepts(&self, pulse: &Pulse) -> bool {
        match self {
            RangeCompressor::CpOfdm { weights, cp_len } => {
                pulse.kind == PulseKind::CpOfdm && pulse.core_len == weights.len() && pulse.cp_len == *cp_len
            }
            RangeCompressor::MatchedFilter { reference, .. } => reference.len() == pulse.len(),
        }
    }

    pub fn wants_src(&self) -> bool {
        matches!(self, RangeCompressor::MatchedFilter { src: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchSetup {
    pub branch: Branch,
    pub pulse: Pulse,
    pub compressor: RangeCompressor,
}

/// `P × M` range-compressed data, slow time down the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeCompressedData {
    pub data: ComplexMatrix,
    pub slow_time: Vec<f64>,
    pub bulk_shift: Vec<usize>,
    /// Rows already referenced to the cell-centre ranges `R̄_m`.
    pub aligned: bool,
    pub pulse_interval: f64,
}

/// `P × M` focused image; row `P/2` is azimuth 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMatrix {
    pub data: ComplexMatrix,
    /// Metres per row.
    pub azimuth_spacing: f64,
    /// Metres per column.
    pub range_spacing: f64,
}

impl ImageMatrix {
    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    pub fn cols(&self) -> usize {
        self.data.cols()
    }

    /// Along-track position of row `r`, m.
    pub fn azimuth_of_row(&self, r: usize) -> f64 {
        (r as f64 - (self.rows() / 2) as f64) * self.azimuth_spacing
    }

    /// Nearest row to along-track position `y`, if inside the image.
    pub fn row_of_azimuth(&self, y: f64) -> Option<usize> {
        let r = (y / self.azimuth_spacing).round() + (self.rows() / 2) as f64;
        (r >= 0.0 && r < self.rows() as f64).then_some(r as usize)
    }
}

/// Range-compresses every pulse and removes its recorded bulk shift.
pub fn range_compress_all(
    raw: &RawData,
    compressor: &RangeCompressor,
    pulse: &Pulse,
    m: usize,
) -> Result<RangeCompressedData> {
    if !compressor.accepts(pulse) {
        return Err(Error::InvalidInput("range compressor does not match the transmitted pulse".into()));
    }
    if raw.echo_len != pulse.len() + m - 1 {
        return Err(Error::LengthMismatch {
            expected: pulse.len() + m - 1,
            actual: raw.echo_len,
        });
    }
    let rows: Vec<Vec<Complex64>> = (0..raw.pulses.rows())
        .into_par_iter()
        .map(|p| {
            let shift = raw.bulk_shift[p];
            let line = &raw.pulses.row(p)[shift..shift + raw.echo_len];
            compressor.compress_line(line, m)
        })
        .collect::<Result<_>>()?;
    let data = if rows.is_empty() {
        ComplexMatrix::zeros(0, m)
    } else {
        ComplexMatrix::from_rows(rows)?
    };
    Ok(RangeCompressedData {
        data,
        slow_time: raw.slow_time.clone(),
        bulk_shift: raw.bulk_shift.clone(),
        aligned: true,
        pulse_interval: raw.pulse_interval,
    })
}

/// Signed azimuth frequency of FFT bin `k` out of `p`.
fn doppler_of_bin(k: usize, p: usize, pulse_interval: f64) -> f64 {
    let signed = if k < p.div_ceil(2) { k as f64 } else { k as f64 - p as f64 };
    signed / (p as f64 * pulse_interval)
}

/// `D(f_η) = sqrt(1 − (λ f_η / 2v)²)`, floored to keep the correction finite
/// for bins beyond the physical Doppler band.
fn migration_factor(f_eta: f64, wavelength: f64, v: f64) -> f64 {
    let x = wavelength * f_eta / (2.0 * v);
    (1.0 - x * x).max(0.01).sqrt()
}

fn map_doppler_rows<F>(data: &ComplexMatrix, pulse_interval: f64, f: F) -> Result<ComplexMatrix>
where
    F: Fn(f64, &mut [Complex64]) + Sync,
{
    let p = data.rows();
    let mut columns: Vec<Vec<Complex64>> = data.columns();
    columns.par_iter_mut().for_each(|c| fft::forward(c));
    let mut doppler = ComplexMatrix::from_columns(columns, p)?;
    for k in 0..p {
        f(doppler_of_bin(k, p, pulse_interval), doppler.row_mut(k));
    }
    let mut columns = doppler.columns();
    columns.par_iter_mut().for_each(|c| {
        fft::inverse(c);
        let g = 1.0 / p as f64;
        c.iter_mut().for_each(|x| *x *= g);
    });
    ComplexMatrix::from_columns(columns, p)
}

const RCMC_TAPS: isize = 8;

/// 8-tap Hann-weighted sinc kernel evaluated at offset `x` samples.
fn interp_kernel(x: f64) -> f64 {
    let half = RCMC_TAPS as f64 / 2.0;
    if x.abs() >= half {
        return 0.0;
    }
    let sinc = if x.abs() < 1e-12 { 1.0 } else { (PI * x).sin() / (PI * x) };
    sinc * (0.5 + 0.5 * (PI * x / half).cos())
}

/// `out[m] = x(m + shift)` by windowed-sinc interpolation, zero outside.
fn shift_line(line: &mut [Complex64], shift: f64) {
    let src = line.to_vec();
    let len = src.len() as isize;
    for (m, out) in line.iter_mut().enumerate() {
        let pos = m as f64 + shift;
        let base = pos.floor() as isize;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in (base - RCMC_TAPS / 2 + 1)..=(base + RCMC_TAPS / 2) {
            if (0..len).contains(&i) {
                acc += src[i as usize] * interp_kernel(pos - i as f64);
            }
        }
        *out = acc;
    }
}

/// Hyperbolic range migration at reference `R_c`, in range cells.
pub fn migration_cells(f_eta: f64, params: &RadarParams, timings: &DerivedTimings) -> f64 {
    if params.platform_velocity == 0.0 {
        return 0.0;
    }
    let d = migration_factor(f_eta, timings.wavelength, params.platform_velocity);
    params.swath_center_range * (1.0 / d - 1.0) / timings.range_resolution
}

/// Range cell migration correction in the range-Doppler domain.
///
/// Data already aligned to `R̄_m` passes through unchanged, as does data whose
/// largest migration is under 0.1 cell.
pub fn rcmc(
    data: RangeCompressedData,
    params: &RadarParams,
    timings: &DerivedTimings,
) -> Result<RangeCompressedData> {
    let p = data.data.rows();
    if data.aligned || p == 0 || params.platform_velocity == 0.0 {
        return Ok(data);
    }
    let max_shift = (0..p)
        .map(|k| migration_cells(doppler_of_bin(k, p, data.pulse_interval), params, timings).abs())
        .fold(0.0, f64::max);
    if max_shift < 0.1 {
        return Ok(RangeCompressedData { aligned: true, ..data });
    }
    let corrected = map_doppler_rows(&data.data, data.pulse_interval, |f_eta, row| {
        shift_line(row, migration_cells(f_eta, params, timings));
    })?;
    Ok(RangeCompressedData {
        data: corrected,
        aligned: true,
        ..data
    })
}

/// Secondary range compression for matched-filtered chirps: removes the
/// Doppler-dependent quadratic range-frequency phase
/// `π f_τ² / K_src(f_η)`, `1/K_src = c R_c f_η² / (2 v² f_c³ D³)`.
pub fn secondary_range_compression(
    data: RangeCompressedData,
    params: &RadarParams,
    timings: &DerivedTimings,
) -> Result<RangeCompressedData> {
    let (p, m) = (data.data.rows(), data.data.cols());
    let v = params.platform_velocity;
    if p == 0 || v == 0.0 {
        return Ok(data);
    }
    let fc = params.carrier_freq;
    let rc = params.swath_center_range;
    let bandwidth = params.bandwidth;
    let corrected = map_doppler_rows(&data.data, data.pulse_interval, |f_eta, row| {
        if f_eta == 0.0 {
            return;
        }
        let d = migration_factor(f_eta, timings.wavelength, v);
        let inv_k = SPEED_OF_LIGHT * rc * f_eta * f_eta / (2.0 * v * v * fc.powi(3) * d.powi(3));
        fft::forward(row);
        for (k, x) in row.iter_mut().enumerate() {
            let f_tau = doppler_of_bin(k, m, 1.0 / bandwidth);
            *x *= Complex64::from_polar(1.0, PI * f_tau * f_tau * inv_k);
        }
        fft::inverse(row);
        let g = 1.0 / m as f64;
        row.iter_mut().for_each(|x| *x *= g);
    })?;
    Ok(RangeCompressedData { data: corrected, ..data })
}

/// Azimuth reference `ε_a(η)·exp(−j4π f_c R(η; R_c)/c)` sampled on `slow_time`.
pub fn azimuth_reference(slow_time: &[f64], params: &RadarParams, timings: &DerivedTimings) -> Vec<Complex64> {
    let rc = params.swath_center_range;
    slow_time
        .iter()
        .map(|&eta| {
            let offset = params.platform_velocity * eta;
            envelope_at_offset(offset, rc, timings) * two_way_phase(rc.hypot(offset), params)
        })
        .collect()
}

/// Azimuth matched filtering: circular correlation of every range column
/// with the `R_c` reference, then rows rotated so azimuth 0 sits at row `P/2`.
pub fn azimuth_compress(
    data: &RangeCompressedData,
    params: &RadarParams,
    timings: &DerivedTimings,
) -> Result<ImageMatrix> {
    let p = data.data.rows();
    let mut href = azimuth_reference(&data.slow_time, params, timings);
    fft::forward(&mut href);
    let zero_row = p / 2;
    let columns: Vec<Vec<Complex64>> = data
        .data
        .columns()
        .into_par_iter()
        .map(|mut col| {
            fft::forward(&mut col);
            for (x, h) in col.iter_mut().zip(&href) {
                *x *= h.conj();
            }
            fft::inverse(&mut col);
            let g = 1.0 / p as f64;
            // correlation lag k lands on row (k + P/2) mod P
            let mut out = vec![Complex64::new(0.0, 0.0); p];
            for (k, x) in col.into_iter().enumerate() {
                out[(k + zero_row) % p] = x * g;
            }
            out
        })
        .collect();
    Ok(ImageMatrix {
        data: ComplexMatrix::from_columns(columns, p)?,
        azimuth_spacing: params.platform_velocity * data.pulse_interval,
        range_spacing: timings.range_resolution,
    })
}

/// Range compression, SRC where the branch asks for it, RCMC and azimuth
/// compression of already simulated raw data.
pub fn process_raw(
    raw: &RawData,
    setup: &BranchSetup,
    params: &RadarParams,
    timings: &DerivedTimings,
) -> Result<ImageMatrix> {
    let mut rc = range_compress_all(raw, &setup.compressor, &setup.pulse, params.num_range_cells)?;
    if setup.compressor.wants_src() {
        rc = secondary_range_compression(rc, params, timings)?;
    }
    let rc = rcmc(rc, params, timings)?;
    azimuth_compress(&rc, params, timings)
}

/// Simulates `scene` with `branch` and forms the focused image.
#[allow(clippy::too_many_arguments)]
pub fn form_image(
    scene: &Scene,
    branch: Branch,
    params: &RadarParams,
    timings: &DerivedTimings,
    aperture: &Aperture,
    noise_sigma: f64,
    seed: u64,
) -> Result<ImageMatrix> {
    let setup = branch.setup(params, timings, seed)?;
    let raw = simulate_raw(scene, &setup.pulse, params, timings, aperture, noise_sigma, seed)?;
    process_raw(&raw, &setup, params, timings)
}

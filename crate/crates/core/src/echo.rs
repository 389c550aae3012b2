//! Complex-baseband echo simulation.
//!
//! Within one pulse the receive window opens when the echo from cell 0
//! arrives, so cell `m` is delayed by exactly `m` samples and one range line
//! is a discrete linear convolution of the transmitted sequence with the
//! weighting coefficients `d_m`. Range walk across slow time is modelled as a
//! whole-line integer shift per pulse; the sub-sample remainder lives only in
//! the carrier phase of `d_m`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{ComplexSequence, DerivedTimings, RadarParams, RangeLine, Scene, SPEED_OF_LIGHT};
use crate::rng;
use crate::waveform::Pulse;

/// Slow-time sampling of the synthetic aperture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aperture {
    pub num_pulses: usize,
    /// Slow-time spacing between pulses, s.
    pub pulse_interval: f64,
}

impl Aperture {
    /// `round(T_a·PRF)` pulses at the system PRF.
    pub fn from_params(params: &RadarParams) -> Self {
        let n = (params.aperture_time * params.prf).round().max(1.0) as usize;
        Self {
            num_pulses: n,
            pulse_interval: 1.0 / params.prf,
        }
    }

    /// `num_pulses` pulses spread evenly over the same aperture time.
    pub fn subsampled(params: &RadarParams, num_pulses: usize) -> Self {
        let n = num_pulses.max(1);
        Self {
            num_pulses: n,
            pulse_interval: params.aperture_time / n as f64,
        }
    }

    /// `η_p = (p − P/2)·Δη`; pulse `P/2` is the zero-Doppler instant.
    pub fn slow_time(&self, p: usize) -> f64 {
        (p as f64 - (self.num_pulses / 2) as f64) * self.pulse_interval
    }

    pub fn slow_time_axis(&self) -> Vec<f64> {
        (0..self.num_pulses).map(|p| self.slow_time(p)).collect()
    }

    /// Along-track distance between pulses, m.
    pub fn azimuth_spacing(&self, params: &RadarParams) -> f64 {
        params.platform_velocity * self.pulse_interval
    }
}

/// `R_m(η) = sqrt(R̄_m² + v_p²η²)`.
pub fn slant_range(m: usize, eta: f64, params: &RadarParams, timings: &DerivedTimings) -> f64 {
    timings.cell_range(m).hypot(params.platform_velocity * eta)
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Two-way azimuth envelope `sinc²(0.886·θ/β_bw)` for a target offset
/// `along_track` metres from the platform at closest-approach range `r_bar`.
pub fn envelope_at_offset(along_track: f64, r_bar: f64, timings: &DerivedTimings) -> f64 {
    let theta = (along_track / r_bar).atan();
    let p = sinc(0.886 * theta / timings.azimuth_beamwidth);
    p * p
}

/// `ε_a(η)` with `θ(η) = arctan(v_p·η / R̄_m)`.
pub fn azimuth_envelope(eta: f64, r_bar: f64, params: &RadarParams, timings: &DerivedTimings) -> f64 {
    envelope_at_offset(params.platform_velocity * eta, r_bar, timings)
}

/// `exp(−j4π f_c R / c)`.
pub fn two_way_phase(range: f64, params: &RadarParams) -> Complex64 {
    // reduce in cycles first; 4π·f_c·R/c is ~10⁶ rad at X band
    let cycles = 2.0 * params.carrier_freq * range / SPEED_OF_LIGHT;
    Complex64::from_polar(1.0, -2.0 * PI * cycles.fract())
}

/// Weighting coefficients `d_m` of one range line at slow time `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightingCoefficients {
    pub d: Vec<Complex64>,
}

impl WeightingCoefficients {
    pub fn new(d: Vec<Complex64>) -> Self {
        Self { d }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }
}

/// `d_m = g_m · ε_a(η) · exp(−j4π f_c R_m(η)/c)`.
pub fn weighting_coefficients(
    line: &RangeLine,
    eta: f64,
    params: &RadarParams,
    timings: &DerivedTimings,
) -> WeightingCoefficients {
    let d = line
        .rcs()
        .iter()
        .enumerate()
        .map(|(m, &g)| {
            if g == Complex64::new(0.0, 0.0) {
                return g;
            }
            let r_bar = timings.cell_range(m);
            let r = slant_range(m, eta, params, timings);
            g * azimuth_envelope(eta, r_bar, params, timings) * two_way_phase(r, params)
        })
        .collect();
    WeightingCoefficients { d }
}

/// Weighting coefficients for a full scene with the platform at
/// `y_p = v_p·η`. Each scatterer contributes through its own along-track
/// offset, so targets away from azimuth 0 reach zero Doppler at their own
/// slow time. `cells` comes from [`Scene::cell_indices`].
pub fn scene_coefficients(
    scene: &Scene,
    cells: &[usize],
    eta: f64,
    params: &RadarParams,
    timings: &DerivedTimings,
) -> WeightingCoefficients {
    let mut d = vec![Complex64::new(0.0, 0.0); params.num_range_cells];
    let y_p = params.platform_velocity * eta;
    for (s, &m) in scene.scatterers.iter().zip(cells) {
        let offset = y_p - s.y;
        let r_bar = timings.cell_range(m);
        let r = r_bar.hypot(offset);
        d[m] += s.amplitude * envelope_at_offset(offset, r_bar, timings) * two_way_phase(r, params);
    }
    WeightingCoefficients { d }
}

/// `u_i = Σ_m d_m s_{i−m} + w_i` for `i = 0 .. L + M − 1`, `L` the pulse
/// length. Noise is circular Gaussian with `E|w|² = noise_sigma²`.
pub fn simulate_echo_line(
    pulse: &Pulse,
    d: &WeightingCoefficients,
    noise_sigma: f64,
    seed: u64,
) -> Result<ComplexSequence> {
    echo_line_stream(pulse, d, noise_sigma, seed, 0)
}

pub(crate) fn echo_line_stream(
    pulse: &Pulse,
    d: &WeightingCoefficients,
    noise_sigma: f64,
    seed: u64,
    stream: u64,
) -> Result<ComplexSequence> {
    if pulse.is_empty() || d.is_empty() {
        return Err(Error::InvalidInput("empty pulse or coefficient vector".into()));
    }
    let mut u = convolve_direct(pulse.as_slice(), &d.d);
    if noise_sigma > 0.0 {
        let mut rng = rng::noise_rng(seed, stream);
        for x in u.iter_mut() {
            *x += rng::complex_gaussian(&mut rng, noise_sigma);
        }
    }
    ComplexSequence::new(u, pulse.samples.sample_interval())
}

/// Direct-form linear convolution; zero taps are skipped so sparse scenes
/// cost only their occupied cells.
fn convolve_direct(s: &[Complex64], d: &[Complex64]) -> Vec<Complex64> {
    let mut u = vec![Complex64::new(0.0, 0.0); s.len() + d.len() - 1];
    for (m, &dm) in d.iter().enumerate() {
        if dm == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (ui, &si) in u[m..m + s.len()].iter_mut().zip(s) {
            *ui += dm * si;
        }
    }
    u
}

/// Raw echoes: one row per pulse, each row one receive window.
#[derive(Debug, Clone, PartialEq)]
pub struct RawData {
    /// `P × (echo_len + max shift)` samples.
    pub pulses: ComplexMatrix,
    pub slow_time: Vec<f64>,
    /// Integer range walk applied to each row, samples.
    pub bulk_shift: Vec<usize>,
    /// Length of the unshifted echo line, `L + M − 1`.
    pub echo_len: usize,
    pub pulse_interval: f64,
}

/// Integer range walk of the whole line at slow time `η`, in samples.
pub fn bulk_shift(eta: f64, params: &RadarParams, timings: &DerivedTimings) -> usize {
    let walk = slant_range(0, eta, params, timings) - timings.near_range;
    (walk / timings.range_resolution).round().max(0.0) as usize
}

/// Simulates every pulse of the aperture. Rows are independent and each
/// draws noise from its own stream `(seed, p)`, so the result does not
/// depend on thread count.
pub fn simulate_raw(
    scene: &Scene,
    pulse: &Pulse,
    params: &RadarParams,
    timings: &DerivedTimings,
    aperture: &Aperture,
    noise_sigma: f64,
    seed: u64,
) -> Result<RawData> {
    let cells = scene.cell_indices(params, timings)?;
    let slow_time = aperture.slow_time_axis();
    let shifts: Vec<usize> = slow_time
        .iter()
        .map(|&eta| bulk_shift(eta, params, timings))
        .collect();
    let max_shift = shifts.iter().copied().max().unwrap_or(0);
    let echo_len = pulse.len() + params.num_range_cells - 1;
    let cols = echo_len + max_shift;

    let rows: Vec<Vec<Complex64>> = slow_time
        .par_iter()
        .zip(shifts.par_iter())
        .enumerate()
        .map(|(p, (&eta, &shift))| {
            let d = scene_coefficients(scene, &cells, eta, params, timings);
            let line = echo_line_stream(pulse, &d, noise_sigma, seed, p as u64)?;
            let mut row = vec![Complex64::new(0.0, 0.0); cols];
            row[shift..shift + echo_len].copy_from_slice(line.samples());
            Ok(row)
        })
        .collect::<Result<_>>()?;

    Ok(RawData {
        pulses: ComplexMatrix::from_rows(rows)?,
        slow_time,
        bulk_shift: shifts,
        echo_len,
        pulse_interval: aperture.pulse_interval,
    })
}

//! Image and waveform quality measures: point-spread-function cuts, peak
//! sidelobe level, 3 dB width, Monte Carlo MSE against prefix length, SNR
//! gain of range compression, and image-vs-truth error.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::azimuth::{form_image, Branch, ImageMatrix};
use crate::echo::{simulate_echo_line, Aperture, WeightingCoefficients};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{derive_timings, ground_range_of_cell, DerivedTimings, RadarParams, Scatterer, Scene};
use crate::rangecomp::cp_ofdm_range_compress;
use crate::rng::substream_seed;
use crate::waveform::{ofdm_pulse, pn_weights};

/// Lowest level reported, dB.
pub const DB_FLOOR: f64 = -350.0;

/// A 1-D cut, peak-normalised to 0 dB.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub index: Vec<usize>,
    pub db: Vec<f64>,
}

impl Profile {
    /// Normalises `values` by their largest magnitude.
    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        let mags: Vec<f64> = values.iter().map(|x| x.norm()).collect();
        Self::from_magnitudes(&mags)
    }

    pub fn from_magnitudes(mags: &[f64]) -> Result<Self> {
        let peak = mags.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 || !peak.is_finite() {
            return Err(Error::ZeroEnergy);
        }
        let db = mags
            .iter()
            .map(|&a| {
                if a > 0.0 {
                    (20.0 * (a / peak).log10()).max(DB_FLOOR)
                } else {
                    DB_FLOOR
                }
            })
            .collect();
        Ok(Self {
            index: (0..mags.len()).collect(),
            db,
        })
    }

    pub fn len(&self) -> usize {
        self.db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.db.is_empty()
    }

    pub fn peak_index(&self) -> Option<usize> {
        (0..self.len()).max_by(|&a, &b| self.db[a].total_cmp(&self.db[b]).then(b.cmp(&a)))
    }
}

/// Range and azimuth cuts through the global peak of `image`.
pub fn extract_profiles(image: &ImageMatrix) -> Result<(Profile, Profile)> {
    let (r, m) = image.data.argmax_abs().ok_or(Error::ZeroEnergy)?;
    if image.data.max_abs() == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let range = Profile::from_complex(image.data.row(r))?;
    let azimuth = Profile::from_complex(&image.data.column(m))?;
    Ok((range, azimuth))
}

fn unique_peak(p: &Profile) -> Result<usize> {
    let k = p.peak_index().ok_or(Error::ZeroEnergy)?;
    if p.db.iter().all(|&d| d == p.db[k]) {
        return Err(Error::InvalidInput("flat profile has no mainlobe".into()));
    }
    Ok(k)
}

/// Indices of the first local minima on either side of the peak.
pub fn mainlobe_bounds(p: &Profile) -> Result<(usize, usize)> {
    let k = unique_peak(p)?;
    let mut lo = k;
    while lo > 0 && p.db[lo - 1] < p.db[lo] {
        lo -= 1;
    }
    let mut hi = k;
    while hi + 1 < p.len() && p.db[hi + 1] < p.db[hi] {
        hi += 1;
    }
    Ok((lo, hi))
}

/// Highest level outside the mainlobe, dB; [`DB_FLOOR`] if there is none.
pub fn peak_sidelobe_level(p: &Profile) -> Result<f64> {
    let (lo, hi) = mainlobe_bounds(p)?;
    Ok(p.db[..lo]
        .iter()
        .chain(&p.db[hi + 1..])
        .cloned()
        .fold(DB_FLOOR, f64::max))
}

/// Mainlobe width at −3 dB in samples, linear interpolation of amplitude.
pub fn mainlobe_width_3db(p: &Profile) -> Result<f64> {
    let k = unique_peak(p)?;
    let amp: Vec<f64> = p.db.iter().map(|&d| 10f64.powf(d / 20.0)).collect();
    let thr = std::f64::consts::FRAC_1_SQRT_2;
    let cross = |a: usize, b: usize| -> f64 {
        // amp[a] >= thr > amp[b], |a − b| = 1
        let t = (amp[a] - thr) / (amp[a] - amp[b]);
        a as f64 + t * (b as f64 - a as f64)
    };
    let mut i = k;
    while i > 0 && amp[i - 1] >= thr {
        i -= 1;
    }
    let left = if i == 0 { 0.0 } else { cross(i, i - 1) };
    let mut j = k;
    while j + 1 < p.len() && amp[j + 1] >= thr {
        j += 1;
    }
    let right = if j + 1 == p.len() { j as f64 } else { cross(j, j + 1) };
    Ok(right - left)
}

/// How [`mse_vs_cp`] produces each estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MseMode {
    /// One noiseless range line, no azimuth processing.
    SingleLine,
    /// A row of unit scatterers at azimuth 0, one per range cell, imaged
    /// through the whole chain with `pulses` slow-time samples.
    FullChain { pulses: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseCurve {
    pub cp_lengths: Vec<usize>,
    pub mse: Vec<f64>,
    pub trials: usize,
    pub num_range_cells: usize,
}

impl MseCurve {
    pub fn is_non_increasing(&self, rel_tol: f64) -> bool {
        let mut pairs: Vec<(usize, f64)> = self.cp_lengths.iter().copied().zip(self.mse.iter().copied()).collect();
        pairs.sort_by_key(|p| p.0);
        pairs.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + rel_tol) + f64::MIN_POSITIVE)
    }
}

/// Mean squared error after removing the global gain and phase:
/// `est` is scaled to the energy of `truth` and rotated onto it.
pub fn normalized_mse(est: &[Complex64], truth: &[Complex64]) -> Result<f64> {
    if est.len() != truth.len() || est.is_empty() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: est.len(),
        });
    }
    let e_est: f64 = est.iter().map(|x| x.norm_sqr()).sum();
    let e_truth: f64 = truth.iter().map(|x| x.norm_sqr()).sum();
    if e_est == 0.0 || e_truth == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let inner: Complex64 = est.iter().zip(truth).map(|(a, b)| b * a.conj()).sum();
    let rot = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
    let g = (e_truth / e_est).sqrt();
    Ok(est
        .iter()
        .zip(truth)
        .map(|(a, b)| (a * g * rot - b).norm_sqr())
        .sum::<f64>()
        / est.len() as f64)
}

/// Scene with one unit scatterer at azimuth 0 in every range cell.
pub fn uniform_range_scene(params: &RadarParams, timings: &DerivedTimings) -> Scene {
    Scene::new(
        (0..params.num_range_cells)
            .map(|m| Scatterer {
                x: ground_range_of_cell(m, params, timings),
                y: 0.0,
                amplitude: Complex64::new(1.0, 0.0),
            })
            .collect(),
    )
}

/// Monte Carlo MSE of the energy-normalised CP-OFDM estimate against
/// `g_m = 1`, for each prefix length. Trial `t` uses PN weights seeded by
/// `substream_seed(seed, t)` for every prefix length, so the curve compares
/// prefixes on common draws. Trials run in parallel and are summed in index
/// order.
pub fn mse_vs_cp(
    params: &RadarParams,
    cp_lengths: &[usize],
    trials: usize,
    seed: u64,
    mode: MseMode,
) -> Result<MseCurve> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let m = params.num_range_cells;
    let n = params.num_subcarriers;
    if let Some(&bad) = cp_lengths.iter().find(|&&cp| cp + 1 > m || cp + 1 > n) {
        return Err(Error::InvalidInput(format!(
            "cp_len {bad} outside 0..={}",
            (m.min(n)).saturating_sub(1)
        )));
    }
    let truth = vec![Complex64::new(1.0, 0.0); m];

    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = substream_seed(seed, t as u64);
            cp_lengths
                .iter()
                .map(|&cp| {
                    let mut p = params.clone();
                    p.cp_len = cp;
                    match mode {
                        MseMode::SingleLine => {
                            let w = pn_weights(n, trial_seed)?;
                            let pulse = ofdm_pulse(&w, cp)?;
                            let u = simulate_echo_line(&pulse, &WeightingCoefficients::new(truth.clone()), 0.0, 0)?;
                            let est = cp_ofdm_range_compress(u.samples(), &w, m, cp, true)?;
                            normalized_mse(&est.d_hat, &truth)
                        }
                        MseMode::FullChain { pulses } => {
                            let timings = derive_timings(&p);
                            let scene = uniform_range_scene(&p, &timings);
                            let aperture = Aperture::subsampled(&p, pulses);
                            let img = form_image(&scene, Branch::CpOfdm, &p, &timings, &aperture, 0.0, trial_seed)?;
                            let row = img.row_of_azimuth(0.0).ok_or(Error::ZeroEnergy)?;
                            let mags: Vec<Complex64> =
                                img.data.row(row).iter().map(|x| Complex64::new(x.norm(), 0.0)).collect();
                            normalized_mse(&mags, &truth)
                        }
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut mse = vec![0.0; cp_lengths.len()];
    for row in &per_trial {
        for (acc, v) in mse.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in mse.iter_mut() {
        *v /= trials as f64;
    }
    Ok(MseCurve {
        cp_lengths: cp_lengths.to_vec(),
        mse,
        trials,
        num_range_cells: m,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrGain {
    pub branch: Branch,
    pub input_snr_db: f64,
    pub output_snr_db: f64,
    pub gain_db: f64,
}

/// Range-compression SNR gain for a unit target in the middle cell.
///
/// Signal power is taken from a noiseless run; output noise power is the
/// mean `|Δ|²` over all cells and trials, where `Δ` is the noisy output
/// minus the noiseless one. Input SNR is mean pulse power over `sigma²`.
pub fn snr_gain(params: &RadarParams, branch: Branch, trials: usize, seed: u64, sigma: f64) -> Result<SnrGain> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::DegenerateSnr(format!(
            "noise sigma {sigma} gives infinite input SNR"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let timings = derive_timings(params);
    let setup = branch.setup(params, &timings, seed)?;
    let m = params.num_range_cells;
    let target = m / 2;
    let mut d = vec![Complex64::new(0.0, 0.0); m];
    d[target] = Complex64::new(1.0, 0.0);
    let d = WeightingCoefficients::new(d);

    let clean_line = simulate_echo_line(&setup.pulse, &d, 0.0, 0)?;
    let clean = setup.compressor.compress_line(clean_line.samples(), m)?;
    let signal = clean[target].norm_sqr();

    let noise_power: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let u = simulate_echo_line(&setup.pulse, &d, sigma, substream_seed(seed, t as u64))?;
            let out = setup.compressor.compress_line(u.samples(), m)?;
            Ok(out.iter().zip(&clean).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / m as f64)
        })
        .collect::<Result<_>>()?;
    let noise = noise_power.iter().sum::<f64>() / trials as f64;
    if noise == 0.0 {
        return Err(Error::DegenerateSnr("no output noise measured".into()));
    }
    let input = setup.pulse.energy() / setup.pulse.len() as f64 / (sigma * sigma);
    let output = signal / noise;
    let db = |x: f64| 10.0 * x.log10();
    Ok(SnrGain {
        branch,
        input_snr_db: db(input),
        output_snr_db: db(output),
        gain_db: db(output / input),
    })
}

fn peak_normalized_magnitudes(m: &ComplexMatrix) -> Vec<f64> {
    let peak = m.max_abs();
    if peak == 0.0 {
        return vec![0.0; m.as_slice().len()];
    }
    m.as_slice().iter().map(|x| x.norm() / peak).collect()
}

/// Mean squared difference of peak-normalised magnitudes.
pub fn image_mse(image: &ComplexMatrix, truth: &ComplexMatrix) -> Result<f64> {
    if image.rows() != truth.rows() || image.cols() != truth.cols() {
        return Err(Error::LengthMismatch {
            expected: truth.rows() * truth.cols(),
            actual: image.rows() * image.cols(),
        });
    }
    let a = peak_normalized_magnitudes(image);
    let b = peak_normalized_magnitudes(truth);
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64)
}

/// Scatterer amplitudes dropped on the pixel grid of `like`.
pub fn render_truth(
    scene: &Scene,
    like: &ImageMatrix,
    params: &RadarParams,
    timings: &DerivedTimings,
) -> Result<ComplexMatrix> {
    let cells = scene.cell_indices(params, timings)?;
    let mut truth = ComplexMatrix::zeros(like.rows(), like.cols());
    for (s, &m) in scene.scatterers.iter().zip(&cells) {
        if let Some(r) = like.row_of_azimuth(s.y) {
            let v = truth.get(r, m) + s.amplitude;
            truth.set(r, m, v);
        }
    }
    Ok(truth)
}

//! Subcarrier weights and sampled transmit pulses.
//!
//! An OFDM pulse is the unitary IDFT of the weight vector `S`, evaluated on
//! `N + cp_len` consecutive sample indices. The IDFT is `N`-periodic, so the
//! trailing `cp_len` samples repeat the head; whether that repeated segment is
//! called a prefix or a suffix only relabels which period the receiver
//! windows, and [`crate::rangecomp`] windows accordingly.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::model::{energy, ComplexSequence};
use crate::rng;

/// `N` complex subcarrier weights with `Σ|S_k|² = N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    s: Vec<Complex64>,
}

impl WeightVector {
    /// Rescales arbitrary nonzero weights to meet the power constraint.
    pub fn normalized(mut s: Vec<Complex64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidInput("weight vector is empty".into()));
        }
        let e = energy(&s);
        if e == 0.0 || !e.is_finite() {
            return Err(Error::ZeroEnergy);
        }
        let g = (s.len() as f64 / e).sqrt();
        for x in s.iter_mut() {
            *x *= g;
        }
        Ok(Self { s })
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `s_i`, `i = 0..N`: the unitary IDFT of the weights.
    pub fn time_samples(&self) -> Vec<Complex64> {
        let mut buf = self.s.clone();
        fft::inverse_unitary(&mut buf);
        buf
    }
}

/// Binary PN weights `S_k ∈ {−1, +1}` from the seeded SplitMix64 stream.
pub fn pn_weights(n: usize, seed: u64) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    let s = rng::pn_signs(n, seed)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    Ok(WeightVector { s })
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zadoff-Chu weights. Both the weights and their IDFT have constant modulus.
pub fn zadoff_chu_weights(n: usize, root: usize) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    if gcd(root, n) != 1 {
        return Err(Error::RootNotCoprime { root, n });
    }
    let two_n = 2 * n as u128;
    let s = (0..n as u128)
        .map(|k| {
            let q = if n % 2 == 1 { k * (k + 1) } else { k * k };
            // phase = −π·root·q/N, reduced mod 2π in integers
            let r = (root as u128 * q) % two_n;
            Complex64::from_polar(1.0, -PI * r as f64 / n as f64)
        })
        .collect();
    Ok(WeightVector { s })
}

/// All-ones weights; the time sequence is a delta of height `√N`.
pub fn constant_weights(n: usize) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be at least 1".into()));
    }
    Ok(WeightVector {
        s: vec![Complex64::new(1.0, 0.0); n],
    })
}

/// Weights whose OFDM time sequence reproduces `s` up to scale.
pub fn weights_from_signal(s: &ComplexSequence) -> Result<WeightVector> {
    if s.is_empty() {
        return Err(Error::InvalidInput("signal is empty".into()));
    }
    let mut buf = s.samples().to_vec();
    fft::forward_unitary(&mut buf);
    WeightVector::normalized(buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    CpOfdm,
    Lfm,
    Noise,
    ConventionalOfdm,
}

/// A sampled complex-baseband transmit pulse. Sample interval defaults to 1
/// (times in units of `T_s`).
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub kind: PulseKind,
    pub samples: ComplexSequence,
    pub core_len: usize,
    pub cp_len: usize,
}

impl Pulse {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.samples.samples()
    }

    pub fn energy(&self) -> f64 {
        self.samples.energy()
    }

    pub fn with_sample_interval(mut self, ts: f64) -> Self {
        self.samples.set_sample_interval(ts);
        self
    }

    /// Same samples relabelled as a conventional (matched-filtered) OFDM pulse.
    pub fn as_conventional(mut self) -> Self {
        self.kind = PulseKind::ConventionalOfdm;
        self
    }
}

/// `total_len` samples of the `N`-periodic OFDM sequence, starting at index 0.
/// Unlike [`ofdm_pulse`] this permits extensions longer than `2N − 1`, which
/// the `N < M` folded configuration needs.
pub fn ofdm_periodic(weights: &WeightVector, total_len: usize) -> Vec<Complex64> {
    let base = weights.time_samples();
    let n = base.len();
    (0..total_len).map(|i| base[i % n]).collect()
}

/// CP-OFDM pulse of length `N + cp_len`; `samples[N..N+cp_len]` equals
/// `samples[..cp_len]` bit for bit.
pub fn ofdm_pulse(weights: &WeightVector, cp_len: usize) -> Result<Pulse> {
    let n = weights.len();
    if cp_len > n.saturating_sub(1) {
        return Err(Error::InvalidInput(format!(
            "cp_len {cp_len} out of range 0..={}",
            n.saturating_sub(1)
        )));
    }
    Ok(Pulse {
        kind: PulseKind::CpOfdm,
        samples: ComplexSequence::new(ofdm_periodic(weights, n + cp_len), 1.0)?,
        core_len: n,
        cp_len,
    })
}

/// Unit-modulus linear chirp centred at zero frequency, sweeping
/// `bandwidth_fraction · B` over `length` samples. No window.
pub fn lfm_pulse(length: usize, bandwidth_fraction: f64) -> Result<Pulse> {
    if length < 2 {
        return Err(Error::InvalidInput("LFM pulse needs at least 2 samples".into()));
    }
    if !(bandwidth_fraction > 0.0 && bandwidth_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "bandwidth fraction {bandwidth_fraction} outside (0, 1]"
        )));
    }
    // chirp rate in cycles/sample²
    let rate = bandwidth_fraction / length as f64;
    let mid = (length / 2) as f64;
    let samples = (0..length)
        .map(|i| {
            let t = i as f64 - mid;
            Complex64::from_polar(1.0, PI * rate * t * t)
        })
        .collect();
    Ok(Pulse {
        kind: PulseKind::Lfm,
        samples: ComplexSequence::new(samples, 1.0)?,
        core_len: length,
        cp_len: 0,
    })
}

/// i.i.d. circular complex Gaussian pulse with unit mean power.
pub fn noise_pulse(length: usize, seed: u64) -> Result<Pulse> {
    if length == 0 {
        return Err(Error::InvalidInput("noise pulse needs at least 1 sample".into()));
    }
    let mut rng = rng::noise_rng(seed, 0);
    let samples = (0..length)
        .map(|_| rng::complex_gaussian(&mut rng, 1.0))
        .collect();
    Ok(Pulse {
        kind: PulseKind::Noise,
        samples: ComplexSequence::new(samples, 1.0)?,
        core_len: length,
        cp_len: 0,
    })
}

/// Peak-to-average power ratio `max|s_i|² / mean|s_i|²`.
pub fn papr(s: &[Complex64]) -> Result<f64> {
    let e = energy(s);
    if s.is_empty() || e == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let peak = s.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
    Ok(peak / (e / s.len() as f64))
}

//! Range compression.
//!
//! The CP-OFDM receiver keeps `N` samples of the echo starting right after
//! the cyclic prefix, takes a unitary FFT, divides each bin by the
//! (cyclically shifted) subcarrier weight, and returns the first `M` entries
//! of the unitary IFFT. When the prefix covers the channel (`cp_len ≥ M − 1`)
//! the kept window is exactly a circular convolution of `d` with the pulse
//! core, the channel matrix is circulant, and the DFT diagonalises it: the
//! output is `√N·d` with no leakage between range cells. A shorter prefix
//! leaves the IRCI term `ξ` computed by [`irci_oracle`]; `N < M` folds cells
//! modulo `N` ([`cp_ofdm_fold_oracle`]).
//!
//! The matched filter is the correlation receiver used by the LFM, noise
//! and conventional-OFDM baselines.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::waveform::WeightVector;

/// Relative magnitude below which a subcarrier weight is treated as zero.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RangeEstimate {
    /// `M` cell estimates, or `N` folded sums when `N < M`.
    pub d_hat: Vec<Complex64>,
    /// `true` when the `√N` compression gain has been divided out.
    pub gain_normalized: bool,
}

fn shift_phase(k: usize, shift: usize, n: usize) -> Complex64 {
    let r = (k as u128 * shift as u128 % n as u128) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / n as f64)
}

fn check_weights(weights: &[Complex64]) -> Result<()> {
    let peak = weights.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if let Some((index, s)) = weights
        .iter()
        .enumerate()
        .find(|(_, s)| s.norm() < WEIGHT_FLOOR * peak || peak == 0.0)
    {
        return Err(Error::NonInvertibleWeight {
            index,
            magnitude: s.norm(),
        });
    }
    Ok(())
}

/// Echo length the CP-OFDM receiver expects: `N + cp_len + M − 1`.
pub fn expected_echo_len(n: usize, m: usize, cp_len: usize) -> usize {
    n + cp_len + m - 1
}

/// CP-OFDM range reconstruction of one echo line.
///
/// `u` must hold the full receive window of a pulse built with `cp_len`
/// prefix samples and `m` range cells. Output is raw (`√N·d`) unless
/// `normalize` is set.
pub fn cp_ofdm_range_compress(
    u: &[Complex64],
    weights: &WeightVector,
    m: usize,
    cp_len: usize,
    normalize: bool,
) -> Result<RangeEstimate> {
    let n = weights.len();
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("N and M must be at least 1".into()));
    }
    let expected = expected_echo_len(n, m, cp_len);
    if u.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: u.len(),
        });
    }
    let s = weights.as_slice();
    check_weights(s)?;

    let mut buf = u[cp_len..cp_len + n].to_vec();
    fft::forward_unitary(&mut buf);
    for (k, x) in buf.iter_mut().enumerate() {
        *x /= s[k] * shift_phase(k, cp_len, n);
    }
    fft::inverse_unitary(&mut buf);
    buf.truncate(m.min(n));
    if normalize {
        let g = 1.0 / (n as f64).sqrt();
        for x in buf.iter_mut() {
            *x *= g;
        }
    }
    Ok(RangeEstimate {
        d_hat: buf,
        gain_normalized: normalize,
    })
}

/// `d̃_n = Σ_i d_{iN+n}`: what the reconstruction recovers when `N < M`.
pub fn cp_ofdm_fold_oracle(d: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    if n == 0 || n >= d.len() {
        return Err(Error::InvalidInput(format!(
            "folding needs 0 < N < M (N = {n}, M = {})",
            d.len()
        )));
    }
    let mut folded = vec![Complex64::new(0.0, 0.0); n];
    for (idx, &v) in d.iter().enumerate() {
        folded[idx % n] += v;
    }
    Ok(folded)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrciTerm {
    /// `ξ_m` for `m = 0..M`.
    pub xi: Vec<Complex64>,
    /// Set when the prefix is long enough that `ξ` vanishes identically.
    pub sufficient_cp: bool,
}

/// IRCI caused by a prefix of `cp_len < M − 1` samples, so that the noiseless
/// receiver output is `√N·d − ξ`.
///
/// Built from its definition: the residual echo `ū_j` is the part of the
/// sufficient-prefix window that the short prefix never transmitted,
/// `ū_j = Σ_{m > cp_len + j} d_m s_{(cp_len + j − m) mod N}`, nonzero only for
/// `j < M − 1 − cp_len`. It is then pushed through the same
/// divide-and-invert chain as the receiver, using direct O(N²) transforms so
/// it shares no code with the FFT path.
pub fn irci_oracle(d: &[Complex64], weights: &WeightVector, cp_len: usize) -> Result<IrciTerm> {
    let m = d.len();
    let n = weights.len();
    if m == 0 || n < m {
        return Err(Error::InvalidInput(format!(
            "IRCI oracle needs 1 <= M <= N (N = {n}, M = {m})"
        )));
    }
    if cp_len + 1 >= m {
        return Ok(IrciTerm {
            xi: vec![Complex64::new(0.0, 0.0); m],
            sufficient_cp: true,
        });
    }
    let s_w = weights.as_slice();
    check_weights(s_w)?;
    let s = fft::naive_dft(s_w, true);

    let mut residual = vec![Complex64::new(0.0, 0.0); n];
    for (j, r) in residual.iter_mut().enumerate().take(m - 1 - cp_len) {
        for (mm, &dm) in d.iter().enumerate().skip(cp_len + j + 1) {
            let idx = (cp_len + j + n - mm % n) % n;
            *r += dm * s[idx];
        }
    }

    let mut spec = fft::naive_dft(&residual, false);
    for (k, x) in spec.iter_mut().enumerate() {
        *x /= s_w[k] * shift_phase(k, cp_len, n);
    }
    let mut xi = fft::naive_dft(&spec, true);
    xi.truncate(m);
    Ok(IrciTerm {
        xi,
        sufficient_cp: false,
    })
}

/// The `N × N` circulant channel matrix with first column
/// `[d_0 … d_{M−1} 0 … 0]ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantChannel {
    first_column: Vec<Complex64>,
}

impl CirculantChannel {
    pub fn size(&self) -> usize {
        self.first_column.len()
    }

    /// `H[i][j] = h[(i − j) mod N]`.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let n = self.size();
        self.first_column[(i + n - j % n) % n]
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.size();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

/// Circulant matrix of `d` zero-padded to `N`. Intended for test oracles.
pub fn build_circulant(d: &[Complex64], n: usize) -> Result<CirculantChannel> {
    if d.is_empty() || n < d.len() {
        return Err(Error::InvalidInput(format!(
            "circulant needs 1 <= M <= N (N = {n}, M = {})",
            d.len()
        )));
    }
    let mut first_column = vec![Complex64::new(0.0, 0.0); n];
    first_column[..d.len()].copy_from_slice(d);
    Ok(CirculantChannel { first_column })
}

/// Cross-correlation `c_k = Σ_i u_{i+k}·conj(r_i)` over the full-overlap
/// lags `k = 0 ..= |u| − |r|`.
pub fn matched_filter_compress(u: &[Complex64], reference: &[Complex64]) -> Result<Vec<Complex64>> {
    if u.is_empty() || reference.is_empty() {
        return Err(Error::InvalidInput("matched filter inputs must be non-empty".into()));
    }
    if u.len() < reference.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: u.len(),
        });
    }
    let kernel: Vec<Complex64> = reference.iter().rev().map(|r| r.conj()).collect();
    let full = fft::convolve(u, &kernel);
    Ok(full[reference.len() - 1..u.len()].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::{simulate_echo_line, WeightingCoefficients};
    use crate::waveform::{constant_weights, lfm_pulse, ofdm_periodic, ofdm_pulse, pn_weights, Pulse};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_d(m: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = crate::rng::noise_rng(seed, 99);
        (0..m).map(|_| crate::rng::complex_gaussian(&mut rng, 1.0)).collect()
    }

    fn echo(pulse: &Pulse, d: &[Complex64]) -> Vec<Complex64> {
        simulate_echo_line(pulse, &WeightingCoefficients::new(d.to_vec()), 0.0, 0)
            .unwrap()
            .into_samples()
    }

    #[test]
    fn single_target_identity() {
        let w = pn_weights(512, 3).unwrap();
        let pulse = ofdm_pulse(&w, 95).unwrap();
        let mut d = vec![c(0.0, 0.0); 96];
        d[0] = c(1.0, 0.0);
        let est = cp_ofdm_range_compress(&echo(&pulse, &d), &w, 96, 95, true).unwrap();
        assert!(est.gain_normalized);
        assert!((est.d_hat[0] - c(1.0, 0.0)).norm() < 1e-12);
        for x in &est.d_hat[1..] {
            assert!(x.norm() < 1e-12, "{x}");
        }
    }

    #[test]
    fn raw_output_carries_sqrt_n_gain() {
        let w = pn_weights(64, 1).unwrap();
        let pulse = ofdm_pulse(&w, 9).unwrap();
        let d = random_d(10, 5);
        let est = cp_ofdm_range_compress(&echo(&pulse, &d), &w, 10, 9, false).unwrap();
        for (a, b) in est.d_hat.iter().zip(&d) {
            assert!((a - b * 8.0).norm() < 1e-10);
        }
    }

    #[test]
    fn length_and_weight_errors() {
        let w = pn_weights(16, 1).unwrap();
        let u = vec![c(0.0, 0.0); 10];
        assert!(matches!(
            cp_ofdm_range_compress(&u, &w, 4, 3, true),
            Err(Error::LengthMismatch { expected: 22, actual: 10 })
        ));

        let mut s = vec![c(1.0, 0.0); 8];
        s[5] = c(1e-14, 0.0);
        let w = WeightVector::normalized(s).unwrap();
        let u = vec![c(0.0, 0.0); 8 + 3 + 3];
        assert!(matches!(
            cp_ofdm_range_compress(&u, &w, 4, 3, true),
            Err(Error::NonInvertibleWeight { index: 5, .. })
        ));
    }

    #[test]
    fn delta_pulse_is_a_valid_ofdm_pulse() {
        let w = constant_weights(32).unwrap();
        let pulse = ofdm_pulse(&w, 7).unwrap();
        let d = random_d(8, 2);
        let est = cp_ofdm_range_compress(&echo(&pulse, &d), &w, 8, 7, true).unwrap();
        for (a, b) in est.d_hat.iter().zip(&d) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fold_oracle_examples() {
        let mut d = vec![c(0.0, 0.0); 11];
        d[8] = c(1.0, 0.0);
        let f = cp_ofdm_fold_oracle(&d, 8).unwrap();
        assert_eq!(f[0], c(1.0, 0.0));
        assert!(f[1..].iter().all(|x| *x == c(0.0, 0.0)));

        let f = cp_ofdm_fold_oracle(&vec![c(1.0, 0.0); 16], 8).unwrap();
        assert!(f.iter().all(|x| *x == c(2.0, 0.0)));

        assert!(cp_ofdm_fold_oracle(&d, 11).is_err());
    }

    #[test]
    fn folded_pipeline_matches_oracle() {
        let (n, m) = (8, 11);
        let w = pn_weights(n, 21).unwrap();
        let pulse_samples = ofdm_periodic(&w, n + m - 1);
        let pulse = Pulse {
            kind: crate::waveform::PulseKind::CpOfdm,
            samples: crate::model::ComplexSequence::new(pulse_samples, 1.0).unwrap(),
            core_len: n,
            cp_len: m - 1,
        };
        let d = random_d(m, 8);
        let est = cp_ofdm_range_compress(&echo(&pulse, &d), &w, m, m - 1, false).unwrap();
        assert_eq!(est.d_hat.len(), n);
        let folded = cp_ofdm_fold_oracle(&d, n).unwrap();
        for (a, b) in est.d_hat.iter().zip(&folded) {
            assert!((a - b * (n as f64).sqrt()).norm() < 1e-10);
        }
    }

    #[test]
    fn irci_zero_cases() {
        let w = pn_weights(64, 1).unwrap();
        let d = random_d(16, 3);
        let t = irci_oracle(&d, &w, 15).unwrap();
        assert!(t.sufficient_cp);
        assert!(t.xi.iter().all(|x| *x == c(0.0, 0.0)));

        // one short of sufficient: only d_{M−1} is truncated, so a target
        // confined to cell 0 sees no IRCI
        let mut d0 = vec![c(0.0, 0.0); 16];
        d0[0] = c(1.0, -1.0);
        let t = irci_oracle(&d0, &w, 14).unwrap();
        assert!(!t.sufficient_cp);
        assert!(t.xi.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn irci_identity_small() {
        let (n, m) = (32, 12);
        let w = pn_weights(n, 4).unwrap();
        let d = random_d(m, 6);
        for cp in [0, 3, 10] {
            let pulse = ofdm_pulse(&w, cp).unwrap();
            let est = cp_ofdm_range_compress(&echo(&pulse, &d), &w, m, cp, false).unwrap();
            let xi = irci_oracle(&d, &w, cp).unwrap().xi;
            for k in 0..m {
                let expect = d[k] * (n as f64).sqrt() - xi[k];
                assert!((est.d_hat[k] - expect).norm() < 1e-10, "cp {cp} cell {k}");
            }
        }
    }

    #[test]
    fn circulant_structure() {
        let h = build_circulant(&[c(1.0, 0.0)], 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(h.get(i, j), if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
            }
        }

        let (a, b) = (c(2.0, 1.0), c(-1.0, 3.0));
        let h = build_circulant(&[a, b], 4).unwrap().to_dense();
        let z = c(0.0, 0.0);
        assert_eq!(h[0], vec![a, z, z, b]);
        assert_eq!(h[1], vec![b, a, z, z]);
        assert_eq!(h[2], vec![z, b, a, z]);
        assert_eq!(h[3], vec![z, z, b, a]);

        assert!(build_circulant(&[a, b, a], 2).is_err());
    }

    #[test]
    fn circulant_eigenvalues_are_channel_dft() {
        let n = 16;
        let d = random_d(5, 12);
        let h = build_circulant(&d, n).unwrap();
        // F·H·F⁻¹ is diagonal with D_k = Σ_m d_m e^{−j2πmk/N}
        for k in 0..n {
            let v: Vec<Complex64> = (0..n)
                .map(|i| Complex64::from_polar(1.0, 2.0 * PI * (k * i) as f64 / n as f64))
                .collect();
            let hv = h.apply(&v);
            let dk: Complex64 = d
                .iter()
                .enumerate()
                .map(|(m, x)| x * Complex64::from_polar(1.0, -2.0 * PI * (m * k) as f64 / n as f64))
                .sum();
            for i in 0..n {
                assert!((hv[i] - dk * v[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matched_filter_peaks() {
        let r: Vec<Complex64> = lfm_pulse(64, 1.0).unwrap().as_slice().to_vec();
        let out = matched_filter_compress(&r, &r).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0] - c(64.0, 0.0)).norm() < 1e-9);

        let mut u = vec![c(0.0, 0.0); 64 + 9];
        u[5..69].copy_from_slice(&r);
        let out = matched_filter_compress(&u, &r).unwrap();
        let peak = (0..out.len()).max_by(|&a, &b| out[a].norm().total_cmp(&out[b].norm())).unwrap();
        assert_eq!(peak, 5);

        assert!(matched_filter_compress(&[], &r).is_err());
        assert!(matched_filter_compress(&r[..3], &r).is_err());
    }

    #[test]
    fn lfm_matched_filter_has_sinc_sidelobes() {
        // a chirp over 90% of the sampling band; the sampled sinc response
        // keeps sidelobes far above the CP-OFDM floor
        let pulse = lfm_pulse(607, 0.9).unwrap();
        let mut d = vec![c(0.0, 0.0); 96];
        d[48] = c(1.0, 0.0);
        let out = matched_filter_compress(&echo(&pulse, &d), pulse.as_slice()).unwrap();
        let peak = out[48].norm();
        let side = out
            .iter()
            .enumerate()
            .filter(|(k, _)| k.abs_diff(48) > 1)
            .map(|(_, x)| x.norm())
            .fold(0.0, f64::max);
        let psl_db = 20.0 * (side / peak).log10();
        assert!(psl_db > -30.0, "PSL {psl_db} dB");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn exact_recovery(n in 4usize..96, m_frac in 0.05f64..1.0, seed in any::<u64>()) {
            let m = ((n as f64 * m_frac) as usize).clamp(1, n);
            let w = pn_weights(n, seed).unwrap();
            let pulse = ofdm_pulse(&w, m - 1).unwrap();
            let d = random_d(m, seed);
            let est = cp_ofdm_range_compress(&echo(&pulse, &d), &w, m, m - 1, false).unwrap();
            let scale = (n as f64).sqrt();
            let dmax = d.iter().map(|x| x.norm()).fold(0.0, f64::max);
            for (a, b) in est.d_hat.iter().zip(&d) {
                prop_assert!((a - b * scale).norm() <= 1e-9 * scale * dmax);
            }
        }

        #[test]
        fn irci_energy_grows_as_cp_shrinks(seed in any::<u64>()) {
            // ensemble over a few draws; compare cp against a shorter prefix
            let (n, m) = (64, 24);
            let mut energies = vec![0.0; m];
            for draw in 0..8u64 {
                let w = pn_weights(n, seed ^ draw).unwrap();
                let d = random_d(m, seed.wrapping_add(draw));
                for (cp, e) in energies.iter_mut().enumerate() {
                    let xi = irci_oracle(&d, &w, cp).unwrap().xi;
                    *e += xi.iter().map(|x| x.norm_sqr()).sum::<f64>();
                }
            }
            prop_assert!(energies[0] >= energies[m / 2]);
            prop_assert!(energies[m / 2] >= energies[m - 2]);
            prop_assert_eq!(energies[m - 1], 0.0);
        }
    }
}

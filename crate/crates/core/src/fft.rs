//! Thin wrappers over `rustfft` with unitary scaling.
//!
//! Planners are cached per thread, so every function here is safe to call
//! from rayon workers without locking.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT, `X_k = sum_n x_n e^{-j2πkn/N}`.
pub fn forward(buf: &mut [Complex64]) {
    if buf.len() <= 1 {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Unnormalized inverse DFT, `x_n = sum_k X_k e^{+j2πkn/N}`.
pub fn inverse(buf: &mut [Complex64]) {
    if buf.len() <= 1 {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
}

/// Forward DFT scaled by `1/sqrt(N)`.
pub fn forward_unitary(buf: &mut [Complex64]) {
    forward(buf);
    scale(buf, 1.0 / (buf.len() as f64).sqrt());
}

/// Inverse DFT scaled by `1/sqrt(N)`.
pub fn inverse_unitary(buf: &mut [Complex64]) {
    inverse(buf);
    scale(buf, 1.0 / (buf.len() as f64).sqrt());
}

fn scale(buf: &mut [Complex64], factor: f64) {
    for x in buf.iter_mut() {
        *x *= factor;
    }
}

/// Direct O(N²) unitary DFT. Used by the closed-form oracles so they do not
/// share a code path with the FFT pipeline they check.
pub fn naive_dft(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = x.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let norm = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            let acc: Complex64 = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| {
                    // reduce the exponent mod n before converting to keep the phase exact
                    let idx = (k * i) % n;
                    xi * Complex64::from_polar(1.0, sign * 2.0 * PI * idx as f64 / n as f64)
                })
                .sum();
            acc * norm
        })
        .collect()
}

/// Linear convolution of `a` and `b` via zero-padded FFT.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    let mut fb = vec![Complex64::new(0.0, 0.0); n];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    forward(&mut fa);
    forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inverse(&mut fa);
    let inv_n = 1.0 / n as f64;
    fa.truncate(out_len);
    scale(&mut fa, inv_n);
    fa
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unitary_round_trip() {
        let x: Vec<_> = (0..12).map(|i| c(i as f64, (i * i) as f64 * 0.1)).collect();
        let mut y = x.clone();
        forward_unitary(&mut y);
        inverse_unitary(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn naive_matches_fft() {
        let x: Vec<_> = (0..10).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        let mut y = x.clone();
        forward_unitary(&mut y);
        let z = naive_dft(&x, false);
        for (a, b) in y.iter().zip(&z) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn convolve_matches_direct() {
        let a = [c(1.0, 0.0), c(2.0, -1.0), c(0.5, 0.5)];
        let b = [c(0.0, 1.0), c(-1.0, 0.0)];
        let out = convolve(&a, &b);
        let mut direct = vec![c(0.0, 0.0); 4];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                direct[i + j] += x * y;
            }
        }
        for (p, q) in out.iter().zip(&direct) {
            assert!((p - q).norm() < 1e-12);
        }
    }
}

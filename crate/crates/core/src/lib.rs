//! Cyclic-prefix OFDM synthetic aperture radar: waveform generation, echo
//! simulation, IRCI-free range reconstruction, range-Doppler imaging and
//! the metrics used to compare it against LFM, noise and conventional OFDM.

pub mod azimuth;
pub mod echo;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod rangecomp;
pub mod rng;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

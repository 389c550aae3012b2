//! What a short cyclic prefix costs: the residual IRCI term computed
//! directly, checked against the receiver, and the `N < M` folding case.
//!
//! `cargo run --example insufficient_cp`

use ofdm_sar::echo::{simulate_echo_line, WeightingCoefficients};
use ofdm_sar::model::ComplexSequence;
use ofdm_sar::rangecomp::{cp_ofdm_fold_oracle, cp_ofdm_range_compress, irci_oracle};
use ofdm_sar::waveform::{ofdm_periodic, ofdm_pulse, pn_weights, Pulse, PulseKind};
use ofdm_sar::Complex64;

fn main() -> ofdm_sar::Result<()> {
    let (n, m) = (512, 96);
    let w = pn_weights(n, 2)?;
    let d: Vec<Complex64> = (0..m).map(|i| Complex64::from_polar(1.0, 0.37 * i as f64)).collect();
    let coeffs = WeightingCoefficients::new(d.clone());
    let gain = (n as f64).sqrt();

    println!("{:>4} {:>14} {:>16}", "cp", "|xi|^2 / M", "identity error");
    for cp in [95, 90, 80, 64, 32, 0] {
        let pulse = ofdm_pulse(&w, cp)?;
        let u = simulate_echo_line(&pulse, &coeffs, 0.0, 0)?;
        let est = cp_ofdm_range_compress(u.samples(), &w, m, cp, false)?;
        let xi = irci_oracle(&d, &w, cp)?.xi;
        let err = (0..m)
            .map(|k| (est.d_hat[k] - (d[k] * gain - xi[k])).norm())
            .fold(0.0, f64::max);
        let irci = xi.iter().map(|x| x.norm_sqr()).sum::<f64>() / m as f64;
        println!("{cp:>4} {irci:>14.6e} {err:>16.3e}");
    }

    // N < M: fewer subcarriers than range cells folds the swath modulo N
    let (n, m) = (8, 11);
    let w = pn_weights(n, 5)?;
    let pulse = Pulse {
        kind: PulseKind::CpOfdm,
        samples: ComplexSequence::new(ofdm_periodic(&w, n + m - 1), 1.0)?,
        core_len: n,
        cp_len: m - 1,
    };
    let d: Vec<Complex64> = (0..m).map(|i| Complex64::new(i as f64, 0.0)).collect();
    let u = simulate_echo_line(&pulse, &WeightingCoefficients::new(d.clone()), 0.0, 0)?;
    let est = cp_ofdm_range_compress(u.samples(), &w, m, m - 1, true)?;
    let folded = cp_ofdm_fold_oracle(&d, n)?;
    println!("\nN = {n}, M = {m}");
    for (k, (e, f)) in est.d_hat.iter().zip(&folded).enumerate() {
        println!("  cell {k}: estimate {:>7.3}, folded truth {:>5.1}", e.re, f.re);
    }
    Ok(())
}

//! Subcarrier weight families and the pulses built from them: energy,
//! PAPR, and the cyclic-prefix structure.
//!
//! `cargo run --example waveforms`

use ofdm_sar::waveform::{
    constant_weights, lfm_pulse, noise_pulse, ofdm_pulse, papr, pn_weights, zadoff_chu_weights,
};

fn main() -> ofdm_sar::Result<()> {
    let n = 512;
    let cp = 95;

    println!("{:<22} {:>10} {:>10}", "weights (N = 512)", "energy", "PAPR");
    for (name, w) in [
        ("PN (seed 1)", pn_weights(n, 1)?),
        ("Zadoff-Chu (root 1)", zadoff_chu_weights(n, 1)?),
        ("constant", constant_weights(n)?),
    ] {
        let pulse = ofdm_pulse(&w, cp)?;
        let core = &pulse.as_slice()[..n];
        let energy: f64 = core.iter().map(|x| x.norm_sqr()).sum();
        println!("{name:<22} {energy:>10.6} {:>10.3}", papr(core)?);
        assert_eq!(&pulse.as_slice()[n..], &pulse.as_slice()[..cp]);
    }

    println!();
    for (name, pulse) in [("LFM", lfm_pulse(n + cp, 1.0)?), ("noise", noise_pulse(n + cp, 3)?)] {
        println!(
            "{name:<6} {} samples, energy {:.3}, PAPR {:.3}",
            pulse.len(),
            pulse.energy(),
            papr(pulse.as_slice())?
        );
    }
    Ok(())
}

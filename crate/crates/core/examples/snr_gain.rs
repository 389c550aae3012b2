//! Range-compression SNR gain of each branch against its theoretical value.
//!
//! `cargo run --release --example snr_gain`

use ofdm_sar::azimuth::Branch;
use ofdm_sar::experiments::expected_gain_db;
use ofdm_sar::metrics::snr_gain;
use ofdm_sar::model::RadarParams;

fn main() -> ofdm_sar::Result<()> {
    let params = RadarParams::reference();
    for branch in Branch::ALL {
        let g = snr_gain(&params, branch, 200, 9, 1.0)?;
        println!(
            "{:<18} measured {:>7.3} dB   expected {:>7.3} dB",
            branch.name(),
            g.gain_db,
            expected_gain_db(branch, &params)
        );
    }
    Ok(())
}

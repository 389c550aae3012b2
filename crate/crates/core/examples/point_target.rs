//! Point-spread function of the four waveform branches: one unit scatterer
//! at the swath centre imaged through the full range-Doppler chain.
//!
//! `cargo run --release --example point_target`

use ofdm_sar::azimuth::{form_image, Branch};
use ofdm_sar::echo::Aperture;
use ofdm_sar::metrics::{extract_profiles, mainlobe_width_3db, peak_sidelobe_level};
use ofdm_sar::model::{derive_timings, RadarParams, Scene};

fn main() -> ofdm_sar::Result<()> {
    let params = RadarParams::reference();
    let timings = derive_timings(&params);
    let aperture = Aperture::subsampled(&params, 256);
    let scene = Scene::point_at_center(&params, &timings);

    println!(
        "{:<18} {:>12} {:>10} {:>12} {:>10}",
        "branch", "range PSL", "width", "azimuth PSL", "width"
    );
    for branch in Branch::ALL {
        let img = form_image(&scene, branch, &params, &timings, &aperture, 0.0, 1)?;
        let (range, azimuth) = extract_profiles(&img)?;
        println!(
            "{:<18} {:>9.1} dB {:>10.3} {:>9.1} dB {:>10.3}",
            branch.name(),
            peak_sidelobe_level(&range)?,
            mainlobe_width_3db(&range)?,
            peak_sidelobe_level(&azimuth)?,
            mainlobe_width_3db(&azimuth)?,
        );
    }
    Ok(())
}

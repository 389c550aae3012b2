//! Loads a scene from JSON, images it with CP-OFDM and reports where each
//! scatterer landed.
//!
//! `cargo run --release --example custom_scene`

use ofdm_sar::azimuth::{form_image, Branch};
use ofdm_sar::echo::Aperture;
use ofdm_sar::model::{derive_timings, RadarParams, Scene};

const SCENE: &str = r#"{
  "scatterers": [
    {"x": 4990.0, "y": -12.0, "amplitude": 1.0},
    {"x": 5000.0, "y":   0.0, "amplitude": 0.6, "phase_deg": 90},
    {"x": 5015.0, "y":   9.0, "amplitude": 0.8}
  ]
}"#;

fn main() -> ofdm_sar::Result<()> {
    let params = RadarParams::reference();
    let timings = derive_timings(&params);
    let scene = Scene::from_json_str(SCENE, &params, &timings)?;
    let cells = scene.cell_indices(&params, &timings)?;
    let aperture = Aperture::subsampled(&params, 256);
    let img = form_image(&scene, Branch::CpOfdm, &params, &timings, &aperture, 0.0, 0)?;
    let peak = img.data.max_abs();
    for (s, &cell) in scene.scatterers.iter().zip(&cells) {
        let row = img.row_of_azimuth(s.y).expect("inside the aperture");
        let level = 20.0 * (img.data.get(row, cell).norm() / peak).log10();
        println!(
            "x {:>7.1} m, y {:>6.1} m -> row {row:>3}, cell {cell:>2}, {level:>6.1} dB",
            s.x, s.y
        );
    }
    Ok(())
}

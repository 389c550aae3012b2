//! Images the built-in tank silhouette with every branch and writes PGM
//! quicklooks and SARF rasters.
//!
//! `cargo run --release --example tank_image -- [out_dir]`

use std::path::PathBuf;

use ofdm_sar::experiments::{image_experiment, ExperimentConfig};
use ofdm_sar::io::{write_pgm, write_sarf};

fn main() -> ofdm_sar::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out/tank"));
    let cfg = ExperimentConfig {
        out: out.clone(),
        seed: 4,
        ..ExperimentConfig::default()
    };
    let scene = cfg.load_scene("tank")?;
    println!("{} scatterers, {} pulses", scene.scatterers.len(), cfg.pulses);

    let (truth, runs) = image_experiment(&cfg, &scene)?;
    write_pgm(&out.join("truth.pgm"), &truth)?;
    for run in &runs {
        write_pgm(&out.join(format!("{}.pgm", run.label)), &run.image.data)?;
        write_sarf(&out.join(format!("{}.sarf", run.label)), &run.image.data)?;
        println!("{:<18} image mse {:.4e}", run.label, run.mse);
    }
    println!("quicklooks in {}", out.display());
    Ok(())
}

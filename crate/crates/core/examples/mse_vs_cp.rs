//! Monte Carlo reconstruction error of a uniform range line as the cyclic
//! prefix shrinks, for two swath sizes.
//!
//! `cargo run --release --example mse_vs_cp`

use ofdm_sar::experiments::default_cp_grid;
use ofdm_sar::metrics::{mse_vs_cp, MseMode};
use ofdm_sar::model::RadarParams;

fn main() -> ofdm_sar::Result<()> {
    for m in [32, 96] {
        let mut params = RadarParams::reference();
        params.num_range_cells = m;
        params.cp_len = m - 1;
        let curve = mse_vs_cp(&params, &default_cp_grid(m), 200, 1, MseMode::SingleLine)?;
        println!("M = {m}");
        for (cp, mse) in curve.cp_lengths.iter().zip(&curve.mse) {
            println!("  cp {cp:>3}  {mse:>10.3e}");
        }
        let chain = mse_vs_cp(&params, &[m - 1], 1, 1, MseMode::FullChain { pulses: 256 })?;
        println!("  full chain at cp {}: {:.3e}\n", m - 1, chain.mse[0]);
    }
    Ok(())
}

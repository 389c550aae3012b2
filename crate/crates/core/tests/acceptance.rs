//! Acceptance criteria 1–10. Runs as a plain binary so every criterion
//! reports one PASS/FAIL line; exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use ofdm_sar::azimuth::{form_image, Branch};
use ofdm_sar::echo::{simulate_echo_line, Aperture, WeightingCoefficients};
use ofdm_sar::experiments::{default_cp_grid, range_line_experiment, sparse_range_line};
use ofdm_sar::metrics::{
    extract_profiles, mainlobe_bounds, mainlobe_width_3db, mse_vs_cp, peak_sidelobe_level, snr_gain, MseMode,
};
use ofdm_sar::model::{derive_timings, ComplexSequence, RadarParams, Scene};
use ofdm_sar::rangecomp::{build_circulant, cp_ofdm_fold_oracle, cp_ofdm_range_compress, irci_oracle};
use ofdm_sar::rng::{complex_gaussian, noise_rng};
use ofdm_sar::waveform::{
    constant_weights, ofdm_periodic, ofdm_pulse, papr, pn_weights, weights_from_signal, zadoff_chu_weights, Pulse,
    PulseKind, WeightVector,
};
use ofdm_sar::Complex64;
use rand::Rng;

// Tolerances and budgets, one per criterion.
const EXACT_RECOVERY_REL: f64 = 1e-9;
const EXACT_RECOVERY_BUDGET: Duration = Duration::from_secs(10);
const EMPTY_CELL_DB: f64 = -250.0;
const EMPTY_CELL_BUDGET: Duration = Duration::from_secs(1);
const CP_OFDM_PSL_DB: f64 = -250.0;
const BASELINE_PSL_DB: f64 = -40.0;
const WIDTH_SPREAD_SAMPLES: f64 = 1.0;
const AZIMUTH_RMS_DB: f64 = 0.5;
const PSF_BUDGET: Duration = Duration::from_secs(120);
const PSF_PULSES: usize = 256;
const SNR_TOL_DB: f64 = 0.5;
const SNR_TRIALS: usize = 200;
const IRCI_IDENTITY_ABS: f64 = 1e-9;
const MSE_SUFFICIENT_CP: f64 = 1e-18;
const MSE_TRIALS: usize = 200;
const FOLD_ABS: f64 = 1e-10;
const DENSE_ABS: f64 = 1e-10;
const PARSEVAL_ABS: f64 = 1e-9;
const ZC_PAPR_ABS: f64 = 1e-9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn gaussian_vec(len: usize, seed: u64, stream: u64) -> Vec<Complex64> {
    let mut rng = noise_rng(seed, stream);
    (0..len).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
}

fn noiseless_echo(pulse: &Pulse, d: &[Complex64]) -> Vec<Complex64> {
    simulate_echo_line(pulse, &WeightingCoefficients::new(d.to_vec()), 0.0, 0)
        .unwrap()
        .into_samples()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = noise_rng(101, 0);
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let n = rng.random_range(4..=256usize);
        let m = rng.random_range(4..=n);
        let w = if i % 2 == 0 {
            pn_weights(n, i).unwrap()
        } else {
            let root = (1..n).filter(|r| gcd(*r, n) == 1).nth(rng.random_range(0..4usize)).unwrap_or(1);
            zadoff_chu_weights(n, root).unwrap()
        };
        let d = gaussian_vec(m, 1, i);
        let pulse = ofdm_pulse(&w, m - 1).unwrap();
        let est = cp_ofdm_range_compress(&noiseless_echo(&pulse, &d), &w, m, m - 1, false).unwrap();
        let scale = (n as f64).sqrt();
        let dmax = d.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for (a, b) in est.d_hat.iter().zip(&d) {
            worst = worst.max((a - b * scale).norm() / (scale * dmax));
        }
    }
    let took = start.elapsed();
    check(
        worst <= EXACT_RECOVERY_REL && took < EXACT_RECOVERY_BUDGET,
        format!("worst relative error {worst:.2e}, {took:.2?}"),
        format!("worst relative error {worst:.2e} (limit {EXACT_RECOVERY_REL:e}), {took:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let p = RadarParams::reference();
    let t = derive_timings(&p);
    let scene = sparse_range_line(&p, &t, 18, 1);
    let res = range_line_experiment(&scene, &p, &[95], 0.0, 1).map_err(|e| e.to_string())?;
    let occupied = res[0].truth.iter().filter(|x| x.norm() > 0.0).count();
    let empty = res[0].empty_cell_max_db().map_err(|e| e.to_string())?;
    let took = start.elapsed();
    check(
        empty < EMPTY_CELL_DB && occupied == 18 && took < EMPTY_CELL_BUDGET,
        format!("{occupied} occupied cells, strongest empty cell {empty:.1} dB, {took:.2?}"),
        format!("{occupied} occupied cells, strongest empty cell {empty:.1} dB (limit {EMPTY_CELL_DB}), {took:.2?}"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let p = RadarParams::reference();
    let t = derive_timings(&p);
    let aperture = Aperture::subsampled(&p, PSF_PULSES);
    let scene = Scene::point_at_center(&p, &t);
    let mut stats = Vec::new();
    for b in Branch::ALL {
        let img = form_image(&scene, b, &p, &t, &aperture, 0.0, 1).map_err(|e| e.to_string())?;
        let (r, a) = extract_profiles(&img).map_err(|e| e.to_string())?;
        let psl = peak_sidelobe_level(&r).map_err(|e| e.to_string())?;
        let width = mainlobe_width_3db(&r).map_err(|e| e.to_string())?;
        stats.push((b, psl, width, a));
    }
    let mut problems = Vec::new();
    for (b, psl, _, _) in &stats {
        let ok = if *b == Branch::CpOfdm { *psl < CP_OFDM_PSL_DB } else { *psl > BASELINE_PSL_DB };
        if !ok {
            problems.push(format!("{b} range PSL {psl:.1} dB"));
        }
    }
    let widths: Vec<f64> = stats.iter().map(|s| s.2).collect();
    let spread = widths.iter().cloned().fold(f64::MIN, f64::max) - widths.iter().cloned().fold(f64::MAX, f64::min);
    if spread > WIDTH_SPREAD_SAMPLES {
        problems.push(format!("range width spread {spread:.3}"));
    }
    let reference = &stats[0].3;
    let (lo, hi) = mainlobe_bounds(reference).map_err(|e| e.to_string())?;
    let mut worst_rms: f64 = 0.0;
    for (_, _, _, a) in &stats[1..] {
        let ms = (lo..=hi).map(|i| (a.db[i] - reference.db[i]).powi(2)).sum::<f64>() / (hi - lo + 1) as f64;
        worst_rms = worst_rms.max(ms.sqrt());
    }
    if worst_rms > AZIMUTH_RMS_DB {
        problems.push(format!("azimuth mainlobe RMS difference {worst_rms:.3} dB"));
    }
    let took = start.elapsed();
    if took >= PSF_BUDGET {
        problems.push(format!("took {took:.2?}"));
    }
    let detail: Vec<String> = stats.iter().map(|(b, psl, w, _)| format!("{b} {psl:.1} dB/{w:.3}")).collect();
    check(
        problems.is_empty(),
        format!("{}; azimuth RMS {worst_rms:.2e} dB; {took:.2?}", detail.join(", ")),
        problems.join("; "),
    )
}

fn criterion_4() -> Outcome {
    let p = RadarParams::reference();
    let ofdm = snr_gain(&p, Branch::CpOfdm, SNR_TRIALS, 4, 1.0).map_err(|e| e.to_string())?;
    let lfm = snr_gain(&p, Branch::Lfm, SNR_TRIALS, 4, 1.0).map_err(|e| e.to_string())?;
    let want_ofdm = 10.0 * 512f64.log10();
    let want_lfm = 10.0 * 607f64.log10();
    let msg = format!(
        "CP-OFDM {:.3} dB (want {want_ofdm:.3}), LFM {:.3} dB (want {want_lfm:.3})",
        ofdm.gain_db, lfm.gain_db
    );
    check(
        (ofdm.gain_db - want_ofdm).abs() <= SNR_TOL_DB && (lfm.gain_db - want_lfm).abs() <= SNR_TOL_DB,
        msg.clone(),
        msg,
    )
}

fn criterion_5() -> Outcome {
    let (n, m) = (512, 96);
    let gain = (n as f64).sqrt();
    let mut worst: f64 = 0.0;
    for cp in [0usize, 32, 80] {
        for draw in 0..50u64 {
            let w = pn_weights(n, draw).unwrap();
            let d = gaussian_vec(m, 5, draw);
            let pulse = ofdm_pulse(&w, cp).unwrap();
            let est = cp_ofdm_range_compress(&noiseless_echo(&pulse, &d), &w, m, cp, false).unwrap();
            let xi = irci_oracle(&d, &w, cp).unwrap().xi;
            for k in 0..m {
                worst = worst.max((est.d_hat[k] - (d[k] * gain - xi[k])).norm());
            }
        }
    }
    check(
        worst <= IRCI_IDENTITY_ABS,
        format!("worst |d_hat - (sqrtN d - xi)| = {worst:.2e} over 150 cases"),
        format!("worst error {worst:.2e} (limit {IRCI_IDENTITY_ABS:e})"),
    )
}

fn criterion_6() -> Outcome {
    let mut problems = Vec::new();
    let mut chain = Vec::new();
    let mut notes = Vec::new();
    for m in [32usize, 96] {
        let mut p = RadarParams::reference();
        p.num_range_cells = m;
        p.cp_len = m - 1;
        let curve = mse_vs_cp(&p, &default_cp_grid(m), MSE_TRIALS, 6, MseMode::SingleLine).map_err(|e| e.to_string())?;
        if !curve.is_non_increasing(0.0) {
            problems.push(format!("M={m} curve not non-increasing: {:?}", curve.mse));
        }
        let last = *curve.mse.last().unwrap();
        if last >= MSE_SUFFICIENT_CP {
            problems.push(format!("M={m} MSE at cp={} is {last:.2e}", m - 1));
        }
        let full = mse_vs_cp(&p, &[m - 1], 1, 6, MseMode::FullChain { pulses: PSF_PULSES }).map_err(|e| e.to_string())?;
        chain.push(full.mse[0]);
        notes.push(format!("M={m}: cp0 {:.2e}, cp{} {last:.1e}, chain {:.2e}", curve.mse[0], m - 1, full.mse[0]));
    }
    if chain[1] < chain[0] {
        problems.push(format!("full chain MSE(96) {:.2e} < MSE(32) {:.2e}", chain[1], chain[0]));
    }
    check(problems.is_empty(), notes.join("; "), problems.join("; "))
}

fn criterion_7() -> Outcome {
    let (n, m) = (8, 11);
    let gain = (n as f64).sqrt();
    let mut worst: f64 = 0.0;
    for draw in 0..50u64 {
        let w = pn_weights(n, 70 + draw).unwrap();
        let pulse = Pulse {
            kind: PulseKind::CpOfdm,
            samples: ComplexSequence::new(ofdm_periodic(&w, n + m - 1), 1.0).unwrap(),
            core_len: n,
            cp_len: m - 1,
        };
        let d = gaussian_vec(m, 7, draw);
        let est = cp_ofdm_range_compress(&noiseless_echo(&pulse, &d), &w, m, m - 1, false).unwrap();
        let folded = cp_ofdm_fold_oracle(&d, n).unwrap();
        for (a, b) in est.d_hat.iter().zip(&folded) {
            worst = worst.max((a - b * gain).norm());
        }
    }
    check(
        worst <= FOLD_ABS,
        format!("worst |d_hat - sqrtN fold(d)| = {worst:.2e} over 50 draws"),
        format!("worst error {worst:.2e} (limit {FOLD_ABS:e})"),
    )
}

/// Kept receive window `y = V·d`, `V` circulant in the prefix-rotated pulse
/// core; solved densely by LU.
fn dense_solve(w: &WeightVector, cp: usize, y: &[Complex64]) -> Vec<Complex64> {
    let n = w.len();
    let s = w.time_samples();
    let v: Vec<Complex64> = (0..n).map(|i| s[(cp + i) % n]).collect();
    let h = build_circulant(&v, n).unwrap();
    let a = DMatrix::from_fn(n, n, |i, j| h.get(i, j));
    let b = DVector::from_column_slice(y);
    a.lu().solve(&b).expect("circulant of a constant-modulus spectrum is invertible").as_slice().to_vec()
}

fn criterion_8() -> Outcome {
    let mut rng = noise_rng(808, 0);
    let mut worst: f64 = 0.0;
    for i in 0..60u64 {
        let n = rng.random_range(2..=32usize);
        let m = rng.random_range(1..=n);
        let w = pn_weights(n, 800 + i).unwrap();
        let d = gaussian_vec(m, 8, i);
        let pulse = ofdm_pulse(&w, m - 1).unwrap();
        let u = noiseless_echo(&pulse, &d);
        let est = cp_ofdm_range_compress(&u, &w, m, m - 1, true).unwrap();
        let dense = dense_solve(&w, m - 1, &u[m - 1..m - 1 + n]);
        for (k, x) in dense.iter().enumerate() {
            let pipeline = est.d_hat.get(k).copied().unwrap_or_default();
            worst = worst.max((pipeline - x).norm());
        }
    }
    check(
        worst <= DENSE_ABS,
        format!("worst |pipeline - dense LU| = {worst:.2e} over 60 systems"),
        format!("worst error {worst:.2e} (limit {DENSE_ABS:e})"),
    )
}

fn criterion_9() -> Outcome {
    let mut problems = Vec::new();
    let mut worst_parseval: f64 = 0.0;
    for n in [1usize, 2, 7, 64, 333, 512, 1024] {
        let mut family = vec![pn_weights(n, n as u64).unwrap(), constant_weights(n).unwrap()];
        family.push(zadoff_chu_weights(n, 1).unwrap());
        let arbitrary = ComplexSequence::new(gaussian_vec(n, 9, n as u64), 1.0).unwrap();
        family.push(weights_from_signal(&arbitrary).unwrap());
        for w in &family {
            let e: f64 = ofdm_pulse(w, 0).unwrap().as_slice().iter().map(|x| x.norm_sqr()).sum();
            worst_parseval = worst_parseval.max((e - n as f64).abs());
        }
    }
    if worst_parseval > PARSEVAL_ABS {
        problems.push(format!("Parseval error {worst_parseval:.2e}"));
    }
    let mut worst_zc: f64 = 0.0;
    for (n, root) in [(512, 1), (512, 3), (127, 5), (96, 7), (1000, 9)] {
        let w = zadoff_chu_weights(n, root).unwrap();
        worst_zc = worst_zc.max((papr(&w.time_samples()).unwrap() - 1.0).abs());
    }
    if worst_zc > ZC_PAPR_ABS {
        problems.push(format!("Zadoff-Chu PAPR off by {worst_zc:.2e}"));
    }
    let constant = papr(&constant_weights(512).unwrap().time_samples()).unwrap();
    if constant != 512.0 {
        problems.push(format!("constant-weight PAPR {constant}"));
    }
    check(
        problems.is_empty(),
        format!("Parseval {worst_parseval:.1e}, ZC PAPR error {worst_zc:.1e}, constant PAPR {constant}"),
        problems.join("; "),
    )
}

fn run_cli(cmd: &str, config: &Path, out: &Path, threads: &str) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_ofdm-sar"))
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--trials", "20"])
        .env("SAR_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!("{cmd}: {}", String::from_utf8_lossy(&status.stderr)))
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference.json");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    let mut problems = Vec::new();
    for cmd in ["psf", "rangeline", "image", "mse-cp", "snr-gain"] {
        let runs: Vec<_> = [("1", "a"), ("1", "b"), ("4", "c")]
            .iter()
            .map(|(threads, tag)| {
                let out = tmp.path().join(format!("{cmd}-{tag}"));
                run_cli(cmd, &config, &out, threads).map(|_| snapshot(&out))
            })
            .collect::<Result<_, _>>()?;
        if runs[0].is_empty() {
            problems.push(format!("{cmd} wrote nothing"));
        }
        for other in &runs[1..] {
            if other != &runs[0] {
                problems.push(format!("{cmd} outputs differ between runs"));
            }
        }
        compared += runs[0].len();
    }
    check(
        problems.is_empty(),
        format!("{compared} files byte-identical across reruns and SAR_THREADS 1/4"),
        problems.join("; "),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact recovery with sufficient prefix", criterion_1),
        ("empty-cell floor on the 18-target range line", criterion_2),
        ("point-spread function comparison", criterion_3),
        ("range-compression SNR gain", criterion_4),
        ("insufficient-prefix IRCI identity", criterion_5),
        ("MSE against prefix length", criterion_6),
        ("N < M folding", criterion_7),
        ("dense circulant oracle", criterion_8),
        ("waveform invariants", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

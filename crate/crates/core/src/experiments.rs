//! Experiment drivers behind the command-line tool. Each `cmd_*` is a pure
//! function of its [`ExperimentConfig`]: same config, same bytes on disk.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::azimuth::{form_image, Branch, ImageMatrix};
use crate::echo::{simulate_echo_line, weighting_coefficients, Aperture};
use crate::error::{Error, Result};
use crate::io::{write_pgm, write_sarf, Cell, Csv};
use crate::matrix::ComplexMatrix;
use crate::metrics::{
    extract_profiles, image_mse, mainlobe_width_3db, mse_vs_cp, peak_sidelobe_level, render_truth, snr_gain,
    uniform_range_scene, MseMode, Profile, DB_FLOOR,
};
use crate::model::{
    derive_timings, ground_range_of_cell, scene_to_range_line, validate_params, DerivedTimings, ParamWarning,
    RadarParams, Scatterer, Scene,
};
use crate::rangecomp::{cp_ofdm_range_compress, matched_filter_compress};
use crate::rng::noise_rng;
use crate::waveform::{ofdm_pulse, pn_weights};

const TANK: &str = include_str!("../assets/tank.json");

/// Occupied cells in the built-in sparse range line.
pub const RANGELINE_TARGETS: usize = 18;

fn default_pulses() -> usize {
    256
}

fn default_range_cells_list() -> Vec<usize> {
    vec![32, 96]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// JSON experiment description. Every key is optional.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "RadarParams::reference")]
    pub radar: RadarParams,
    /// Restricts multi-branch commands to one branch.
    #[serde(default)]
    pub branch: Option<Branch>,
    /// `point`, `tank`, `rangeline18`, `uniform`, or a scene file path.
    #[serde(default)]
    pub scene: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub cp_list: Option<Vec<usize>>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Slow-time samples used for imaging.
    #[serde(default = "default_pulses")]
    pub pulses: usize,
    #[serde(default = "default_range_cells_list")]
    pub range_cells_list: Vec<usize>,
    /// Directory relative scene paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            Error::Config(format!(
                "line {}, column {}: field `{}`: {}",
                inner.line(),
                inner.column(),
                e.path(),
                inner
            ))
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Validates the radar block; returns its warnings.
    pub fn validate(&self) -> Result<Vec<ParamWarning>> {
        validate_params(&self.radar).into_result()
    }

    fn timings(&self) -> DerivedTimings {
        derive_timings(&self.radar)
    }

    fn branches(&self) -> Vec<Branch> {
        match self.branch {
            Some(b) => vec![b],
            None => Branch::ALL.to_vec(),
        }
    }

    fn aperture(&self) -> Aperture {
        Aperture::subsampled(&self.radar, self.pulses)
    }

    /// Resolves the configured scene, falling back to `default`.
    pub fn load_scene(&self, default: &str) -> Result<Scene> {
        let name = self.scene.as_deref().unwrap_or(default);
        let timings = self.timings();
        builtin_scene(name, &self.radar, &timings, self.seed).unwrap_or_else(|| {
            let path = self.base_dir.join(name);
            Scene::from_json_file(&path, &self.radar, &timings)
        })
    }
}

/// A built-in scene by name, or `None` if `name` is not one.
pub fn builtin_scene(name: &str, params: &RadarParams, timings: &DerivedTimings, seed: u64) -> Option<Result<Scene>> {
    match name {
        "point" => Some(Ok(Scene::point_at_center(params, timings))),
        "tank" => Some(Scene::from_json_str(TANK, params, timings)),
        "rangeline18" => Some(Ok(sparse_range_line(params, timings, RANGELINE_TARGETS, seed))),
        "uniform" => Some(Ok(uniform_range_scene(params, timings))),
        _ => None,
    }
}

/// `count` scatterers at azimuth 0 in distinct random cells, amplitudes
/// uniform in `[0.2, 1)`.
pub fn sparse_range_line(params: &RadarParams, timings: &DerivedTimings, count: usize, seed: u64) -> Scene {
    use rand::seq::index::sample;
    use rand::Rng;
    let m = params.num_range_cells;
    let mut rng = noise_rng(seed, u64::MAX);
    let mut cells = sample(&mut rng, m, count.min(m)).into_vec();
    cells.sort_unstable();
    Scene::new(
        cells
            .into_iter()
            .map(|cell| Scatterer {
                x: ground_range_of_cell(cell, params, timings),
                y: 0.0,
                amplitude: Complex64::new(rng.random_range(0.2..1.0), 0.0),
            })
            .collect(),
    )
}

/// Files written by a command plus a one-line-per-item summary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

impl RunReport {
    fn csv(&mut self, path: PathBuf, csv: &Csv) -> Result<()> {
        csv.write(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn raster(&mut self, out: &Path, stem: &str, m: &ComplexMatrix) -> Result<()> {
        let sarf = out.join(format!("{stem}.sarf"));
        let pgm = out.join(format!("{stem}.pgm"));
        write_sarf(&sarf, m)?;
        write_pgm(&pgm, m)?;
        self.files.push(sarf);
        self.files.push(pgm);
        Ok(())
    }
}

fn profile_rows(csv: &mut Csv, branch: Branch, p: &Profile) {
    for (&i, &db) in p.index.iter().zip(&p.db) {
        csv.row(&[Cell::Text(branch.name()), i.into(), db.into()]);
    }
}

/// Point-spread function of every branch for a unit target at the swath
/// centre.
pub fn cmd_psf(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let params = &cfg.radar;
    let timings = cfg.timings();
    let scene = Scene::point_at_center(params, &timings);
    let aperture = cfg.aperture();
    let mut report = RunReport::default();
    let mut range_csv = Csv::new(&["branch", "index", "db"]);
    let mut azimuth_csv = Csv::new(&["branch", "index", "db"]);
    let mut summary = Csv::new(&[
        "branch",
        "range_psl_db",
        "range_width_3db",
        "azimuth_psl_db",
        "azimuth_width_3db",
    ]);
    for branch in cfg.branches() {
        let img = form_image(&scene, branch, params, &timings, &aperture, cfg.noise_sigma, cfg.seed)?;
        let (range, azimuth) = extract_profiles(&img)?;
        let stats = [
            peak_sidelobe_level(&range)?,
            mainlobe_width_3db(&range)?,
            peak_sidelobe_level(&azimuth)?,
            mainlobe_width_3db(&azimuth)?,
        ];
        profile_rows(&mut range_csv, branch, &range);
        profile_rows(&mut azimuth_csv, branch, &azimuth);
        summary.row(&[
            Cell::Text(branch.name()),
            stats[0].into(),
            stats[1].into(),
            stats[2].into(),
            stats[3].into(),
        ]);
        report.summary.push(format!(
            "{branch}: range PSL {:.2} dB, range width {:.3}, azimuth PSL {:.2} dB, azimuth width {:.3}",
            stats[0], stats[1], stats[2], stats[3]
        ));
        report.raster(&cfg.out, &format!("psf_{branch}"), &img.data)?;
    }
    report.csv(cfg.out.join("range_profile.csv"), &range_csv)?;
    report.csv(cfg.out.join("azimuth_profile.csv"), &azimuth_csv)?;
    report.csv(cfg.out.join("psf_summary.csv"), &summary)?;
    Ok(report)
}

/// One range-line reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeLineResult {
    pub label: String,
    pub cp_len: usize,
    pub truth: Vec<Complex64>,
    pub estimate: Vec<Complex64>,
}

impl RangeLineResult {
    /// Energy- and phase-normalised MSE against the truth.
    pub fn mse(&self) -> Result<f64> {
        crate::metrics::normalized_mse(&self.estimate, &self.truth)
    }

    /// Strongest estimate in a truly empty cell, dB re the estimate peak.
    pub fn empty_cell_max_db(&self) -> Result<f64> {
        let p = Profile::from_complex(&self.estimate)?;
        Ok(self
            .truth
            .iter()
            .zip(&p.db)
            .filter(|(t, _)| t.norm() == 0.0)
            .map(|(_, &db)| db)
            .fold(DB_FLOOR, f64::max))
    }
}

/// Reconstructs the azimuth-0 range line of `scene` with each CP length and
/// with the matched-filtered, prefix-free OFDM pulse built from the same
/// weights.
pub fn range_line_experiment(
    scene: &Scene,
    params: &RadarParams,
    cp_list: &[usize],
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<RangeLineResult>> {
    let timings = derive_timings(params);
    scene.validate(params, &timings)?;
    let m = params.num_range_cells;
    let n = params.num_subcarriers;
    if let Some(&bad) = cp_list.iter().find(|&&cp| cp + 1 > m || cp + 1 > n) {
        return Err(Error::InvalidInput(format!(
            "cp_len {bad} exceeds M − 1 = {} (or N − 1 = {})",
            m.saturating_sub(1),
            n.saturating_sub(1)
        )));
    }
    let line = scene_to_range_line(scene, 0.0, params, &timings);
    let d = weighting_coefficients(&line, 0.0, params, &timings);
    let w = pn_weights(n, seed)?;
    let mut out = Vec::with_capacity(cp_list.len() + 1);
    for &cp in cp_list {
        let pulse = ofdm_pulse(&w, cp)?;
        let u = simulate_echo_line(&pulse, &d, noise_sigma, seed)?;
        let est = cp_ofdm_range_compress(u.samples(), &w, m, cp, true)?;
        out.push(RangeLineResult {
            label: format!("cp{cp}"),
            cp_len: cp,
            truth: d.d.clone(),
            estimate: est.d_hat,
        });
    }
    let pulse = ofdm_pulse(&w, 0)?.as_conventional();
    let u = simulate_echo_line(&pulse, &d, noise_sigma, seed)?;
    out.push(RangeLineResult {
        label: "conventional".into(),
        cp_len: 0,
        truth: d.d.clone(),
        estimate: matched_filter_compress(u.samples(), pulse.as_slice())?,
    });
    Ok(out)
}

/// Sparse range line reconstructed for each CP length and by the
/// conventional matched filter.
pub fn cmd_rangeline(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let params = &cfg.radar;
    let scene = cfg.load_scene("rangeline18")?;
    let m = params.num_range_cells;
    let cps = cfg.cp_list.clone().unwrap_or_else(|| {
        let mut v = vec![m - 1, (m - 1) - (m - 1) / 6, 0];
        v.dedup();
        v
    });
    let results = range_line_experiment(&scene, params, &cps, cfg.noise_sigma, cfg.seed)?;
    let mut report = RunReport::default();
    let mut summary = Csv::new(&["variant", "cp_len", "mse", "empty_cell_max_db"]);
    for r in &results {
        let truth_peak = r.truth.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let est = Profile::from_complex(&r.estimate)?;
        let mut csv = Csv::new(&["cell", "truth_amplitude", "estimate_db"]);
        for (cell, (t, &db)) in r.truth.iter().zip(&est.db).enumerate() {
            let amp = if truth_peak > 0.0 { t.norm() / truth_peak } else { 0.0 };
            csv.row(&[cell.into(), amp.into(), db.into()]);
        }
        report.csv(cfg.out.join(format!("rangeline_{}.csv", r.label)), &csv)?;
        let (mse, empty) = (r.mse()?, r.empty_cell_max_db()?);
        summary.row(&[Cell::Text(&r.label), r.cp_len.into(), mse.into(), empty.into()]);
        report
            .summary
            .push(format!("{}: mse {mse:.3e}, strongest empty cell {empty:.1} dB", r.label));
    }
    report.csv(cfg.out.join("rangeline_summary.csv"), &summary)?;
    Ok(report)
}

/// One image per branch, plus CP-OFDM without a prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRun {
    pub label: String,
    pub image: ImageMatrix,
    pub mse: f64,
}

/// Images `scene` with every requested branch and scores each against the
/// rendered truth. When all branches run, CP-OFDM is repeated with
/// `cp_len = 0` as `cp_ofdm_cp0`.
pub fn image_experiment(cfg: &ExperimentConfig, scene: &Scene) -> Result<(ComplexMatrix, Vec<ImageRun>)> {
    let params = &cfg.radar;
    let timings = cfg.timings();
    let aperture = cfg.aperture();
    let mut variants: Vec<(String, Branch, RadarParams)> = cfg
        .branches()
        .into_iter()
        .map(|b| (b.name().to_string(), b, params.clone()))
        .collect();
    if cfg.branch.is_none() {
        let mut p0 = params.clone();
        p0.cp_len = 0;
        variants.push(("cp_ofdm_cp0".into(), Branch::CpOfdm, p0));
    }
    let mut truth = None;
    let mut runs = Vec::new();
    for (label, branch, p) in variants {
        let t = derive_timings(&p);
        let image = form_image(scene, branch, &p, &t, &aperture, cfg.noise_sigma, cfg.seed)?;
        if truth.is_none() {
            truth = Some(render_truth(scene, &image, params, &timings)?);
        }
        let mse = image_mse(&image.data, truth.as_ref().unwrap())?;
        runs.push(ImageRun { label, image, mse });
    }
    let truth = truth.unwrap_or_else(|| ComplexMatrix::zeros(aperture.num_pulses, params.num_range_cells));
    Ok((truth, runs))
}

/// Full image formation of an extended scene (the tank by default).
pub fn cmd_image(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let scene = cfg.load_scene("tank")?;
    let (truth, runs) = image_experiment(cfg, &scene)?;
    let mut report = RunReport::default();
    report.raster(&cfg.out, "truth", &truth)?;
    let mut csv = Csv::new(&["branch", "mse"]);
    for run in &runs {
        report.raster(&cfg.out, &format!("image_{}", run.label), &run.image.data)?;
        csv.row(&[Cell::Text(&run.label), run.mse.into()]);
        report.summary.push(format!("{}: image mse {:.4e}", run.label, run.mse));
    }
    report.csv(cfg.out.join("image_mse.csv"), &csv)?;
    Ok(report)
}

/// Default prefix grid: about a dozen evenly spaced lengths plus `M − 1`.
pub fn default_cp_grid(m: usize) -> Vec<usize> {
    let step = (m / 12).max(1);
    let mut v: Vec<usize> = (0..m).step_by(step).collect();
    if v.last() != Some(&(m - 1)) {
        v.push(m - 1);
    }
    v
}

/// MSE against prefix length for each swath size, single-line Monte Carlo,
/// plus one full-chain point at `cp = M − 1` per swath size.
pub fn cmd_mse_cp(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let trials = cfg.trials.unwrap_or(200);
    let mut report = RunReport::default();
    let mut csv = Csv::new(&["num_range_cells", "mode", "cp_len", "mse"]);
    for &m in &cfg.range_cells_list {
        let mut p = cfg.radar.clone();
        p.num_range_cells = m;
        p.cp_len = m.saturating_sub(1);
        validate_params(&p).into_result()?;
        let cps = cfg.cp_list.clone().unwrap_or_else(|| default_cp_grid(m));
        let curve = mse_vs_cp(&p, &cps, trials, cfg.seed, MseMode::SingleLine)?;
        for (&cp, &mse) in curve.cp_lengths.iter().zip(&curve.mse) {
            csv.row(&[m.into(), "single_line".into(), cp.into(), mse.into()]);
        }
        let chain = mse_vs_cp(&p, &[m - 1], 1, cfg.seed, MseMode::FullChain { pulses: cfg.pulses })?;
        csv.row(&[m.into(), "full_chain".into(), (m - 1).into(), chain.mse[0].into()]);
        report.summary.push(format!(
            "M = {m}: mse {:.3e} at cp 0, {:.3e} at cp {}; full chain {:.3e}",
            curve.mse.first().copied().unwrap_or(f64::NAN),
            curve.mse.last().copied().unwrap_or(f64::NAN),
            curve.cp_lengths.last().copied().unwrap_or(0),
            chain.mse[0]
        ));
    }
    report.csv(cfg.out.join("mse_cp.csv"), &csv)?;
    Ok(report)
}

/// Theoretical range-compression SNR gain, dB.
pub fn expected_gain_db(branch: Branch, params: &RadarParams) -> f64 {
    let n = params.num_subcarriers as f64;
    match branch {
        Branch::CpOfdm => 10.0 * n.log10(),
        _ => 10.0 * (n + params.cp_len as f64).log10(),
    }
}

/// Measured SNR gain per branch with unit-variance noise unless
/// `noise_sigma` is set.
pub fn cmd_snr_gain(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let trials = cfg.trials.unwrap_or(200);
    let sigma = if cfg.noise_sigma > 0.0 { cfg.noise_sigma } else { 1.0 };
    let mut report = RunReport::default();
    let mut csv = Csv::new(&["branch", "gain_db", "expected_db", "input_snr_db", "output_snr_db"]);
    for branch in cfg.branches() {
        let g = snr_gain(&cfg.radar, branch, trials, cfg.seed, sigma)?;
        let expected = expected_gain_db(branch, &cfg.radar);
        csv.row(&[
            Cell::Text(branch.name()),
            g.gain_db.into(),
            expected.into(),
            g.input_snr_db.into(),
            g.output_snr_db.into(),
        ]);
        report
            .summary
            .push(format!("{branch}: gain {:.3} dB (expected {expected:.3} dB)", g.gain_db));
    }
    report.csv(cfg.out.join("snr_gain.csv"), &csv)?;
    Ok(report)
}

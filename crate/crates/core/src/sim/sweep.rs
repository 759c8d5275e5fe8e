//! Parameter sweeps over source models and reference degradation.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::metrics::si_sdr;
use super::reference::degrade_reference;
use super::scene::{simulate_anechoic, MixingScenario};
use super::{Result, SimError};
use crate::audio_io::MultichannelWave;
use crate::extraction::{extract, SourceModelConfig};
use crate::stft::{istft_channel, stft, StftParams};

pub const CSV_HEADER: &str = "model,param,iterations,degradation,si_sdr_out,si_sdr_best_input,improvement";

/// Clean sources plus the scenario that mixes them. Source 0 is the target.
#[derive(Debug, Clone)]
pub struct Scene {
    pub sample_rate: u32,
    pub sources: Vec<Vec<f64>>,
    pub scenario: MixingScenario,
}

impl Scene {
    pub fn len(&self) -> usize {
        self.sources.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn source_waves(&self) -> Result<Vec<MultichannelWave>> {
        let len = self.len();
        self.sources
            .iter()
            .map(|s| {
                let mut padded = s.clone();
                padded.resize(len, 0.0);
                Ok(MultichannelWave::mono(self.sample_rate, padded)?)
            })
            .collect()
    }

    pub fn mixture(&self) -> Result<MultichannelWave> {
        simulate_anechoic(&self.source_waves()?, &self.scenario)
    }

    /// Noise-free image of the target at channel `n`.
    pub fn target_image(&self, n: usize) -> Vec<f64> {
        self.scenario.source_image(&self.sources[0], 0, n, self.len())
    }

    /// Sum of all non-target sources, unmixed.
    pub fn interference(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for s in self.sources.iter().skip(1) {
            for (o, v) in out.iter_mut().zip(s) {
                *o += v;
            }
        }
        out
    }

    pub fn padded_target(&self) -> Vec<f64> {
        let mut t = self.sources[0].clone();
        t.resize(self.len(), 0.0);
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSetup {
    pub stft: StftParams,
    pub ref_mic: usize,
}

impl Default for SweepSetup {
    fn default() -> Self {
        Self {
            stft: StftParams::default(),
            ref_mic: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub model: &'static str,
    /// `beta` for the Gaussian model, `alpha` for the Laplacian one.
    pub param: f64,
    pub iterations: usize,
    pub degradation: f64,
    pub si_sdr_out: f64,
    pub si_sdr_best_input: f64,
    pub improvement: f64,
}

impl MetricsRow {
    pub fn describe(config: &SourceModelConfig) -> (&'static str, f64, usize) {
        match config {
            SourceModelConfig::TvGaussian(tv) => ("tv", tv.beta, 1),
            SourceModelConfig::BsLaplacian(bs) => ("bs", bs.alpha, bs.iterations),
        }
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{:.6},{},{:.6},{:.6},{:.6},{:.6}",
            self.model,
            self.param,
            self.iterations,
            self.degradation,
            self.si_sdr_out,
            self.si_sdr_best_input,
            self.improvement
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub rows: Vec<MetricsRow>,
}

impl MetricsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.to_csv_line());
        }
        out
    }
}

/// Best SI-SDR over the raw channels, each scored against the target image
/// it actually contains.
pub fn best_input_si_sdr(scene: &Scene, mixture: &MultichannelWave) -> Result<f64> {
    (0..mixture.num_channels())
        .map(|n| si_sdr(mixture.channel(n), &scene.target_image(n)))
        .try_fold(f64::NEG_INFINITY, |best, v| Ok(best.max(v?)))
}

/// Extracts the target with `config` and a reference degraded by `level`,
/// returning the time-domain estimate at the reference microphone.
pub fn extract_scene(
    scene: &Scene,
    mixture: &MultichannelWave,
    config: &SourceModelConfig,
    level: f64,
    setup: &SweepSetup,
) -> Result<Vec<f64>> {
    let x = stft(mixture, &setup.stft)?;
    let reference = degrade_reference(&scene.padded_target(), &scene.interference(), level, &setup.stft)?;
    let extraction = extract(&x, &reference, config, setup.ref_mic)?;
    Ok(istft_channel(extraction.target.view(), &setup.stft, mixture.len())?)
}

/// One report row per `(config, level)` pair, configs outermost, in input
/// order.
pub fn run_sweep(
    scene: &Scene,
    grid: &[SourceModelConfig],
    levels: &[f64],
    setup: &SweepSetup,
) -> Result<MetricsReport> {
    if grid.is_empty() {
        return Err(SimError::Empty("model grid"));
    }
    if levels.is_empty() {
        return Err(SimError::Empty("degradation levels"));
    }
    if setup.ref_mic >= scene.scenario.num_channels() {
        return Err(SimError::InvalidScenario(format!(
            "reference microphone {} out of range for {} channels",
            setup.ref_mic,
            scene.scenario.num_channels()
        )));
    }
    let mixture = scene.mixture()?;
    let best_input = best_input_si_sdr(scene, &mixture)?;
    let target = scene.target_image(setup.ref_mic);

    let cells: Vec<(SourceModelConfig, f64)> = grid
        .iter()
        .flat_map(|c| levels.iter().map(move |&l| (*c, l)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|(config, level)| {
            let (model, param, iterations) = MetricsRow::describe(config);
            let annotate = |source: SimError| SimError::Row {
                model,
                param,
                iterations,
                degradation: *level,
                source: Box::new(source),
            };
            let estimate = extract_scene(scene, &mixture, config, *level, setup).map_err(annotate)?;
            let out = si_sdr(&estimate, &target).map_err(annotate)?;
            Ok(MetricsRow {
                model,
                param,
                iterations,
                degradation: *level,
                si_sdr_out: out,
                si_sdr_best_input: best_input,
                improvement: out - best_input,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsReport { rows })
}

//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when processing fails, 2 for invalid
//! arguments. Diagnostics go to standard error; results to standard output.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audio_io::{self, decode_matrix, read_wav, write_matrix, write_wav, BitDepth, MagnitudeMatrix, MultichannelWave};
use crate::extraction::{extract, SourceModelConfig};
use crate::sim::{oracle_reference, run_sweep, si_sdr, simulate_anechoic, MixingScenario, SweepSetup};
use crate::stft::{istft_channel, stft, StftParams, DEFAULT_FFT_SIZE, DEFAULT_HOP};

pub mod grid;
pub mod scene_file;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROCESSING: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sibf", version, about = "Reference-guided multichannel target extraction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract the target from a multichannel WAV using a magnitude reference.
    Extract(ExtractArgs),
    /// Mix mono sources into a multichannel scene.
    Mix(MixArgs),
    /// Score an estimate against a clean target with SI-SDR.
    Eval(EvalArgs),
    /// Run a parameter sweep on a scene and write a CSV report.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Tv,
    Bs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BitDepthArg {
    #[value(name = "16")]
    Int16,
    #[value(name = "32")]
    Float32,
}

impl From<BitDepthArg> for BitDepth {
    fn from(b: BitDepthArg) -> Self {
        match b {
            BitDepthArg::Int16 => BitDepth::Int16,
            BitDepthArg::Float32 => BitDepth::Float32,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StftArgs {
    #[arg(long, default_value_t = DEFAULT_FFT_SIZE)]
    pub fft_size: usize,
    #[arg(long, default_value_t = DEFAULT_HOP)]
    pub hop: usize,
}

impl StftArgs {
    fn params(&self) -> Result<StftParams, CliError> {
        StftParams::new(self.fft_size, self.hop).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    /// Multichannel observation.
    #[arg(long)]
    pub input: PathBuf,
    /// Reference magnitude: a WAV (its STFT magnitude is used) or a SIBFMAT1 matrix.
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelKind::Tv)]
    pub model: ModelKind,
    /// Reference exponent of the Gaussian model.
    #[arg(long, default_value_t = crate::extraction::model::DEFAULT_BETA)]
    pub beta: f64,
    /// Reference weight of the Laplacian model.
    #[arg(long, default_value_t = crate::extraction::model::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = crate::extraction::model::DEFAULT_BS_ITERATIONS)]
    pub iterations: usize,
    /// Channel whose scale and phase the output takes.
    #[arg(long, default_value_t = 0)]
    pub ref_mic: usize,
    #[command(flatten)]
    pub stft: StftArgs,
    #[arg(long, value_enum, default_value_t = BitDepthArg::Float32)]
    pub bit_depth: BitDepthArg,
}

impl ExtractArgs {
    /// Validates every model knob, including those the chosen model ignores.
    pub fn model_config(&self) -> Result<SourceModelConfig, CliError> {
        let usage = |e: crate::extraction::SibfError| CliError::Usage(e.to_string());
        let tv = SourceModelConfig::tv(self.beta).map_err(usage)?;
        let bs = SourceModelConfig::bs(self.alpha, self.iterations).map_err(usage)?;
        Ok(match self.model {
            ModelKind::Tv => tv,
            ModelKind::Bs => bs,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct MixArgs {
    /// Mono source WAVs; the first one is the target.
    #[arg(long, required = true, num_args = 1..)]
    pub sources: Vec<PathBuf>,
    /// One comma-separated list of per-channel gains per source.
    #[arg(long, required = true, num_args = 1..)]
    pub gains: Vec<String>,
    /// One comma-separated list of per-channel delays (samples) per source.
    #[arg(long, num_args = 1..)]
    pub delays: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the magnitude spectrogram of the first source.
    #[arg(long)]
    pub oracle_ref: Option<PathBuf>,
    #[command(flatten)]
    pub stft: StftArgs,
    #[arg(long, value_enum, default_value_t = BitDepthArg::Float32)]
    pub bit_depth: BitDepthArg,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub estimate: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    /// Multichannel recording whose channel serves as the baseline.
    #[arg(long, requires = "channel")]
    pub baseline: Option<PathBuf>,
    #[arg(long, requires = "baseline")]
    pub channel: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Scene description (key = value lines).
    #[arg(long)]
    pub scene: PathBuf,
    /// Model grid, e.g. `bs:alpha=0.01,1,100,10000:iterations=1,2,5,10`.
    #[arg(long, required = true, num_args = 1..)]
    pub grid: Vec<String>,
    /// Comma-separated reference degradation levels.
    #[arg(long, default_value = "0")]
    pub levels: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub ref_mic: usize,
    #[command(flatten)]
    pub stft: StftArgs,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Processing { stage: &'static str, message: String },
}

impl CliError {
    fn at<E: fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> CliError {
        move |e| CliError::Processing {
            stage,
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Processing { .. } => EXIT_PROCESSING,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "argument error: {m}"),
            CliError::Processing { stage, message } => write!(f, "{stage}: {message}"),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("sibf: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Extract(a) => cmd_extract(a),
        Command::Mix(a) => cmd_mix(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn load_reference(path: &Path, params: &StftParams) -> Result<MagnitudeMatrix, CliError> {
    let bytes = std::fs::read(path).map_err(CliError::at("reading reference"))?;
    if bytes.starts_with(b"RIFF") {
        let wave = read_wav(path).map_err(CliError::at("reading reference"))?;
        oracle_reference(wave.channel(0), params).map_err(CliError::at("reference spectrogram"))
    } else {
        decode_matrix(&bytes).map_err(CliError::at("reading reference"))
    }
}

pub fn cmd_extract(args: &ExtractArgs) -> Result<(), CliError> {
    let params = args.stft.params()?;
    let model = args.model_config()?;

    let wave = read_wav(&args.input).map_err(CliError::at("reading input"))?;
    if args.ref_mic >= wave.num_channels() {
        return Err(CliError::Usage(format!(
            "--ref-mic {} out of range for {} channels",
            args.ref_mic,
            wave.num_channels()
        )));
    }
    let x = stft(&wave, &params).map_err(CliError::at("stft"))?;
    let reference = load_reference(&args.reference, &params)?;
    if (reference.num_freqs(), reference.num_frames()) != (x.num_freqs(), x.num_frames()) {
        return Err(CliError::Processing {
            stage: "reference",
            message: format!(
                "reference is {}x{} but the input spectrogram is {}x{}",
                reference.num_freqs(),
                reference.num_frames(),
                x.num_freqs(),
                x.num_frames()
            ),
        });
    }
    let result = extract(&x, &reference, &model, args.ref_mic).map_err(CliError::at("extraction"))?;
    let samples = istft_channel(result.target.view(), &params, wave.len()).map_err(CliError::at("istft"))?;
    let out = MultichannelWave::mono(wave.sample_rate(), samples).map_err(CliError::at("writing output"))?;
    write_wav(&out, &args.output, args.bit_depth.into()).map_err(CliError::at("writing output"))?;
    println!("{},{:.6}", model.name(), result.objective);
    Ok(())
}

fn parse_rows<T: std::str::FromStr>(rows: &[String], what: &str) -> Result<Vec<Vec<T>>, CliError> {
    rows.iter()
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<T>()
                        .map_err(|_| CliError::Usage(format!("invalid {what} entry `{}`", v.trim())))
                })
                .collect()
        })
        .collect()
}

pub fn cmd_mix(args: &MixArgs) -> Result<(), CliError> {
    let params = args.stft.params()?;
    let gains: Vec<Vec<f64>> = parse_rows(&args.gains, "gain")?;
    let delays: Vec<Vec<usize>> = if args.delays.is_empty() {
        gains.iter().map(|g| vec![0; g.len()]).collect()
    } else {
        parse_rows(&args.delays, "delay")?
    };
    if gains.len() != args.sources.len() {
        return Err(CliError::Usage(format!(
            "{} sources but {} gain lists",
            args.sources.len(),
            gains.len()
        )));
    }
    let scenario = MixingScenario {
        gains,
        delays,
        noise_level: args.noise,
        seed: args.seed,
        max_delay: params.fft_size() / 4,
    };
    scenario.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let sources = args
        .sources
        .iter()
        .map(|p| {
            let w = read_wav(p).map_err(CliError::at("reading sources"))?;
            MultichannelWave::mono(w.sample_rate(), w.channel(0).to_vec()).map_err(CliError::at("reading sources"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mixture = simulate_anechoic(&sources, &scenario).map_err(CliError::at("mixing"))?;

    let oracle = match &args.oracle_ref {
        Some(_) => {
            let mut target = sources[0].channel(0).to_vec();
            target.resize(mixture.len(), 0.0);
            Some(oracle_reference(&target, &params).map_err(CliError::at("oracle reference"))?)
        }
        None => None,
    };
    write_wav(&mixture, &args.output, args.bit_depth.into()).map_err(CliError::at("writing mixture"))?;
    if let (Some(path), Some(m)) = (&args.oracle_ref, oracle) {
        write_matrix(&m, path).map_err(CliError::at("writing oracle reference"))?;
    }
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let estimate = read_wav(&args.estimate).map_err(CliError::at("reading estimate"))?;
    let target = read_wav(&args.target).map_err(CliError::at("reading target"))?;
    let score = si_sdr(estimate.channel(0), target.channel(0)).map_err(CliError::at("scoring"))?;
    match (&args.baseline, args.channel) {
        (Some(path), Some(k)) => {
            let baseline = read_wav(path).map_err(CliError::at("reading baseline"))?;
            if k >= baseline.num_channels() {
                return Err(CliError::Usage(format!(
                    "--channel {k} out of range for {} channels",
                    baseline.num_channels()
                )));
            }
            let base = si_sdr(baseline.channel(k), target.channel(0)).map_err(CliError::at("scoring baseline"))?;
            println!("{score:.6},{base:.6},{:.6}", score - base);
        }
        _ => println!("{score:.6}"),
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let params = args.stft.params()?;
    let mut grid = Vec::new();
    for spec in &args.grid {
        grid.extend(grid::parse_grid(spec).map_err(|e| CliError::Usage(format!("--grid `{spec}`: {e}")))?);
    }
    if grid.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    let levels = grid::parse_levels(&args.levels).map_err(|e| CliError::Usage(format!("--levels: {e}")))?;

    let scene = scene_file::load_scene(&args.scene).map_err(CliError::at("loading scene"))?;
    let setup = SweepSetup {
        stft: params,
        ref_mic: args.ref_mic,
    };
    let report = run_sweep(&scene, &grid, &levels, &setup).map_err(CliError::at("sweep"))?;
    audio_io::write_atomic(&args.out, report.to_csv().as_bytes()).map_err(CliError::at("writing report"))?;
    Ok(())
}

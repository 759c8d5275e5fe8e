//! Time-domain audio and reference-matrix file I/O.
//!
//! Two formats are supported:
//!
//! * RIFF/WAVE with 16-bit integer PCM or 32-bit IEEE float samples, any
//!   channel count.
//! * `SIBFMAT1`, a minimal container for nonnegative magnitude matrices:
//!   8 magic bytes, `F: u32 LE`, `T: u32 LE`, then `F * T` little-endian
//!   `f32` values in frequency-major order.
//!
//! All writers go through a temporary file in the destination directory that
//! is renamed into place only once the full payload has been written.

use std::fs::File;
use std::io::{self, BufReader, Cursor, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use thiserror::Error;

/// Magic bytes at the start of every magnitude-matrix file.
pub const MATRIX_MAGIC: &[u8; 8] = b"SIBFMAT1";

const MATRIX_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("file not found: {0}")]
    NotFound(PathBuf),
    #[error("unsupported audio format: {0}")]
    Unsupported(String),
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("bad magic bytes (expected SIBFMAT1)")]
    BadMagic,
    #[error("size mismatch: header declares {expected} bytes of payload, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("negative value {value} at ({row}, {col})")]
    NegativeValue { row: usize, col: usize, value: f64 },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("invalid data: {0}")]
    Invalid(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, AudioError>;

/// Sample encoding used when writing WAV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitDepth {
    Int16,
    #[default]
    Float32,
}

/// Time-domain audio, stored as one sample vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelWave {
    sample_rate: u32,
    channels: Vec<Vec<f64>>,
}

impl MultichannelWave {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(AudioError::Invalid("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(AudioError::Invalid("at least one channel is required".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(AudioError::Invalid("channels differ in length".into()));
        }
        Ok(Self {
            sample_rate,
            channels,
        })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate, vec![samples])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }
}

/// A nonnegative `F x T` magnitude matrix, the on-disk carrier of a reference.
///
/// Values are held at double precision in memory and narrowed to `f32` on
/// write.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeMatrix {
    values: Array2<f64>,
}

impl MagnitudeMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows == 0 || cols == 0 {
            return Err(AudioError::Invalid("matrix dimensions must be positive".into()));
        }
        for ((row, col), &value) in values.indexed_iter() {
            if !value.is_finite() {
                return Err(AudioError::NonFinite { row, col });
            }
            if value < 0.0 {
                return Err(AudioError::NegativeValue { row, col, value });
            }
        }
        Ok(Self { values })
    }

    pub fn num_freqs(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_frames(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => AudioError::NotFound(path.to_path_buf()),
        _ => AudioError::Io(e),
    })
}

fn map_hound(err: hound::Error) -> AudioError {
    match err {
        // hound signals a short read either as UnexpectedEof or as a custom
        // "Failed to read enough bytes." error.
        hound::Error::IoError(e)
            if e.kind() == io::ErrorKind::UnexpectedEof || e.to_string().contains("enough bytes") =>
        {
            AudioError::Truncated(e.to_string())
        }
        hound::Error::IoError(e) => AudioError::Io(e),
        hound::Error::FormatError(msg) => AudioError::Malformed(msg.to_string()),
        hound::Error::Unsupported => AudioError::Unsupported("unsupported WAV feature".into()),
        hound::Error::UnfinishedSample => AudioError::Truncated("unfinished sample".into()),
        hound::Error::TooWide => AudioError::Unsupported("sample too wide".into()),
        hound::Error::InvalidSampleFormat => {
            AudioError::Unsupported("invalid sample format".into())
        }
    }
}

/// Reads a 16-bit PCM or 32-bit float WAV file.
///
/// 16-bit samples are scaled by `1/32768`; float samples pass through.
pub fn read_wav(path: impl AsRef<Path>) -> Result<MultichannelWave> {
    let path = path.as_ref();
    let file = open(path)?;
    let reader = hound::WavReader::new(BufReader::new(file)).map_err(map_hound)?;
    let spec = reader.spec();
    let num_channels = spec.channels as usize;
    if num_channels == 0 {
        return Err(AudioError::Malformed("zero channels".into()));
    }
    let declared = reader.len() as usize;
    if declared % num_channels != 0 {
        return Err(AudioError::Truncated(format!(
            "{declared} samples is not a multiple of {num_channels} channels"
        )));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (format, bits) => {
            return Err(AudioError::Unsupported(format!(
                "{bits}-bit {format:?} samples (only 16-bit int and 32-bit float)"
            )))
        }
    };
    if interleaved.len() != declared {
        return Err(AudioError::Truncated(format!(
            "expected {declared} samples, read {}",
            interleaved.len()
        )));
    }
    let frames = declared / num_channels;
    let mut channels = vec![Vec::with_capacity(frames); num_channels];
    for (i, &v) in interleaved.iter().enumerate() {
        if !v.is_finite() {
            return Err(AudioError::NonFinite {
                row: i % num_channels,
                col: i / num_channels,
            });
        }
        channels[i % num_channels].push(v);
    }
    MultichannelWave::new(spec.sample_rate, channels)
}

fn quantize_i16(v: f64) -> i16 {
    let clamped = v.clamp(-1.0, 1.0 - 1.0 / 32768.0);
    (clamped * 32768.0).round() as i16
}

/// Encodes a wave as a complete WAV byte stream.
pub fn encode_wav(wave: &MultichannelWave, bit_depth: BitDepth) -> Result<Vec<u8>> {
    if wave.is_empty() {
        return Err(AudioError::Invalid("cannot write a wave with no samples".into()));
    }
    let spec = hound::WavSpec {
        channels: u16::try_from(wave.num_channels())
            .map_err(|_| AudioError::Invalid("too many channels".into()))?,
        sample_rate: wave.sample_rate(),
        bits_per_sample: match bit_depth {
            BitDepth::Int16 => 16,
            BitDepth::Float32 => 32,
        },
        sample_format: match bit_depth {
            BitDepth::Int16 => hound::SampleFormat::Int,
            BitDepth::Float32 => hound::SampleFormat::Float,
        },
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut writer = hound::WavWriter::new(&mut cursor, spec).map_err(map_hound)?;
        for i in 0..wave.len() {
            for ch in wave.channels() {
                match bit_depth {
                    BitDepth::Int16 => writer.write_sample(quantize_i16(ch[i])),
                    BitDepth::Float32 => writer.write_sample(ch[i] as f32),
                }
                .map_err(map_hound)?;
            }
        }
        writer.finalize().map_err(map_hound)?;
    }
    Ok(cursor.into_inner())
}

/// Writes a wave as a WAV file. 16-bit output clamps to `[-1, 1 - 2^-15]`
/// and rounds to nearest; 32-bit float output narrows each sample to `f32`.
pub fn write_wav(
    wave: &MultichannelWave,
    path: impl AsRef<Path>,
    bit_depth: BitDepth,
) -> Result<()> {
    let bytes = encode_wav(wave, bit_depth)?;
    write_atomic(path.as_ref(), &bytes)
}

/// Parses a `SIBFMAT1` byte stream.
pub fn decode_matrix(bytes: &[u8]) -> Result<MagnitudeMatrix> {
    if bytes.len() < MATRIX_MAGIC.len() || &bytes[..MATRIX_MAGIC.len()] != MATRIX_MAGIC {
        return Err(AudioError::BadMagic);
    }
    if bytes.len() < MATRIX_HEADER_LEN {
        return Err(AudioError::Truncated("matrix header".into()));
    }
    let num_freqs = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let num_frames = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let payload = &bytes[MATRIX_HEADER_LEN..];
    let expected = num_freqs
        .checked_mul(num_frames)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| AudioError::Malformed("header dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(AudioError::SizeMismatch {
            expected,
            found: payload.len(),
        });
    }
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    let values = Array2::from_shape_vec((num_freqs, num_frames), values)
        .map_err(|e| AudioError::Malformed(e.to_string()))?;
    MagnitudeMatrix::new(values)
}

pub fn encode_matrix(m: &MagnitudeMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(MATRIX_HEADER_LEN + 4 * m.values.len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(m.num_freqs() as u32).to_le_bytes());
    out.extend_from_slice(&(m.num_frames() as u32).to_le_bytes());
    // Standard layout of an Array2 iterates row-major, i.e. frequency-major.
    for &v in m.values.iter() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<MagnitudeMatrix> {
    let mut bytes = Vec::new();
    open(path.as_ref())?.read_to_end(&mut bytes)?;
    decode_matrix(&bytes)
}

pub fn write_matrix(m: &MagnitudeMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &encode_matrix(m))
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| AudioError::Io(e.error))?;
    Ok(())
}

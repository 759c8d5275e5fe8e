//! Flat `key = value` scene descriptions for the sweep command.
//!
//! ```text
//! # two synthetic sources, four microphones
//! synthetic_sources = 2
//! duration = 3.0
//! sample_rate = 16000
//! channels = 4
//! noise = 0.003
//! seed = 7
//! ```
//!
//! Instead of `synthetic_sources`, `sources = a.wav, b.wav` names mono WAV
//! files relative to the scene file. `gains` and `delays` take one
//! comma-separated row per source, rows separated by `;`. Without `gains`,
//! gains and delays are drawn from the seed for `channels` microphones.

use std::collections::BTreeMap;
use std::path::Path;

use crate::audio_io::read_wav;
use crate::sim::{synthetic_sources, MixingScenario, Scene};

/// RMS of generated synthetic sources.
pub const SYNTHETIC_RMS: f64 = 0.1;
/// Largest delay drawn for seeded random scenarios, in samples.
pub const RANDOM_MAX_DELAY: usize = 8;

const KEYS: &[&str] = &[
    "sources",
    "synthetic_sources",
    "duration",
    "sample_rate",
    "channels",
    "gains",
    "delays",
    "noise",
    "seed",
    "max_delay",
];

pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown key `{key}`", lineno + 1));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key `{key}`", lineno + 1));
        }
    }
    Ok(map)
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, String> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| format!("invalid value for `{key}`: `{v}`")))
        .transpose()
}

fn rows<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<Vec<T>>, String> {
    value
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<T>().map_err(|_| format!("invalid entry in `{key}`: `{}`", v.trim())))
                .collect()
        })
        .collect()
}

pub fn load_scene(path: &Path) -> Result<Scene, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    scene_from_map(&parse_key_values(&text)?, base)
}

pub fn scene_from_map(map: &BTreeMap<String, String>, base: &Path) -> Result<Scene, String> {
    let seed: u64 = get(map, "seed")?.unwrap_or(0);
    let noise: f64 = get(map, "noise")?.unwrap_or(0.0);

    let (sample_rate, sources) = match (map.get("sources"), get::<usize>(map, "synthetic_sources")?) {
        (Some(_), Some(_)) => return Err("give either `sources` or `synthetic_sources`, not both".into()),
        (None, None) => return Err("missing `sources` or `synthetic_sources`".into()),
        (Some(list), None) => {
            let mut rate = None;
            let mut sources = Vec::new();
            for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let wave = read_wav(base.join(name)).map_err(|e| format!("{name}: {e}"))?;
                if *rate.get_or_insert(wave.sample_rate()) != wave.sample_rate() {
                    return Err("sources differ in sample rate".into());
                }
                sources.push(wave.channel(0).to_vec());
            }
            (rate.ok_or("`sources` is empty")?, sources)
        }
        (None, Some(count)) => {
            if count == 0 {
                return Err("`synthetic_sources` must be positive".into());
            }
            let rate: u32 = get(map, "sample_rate")?.unwrap_or(16000);
            let duration: f64 = get(map, "duration")?.unwrap_or(2.0);
            if !(duration > 0.0 && duration.is_finite()) || rate == 0 {
                return Err("`duration` and `sample_rate` must be positive".into());
            }
            let len = (duration * f64::from(rate)).round() as usize;
            (rate, synthetic_sources(count, len, rate, SYNTHETIC_RMS, seed))
        }
    };

    let mut scenario = match map.get("gains") {
        Some(g) => {
            let gains: Vec<Vec<f64>> = rows(g, "gains")?;
            let delays: Vec<Vec<usize>> = match map.get("delays") {
                Some(d) => rows(d, "delays")?,
                None => gains.iter().map(|r| vec![0; r.len()]).collect(),
            };
            MixingScenario {
                gains,
                delays,
                noise_level: noise,
                seed,
                max_delay: crate::stft::DEFAULT_FFT_SIZE / 4,
            }
        }
        None => {
            if map.contains_key("delays") {
                return Err("`delays` requires `gains`".into());
            }
            let channels: usize = get(map, "channels")?.ok_or("missing `gains` or `channels`")?;
            MixingScenario::random(sources.len(), channels, RANDOM_MAX_DELAY, noise, seed).map_err(|e| e.to_string())?
        }
    };
    if let Some(max) = get::<usize>(map, "max_delay")? {
        scenario.max_delay = max;
    }
    scenario.validate().map_err(|e| e.to_string())?;
    if scenario.num_sources() != sources.len() {
        return Err(format!(
            "{} sources but gains for {}",
            sources.len(),
            scenario.num_sources()
        ));
    }
    Ok(Scene {
        sample_rate,
        sources,
        scenario,
    })
}

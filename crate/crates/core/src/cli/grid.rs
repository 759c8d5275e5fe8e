//! Model grid specifications.
//!
//! ```text
//! tv:beta=0.5,1,2,4,8
//! bs:alpha=0.01,1,100,10000:iterations=1,2,5,10
//! ```
//!
//! Omitted keys fall back to the model defaults. A `bs` spec expands to the
//! cartesian product of its alphas and iteration counts, alphas outermost.

use crate::extraction::model::{DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_BS_ITERATIONS};
use crate::extraction::SourceModelConfig;

pub fn parse_grid(spec: &str) -> Result<Vec<SourceModelConfig>, String> {
    let spec = spec.trim();
    let mut parts = spec.split(':');
    let model = parts.next().unwrap_or_default().trim();
    let mut betas: Option<Vec<f64>> = None;
    let mut alphas: Option<Vec<f64>> = None;
    let mut iterations: Option<Vec<usize>> = None;
    for part in parts {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=values in `{part}`"))?;
        let key = key.trim();
        let repeated = match (model, key) {
            ("tv", "beta") => betas.replace(parse_list(values)?).is_some(),
            ("bs", "alpha") => alphas.replace(parse_list(values)?).is_some(),
            ("bs", "iterations") => iterations.replace(parse_list(values)?).is_some(),
            _ => return Err(format!("unknown key `{key}` for model `{model}`")),
        };
        if repeated {
            return Err(format!("key `{key}` given twice"));
        }
    }
    let configs: Vec<SourceModelConfig> = match model {
        "tv" => betas
            .unwrap_or_else(|| vec![DEFAULT_BETA])
            .into_iter()
            .map(SourceModelConfig::tv)
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?,
        "bs" => {
            let alphas = alphas.unwrap_or_else(|| vec![DEFAULT_ALPHA]);
            let iterations = iterations.unwrap_or_else(|| vec![DEFAULT_BS_ITERATIONS]);
            alphas
                .iter()
                .flat_map(|&a| iterations.iter().map(move |&i| SourceModelConfig::bs(a, i)))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?
        }
        "" => return Err("empty grid spec".into()),
        other => return Err(format!("unknown model `{other}` (expected tv or bs)")),
    };
    Ok(configs)
}

fn parse_list<T: std::str::FromStr>(values: &str) -> Result<Vec<T>, String> {
    let list = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| format!("cannot parse `{}`", v.trim()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if list.is_empty() {
        return Err("empty value list".into());
    }
    Ok(list)
}

pub fn parse_levels(values: &str) -> Result<Vec<f64>, String> {
    let levels: Vec<f64> = parse_list(values)?;
    if let Some(bad) = levels.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(format!("degradation level must be >= 0, got {bad}"));
    }
    Ok(levels)
}

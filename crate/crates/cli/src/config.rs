//! Optional JSON config file. Any key may also be given as a flag; flags win.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use linkprob::WeightingMode;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub tol: Option<f64>,
    pub window: Option<u64>,
    pub epsilon: Option<f64>,
    pub init: Option<String>,
    pub weighting: Option<String>,
    pub forgetting: Option<f64>,
    pub checkpoint_every: Option<u64>,
    pub out: Option<PathBuf>,
    pub estimates_out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub tree: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub estimates: Option<PathBuf>,
    pub full: Option<bool>,
    pub modulo_flips: Option<bool>,
    pub depth: Option<usize>,
    pub branching: Option<usize>,
    pub param_min: Option<f64>,
    pub param_max: Option<f64>,
    pub min_gap: Option<f64>,
    pub seeds: Option<String>,
    pub n_max: Option<u64>,
    pub checkpoints: Option<String>,
    pub pseudo: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// `--init` values.
#[derive(Debug, Clone, PartialEq)]
pub enum InitArg {
    Random,
    Perturb(f64),
    File(PathBuf),
}

impl FromStr for InitArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "random" {
            return Ok(Self::Random);
        }
        if let Some(sigma) = s.strip_prefix("perturb:") {
            let sigma: f64 = sigma
                .parse()
                .with_context(|| format!("bad perturbation size in {s:?}"))?;
            return Ok(Self::Perturb(sigma));
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(Self::File(PathBuf::from(path)));
        }
        bail!("--init must be random, perturb:<sigma> or file:<path>, got {s:?}")
    }
}

pub fn parse_weighting(s: &str) -> Result<WeightingMode> {
    match s {
        "unweighted" => Ok(WeightingMode::Unweighted),
        "posterior" => Ok(WeightingMode::Posterior),
        other => bail!("--weighting must be unweighted or posterior, got {other:?}"),
    }
}

/// Comma-separated integers; `a..b` expands to the half-open range.
pub fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().with_context(|| format!("bad range {part:?}"))?;
            let hi: u64 = hi.trim().parse().with_context(|| format!("bad range {part:?}"))?;
            out.extend(lo..hi);
        } else {
            out.push(part.parse().with_context(|| format!("bad integer {part:?}"))?);
        }
    }
    if out.is_empty() {
        bail!("empty list {s:?}");
    }
    Ok(out)
}

/// `trace.csv` -> `trace.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

//! Supervised counting baseline, parameter error up to hidden-label flips,
//! and the unsupervised-versus-supervised convergence comparison.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::learner::{Initializer, LearnerOptions, LearnerState};
use crate::sampler::{draw_full, SampleRng};
use crate::tree_model::{relabel_hidden, CausalTree, FullAssignment, LinkParams, NodeId, TreeStructure};

/// Hidden-node limit for the exhaustive flip search.
pub const MAX_FLIP_SEARCH: usize = 20;

/// Frequency counts over fully observed samples.
#[derive(Debug, Clone)]
pub struct SupervisedCounter {
    structure: TreeStructure,
    pseudo: f64,
    n: u64,
    root_ones: u64,
    // per child z: #(w=1), #(w=1, z=1), #(w=0, z=1)
    parent_ones: Vec<u64>,
    both_ones: Vec<u64>,
    child_only: Vec<u64>,
}

impl SupervisedCounter {
    pub fn new(structure: &TreeStructure, pseudo: f64) -> Result<Self> {
        if !(pseudo >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pseudo-count must be >= 0, got {pseudo}"
            )));
        }
        let n = structure.node_count();
        Ok(Self {
            structure: structure.clone(),
            pseudo,
            n: 0,
            root_ones: 0,
            parent_ones: vec![0; n],
            both_ones: vec![0; n],
            child_only: vec![0; n],
        })
    }

    pub fn push(&mut self, full: &FullAssignment) -> Result<()> {
        if full.len() != self.structure.node_count() {
            return Err(Error::IncompleteAssignment {
                expected: self.structure.node_count(),
                got: full.len(),
            });
        }
        self.n += 1;
        self.root_ones += u64::from(full.get(self.structure.root()));
        for (w, z) in self.structure.edges() {
            match (full.get(w), full.get(z)) {
                (true, true) => {
                    self.parent_ones[z.0] += 1;
                    self.both_ones[z.0] += 1;
                }
                (true, false) => self.parent_ones[z.0] += 1,
                (false, true) => self.child_only[z.0] += 1,
                (false, false) => {}
            }
        }
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// Smoothed frequency estimates `(hits + pseudo) / (trials + 2 pseudo)`.
    pub fn estimates(&self) -> Result<CausalTree> {
        let p = self.pseudo;
        let ratio = |hits: u64, trials: u64, what: &dyn Fn() -> String| {
            let den = trials as f64 + 2.0 * p;
            if den > 0.0 {
                Ok((hits as f64 + p) / den)
            } else {
                Err(Error::UndefinedCounts(what()))
            }
        };
        let alpha = ratio(self.root_ones, self.n, &|| "no samples".into())?;
        let mut links = BTreeMap::new();
        for (w, z) in self.structure.edges() {
            let parent_zeros = self.n - self.parent_ones[z.0];
            let f = ratio(self.both_ones[z.0], self.parent_ones[z.0], &|| {
                format!("node {w} never observed as 1")
            })?;
            let g = ratio(self.child_only[z.0], parent_zeros, &|| {
                format!("node {w} never observed as 0")
            })?;
            links.insert(z, LinkParams::new(f, g));
        }
        CausalTree::new(self.structure.clone(), alpha, links)
    }
}

pub fn supervised_estimates<'a>(
    structure: &TreeStructure,
    fulls: impl IntoIterator<Item = &'a FullAssignment>,
    pseudo: f64,
) -> Result<CausalTree> {
    let mut counter = SupervisedCounter::new(structure, pseudo)?;
    for full in fulls {
        counter.push(full)?;
    }
    counter.estimates()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub max_abs_error: f64,
    pub per_parameter: BTreeMap<String, f64>,
    pub best_flips: BTreeSet<NodeId>,
}

/// Largest absolute parameter difference between `est` and `truth`. With
/// `modulo_flips`, the truth is relabelled by whichever set of hidden-node
/// flips brings it closest to `est` (ties keep the earlier subset in
/// enumeration order, so the empty set wins when it is optimal). Relabelling
/// is an isometry, so this equals the error of the relabelled estimate, but an
/// estimate that is an exact relabelling of the truth scores exactly zero.
pub fn parameter_error(est: &CausalTree, truth: &CausalTree, modulo_flips: bool) -> Result<ErrorReport> {
    if est.structure() != truth.structure() {
        return Err(Error::StructureMismatch);
    }
    let values = est.parameter_values();
    let diffs = |reference: &CausalTree| -> Vec<f64> {
        values
            .iter()
            .zip(reference.parameter_values())
            .map(|(a, b)| (a - b).abs())
            .collect()
    };
    let max_of = |d: &[f64]| d.iter().copied().fold(0.0, f64::max);

    let mut best_flips = BTreeSet::new();
    let mut best_diffs = diffs(truth);
    if modulo_flips {
        let hidden: Vec<NodeId> = truth.structure().hidden().collect();
        if hidden.len() > MAX_FLIP_SEARCH {
            return Err(Error::EnumerationCap {
                nodes: hidden.len(),
                cap: MAX_FLIP_SEARCH,
            });
        }
        let mut best = max_of(&best_diffs);
        for mask in 1u64..(1 << hidden.len()) {
            let flips: BTreeSet<NodeId> = hidden
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &h)| h)
                .collect();
            let d = diffs(&relabel_hidden(truth, &flips)?);
            let err = max_of(&d);
            if err < best {
                best = err;
                best_flips = flips;
                best_diffs = d;
            }
        }
    }

    let max_abs_error = max_of(&best_diffs);
    let per_parameter: BTreeMap<String, f64> =
        est.parameter_names().into_iter().zip(best_diffs).collect();
    Ok(ErrorReport {
        max_abs_error,
        per_parameter,
        best_flips,
    })
}

/// How the unsupervised learner starts in a comparison run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    Random,
    /// Truth plus uniform noise of this half-width.
    Perturb(f64),
    Explicit(CausalTree),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub init: InitMode,
    pub learner: LearnerOptions,
    pub pseudo: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            init: InitMode::Perturb(0.1),
            learner: LearnerOptions::default(),
            pseudo: 1.0,
        }
    }
}

/// Seed for the learner's initializer in replicate `seed`; the sample
/// stream itself uses `seed` directly.
pub fn init_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

pub(crate) fn initializer(mode: &InitMode, truth: &CausalTree, seed: u64) -> Initializer {
    match mode {
        InitMode::Random => Initializer::Random { seed },
        InitMode::Perturb(sigma) => Initializer::Perturb {
            truth: truth.clone(),
            sigma: *sigma,
            seed,
        },
        InitMode::Explicit(tree) => Initializer::Explicit(tree.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub seed: u64,
    pub n: u64,
    pub unsup_err: f64,
    pub sup_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MedianPoint {
    pub n: u64,
    pub unsup_median: f64,
    pub sup_median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub seeds: Vec<u64>,
    pub rows: Vec<ComparisonRow>,
    pub medians: Vec<MedianPoint>,
}

impl ComparisonTable {
    pub fn rows_for(&self, seed: u64) -> impl Iterator<Item = &ComparisonRow> + '_ {
        self.rows.iter().filter(move |r| r.seed == seed)
    }

    pub fn median_at(&self, n: u64) -> Option<&MedianPoint> {
        self.medians.iter().find(|m| m.n == n)
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// For each seed, draws one stream of full assignments from `truth`, feeds
/// the leaf projections to the unsupervised learner and the full
/// assignments to the counting baseline, and records both errors (modulo
/// flips) at every checkpoint. Seeds run in parallel; output is ordered by
/// ascending seed.
pub fn compare_convergence(
    truth: &CausalTree,
    seeds: &[u64],
    n_max: u64,
    checkpoints: &[u64],
    config: &CompareConfig,
) -> Result<ComparisonTable> {
    let mut checkpoints = checkpoints.to_vec();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if let Some(&bad) = checkpoints.iter().find(|&&n| n == 0 || n > n_max) {
        return Err(Error::InvalidArgument(format!(
            "checkpoint {bad} is outside 1..={n_max}"
        )));
    }
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();

    let per_seed: Vec<Vec<ComparisonRow>> = seeds
        .par_iter()
        .map(|&seed| replicate(truth, seed, &checkpoints, config))
        .collect::<Result<_>>()?;

    let medians = checkpoints
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut unsup: Vec<f64> = per_seed.iter().map(|rows| rows[k].unsup_err).collect();
            let mut sup: Vec<f64> = per_seed.iter().map(|rows| rows[k].sup_err).collect();
            MedianPoint {
                n,
                unsup_median: median(&mut unsup),
                sup_median: median(&mut sup),
            }
        })
        .collect();

    Ok(ComparisonTable {
        seeds,
        rows: per_seed.into_iter().flatten().collect(),
        medians,
    })
}

fn replicate(
    truth: &CausalTree,
    seed: u64,
    checkpoints: &[u64],
    config: &CompareConfig,
) -> Result<Vec<ComparisonRow>> {
    let structure = truth.structure();
    let mut learner = LearnerState::init(
        structure,
        &initializer(&config.init, truth, init_seed(seed)),
        config.learner,
    )?;
    let mut counter = SupervisedCounter::new(structure, config.pseudo)?;
    let mut rng = SampleRng::new(seed);
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    let last = checkpoints.last().copied().unwrap_or(0);
    for n in 1..=last {
        let full = draw_full(truth, &mut rng);
        counter.push(&full)?;
        learner.step(&full.project(structure))?;
        if next.peek() == Some(&&n) {
            next.next();
            rows.push(ComparisonRow {
                seed,
                n,
                unsup_err: parameter_error(learner.estimates(), truth, true)?.max_abs_error,
                sup_err: parameter_error(&counter.estimates()?, truth, true)?.max_abs_error,
            });
        }
    }
    Ok(rows)
}

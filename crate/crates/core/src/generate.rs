//! Random trees for experiments and tests.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sampler::SampleRng;
use crate::tree_model::{CausalTree, LinkParams, TreeStructure};

/// Give up on a link after this many rejected `(f, g)` draws.
pub const MAX_REJECTIONS: usize = 100_000;

/// Upper bound on generated tree size.
pub const MAX_GENERATED_NODES: usize = 1 << 20;

/// Draws `f, g` uniformly in `[lo, hi]` until `|f - g| >= min_gap`.
pub fn draw_link(rng: &mut SampleRng, lo: f64, hi: f64, min_gap: f64) -> Result<LinkParams> {
    for _ in 0..MAX_REJECTIONS {
        let f = rng.uniform_in(lo, hi);
        let g = rng.uniform_in(lo, hi);
        if (f - g).abs() >= min_gap {
            return Ok(LinkParams::new(f, g));
        }
    }
    Err(Error::RejectionExhausted(MAX_REJECTIONS))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub depth: usize,
    pub branching: usize,
    pub lo: f64,
    pub hi: f64,
    pub min_gap: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            depth: 2,
            branching: 3,
            lo: 0.1,
            hi: 0.9,
            min_gap: 0.1,
        }
    }
}

/// Complete tree: every node above `depth` has `branching` children. Nodes
/// are numbered breadth-first from the root.
pub fn complete_structure(depth: usize, branching: usize) -> Result<TreeStructure> {
    if depth == 0 || branching == 0 {
        return Err(Error::InvalidArgument(
            "depth and branching must both be at least 1".into(),
        ));
    }
    let mut parents = vec![None];
    let mut level = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * branching);
        for &p in &level {
            for _ in 0..branching {
                next.push(parents.len());
                parents.push(Some(p));
                if parents.len() > MAX_GENERATED_NODES {
                    return Err(Error::InvalidArgument(format!(
                        "tree would exceed {MAX_GENERATED_NODES} nodes"
                    )));
                }
            }
        }
        level = next;
    }
    TreeStructure::from_parents(&parents)
}

pub fn random_tree(spec: &GeneratorSpec, seed: u64) -> Result<CausalTree> {
    if !(0.0 <= spec.lo && spec.lo <= spec.hi && spec.hi <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "parameter range [{}, {}] is not inside [0, 1]",
            spec.lo, spec.hi
        )));
    }
    let structure = complete_structure(spec.depth, spec.branching)?;
    let mut rng = SampleRng::new(seed);
    let alpha = rng.uniform_in(spec.lo, spec.hi);
    let mut links = BTreeMap::new();
    for (_, z) in structure.edges() {
        links.insert(z, draw_link(&mut rng, spec.lo, spec.hi, spec.min_gap)?);
    }
    CausalTree::new(structure, alpha, links)
}

/// Random recursive tree on `nodes` nodes: node `i > 0` attaches to a
/// uniformly chosen earlier node. `alpha` is drawn from `alpha_range`, each
/// `f` and `g` independently from `param_range`.
pub fn random_attachment_tree(
    nodes: usize,
    alpha_range: (f64, f64),
    param_range: (f64, f64),
    rng: &mut SampleRng,
) -> Result<CausalTree> {
    if nodes == 0 {
        return Err(Error::InvalidArgument("tree needs at least one node".into()));
    }
    let parents: Vec<Option<usize>> = (0..nodes)
        .map(|i| (i > 0).then(|| ((rng.uniform() * i as f64) as usize).min(i - 1)))
        .collect();
    let structure = TreeStructure::from_parents(&parents)?;
    let alpha = rng.uniform_in(alpha_range.0, alpha_range.1);
    let (lo, hi) = param_range;
    let links = structure
        .edges()
        .map(|(_, z)| (z, LinkParams::new(rng.uniform_in(lo, hi), rng.uniform_in(lo, hi))))
        .collect::<BTreeMap<_, _>>();
    CausalTree::new(structure, alpha, links)
}

//! Fixtures shared by the benchmarks.

use linkprob::generate::{random_tree, GeneratorSpec};
use linkprob::{draw_leaf, CausalTree, LeafSample, LinkParams, NodeId, SampleRng, TreeStructure};

pub fn star3() -> CausalTree {
    let links = [(0.9, 0.2), (0.8, 0.1), (0.7, 0.3)]
        .iter()
        .enumerate()
        .map(|(i, &(f, g))| (NodeId(i + 1), LinkParams::new(f, g)))
        .collect();
    CausalTree::new(TreeStructure::star(3), 0.6, links).unwrap()
}

/// Complete tree with `branching` children per node, `depth` levels below the root.
pub fn complete(depth: usize, branching: usize) -> CausalTree {
    let spec = GeneratorSpec {
        depth,
        branching,
        ..Default::default()
    };
    random_tree(&spec, 17).unwrap()
}

pub fn leaf_samples(tree: &CausalTree, n: usize, seed: u64) -> Vec<LeafSample> {
    let mut rng = SampleRng::new(seed);
    (0..n).map(|_| draw_leaf(tree, &mut rng)).collect()
}

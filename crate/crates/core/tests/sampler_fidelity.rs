use std::collections::BTreeMap;

use linkprob::io::write_samples;
use linkprob::{draw_leaf, leaf_distribution, CausalTree, LinkParams, NodeId, SampleRng, TreeStructure};

fn star3() -> CausalTree {
    let links = [(0.9, 0.2), (0.8, 0.1), (0.7, 0.3)]
        .iter()
        .enumerate()
        .map(|(i, &(f, g))| (NodeId(i + 1), LinkParams::new(f, g)))
        .collect();
    CausalTree::new(TreeStructure::star(3), 0.6, links).unwrap()
}

#[test]
fn leaf_vector_frequencies_within_four_sigma() {
    let tree = star3();
    let n = 100_000;
    let mut rng = SampleRng::new(20_240_601);
    let mut counts = BTreeMap::new();
    for _ in 0..n {
        *counts.entry(draw_leaf(&tree, &mut rng)).or_insert(0u64) += 1;
    }
    for (d, p) in leaf_distribution(&tree).unwrap() {
        let freq = counts.get(&d).copied().unwrap_or(0) as f64 / n as f64;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() <= 4.0 * sd, "{d:?}: {freq} vs {p}");
    }
}

/// First three leaf samples of the star under seed 42, frozen.
#[test]
fn golden_stream() {
    let tree = star3();
    let mut rng = SampleRng::new(42);
    let samples: Vec<_> = (0..3).map(|_| draw_leaf(&tree, &mut rng)).collect();
    let mut out = Vec::new();
    write_samples(&mut out, tree.structure(), &samples).unwrap();
    let golden = include_str!("golden/star3_seed42.csv");
    assert_eq!(String::from_utf8(out).unwrap(), golden);
}

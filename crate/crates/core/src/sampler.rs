//! Seeded ancestral sampling.
//!
//! The generator is xoshiro256++ seeded through SplitMix64 (the
//! `rand_xoshiro` construction of `seed_from_u64`). Uniform reals take the
//! top 53 bits of each 64-bit output, and a Bernoulli(p) draw is `u < p`.
//! Nodes are visited root first, then depth-first with children ascending,
//! and each node consumes exactly one 64-bit output. Together these fix the
//! sample stream for a given seed on every platform.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::tree_model::{CausalTree, FullAssignment, LeafSample};

#[derive(Debug, Clone)]
pub struct SampleRng {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl SampleRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

/// Draws every node root-first, each given its parent's drawn value.
pub fn draw_full(tree: &CausalTree, rng: &mut SampleRng) -> FullAssignment {
    let s = tree.structure();
    let mut values = vec![false; s.node_count()];
    for &node in s.preorder() {
        let p = match s.parent(node) {
            None => tree.alpha(),
            Some(w) => tree.link_into(node).p_one(values[w.0]),
        };
        values[node.0] = rng.bernoulli(p);
    }
    FullAssignment::new(values)
}

/// Leaf projection of [`draw_full`]; consumes the same randomness.
pub fn draw_leaf(tree: &CausalTree, rng: &mut SampleRng) -> LeafSample {
    draw_full(tree, rng).project(tree.structure())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_model::{exact_marginals, LinkParams, NodeId, TreeStructure};

    fn tree() -> CausalTree {
        let s = TreeStructure::from_parents(&[None, Some(0), Some(0), Some(1), Some(1), Some(2)])
            .unwrap();
        let links = s
            .edges()
            .map(|(_, z)| (z, LinkParams::new(0.9 - 0.1 * z.0 as f64, 0.05 * z.0 as f64)))
            .collect();
        CausalTree::new(s, 0.35, links).unwrap()
    }

    #[test]
    fn degenerate_distributions() {
        let s = TreeStructure::from_parents(&[None, Some(0), Some(0), Some(1)]).unwrap();
        let ones = CausalTree::uniform(s.clone(), 1.0, LinkParams::new(1.0, 0.5));
        let zeros = CausalTree::uniform(s, 0.0, LinkParams::new(0.5, 0.0));
        for seed in 0..20 {
            let mut rng = SampleRng::new(seed);
            assert!(draw_full(&ones, &mut rng).values().iter().all(|&v| v));
            assert!(draw_full(&zeros, &mut rng).values().iter().all(|&v| !v));
        }
    }

    #[test]
    fn leaf_draw_is_projection_of_full_draw() {
        let t = tree();
        let mut a = SampleRng::new(7);
        let mut b = SampleRng::new(7);
        for _ in 0..500 {
            let full = draw_full(&t, &mut a);
            assert_eq!(full.project(t.structure()), draw_leaf(&t, &mut b));
        }
    }

    #[test]
    fn single_node_sample_is_root_value() {
        let t = CausalTree::new(TreeStructure::star(0), 0.5, Default::default()).unwrap();
        let mut a = SampleRng::new(3);
        let mut b = SampleRng::new(3);
        for _ in 0..50 {
            let full = draw_full(&t, &mut a);
            assert_eq!(draw_leaf(&t, &mut b).values(), &[full.get(NodeId(0))]);
        }
    }

    #[test]
    fn equal_seeds_give_equal_streams() {
        let t = tree();
        let mut a = SampleRng::new(99);
        let mut b = SampleRng::new(99);
        for _ in 0..10_000 {
            assert_eq!(draw_full(&t, &mut a), draw_full(&t, &mut b));
        }
        let mut c = SampleRng::new(100);
        let differs = (0..100).any(|_| draw_full(&t, &mut a) != draw_full(&t, &mut c));
        assert!(differs);
    }

    #[test]
    fn marginal_frequencies_match_exact_marginals() {
        let t = tree();
        let n = 100_000;
        let mut rng = SampleRng::new(2024);
        let mut counts = vec![0usize; t.structure().node_count()];
        for _ in 0..n {
            for (c, &v) in counts.iter_mut().zip(draw_full(&t, &mut rng).values()) {
                *c += usize::from(v);
            }
        }
        for (c, p) in counts.iter().zip(exact_marginals(&t)) {
            let freq = *c as f64 / n as f64;
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() <= 4.0 * sd, "freq {freq} vs {p}");
        }
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut rng = SampleRng::new(0);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
